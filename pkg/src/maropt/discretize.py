"""Reference discretizations of the uncertainty set.

The continuous uncertainty set is replaced by a finite scenario list that
always contains the nominal scenario.  Box sets use the full three-level
tensor grid (min/mid/max per axis); ellipsoid sets use axis and space-diagonal
piercing points on the boundary.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLarge
from .model import Geometry, UncertaintySet

DEFAULT_SCENARIO_CAP = 10_000


@dataclass(frozen=True)
class Scenario:
    """One point of the reference discretization."""

    id: int
    values: tuple[float, ...]
    is_nominal: bool = False
    label: str = ""

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class ReferenceDiscretization:
    """Ordered, immutable scenario list with exactly one nominal scenario."""

    scenarios: tuple[Scenario, ...]
    geometry: Geometry

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        nominal_count = sum(1 for s in self.scenarios if s.is_nominal)
        if nominal_count != 1:
            raise ValueError(f"expected exactly one nominal scenario, got {nominal_count}")
        seen = set()
        for s in self.scenarios:
            if s.values in seen:
                raise ValueError(f"duplicate scenario values {s.values}")
            seen.add(s.values)

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    @property
    def contains_nominal(self) -> bool:
        return True

    @property
    def nominal(self) -> Scenario:
        return next(s for s in self.scenarios if s.is_nominal)

    def by_id(self, scenario_id: int) -> Scenario:
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        raise KeyError(f"no scenario with id {scenario_id}")

    def subset(self, ids) -> tuple[Scenario, ...]:
        """Scenarios for the given ids, sorted by id."""
        wanted = set(ids)
        return tuple(s for s in self.scenarios if s.id in wanted)

    def values_matrix(self) -> np.ndarray:
        return np.array([s.values for s in self.scenarios])

    def to_json(self) -> dict:
        return {
            "geometry": self.geometry.value,
            "scenarios": [
                {
                    "id": s.id,
                    "values": list(s.values),
                    "is_nominal": s.is_nominal,
                    "label": s.label,
                }
                for s in self.scenarios
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ReferenceDiscretization":
        return cls(
            scenarios=tuple(
                Scenario(
                    id=s["id"],
                    values=tuple(float(v) for v in s["values"]),
                    is_nominal=bool(s["is_nominal"]),
                    label=s.get("label", ""),
                )
                for s in data["scenarios"]
            ),
            geometry=Geometry(data["geometry"]),
        )


def _with_nominal(points: list[tuple[tuple[float, ...], str]], nominal: tuple[float, ...]):
    """Attach ids and the nominal flag; append the nominal scenario only if
    its vector is not already present (exact equality)."""
    scenarios = []
    found_nominal = False
    for i, (values, label) in enumerate(points):
        is_nom = values == nominal
        found_nominal = found_nominal or is_nom
        scenarios.append(Scenario(id=i, values=values, is_nominal=is_nom, label=label))
    if not found_nominal:
        scenarios.append(
            Scenario(id=len(points), values=nominal, is_nominal=True, label="nominal")
        )
    return tuple(scenarios)


def generate_box(
    uncertainty: UncertaintySet,
    levels: str = "vertices_and_mids",
    cap: int = DEFAULT_SCENARIO_CAP,
) -> ReferenceDiscretization:
    """Tensor grid over {lower, mid, upper} per axis, nominal appended if new.

    Ordering is lexicographic over the per-axis levels (last axis fastest),
    so regeneration is reproducible and ids are stable.
    """
    if uncertainty.geometry is not Geometry.BOX:
        raise ValueError("generate_box requires box geometry")
    if levels != "vertices_and_mids":
        raise ValueError(f"unknown level rule {levels!r}")
    d = uncertainty.dim
    if 3**d + 1 > cap:
        raise DimensionTooLarge(f"3^{d} + 1 scenarios exceed the cap of {cap}")
    axis_levels = []
    for p in uncertainty.params:
        axis_levels.append((p.lower, (p.lower + p.upper) / 2.0, p.upper))
    level_names = ("lo", "mid", "hi")
    points = []
    for combo in itertools.product(range(3), repeat=d):
        values = tuple(axis_levels[axis][lvl] for axis, lvl in enumerate(combo))
        label = "grid:" + "-".join(level_names[lvl] for lvl in combo)
        points.append((values, label))
    nominal = tuple(p.nominal for p in uncertainty.params)
    return ReferenceDiscretization(
        scenarios=_with_nominal(points, nominal), geometry=Geometry.BOX
    )


def generate_ellipsoid(
    uncertainty: UncertaintySet, cap: int = DEFAULT_SCENARIO_CAP
) -> ReferenceDiscretization:
    """Axis piercing points ``c +- r_i e_i`` plus one boundary point per sign
    pattern along the scaled space diagonals, nominal appended if new."""
    if uncertainty.geometry is not Geometry.ELLIPSOID:
        raise ValueError("generate_ellipsoid requires ellipsoid geometry")
    d = uncertainty.dim
    if 2 * d + 2**d + 1 > cap:
        raise DimensionTooLarge(f"2*{d} + 2^{d} + 1 scenarios exceed the cap of {cap}")
    center = np.array(uncertainty.ellipsoid_center)
    radii = np.array(uncertainty.ellipsoid_radii)
    points = []
    for i in range(d):
        for sign, tag in ((-1.0, "-"), (1.0, "+")):
            v = center.copy()
            v[i] += sign * radii[i]
            points.append((tuple(v), f"axis:{tag}{i}"))
    for signs in itertools.product((-1.0, 1.0), repeat=d):
        s = np.array(signs)
        v = center + radii * s / np.linalg.norm(s)
        label = "diag:" + "".join("+" if si > 0 else "-" for si in signs)
        points.append((tuple(v), label))
    nominal = tuple(p.nominal for p in uncertainty.params)
    return ReferenceDiscretization(
        scenarios=_with_nominal(points, nominal), geometry=Geometry.ELLIPSOID
    )


def generate(
    uncertainty: UncertaintySet, cap: int = DEFAULT_SCENARIO_CAP
) -> ReferenceDiscretization:
    """Dispatch on the uncertainty-set geometry."""
    if uncertainty.geometry is Geometry.BOX:
        return generate_box(uncertainty, cap=cap)
    return generate_ellipsoid(uncertainty, cap=cap)
