import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from maropt import discretize, pipeline, problems

SEED = 42


@pytest.fixture(scope="session")
def sp1():
    return problems.build_sp1()


@pytest.fixture(scope="session")
def sp2():
    return problems.build_sp2()


@pytest.fixture(scope="session")
def column():
    return problems.build_column_surrogate()


@pytest.fixture(scope="session")
def sp1_ref(sp1):
    return discretize.generate(sp1.uncertainty)


@pytest.fixture(scope="session")
def sp2_ref(sp2):
    return discretize.generate(sp2.uncertainty)


@pytest.fixture(scope="session")
def column_ref(column):
    return discretize.generate(column.uncertainty)


@pytest.fixture(scope="session")
def sp1_bundle(sp1, sp1_ref):
    """Full SP1 pipeline: fronts, re-optimizations, prices, scenario fronts."""
    return pipeline.build_price_bundle(
        sp1, sp1_ref, n_points=8, with_mro=True, with_scenario_fronts=True,
        seed=SEED,
    )


@pytest.fixture(scope="session")
def sp1_adaptive_run(sp1, sp1_ref):
    return pipeline.robust_front(
        sp1, sp1_ref, adaptive_scenarios=True, n_points=8, seed=SEED
    )


@pytest.fixture(scope="session")
def sp1_all_scenario(sp1, sp1_ref, sp1_adaptive_run):
    """All-scenario worst-case front, warm-coupled to the adaptive run so the
    lexicographic endpoints (which sit on a vertical stretch of this front
    and are therefore ambiguous within the lexicographic slack) resolve the
    same way in both runs."""
    return pipeline.robust_front(
        sp1, sp1_ref, adaptive_scenarios=False, n_points=8, seed=SEED,
        foreign_warms=sp1_adaptive_run.points_by_weights,
    )


@pytest.fixture(scope="session")
def sp2_adaptive(sp2, sp2_ref):
    return pipeline.robust_front(
        sp2, sp2_ref, adaptive_scenarios=True, n_points=8, seed=SEED
    )


@pytest.fixture(scope="session")
def sp2_all_scenario(sp2, sp2_ref):
    return pipeline.robust_front(
        sp2, sp2_ref, adaptive_scenarios=False, n_points=8, seed=SEED
    )


@pytest.fixture(scope="session")
def column_bundle(column, column_ref):
    """Column surrogate pipeline with the non-adjustable front included."""
    return pipeline.build_price_bundle(
        column, column_ref, n_points=5, with_mro=True, seed=SEED
    )


@pytest.fixture(scope="session")
def sp1_artifact(sp1, sp1_ref, sp1_bundle):
    from maropt import io as mio

    return mio.make_artifact(
        sp1, {"builtin": "sp1"}, sp1_ref, sp1_bundle, seed=SEED, timestamp=""
    )
