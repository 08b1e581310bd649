"""Exception types shared across the toolkit."""


class MaroptError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(MaroptError):
    """A vector does not have the dimension declared by the problem."""


class NonFiniteEvaluation(MaroptError):
    """The model returned NaN or Inf; callers treat the point as infeasible."""


class DimensionTooLarge(MaroptError):
    """The requested discretization would exceed the scenario cap."""


class EmptyScenarioSet(MaroptError):
    """A replicated problem needs at least one scenario."""


class InfeasibleModel(MaroptError):
    """No scenario-feasible point was found by the replicated solve."""

    def __init__(self, message, constraint=None, scenario_id=None, violation=None):
        super().__init__(message)
        self.constraint = constraint
        self.scenario_id = scenario_id
        self.violation = violation
        self.wc_set = None  # scenario set accumulated before the failure


class NsrInfeasible(MaroptError):
    """The nominal re-optimization found no feasible adjustment.

    Should be impossible for a robust-feasible first-stage point; raised
    loudly because it indicates a solver failure upstream.
    """


class DisjointRanges(MaroptError):
    """Two fronts share no overlap in the first objective."""


class MissingNsr(MaroptError):
    """A navigation session needs a re-optimized value for every front point."""


class InfeasibleRestrictions(MaroptError):
    """The requested objective bounds exclude the entire front."""


class SchemaError(MaroptError):
    """A problem/artifact file failed validation."""
