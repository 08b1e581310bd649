"""Multi-criteria adjustable robust optimization toolkit.

Worst-case Pareto fronts under parametric uncertainty with adaptive scenario
selection, price-of-robustness quantification, and slider-based navigation.
"""

from .adaptive import (
    RefinementTrace,
    WcScenarioSet,
    find_constraint_wc,
    find_objective_wc,
    solve_adaptive_front,
    solve_adaptive_point,
)
from .discretize import (
    ReferenceDiscretization,
    Scenario,
    generate,
    generate_box,
    generate_ellipsoid,
)
from .front import (
    FrontApproximation,
    dominance_check,
    extreme_compromises,
    sandwich,
    solve_front_schedule,
)
from .model import (
    EvaluationHandle,
    Geometry,
    ProblemSpec,
    Role,
    UncertainParamSpec,
    UncertaintySet,
    VariableSpec,
    evaluate,
    gradient,
)
from .navigate import NavigationSession, move_slider, open_session, set_restriction
from .price import NsrResult, PriceReport, intersect_nominal_front, price, solve_nsr
from .problems import build_column_surrogate, build_sp1, build_sp2
from .robust import (
    ParetoPoint,
    ReplicatedSolution,
    ScalarizationSpec,
    SolveMode,
    build_replicated,
    solve_point,
)

__version__ = "0.1.0"
