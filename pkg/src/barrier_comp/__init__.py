"""Smooth control barrier functions for Boolean compositions of constraints."""

from .compose import (
    BarrierEval,
    CompositionParams,
    ErrorBoundReport,
    error_bounds,
    smooth_eval,
    smooth_eval_batch,
    smooth_max,
    smooth_min,
)
from .dynamics import Dynamics, LieDerivatives, SingleIntegrator, lie_derivatives
from .errors import (
    BarrierCompError,
    DimensionMismatch,
    EmptyChildren,
    Infeasible,
    MaxIterations,
    NonFiniteState,
    NonFiniteValue,
    NonpositiveRadius,
    ParseError,
    SpecError,
    ZeroNormal,
)
from .oracle import OracleEval, membership_grid, nonsmooth_eval
from .safety_filter import (
    CustomKInfty,
    FeasibilityReport,
    FilterResult,
    Linear,
    feasibility_check,
    filter_explicit,
    filter_qp_multi,
    validity_scan,
)
from .scenario import Scenario, load_builtin, parse_scenario, write_scenario
from .sim import (
    Constant,
    SaturatedProportional,
    Trajectory,
    first_entry,
    kappa_sweep,
    max_input_jump,
    min_turn_radius,
    simulate,
)
from .spec import (
    Affine,
    Circle,
    Custom,
    CustomMonotone,
    HalfSpace,
    Identity,
    Intersection,
    LayeredSpec,
    Leaf,
    Level,
    Tanh,
    Union,
    intersection,
    layerize,
    leaf_eval,
    union,
    validate,
)

__version__ = "0.1.0"
