"""Numerical laboratory for ``L u = |x|^gamma H(u) G(grad u)`` with stable-like nonlocal operators."""

from .barriers import (
    BarrierSpec,
    MarginTable,
    NotFound,
    amplitude_search,
    barrier_eval,
    decay_bound_audit,
    exponent_audit,
    inequality_scan,
)
from .functions import ClosedForm, LineFunction, RadialFunction, TailModel
from .kernels import KernelSpec, QuadratureOptions, kernel_density, normalization_constant
from .operator import (
    EvalResult,
    cutoff_scan,
    evaluate_L,
    evaluate_L_radial,
    maximum_principle_probe,
    power_constant,
)
from .problem import (
    GSpec,
    HSpec,
    PowerSolution,
    ProblemSpec,
    RegimeReport,
    build_power_solution,
    classify_regime,
    eval_G,
    eval_H,
    eval_rhs,
    residual_scan,
)
from .qualitative import (
    bernstein_scan,
    decay_fit,
    linearization_coeffs,
    liouville_trend,
    moving_plane_gap,
    narrow_region_probe,
    uniqueness_probe,
)
from .solver import (
    DiscreteOperator,
    ExteriorData,
    GridSpec,
    IterationOptions,
    SolveReport,
    assemble_operator,
    build_grid,
    exhaust,
    gradient_on_grid,
    linear_solve,
    monotone_iterate,
)

__version__ = "0.1.0"
