"""Sum-of-squares certificates by minimizing a rational dual barrier.

Given data ``y`` at interpolation nodes, the package looks for multipliers
``lam`` minimizing ``G(lam) = tr(M(lam)^-1) + <lam, y>`` with
``M(lam) = I + sum_r lam_r B_r``; the diagonal blocks of ``M(lam)^-1`` at the
minimizer are the coefficients of a weighted sum of squares interpolating
the data.
"""

from .basis import (
    CHEBYSHEV_1D,
    MONOMIAL_1D,
    MONOMIAL_2D,
    BasisFamily,
    BasisSpec,
    Domain,
    LagrangeBasis,
    NodeScheme,
    PointSet,
    barycentric,
    eval_basis,
    eval_poly,
    lagrange_vector,
    make_points_segment,
    make_points_triangle,
)
from .core import (
    Certificate,
    SosProblem,
    Weight,
    assemble_B,
    assemble_problem,
    eval_G,
    eval_G_V,
    eval_p_B,
    eval_p_lambda,
    evaluate,
    extract_certificate,
    get_weight,
    grad_G,
    hess_G,
    in_asymptotic_cone,
    in_domain,
    M_of_lambda,
)
from .errors import (
    InsufficientMargin,
    InvalidInput,
    NotUnisolvent,
    OutOfDomain,
    SolveError,
    SosError,
    UnknownPreset,
    WeightDegreeMismatch,
)
from .problems import (
    PRESET_NAMES,
    TargetSpec,
    build_preset,
    build_problem,
    build_segment_problem,
    build_triangle_problem,
    build_triangle_problem_unweighted,
    get_preset,
    named_presets,
    regularize_epsilon,
)
from .solvers import IterationTrace, Method, SolverConfig, Status, solve

__version__ = "0.1.0"
