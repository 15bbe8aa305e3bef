"""Shell sums around the deep hole of the square lattice.

Evaluation of the distance functionals, their closed-form derivatives at
Z^2, and numerical certification that perturbing Z^2 increases the total
distance from every shell to the deep hole.
"""

from ._backend import BACKEND
from .functional import (
    PHI_CATALOG,
    ConvexFn,
    DistanceKind,
    SingularEvaluation,
    SymMatrix2,
    det_hessian_linear,
    eig_sym2,
    f_convex,
    f_linear,
    f_squared,
    gap_lower_bound,
    grad_f_linear_analytic,
    grad_f_squared_analytic,
    hessian_linear_at_origin,
    hessian_squared_at_origin,
    parse_kind,
)
from .lattice import (
    SQUARE,
    IndexPair,
    InvalidChartPoint,
    LatticeParams,
    Shell,
    Vec2,
    basis,
    deep_hole,
    enumerate_shells,
    hexagonal_basis,
    lattice_distance,
    point,
    quadruple_indices,
    rotate_about_p,
    shell,
)
from .verify import (
    CertReport,
    FdConfig,
    PerturbationSample,
    SpectrumReport,
    certify_inequality,
    check_critical_point,
    fd_gradient,
    fd_hessian,
    min_eig_over_integers,
    quadratic_scaling_probe,
    sample_perturbations,
)

__version__ = "0.1.0"
