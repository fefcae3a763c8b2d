"""Minimal-norm extremal kernels with respect to jet functionals.

Computes p-th power integral kernels on model domains in several complex
variables: diagonal and off-diagonal values, higher-order variants driven
by a homogeneous derivative pairing, and potential-sublevel sweeps, plus a
verification battery tying the numerics to closed forms.
"""

from .algebra import (
    AlgebraError,
    Functional,
    MultiIndex,
    PolyCoeffs,
    enumerate_upto_degree,
    functional_apply,
    prec_compare,
    taylor_shift,
)
from .domains import (
    Domain,
    Quadrature,
    UnsupportedShapeError,
    boundary_distance,
    build_quadrature,
    contains,
    domain_from_spec,
    load_cloud_csv,
    product_domain,
    scale_domain,
)
from .green import (
    GreenModel,
    LimitChainResult,
    SweepRow,
    SweepTable,
    azukawa_indicatrix,
    default_a_grid,
    limit_chain_check,
    sublevel_domain,
    sweep,
)
from .higher import (
    FunctionalFamily,
    HigherInfResult,
    HomogeneousPolynomial,
    apply_homogeneous,
    higher_kernel_direct,
    higher_kernel_via_inf,
    jet_constrained_kernel,
    minimizing_xi_p2,
)
from .kernels import (
    BoundsResult,
    HQuantity,
    KernelError,
    KernelEvaluation,
    OffDiagonalKernel,
    ZeroPairingError,
    ball_monomial_lp_integral,
    bounds_check,
    diagonal,
    evaluate_batch,
    evaluation_to_dict,
    evaluations_to_csv,
    extremal_pairing,
    h_quantity,
    kernel2_diagonal,
    kernelp_diagonal,
    off_diagonal,
    reproducing_residual,
)
from .lpsolve import LpOptions, LpSolution, SolverError, solve_affine_lp
from .pspace import (
    DegreeOverflowError,
    OrthonormalBasis,
    PolySpace,
    RankLossError,
    gram_matrix,
    lp_norm,
    orthonormal_basis,
    sup_bound_constant,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AlgebraError",
    "apply_homogeneous",
    "azukawa_indicatrix",
    "ball_monomial_lp_integral",
    "boundary_distance",
    "bounds_check",
    "BoundsResult",
    "build_quadrature",
    "contains",
    "default_a_grid",
    "DegreeOverflowError",
    "diagonal",
    "Domain",
    "domain_from_spec",
    "enumerate_upto_degree",
    "evaluate_batch",
    "evaluation_to_dict",
    "evaluations_to_csv",
    "extremal_pairing",
    "Functional",
    "functional_apply",
    "FunctionalFamily",
    "gram_matrix",
    "GreenModel",
    "h_quantity",
    "higher_kernel_direct",
    "higher_kernel_via_inf",
    "HigherInfResult",
    "HomogeneousPolynomial",
    "HQuantity",
    "jet_constrained_kernel",
    "kernel2_diagonal",
    "KernelError",
    "KernelEvaluation",
    "kernelp_diagonal",
    "limit_chain_check",
    "LimitChainResult",
    "load_cloud_csv",
    "lp_norm",
    "LpOptions",
    "LpSolution",
    "minimizing_xi_p2",
    "MultiIndex",
    "off_diagonal",
    "OffDiagonalKernel",
    "orthonormal_basis",
    "OrthonormalBasis",
    "PolyCoeffs",
    "PolySpace",
    "prec_compare",
    "product_domain",
    "Quadrature",
    "RankLossError",
    "reproducing_residual",
    "scale_domain",
    "solve_affine_lp",
    "SolverError",
    "sublevel_domain",
    "sup_bound_constant",
    "sweep",
    "SweepRow",
    "SweepTable",
    "taylor_shift",
    "UnsupportedShapeError",
    "ZeroPairingError",
]
