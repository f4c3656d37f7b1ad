"""
Non-commutative mixed norms on bipartite matrix spaces.

Two norms are computed on ``M_n (x) M_m``: the Carlen-Lieb norm, built from
the functional ``psi_{p,q}``, and the operator-space NC norm. Closed forms
cover equal exponents, diagonal and product matrices, and a family on
which the two norms separate.
"""

from .cl import CLResult, cl_lower_p2, cl_norm, cl_norm_general, cl_norm_hermitian, theorem1_constant
from .core import (
    NormEstimate,
    NormOrder,
    OptimizerConfig,
    conjugate_exponent,
    make_order,
    psi,
    psi_gradient,
    triple_bar_norm,
)
from .errors import (
    DimensionError,
    DomainError,
    InvalidExponentError,
    NCNormError,
    ProjectionError,
    RegimeError,
    SingularityError,
    SolverFailure,
)
from .linalg import BipartiteOperator, random_instances, schatten_norm
from .nc import (
    Decomposition,
    nc_bracket_qlep,
    nc_norm,
    nc_norm_diagonal,
    nc_norm_general_lower,
    nc_norm_lower_qlep,
    nc_norm_psd,
    nc_norm_upper_qlep,
    nc_objective,
)

__version__ = "0.1.0"

__all__ = [
    "BipartiteOperator",
    "CLResult",
    "Decomposition",
    "DimensionError",
    "DomainError",
    "InvalidExponentError",
    "NCNormError",
    "NormEstimate",
    "NormOrder",
    "OptimizerConfig",
    "ProjectionError",
    "RegimeError",
    "SingularityError",
    "SolverFailure",
    "cl_lower_p2",
    "cl_norm",
    "cl_norm_general",
    "cl_norm_hermitian",
    "conjugate_exponent",
    "make_order",
    "nc_bracket_qlep",
    "nc_norm",
    "nc_norm_diagonal",
    "nc_norm_general_lower",
    "nc_norm_lower_qlep",
    "nc_norm_psd",
    "nc_norm_upper_qlep",
    "nc_objective",
    "psi",
    "psi_gradient",
    "random_instances",
    "schatten_norm",
    "theorem1_constant",
    "triple_bar_norm",
]
