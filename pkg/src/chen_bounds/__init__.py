"""Pointwise curvature invariants and Chen-type inequality checks for
C-totally real submanifolds of generalized (kappa, mu)-space forms."""

from ._kernels import BACKEND
from .ambient import (
    AmbientPoint,
    FCoefficients,
    ambient_curvature,
    classify_sasakian,
    curvature_component,
    kappa_mu_coefficients,
    non_sasakian_divided_coefficients,
    validate_ambient,
)
from .errors import ChenBoundsError, ValidationFailed
from .forge import (
    GeneratorSpec,
    make_ambient,
    make_equality_basic,
    make_equality_delta,
    make_instance,
    make_random_submanifold,
    make_totally_geodesic,
    make_totally_umbilical,
    oracle_invariants,
)
from .inequalities import (
    InequalityReport,
    check_chen_fundamental,
    check_delta_tuple,
    check_mean_vs_scalar,
    check_ricci_bound,
    check_sasakian_suite,
    check_scalar_identity,
    check_theta_bound,
    chen_lemma_batch,
    chen_lemma_check,
    detect_equality_form_basic,
    detect_equality_form_delta,
)
from .invariants import (
    SearchBudget,
    TupleSpec,
    chen_first_invariant,
    constants_c_b,
    delta_invariant,
    enumerate_tuples,
    inf_sectional,
    k_ricci,
    ricci_tensor,
    scalar_curvature,
    sectional_curvature,
    theta_k,
    tilde_delta,
)
from .linalg import Subspace
from .submanifold import SubmanifoldPoint, build_submanifold, mean_curvature, relative_null_space

__version__ = "0.1.0"
