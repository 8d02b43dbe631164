import logging
import sys

from .algnum import AlgNum, quadratic_roots
from .class_graph import (
    BrandtMatrix,
    ClassRecord,
    ClassSet,
    EigenFns,
    brandt,
    brandt_report,
    brandt_series,
    build_class_set,
    class_number,
    default_class_set,
    eichler_trace,
    eigen_report,
    eigenfunctions,
    ideals_equivalent,
    two_neighbours,
)
from .constants import (
    ConstantsTable,
    P,
    constants_table,
    kappa_identity,
    rallis_constant_check,
    v_infinity,
    variance_target,
)
from .cyclotomic import CycInt
from .exceptions import (
    CheckFailed,
    ConvergenceError,
    QuatVarException,
    StabilizationError,
    UnsupportedConfiguration,
    UserError,
)
from .finite_fourier import (
    FiniteMatFn,
    SchwartzB2,
    TraceZeroSchwartz,
    conjugation_sum,
    ft_m2,
    ft_trace_zero,
    local_integral_correlations,
    local_integral_unramified,
    local_integrals_report,
    local_l_factor,
    macdonald_xi,
    phi0_scaled,
    phi_hat,
    phi_prime,
    schwartz_ip,
    verify_ugly_lemma,
)
from .quat_core import (
    QLattice,
    Quaternion,
    TwoAdicSplitting,
    maximal_order,
    multiply,
    short_vectors,
    theta_counts,
    two_adic_split,
)
from .report import CaseTally, CheckReport
from .run_config import RunConfig
from .theta_q import (
    CoeffSeries,
    MuMeasure,
    VarianceSeries,
    arith_variance,
    arith_variance_report,
    jacobi_coeffs,
    mu_measure,
    seesaw_check,
    shimura_t9_check,
)
from .tree_fix import (
    CharFrame,
    TorsionAction,
    build_char_frame,
    chi,
    eta,
    fix_count,
    fix_sharp,
    fix_table,
    mean_statistics,
    verify_closed_form_samples,
    verify_local_pushforward,
    verify_triples_agree,
)


def enable_verbose_stdout_logging() -> None:
    """Enables verbose logging to stdout. This is useful for debugging."""
    logger = logging.getLogger("quatvar")
    logger.setLevel(logging.DEBUG)
    logger.addHandler(logging.StreamHandler(sys.stdout))


__all__ = [
    "AlgNum",
    "BrandtMatrix",
    "CaseTally",
    "CharFrame",
    "CheckFailed",
    "CheckReport",
    "ClassRecord",
    "ClassSet",
    "CoeffSeries",
    "ConstantsTable",
    "ConvergenceError",
    "CycInt",
    "EigenFns",
    "FiniteMatFn",
    "MuMeasure",
    "P",
    "QLattice",
    "QuatVarException",
    "Quaternion",
    "RunConfig",
    "SchwartzB2",
    "StabilizationError",
    "TorsionAction",
    "TraceZeroSchwartz",
    "TwoAdicSplitting",
    "UnsupportedConfiguration",
    "UserError",
    "VarianceSeries",
    "arith_variance",
    "arith_variance_report",
    "brandt",
    "brandt_report",
    "brandt_series",
    "build_char_frame",
    "build_class_set",
    "chi",
    "class_number",
    "conjugation_sum",
    "constants_table",
    "default_class_set",
    "eichler_trace",
    "eigen_report",
    "eigenfunctions",
    "enable_verbose_stdout_logging",
    "eta",
    "fix_count",
    "fix_sharp",
    "fix_table",
    "ft_m2",
    "ft_trace_zero",
    "ideals_equivalent",
    "jacobi_coeffs",
    "kappa_identity",
    "local_integral_correlations",
    "local_integral_unramified",
    "local_integrals_report",
    "local_l_factor",
    "macdonald_xi",
    "maximal_order",
    "mean_statistics",
    "mu_measure",
    "multiply",
    "phi0_scaled",
    "phi_hat",
    "phi_prime",
    "quadratic_roots",
    "rallis_constant_check",
    "schwartz_ip",
    "seesaw_check",
    "shimura_t9_check",
    "short_vectors",
    "theta_counts",
    "two_adic_split",
    "two_neighbours",
    "v_infinity",
    "variance_target",
    "verify_closed_form_samples",
    "verify_local_pushforward",
    "verify_triples_agree",
    "verify_ugly_lemma",
]
