"""Cosine families, square-root halving and zero-two laws on complex matrix algebras."""

from coslaw.cosine_families import (
    MatrixCosineFamily,
    ScalarCosineFamily,
    dalembert_residual,
    eval_matrix_series_doubling,
    eval_matrix_spectral,
    eval_scalar,
)
from coslaw.discrete_semigroups import (
    DiscreteCosineSequence,
    PowerSemigroup,
    cesaro_wallen,
    discrete_eval,
    discrete_law_check,
    matrix_exp_semigroup_check,
    semigroup_eval,
    semigroup_law_check,
)
from coslaw.errors import (
    ConfigError,
    CoslawError,
    DomainError,
    InvalidMatrix,
    NoConvergence,
    NotNormal,
    OutsideDisk,
    Overflowed,
)
from coslaw.laws import (
    DichotomyClass,
    LawVerdict,
    ScanConfig,
    TailEstimate,
    classify_scalar_dichotomy,
    contraction_S_iteration,
    gelfand_check,
    law_check_limsup_infinity,
    scaled_gap_witness,
    windowed_sup_scan,
)
from coslaw.linalg_core import (
    EigenDecomposition,
    as_matrix,
    eig_normal,
    operator_norm,
    spectral_radius,
)
from coslaw.sqrt_halving import (
    BinomialCoefficients,
    SeriesResult,
    binom_sqrt_coeffs,
    dyadic_reconstruct,
    halve,
    sqrt_one_minus,
    verify_sqrt_bound,
)

__version__ = "0.1.0"
