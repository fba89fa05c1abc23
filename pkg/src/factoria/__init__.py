"""factoria: ordered factorizations over configurable factor sets.

Exact counting (sieve, layered, floor-lattice), exact uniform sampling by
sequential decoding, high-precision Dirichlet-series constants, and
finite-N diagnostics of the normal limit law of the factor count.
"""

__version__ = "0.1.0"

from .analysis import (
    DistributionSummary,
    MomentReport,
    drift_report,
    mgf_ratio,
    moment_report,
    summarize_distribution,
    tauberian_ratio,
    uniform_case_check,
)
from .counter import (
    Centering,
    CenteredSums,
    FloorLattice,
    LayeredCounts,
    WidthPolicy,
    brute_force_count,
    brute_force_enumerate,
    centered_sums,
    count_a,
    count_layers,
    floor_lattice,
    load_counts_cache,
    save_counts_cache,
)
from .dirichlet import (
    PrecisionContext,
    SeriesValue,
    eval_P,
    eval_P_derivs,
    mobius,
    prime_zeta,
    zeta,
)
from .errors import (
    CountOverflowError,
    DomainError,
    FactoriaError,
    NoRootError,
    PrecisionUnattainableError,
    ResourceCapError,
    UsageError,
)
from .factorset import (
    Applicability,
    FactorSetSpec,
    Family,
    Reason,
    detect_periodicity,
    enumerate_members,
    kappa,
    parse_spec_string,
    weight,
)
from .sampler import (
    FactorizationSampler,
    GofReport,
    SampleRecord,
    chi_square_gof,
    decode_probability,
    empirical_distribution,
    sample_factorization,
)
from .spectral import (
    DelangeQuery,
    SpectralConstants,
    absolute_moment_prediction,
    delange_prediction,
    gaussian_moment,
    mgf_prediction,
    pole_coefficient_ck,
    shifted_rho,
    solve_rho,
    spectral_constants,
)

__all__ = [name for name in dir() if not name.startswith("_")]
