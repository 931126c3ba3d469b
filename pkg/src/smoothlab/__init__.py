"""smoothlab: smooth numbers, the Dickman function and harmonic sampling."""

from .dickman import (
    DickmanTable, build_dickman, dickman_cdf, dickman_density, dickman_quantile, load_table,
    quantile_many, rho, rho_integral, save_table,
)
from .errors import InfeasibleExactError, OutOfRangeError, SmoothlabError, SolverError, UsageError
from .primes import (
    EULER_GAMMA, PrimeTable, build_prime_table, euler_product, expected_z, harmonic, lam,
    mertens_report, mertens_sweep, next_prime, recip_sum,
)
from .sampling import (
    Ecdf, MultiplicityVector, RandomSource, dkw_band, kolmogorov_distance, sample_dickman,
    sample_geometric, sample_harmonic_direct, sample_harmonic_rejection, sample_s_m,
    tv_uniform_vs_hq,
)
from .scans import ScanConfig, ScanRecord, ScanReport, scan_debruijn, scan_kolmogorov, scan_main_theorem
from .smooth import (
    LpfSieve, SmoothQuery, build_lpf_sieve, harmonic_smooth_sum, psi_count, psi_h,
    psi_h_prob_approx, psi_h_prob_exact, s_m_cdf_exact,
)
from .stein import (
    SteinF1, VmDistribution, bias_transform_residual, coupling_gap, f1z_eval, make_f1,
    size_bias_check, vm_distribution, vm_quantile,
)
from .verify import run_all

__version__ = "0.1.0"
