"""Leakage capacities, contraction coefficients and optimal mechanisms under (epsilon, c)-PML."""

from .bounds import (
    BoundReport,
    asoodeh_eta_kl_bound,
    binette_bound,
    bound_report,
    duchi_kl_bound,
    gamma_bounds,
    hellinger_bound,
    kairouz_eta_bound,
    kl_bound,
    minimax_lower_bound,
    regime_threshold,
    sample_complexity,
    xi,
)
from .contraction import (
    ContractionEstimate,
    SearchConfig,
    binarize,
    brute_force_eta_tv,
    dobrushin,
    empirical_eta_f,
    eta_chi2,
    is_decomposable,
    maximal_correlation_sq,
)
from .core import (
    INFINITE,
    CredalSet,
    Distribution,
    PrivacyBudget,
    StochasticKernel,
    in_credal_set,
    is_infinite,
    push_forward,
    validate_kernel,
)
from .divergences import DivergenceSpec, chi_sq, f_div, hellinger_sq, kl, tv
from .leakage import (
    LeakageReport,
    ldp,
    leakage_capacity,
    max_zeros_per_column,
    pml_pointwise,
    satisfies_pml,
    subset_disclosure_floor,
)
from .mechanisms import (
    BinaryMechanismSpec,
    binary_optimal,
    construct_optimal,
    feasibility,
    reference_kernels,
    sample_kernel,
    saturating_mechanism,
)

__version__ = "0.1.0"
