"""One-sided (non-negative) differentially private noise mechanisms.

Closed-form parameter solvers for truncated Laplace, double geometric and
negative binomial noise, a brute-force (epsilon, delta) verification
oracle, deterministic samplers, and two applications: collision padding
for PSI cardinalities and DP dummy-user padding for leaked event-count
histograms.
"""

from ._backend import BACKEND_NAME
from .mechanisms import (
    BINOMIAL,
    DISCRETE_UNIFORM,
    DOUBLE_GEOMETRIC,
    FAMILIES,
    NEG_BINOMIAL,
    OVERVALUED,
    TRUNC_LAPLACE,
    UNDERVALUED,
    BinomialParams,
    DiscreteUniformParams,
    DoubleGeometricParams,
    HeuristicAccounting,
    MechanismSpec,
    Moments,
    NegBinParams,
    ParameterError,
    PrivacyBudget,
    TruncLaplaceParams,
    UnsatisfiableBudgetError,
    binomial_spec,
    double_geometric_pmf,
    heuristic_accounting,
    mechanism_moments,
    negbin_pmf,
    poisson_divergence_diagnostic,
    poisson_shift_ratio,
    solve_double_geometric,
    solve_negbin,
    solve_spec,
    solve_trunc_laplace,
    spec_from_dict,
    spec_to_dict,
    support_table,
    trunc_laplace_pdf,
    uniform_spec,
)
from .sampler import RngStream, sample, sample_batch
from .verifier import (
    DiscretePmf,
    PrivacyVerdict,
    brute_force_delta,
    certify,
    discretize_continuous,
    privacy_curve,
    shift_cells,
    tabulate_spec,
)

__version__ = "0.1.0"
