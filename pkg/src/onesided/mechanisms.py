"""One-sided (non-negative) noise distributions and their budget solvers.

Every distribution here has support on the non-negative reals or integers
only, so added noise never pushes a released value below the truth. The
price of the guaranteed sign is paid in the approximate-DP failure mass:
each solver picks the distribution parameter that keeps the uncovered
(one-sided) probability mass within ``budget.delta`` at the requested
``budget.epsilon`` and sensitivity.

Families:

* truncated Laplace (continuous), singly or doubly truncated
* double geometric (two-sided geometric, truncated to {0..2n})
* negative binomial (unbounded, sub-exponential tail)
* discrete uniform and fair-coin binomial (heuristics with accounting only)

plus a diagnostic showing why Poisson noise cannot bound the privacy-loss
ratio at any epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import gammaln


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class UnsatisfiableBudgetError(ParameterError):
    """No parameter value can satisfy the requested budget."""


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class PrivacyBudget:
    """The (epsilon, delta, sensitivity) triple every solver consumes.

    ``sensitivity`` is the worst-case change of the query value between
    neighboring datasets. Integer-valued mechanisms require an integer
    sensitivity; the Laplace family accepts any positive real.
    """

    epsilon: float
    delta: float
    sensitivity: Union[int, float] = 1

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not (0 < self.delta < 1):
            raise ParameterError(f"delta must be in (0, 1), got {self.delta}")
        if not (self.sensitivity > 0 and math.isfinite(self.sensitivity)):
            raise ParameterError(
                f"sensitivity must be positive, got {self.sensitivity}"
            )

    def integer_sensitivity(self) -> int:
        """Sensitivity as an int; integer mechanisms reject fractional values."""
        d = self.sensitivity
        if isinstance(d, float) and not d.is_integer():
            raise ParameterError(
                f"integer-valued mechanisms need an integer sensitivity, got {d}"
            )
        d = int(d)
        if d < 1:
            raise ParameterError(f"sensitivity must be >= 1, got {d}")
        return d


@dataclass(frozen=True)
class TruncLaplaceParams:
    """Laplace(b) recentered at mode ``mu`` with its negative tail cut off.

    ``inflation`` is the renormalizing constant. With ``doubly_truncated``
    the right tail is symmetrically cut at 2*mu as well, which restores
    symmetry about the mode; otherwise the support is [0, inf).
    """

    b: float
    mu: float
    inflation: float
    doubly_truncated: bool = True

    @property
    def support_max(self) -> Optional[float]:
        return 2.0 * self.mu if self.doubly_truncated else None


@dataclass(frozen=True)
class DoubleGeometricParams:
    """Two-sided geometric on {0, .., 2n}, pmf A * exp(-epsilon*|n - x|).

    ``epsilon`` is the per-step decay rate of the pmf (for a budget of
    sensitivity d the solver sets it to budget.epsilon / d, so that a
    d-step shift changes the pmf by at most e^budget.epsilon).
    ``r`` caches exp(-epsilon); ``inflation`` is the normalizer A.
    """

    n: int
    epsilon: float
    inflation: float
    r: float

    @property
    def support_max(self) -> int:
        return 2 * self.n


@dataclass(frozen=True)
class NegBinParams:
    """Negative binomial over {0, 1, ...}: C(k+r-1, r-1) (1-p)^k p^r."""

    p: float
    r: int

    @property
    def mean(self) -> float:
        return self.r * (1.0 - self.p) / self.p

    @property
    def variance(self) -> float:
        return self.r * (1.0 - self.p) / self.p**2


@dataclass(frozen=True)
class DiscreteUniformParams:
    """Uniform on {0, .., N}."""

    N: int


@dataclass(frozen=True)
class BinomialParams:
    """Binomial(N, 1/2) on {0, .., N}."""

    N: int


@dataclass(frozen=True)
class HeuristicAccounting:
    """The (epsilon, delta) a padding heuristic actually provides."""

    epsilon: float
    delta: float


TRUNC_LAPLACE = "trunc_laplace"
DOUBLE_GEOMETRIC = "double_geometric"
NEG_BINOMIAL = "neg_binomial"
DISCRETE_UNIFORM = "discrete_uniform"
BINOMIAL = "binomial"

FAMILIES = (TRUNC_LAPLACE, DOUBLE_GEOMETRIC, NEG_BINOMIAL, DISCRETE_UNIFORM, BINOMIAL)

_PARAM_TYPES = {
    TRUNC_LAPLACE: TruncLaplaceParams,
    DOUBLE_GEOMETRIC: DoubleGeometricParams,
    NEG_BINOMIAL: NegBinParams,
    DISCRETE_UNIFORM: DiscreteUniformParams,
    BINOMIAL: BinomialParams,
}

OVERVALUED = "overvalued"  # release = truth + z
UNDERVALUED = "undervalued"  # release = truth - z

AnyParams = Union[
    TruncLaplaceParams,
    DoubleGeometricParams,
    NegBinParams,
    DiscreteUniformParams,
    BinomialParams,
]


@dataclass(frozen=True)
class MechanismSpec:
    """A solved noise mechanism: family tag, parameters, originating budget.

    ``budget`` is None for the heuristic families (discrete uniform,
    binomial), whose accounting can land at epsilon = 0. ``sign`` records
    whether the noise is added (overvalued release) or subtracted.
    """

    family: str
    params: AnyParams
    budget: Optional[PrivacyBudget]
    sign: str = OVERVALUED

    def __post_init__(self):
        if self.family not in _PARAM_TYPES:
            raise ParameterError(f"unknown family {self.family!r}")
        if not isinstance(self.params, _PARAM_TYPES[self.family]):
            raise ParameterError(
                f"params type {type(self.params).__name__} does not match "
                f"family {self.family!r}"
            )
        if self.sign not in (OVERVALUED, UNDERVALUED):
            raise ParameterError(f"sign must be overvalued/undervalued, got {self.sign}")

    @property
    def bounded(self) -> bool:
        """True when the noise support has a finite maximum."""
        if self.family == TRUNC_LAPLACE:
            return self.params.doubly_truncated
        return self.family != NEG_BINOMIAL

    @property
    def support_max(self) -> Optional[float]:
        if self.family == TRUNC_LAPLACE:
            return self.params.support_max
        if self.family == DOUBLE_GEOMETRIC:
            return self.params.support_max
        if self.family in (DISCRETE_UNIFORM, BINOMIAL):
            return self.params.N
        return None

    @property
    def integer_valued(self) -> bool:
        return self.family != TRUNC_LAPLACE


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    support_max: Optional[float]


# ---------------------------------------------------------------------------
# truncated Laplace


def solve_trunc_laplace(budget: PrivacyBudget, doubly: bool = True) -> TruncLaplaceParams:
    """Smallest mode keeping the below-zero failure mass within delta.

    mu = -(d/eps) * ln(2*delta / (2*delta + e^eps - 1)), b = d/eps. The log
    argument is < 1 whenever eps > 0, so mu is strictly positive. The mode
    must also clear the sensitivity (mu > d), which holds iff delta < 1/2;
    larger deltas are rejected as unsatisfiable.
    """
    b = budget.sensitivity / budget.epsilon
    ratio = 2.0 * budget.delta / (2.0 * budget.delta + math.expm1(budget.epsilon))
    mu = -b * math.log(ratio)
    if not mu > budget.sensitivity:
        raise UnsatisfiableBudgetError(
            f"mode mu={mu:.6g} does not exceed sensitivity {budget.sensitivity}; "
            "the failure-mass integral needs mu > sensitivity (delta must be < 1/2)"
        )
    if doubly:
        inflation = 1.0 / -math.expm1(-mu / b)
    else:
        inflation = 1.0 / (1.0 - 0.5 * math.exp(-mu / b))
    return TruncLaplaceParams(b=b, mu=mu, inflation=inflation, doubly_truncated=doubly)


def trunc_laplace_pdf(params: TruncLaplaceParams, x):
    """Density A/(2b) * exp(-|x - mu|/b) on the support, 0 outside."""
    x = np.asarray(x, dtype=np.float64)
    inside = x >= 0.0
    if params.doubly_truncated:
        inside &= x <= 2.0 * params.mu
    dens = params.inflation / (2.0 * params.b) * np.exp(-np.abs(x - params.mu) / params.b)
    out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out


def trunc_laplace_inverse_cdf(params: TruncLaplaceParams, u):
    """Closed-form quantile function; u in [0, 1)."""
    u = np.asarray(u, dtype=np.float64)
    b, mu, a = params.b, params.mu, params.inflation
    emu = math.exp(-mu / b)
    if params.doubly_truncated:
        low = mu + b * np.log(2.0 * u / a + emu)
        high = mu - b * np.log(2.0 * (1.0 - u) / a + emu)
        out = np.where(u <= 0.5, low, high)
    else:
        split = 0.5 * a * (1.0 - emu)  # CDF at the mode
        low = mu + b * np.log(2.0 * u / a + emu)
        high = mu - b * np.log(2.0 * (1.0 - u) / a)
        out = np.where(u <= split, low, high)
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# double geometric


def _double_geometric_inflation(n: int, r: float) -> float:
    return (1.0 - r) / (1.0 + r - 2.0 * r ** (n + 1))


def _double_geometric_tail(n: int, r: float, shift: int) -> float:
    """Mass of the ``shift`` lowest support points: A * sum r^k, k=n-shift+1..n."""
    a = _double_geometric_inflation(n, r)
    return a * sum(r**k for k in range(n - shift + 1, n + 1))


def solve_double_geometric(budget: PrivacyBudget) -> DoubleGeometricParams:
    """Smallest mode n whose ``d`` lowest support points carry mass <= delta.

    The pmf decays by exp(-budget.epsilon / d) per step so that a d-step
    shift never changes it by more than e^budget.epsilon. For d = 1 the
    minimal n has the closed form
    n = ceil(-(1/eps) * ln(delta*(1+r) / (1 - r + 2*r*delta))), r = e^-eps;
    for d > 1 the tail constraint is solved by exponential-then-binary
    search (the tail mass is strictly decreasing in n).
    """
    d = budget.integer_sensitivity()
    step_eps = budget.epsilon / d
    r = math.exp(-step_eps)
    delta = budget.delta
    if d == 1:
        arg = delta * (1.0 + r) / (1.0 - r + 2.0 * r * delta)
        n = math.ceil(-math.log(arg) / step_eps)
        n = max(n, 1)
    else:
        lo, hi = d, d
        while _double_geometric_tail(hi, r, d) > delta:
            lo, hi = hi, hi * 2
        while lo < hi:  # smallest n with tail(n) <= delta
            mid = (lo + hi) // 2
            if _double_geometric_tail(mid, r, d) <= delta:
                hi = mid
            else:
                lo = mid + 1
        n = hi
    assert _double_geometric_tail(n, r, d) <= delta, "search must terminate for delta > 0"
    return DoubleGeometricParams(
        n=n, epsilon=step_eps, inflation=_double_geometric_inflation(n, r), r=r
    )


def double_geometric_pmf(params: DoubleGeometricParams, x):
    """A * exp(-epsilon * |n - x|) inside {0..2n}, 0 outside."""
    x = np.asarray(x)
    inside = (x >= 0) & (x <= 2 * params.n)
    mass = params.inflation * np.exp(-params.epsilon * np.abs(params.n - x))
    out = np.where(inside, mass, 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# negative binomial


def negbin_log_pmf(params: NegBinParams, k):
    """log pmf via log-gamma, safe for large k and r; -inf below 0."""
    k = np.asarray(k, dtype=np.float64)
    p, r = params.p, float(params.r)
    kk = np.where(k >= 0, k, 0.0)  # keep gammaln off the poles; masked below
    logs = (
        gammaln(kk + r)
        - gammaln(r)
        - gammaln(kk + 1.0)
        + kk * math.log1p(-p)
        + r * math.log(p)
    )
    out = np.where(k >= 0, logs, -np.inf)
    return float(out) if out.ndim == 0 else out


def negbin_pmf(params: NegBinParams, k):
    out = np.exp(negbin_log_pmf(params, k))
    return float(out) if np.ndim(out) == 0 else out


def _negbin_low_cdf(p: float, r: int, upto: int) -> float:
    """CDF at ``upto`` (inclusive), summed via the pmf recurrence."""
    pmf = math.exp(r * math.log(p))
    total = pmf
    for k in range(1, upto + 1):
        pmf *= (1.0 - p) * (k + r - 1.0) / k
        total += pmf
    return total


def solve_negbin(budget: PrivacyBudget) -> NegBinParams:
    """Fix p from epsilon, then the smallest r burying the low tail in delta.

    p = 1 - exp(-eps/d) caps the pmf decay ratio at e^eps per d-step shift.
    For d = 1 the failure mass is pmf(0) = p^r, so r = ceil(ln delta / ln p);
    for d > 1 the smallest r with CDF(d-1) <= delta is found by search
    (the low-tail CDF is decreasing in r).
    """
    d = budget.integer_sensitivity()
    p = -math.expm1(-budget.epsilon / d)
    delta = budget.delta
    if d == 1:
        r = max(1, math.ceil(math.log(delta) / math.log(p)))
    else:
        lo, hi = 1, 1
        while _negbin_low_cdf(p, hi, d - 1) > delta:
            lo, hi = hi, hi * 2
        while lo < hi:
            mid = (lo + hi) // 2
            if _negbin_low_cdf(p, mid, d - 1) <= delta:
                hi = mid
            else:
                lo = mid + 1
        r = hi
    return NegBinParams(p=p, r=r)


# ---------------------------------------------------------------------------
# heuristics: discrete uniform and binomial padding


def heuristic_accounting(family: str, N: int, delta_sensitivity: int) -> HeuristicAccounting:
    """The (epsilon, delta) pair implied by a fixed-width padding heuristic.

    Uniform on {0..N}: epsilon = 0, delta = d/(N+1). Binomial(N, 1/2):
    epsilon = ln C(N, d), delta = 0.5^N * sum_{j<d} C(N, j).
    """
    if N < 1 or delta_sensitivity < 1:
        raise ParameterError("N and sensitivity must be positive integers")
    if delta_sensitivity > N:
        raise ParameterError(
            f"sensitivity {delta_sensitivity} exceeds support width N={N}"
        )
    if family == DISCRETE_UNIFORM:
        return HeuristicAccounting(epsilon=0.0, delta=delta_sensitivity / (N + 1))
    if family == BINOMIAL:
        eps = math.log(math.comb(N, delta_sensitivity))
        tail = sum(math.comb(N, j) for j in range(delta_sensitivity))
        return HeuristicAccounting(epsilon=eps, delta=math.ldexp(tail, -N))
    raise ParameterError(f"no heuristic accounting for family {family!r}")


# ---------------------------------------------------------------------------
# Poisson non-viability diagnostic


def poisson_shift_ratio(lam: float, shift: int, y) -> float:
    """Pr_Poisson(y | lam) / Pr_Poisson(y + shift | lam), in log space."""
    y = np.asarray(y, dtype=np.float64)
    logs = gammaln(y + shift + 1.0) - gammaln(y + 1.0) - shift * math.log(lam)
    out = np.exp(logs)
    return float(out) if out.ndim == 0 else out


def poisson_divergence_diagnostic(lam: float, delta_sensitivity: int, y_max: int):
    """Poisson pmf shift-ratios on a log grid of y, up to y_max.

    The ratio grows without bound in y, so no finite epsilon can cap the
    privacy-loss of Poisson noise. Returned as evidence only: Poisson is
    deliberately not constructible as a MechanismSpec.
    """
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    if delta_sensitivity < 1:
        raise ParameterError("sensitivity must be a positive integer")
    if y_max < delta_sensitivity:
        raise ParameterError("y_max must be at least the sensitivity")
    grid = np.unique(
        np.round(np.geomspace(delta_sensitivity, y_max, num=200)).astype(np.int64)
    )
    ratios = poisson_shift_ratio(lam, delta_sensitivity, grid)
    return [(int(y), float(rr)) for y, rr in zip(grid, np.atleast_1d(ratios))]


# ---------------------------------------------------------------------------
# assembled specs, moments, tables


def solve_spec(
    family: str,
    budget: PrivacyBudget,
    doubly: bool = True,
    sign: str = OVERVALUED,
) -> MechanismSpec:
    """Solve one of the budget-driven families into a MechanismSpec."""
    if family == TRUNC_LAPLACE:
        params: AnyParams = solve_trunc_laplace(budget, doubly=doubly)
    elif family == DOUBLE_GEOMETRIC:
        params = solve_double_geometric(budget)
    elif family == NEG_BINOMIAL:
        params = solve_negbin(budget)
    else:
        raise ParameterError(
            f"family {family!r} is not budget-solvable; "
            f"expected one of {TRUNC_LAPLACE}, {DOUBLE_GEOMETRIC}, {NEG_BINOMIAL}"
        )
    return MechanismSpec(family=family, params=params, budget=budget, sign=sign)


def uniform_spec(N: int, sensitivity: int = 1, sign: str = OVERVALUED) -> MechanismSpec:
    heuristic_accounting(DISCRETE_UNIFORM, N, sensitivity)  # validates
    return MechanismSpec(DISCRETE_UNIFORM, DiscreteUniformParams(N=N), None, sign)


def binomial_spec(N: int, sensitivity: int = 1, sign: str = OVERVALUED) -> MechanismSpec:
    heuristic_accounting(BINOMIAL, N, sensitivity)
    return MechanismSpec(BINOMIAL, BinomialParams(N=N), None, sign)


def mechanism_moments(spec: MechanismSpec) -> Moments:
    """Analytic mean/variance; support_max only for bounded families."""
    p = spec.params
    if spec.family == TRUNC_LAPLACE:
        b, mu, a = p.b, p.mu, p.inflation
        emu = math.exp(-mu / b)
        if p.doubly_truncated:
            mean = mu
            var = a * (2.0 * b * b - emu * (mu * mu + 2.0 * mu * b + 2.0 * b * b))
        else:
            mean = a * (mu + 0.5 * b * emu)
            second = a * (mu * mu + 2.0 * b * b - b * b * emu)
            var = second - mean * mean
        return Moments(mean, var, spec.support_max)
    if spec.family == DOUBLE_GEOMETRIC:
        ks = np.arange(1, p.n + 1, dtype=np.float64)
        var = 2.0 * p.inflation * float(np.sum(ks**2 * p.r**ks))
        return Moments(float(p.n), var, float(2 * p.n))
    if spec.family == NEG_BINOMIAL:
        return Moments(p.mean, p.variance, None)
    if spec.family == DISCRETE_UNIFORM:
        n = p.N
        return Moments(n / 2.0, n * (n + 2) / 12.0, float(n))
    if spec.family == BINOMIAL:
        return Moments(p.N / 2.0, p.N / 4.0, float(p.N))
    raise ParameterError(f"unknown family {spec.family!r}")


def support_table(spec: MechanismSpec, tail: float = 1e-12):
    """Explicit pmf table for an integer-valued spec.

    Returns (origin, probs, cut_mass). Bounded families are tabulated
    exactly (cut_mass 0); the negative binomial is cut at the 1 - ``tail``
    quantile with the removed mass reported, never silently dropped.
    """
    if not spec.integer_valued:
        raise ParameterError("support_table handles integer families only; "
                             "use verifier.discretize_continuous for the Laplace")
    p = spec.params
    if spec.family == DOUBLE_GEOMETRIC:
        xs = np.arange(0, 2 * p.n + 1)
        probs = p.inflation * np.exp(-p.epsilon * np.abs(p.n - xs).astype(np.float64))
        return 0, probs, 0.0
    if spec.family == DISCRETE_UNIFORM:
        probs = np.full(p.N + 1, 1.0 / (p.N + 1))
        return 0, probs, 0.0
    if spec.family == BINOMIAL:
        rows = [math.ldexp(math.comb(p.N, k), -p.N) for k in range(p.N + 1)]
        return 0, np.asarray(rows), 0.0
    # negative binomial: pmf recurrence until the remaining mass is < tail
    prob = math.exp(p.r * math.log(p.p))
    probs = [prob]
    total = prob
    k = 0
    while total < 1.0 - tail:
        k += 1
        prob *= (1.0 - p.p) * (k + p.r - 1.0) / k
        probs.append(prob)
        total += prob
        if k > 100_000_000:  # pragma: no cover - guards a runaway loop
            raise RuntimeError("negative binomial tabulation did not converge")
    return 0, np.asarray(probs), max(0.0, 1.0 - total)


# ---------------------------------------------------------------------------
# JSON serialization (field names are part of the CLI contract)


def spec_to_dict(spec: MechanismSpec) -> dict:
    p = spec.params
    if spec.family == TRUNC_LAPLACE:
        params = {
            "b": p.b,
            "mu": p.mu,
            "inflation": p.inflation,
            "doubly_truncated": p.doubly_truncated,
        }
    elif spec.family == DOUBLE_GEOMETRIC:
        params = {"n": p.n, "epsilon": p.epsilon, "inflation": p.inflation, "r": p.r}
    elif spec.family == NEG_BINOMIAL:
        params = {"p": p.p, "r": p.r}
    else:
        params = {"N": p.N}
    budget = None
    if spec.budget is not None:
        budget = {
            "epsilon": spec.budget.epsilon,
            "delta": spec.budget.delta,
            "sensitivity": spec.budget.sensitivity,
        }
    return {"family": spec.family, "budget": budget, "params": params, "sign": spec.sign}


def spec_from_dict(data: dict) -> MechanismSpec:
    family = data["family"]
    raw = data["params"]
    if family == TRUNC_LAPLACE:
        params: AnyParams = TruncLaplaceParams(
            b=raw["b"],
            mu=raw["mu"],
            inflation=raw["inflation"],
            doubly_truncated=raw["doubly_truncated"],
        )
    elif family == DOUBLE_GEOMETRIC:
        params = DoubleGeometricParams(
            n=raw["n"], epsilon=raw["epsilon"], inflation=raw["inflation"], r=raw["r"]
        )
    elif family == NEG_BINOMIAL:
        params = NegBinParams(p=raw["p"], r=raw["r"])
    elif family == DISCRETE_UNIFORM:
        params = DiscreteUniformParams(N=raw["N"])
    elif family == BINOMIAL:
        params = BinomialParams(N=raw["N"])
    else:
        raise ParameterError(f"unknown family {family!r}")
    budget = None
    if data.get("budget") is not None:
        b = data["budget"]
        budget = PrivacyBudget(
            epsilon=b["epsilon"], delta=b["delta"], sensitivity=b["sensitivity"]
        )
    return MechanismSpec(
        family=family, params=params, budget=budget, sign=data.get("sign", OVERVALUED)
    )
