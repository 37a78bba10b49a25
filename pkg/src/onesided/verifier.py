"""Brute-force approximate-DP certification of discrete noise tables.

Independent of the closed-form solvers: given any explicit pmf table and a
shift, ``brute_force_delta`` computes the exact minimal delta for which the
pair of shifted release distributions satisfies the (epsilon, delta)
inequality on every event set. The reduction from event sets to the
pointwise positive-part sum

    delta(eps) = max over both orderings of  sum_x max(0, p(x) - e^eps q(x))

is exact, so this is the tight value, not a bound. Continuous mechanisms
are certified through a midpoint-rule discretization with the quadrature
slack reported rather than hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ._backend import hockey_stick_pair
from .mechanisms import (
    ParameterError,
    MechanismSpec,
    TruncLaplaceParams,
    TRUNC_LAPLACE,
    support_table,
    trunc_laplace_pdf,
)

DIRECTION_LOW = "left"
DIRECTION_HIGH = "right"


@dataclass(frozen=True)
class DiscretePmf:
    """Explicit finite probability table starting at integer ``origin``.

    ``tail_mass`` records probability that the table does not represent
    (quantile cuts, quadrature residue); ``tol`` is the normalization
    tolerance the table was built to.
    """

    origin: int
    probs: np.ndarray
    tail_mass: float = 0.0
    tol: float = 1e-9

    def __post_init__(self):
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or len(probs) == 0:
            raise ParameterError("probs must be a non-empty 1-d table")
        if np.any(probs < 0):
            raise ParameterError("probabilities must be nonnegative")
        total = float(probs.sum()) + self.tail_mass
        if abs(total - 1.0) > self.tol:
            raise ParameterError(
                f"table mass {total} is not 1 within tolerance {self.tol}"
            )

    def shifted(self, offset: int) -> "DiscretePmf":
        return DiscretePmf(self.origin + offset, self.probs, self.tail_mass, self.tol)


@dataclass(frozen=True)
class PrivacyVerdict:
    """Minimal delta making the table (epsilon, delta)-DP at the tested shift."""

    epsilon: float
    delta_required: float
    direction_worst: str


def brute_force_delta(pmf: DiscretePmf, shift: int, epsilon: float) -> PrivacyVerdict:
    """Tight hockey-stick delta between the table and its shifted copy.

    Both neighbor orderings are evaluated; the verdict carries the larger
    sum and which side of the support produced it. O(support) time.
    """
    if shift < 1:
        raise ParameterError(f"shift must be a positive integer, got {shift}")
    d_low, d_high = hockey_stick_pair(pmf.probs, int(shift), float(epsilon))
    if d_low >= d_high:
        return PrivacyVerdict(float(epsilon), min(d_low, 1.0), DIRECTION_LOW)
    return PrivacyVerdict(float(epsilon), min(d_high, 1.0), DIRECTION_HIGH)


def privacy_curve(
    pmf: DiscretePmf, shift: int, epsilons: Sequence[float]
) -> List[PrivacyVerdict]:
    """One verdict per epsilon; the input grid must be sorted ascending."""
    eps = list(epsilons)
    if not eps:
        raise ParameterError("epsilon grid must be non-empty")
    if any(b < a for a, b in zip(eps, eps[1:])):
        raise ParameterError("epsilon grid must be sorted ascending")
    return [brute_force_delta(pmf, shift, e) for e in eps]


def discretize_continuous(params: TruncLaplaceParams, step: float) -> DiscretePmf:
    """Midpoint-rule mass table of the truncated Laplace on width-``step`` cells.

    Cell k covers [k*step, (k+1)*step). A later oracle run at sensitivity d
    needs d to be an integer multiple of ``step``; checking that is the
    caller's job (see ``shift_cells``). The singly truncated family is cut
    at the 1 - 1e-12 quantile, with the cut recorded as tail mass.

    ``tail_mass`` carries only genuinely unrepresented support (the upper
    quantile cut); the midpoint quadrature residual scales every cell by
    the same ~step^2/(24 b^2) factor, cancels in pmf ratios, and is bounded
    by ``tol`` — it must be absorbed by the caller's comparison slack, not
    double-counted as failure mass.
    """
    if step <= 0:
        raise ParameterError("step must be positive")
    if step > params.b / 100.0:
        raise ParameterError(
            f"step {step:.6g} too coarse; need step <= b/100 = {params.b / 100.0:.6g}"
        )
    if params.doubly_truncated:
        hi = 2.0 * params.mu
        cut = 0.0
    else:
        # cut where the upper tail 1 - F(x) = (A/2) e^-(x-mu)/b drops to 1e-12
        hi = params.mu + params.b * math.log(params.inflation / (2.0 * 1e-12))
    if step >= hi:
        raise ParameterError(f"step {step:.6g} is not below the support width {hi:.6g}")
    n_cells = int(math.ceil(hi / step))
    if not params.doubly_truncated:
        cut = 0.5 * params.inflation * math.exp(-(n_cells * step - params.mu) / params.b)
    mids = (np.arange(n_cells) + 0.5) * step
    masses = trunc_laplace_pdf(params, mids) * step
    return DiscretePmf(origin=0, probs=masses, tail_mass=cut, tol=1e-5)


def shift_cells(params: TruncLaplaceParams, step: float, sensitivity: float) -> int:
    """Sensitivity expressed in whole cells; errors if it is not whole."""
    cells = sensitivity / step
    if abs(cells - round(cells)) > 1e-9:
        raise ParameterError(
            f"sensitivity {sensitivity} is not an integer multiple of step {step}"
        )
    return int(round(cells))


def tabulate_spec(spec: MechanismSpec, tail: float = 1e-12) -> DiscretePmf:
    """DiscretePmf for any integer-valued spec (tail-cut mass recorded)."""
    origin, probs, cut = support_table(spec, tail=tail)
    return DiscretePmf(origin=origin, probs=probs, tail_mass=cut, tol=max(1e-9, 2 * tail))


def certify(spec: MechanismSpec, epsilon: Optional[float] = None) -> PrivacyVerdict:
    """Oracle check of a solved spec at its own budget.

    Tabulates the spec (integer families exactly, the Laplace via a
    b/1000 midpoint grid aligned so the sensitivity is a whole number of
    cells) and reports the tight delta at ``epsilon`` (default: the
    budget's epsilon), plus any unrepresented tail mass — the table cut
    is real failure mass and may not be dropped from the certificate.
    """
    if spec.budget is None:
        raise ParameterError("spec has no budget to certify against")
    eps = spec.budget.epsilon if epsilon is None else epsilon
    sens = spec.budget.sensitivity
    if spec.family == TRUNC_LAPLACE:
        cells = max(100, int(round(1000 * spec.budget.epsilon)))
        step = sens / cells
        pmf = discretize_continuous(spec.params, step)
        shift = shift_cells(spec.params, step, sens)
    else:
        pmf = tabulate_spec(spec)
        shift = spec.budget.integer_sensitivity()
    verdict = brute_force_delta(pmf, shift, eps)
    return PrivacyVerdict(
        verdict.epsilon,
        min(verdict.delta_required + pmf.tail_mass, 1.0),
        verdict.direction_worst,
    )
