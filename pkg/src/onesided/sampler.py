"""Deterministic, seedable sampling from any MechanismSpec.

Draws are produced by exact inverse-CDF over the tabulated pmf (discrete
families) or the closed-form quantile function (truncated Laplace), driven
by a counter-based Philox generator keyed on (seed, stream_id). One draw
consumes exactly one 64-bit word, so batching and repeated single draws
walk the same stream. Uniforms use the fixed 53-bit convention
u = (raw >> 11) * 2^-53, making test vectors portable across platforms.

Not cryptographic: production padding deployments must swap in a CSPRNG;
this generator exists for reproducible simulation and tests.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._backend import inverse_cdf_lookup, uniforms_from_raw
from .mechanisms import (
    MechanismSpec,
    NEG_BINOMIAL,
    TRUNC_LAPLACE,
    support_table,
    trunc_laplace_inverse_cdf,
)

_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    """SplitMix64 finalizer; used only to derive child stream ids."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class RngStream:
    """A single random stream: Philox keyed by the 128-bit (stream_id, seed).

    Identical (seed, stream_id) always replays the identical sequence;
    distinct stream_ids select disjoint Philox keys and therefore
    non-overlapping sequences. A stream is single-owner: share specs, not
    streams, across workers.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        self._bitgen = np.random.Philox(key=(self.stream_id << 64) | self.seed)
        self._consumed = 0

    @property
    def counter(self) -> int:
        """Number of 64-bit words consumed so far."""
        return self._consumed

    def raw(self, count: int) -> np.ndarray:
        self._consumed += count
        return self._bitgen.random_raw(count)

    def uniforms(self, count: int) -> np.ndarray:
        return uniforms_from_raw(self.raw(count))

    def substream(self, index: int) -> "RngStream":
        """Child stream with id hashed from (this id, index)."""
        return RngStream(self.seed, _mix64(self.stream_id ^ _mix64(index + 1)))

    def __repr__(self):  # pragma: no cover - debugging nicety
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self._consumed})"


@lru_cache(maxsize=128)
def _cached_cdf(spec: MechanismSpec):
    origin, probs, _cut = support_table(spec)
    return origin, np.cumsum(probs)


def _negbin_tail_walk(spec: MechanismSpec, u: float, cdf: np.ndarray) -> int:
    """Continue the pmf walk past the cached table for a far-tail uniform."""
    p = spec.params
    k = len(cdf) - 1
    total = float(cdf[-1])
    prob = float(np.exp((p.r) * np.log(p.p)))  # pmf(0)
    for j in range(1, k + 1):
        prob *= (1.0 - p.p) * (j + p.r - 1.0) / j
    while total <= u:
        k += 1
        prob *= (1.0 - p.p) * (k + p.r - 1.0) / k
        total += prob
        if prob == 0.0:  # float underflow: everything remaining maps here
            break
    return k


def sample_batch(spec: MechanismSpec, rng: RngStream, count: int) -> np.ndarray:
    """``count`` draws; equivalent to ``count`` sequential ``sample`` calls.

    Integer families return int64, the Laplace family float64. Bounded
    families always land in [0, support_max].
    """
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    if spec.family == TRUNC_LAPLACE:
        if count == 0:
            return np.empty(0, dtype=np.float64)
        return np.asarray(trunc_laplace_inverse_cdf(spec.params, rng.uniforms(count)))
    if count == 0:
        return np.empty(0, dtype=np.int64)
    u = rng.uniforms(count)
    origin, cdf = _cached_cdf(spec)
    values = origin + inverse_cdf_lookup(cdf, u)
    if spec.family == NEG_BINOMIAL:
        over = u >= cdf[-1]
        if over.any():
            for i in np.flatnonzero(over):
                values[i] = origin + _negbin_tail_walk(spec, float(u[i]), cdf)
    return values


def sample(spec: MechanismSpec, rng: RngStream):
    """One draw from the spec's noise distribution (always nonnegative)."""
    value = sample_batch(spec, rng, 1)[0]
    return float(value) if spec.family == TRUNC_LAPLACE else int(value)
