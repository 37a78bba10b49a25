"""Two-party collision-padding around a black-box set intersection.

Each party holds a private identifier set. Public, pairwise-disjoint dummy
pools let every party pad what it submits so that the cardinalities an
exact PSI run leaks (input sizes, intersection, union) carry one-sided DP
noise in the *other* party's view:

* party X samples a random subset of its own pool A_X (size drawn from its
  noise spec) and submits its real set, that sample, and the counterpart's
  entire pool A_Y. Because Y symmetrically submits all of A_X, every
  element X sampled is guaranteed to collide, inflating the intersection
  by exactly z_x + z_y.
* with union padding on, each party additionally samples from its B pool;
  B_X and B_Y never collide, so those dummies inflate only the union.

The PSI itself is modeled as exact set algebra over identifier strings;
any cryptographic realization that leaks the same cardinalities is
interchangeable. Dummy rows can be tagged with a null value (0 additive,
1 multiplicative) so downstream aggregation ignores them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from .mechanisms import MechanismSpec, ParameterError
from .sampler import RngStream, sample

POOL_NAMESPACE = "pad:"

TAG_REAL = "real"
TAG_INTERSECT_PAD = "intersect_pad"
TAG_UNION_PAD = "union_pad"
TAG_COUNTERPART_POOL = "counterpart_pool"

ROLE_X = "X"
ROLE_Y = "Y"


class UnsupportedMechanismError(ParameterError):
    """The noise spec cannot back a finite dummy pool."""


class ProtocolViolationError(RuntimeError):
    """A transcript is inconsistent with the padding protocol."""


@dataclass(frozen=True)
class Pools:
    """The four public dummy pools, sized to the noise supports.

    ``a_x``/``a_y`` back the intersection noise (each as large as that
    spec's support maximum so any draw can be satisfied), ``b_x``/``b_y``
    the union noise. All four are disjoint from each other and, by the
    reserved ``pad:`` namespace, from every real identifier universe.
    """

    a_x: Tuple[str, ...]
    a_y: Tuple[str, ...]
    b_x: Tuple[str, ...]
    b_y: Tuple[str, ...]

    @property
    def n_intersect(self) -> int:
        return len(self.a_x)

    @property
    def n_union(self) -> int:
        return len(self.b_x)


@dataclass(frozen=True)
class PartyInput:
    """One party's private set plus the noise specs it pads with."""

    real_set: frozenset
    intersect_noise_spec: MechanismSpec
    role: str
    union_noise_spec: Optional[MechanismSpec] = None

    def __post_init__(self):
        if self.role not in (ROLE_X, ROLE_Y):
            raise ParameterError(f"role must be X or Y, got {self.role!r}")
        for ident in self.real_set:
            if isinstance(ident, str) and ident.startswith(POOL_NAMESPACE):
                raise ParameterError(
                    f"real identifier {ident!r} collides with the reserved pool namespace"
                )


@dataclass(frozen=True)
class PaddedInput:
    """What a party actually submits, with its private draws remembered."""

    role: str
    submitted_set: frozenset
    z_own: int
    v_own: int
    dummy_tags: Mapping[str, str]


@dataclass(frozen=True)
class PsiTranscript:
    """Everything the black-box PSI leaks: four cardinalities."""

    size_x: int
    size_y: int
    intersection_size: int
    union_size: int

    def __post_init__(self):
        if self.union_size != self.size_x + self.size_y - self.intersection_size:
            raise ProtocolViolationError("inclusion-exclusion identity violated")


@dataclass(frozen=True)
class PartyView:
    """What one party learns after subtracting everything it knows."""

    dp_intersection: int
    dp_union: int
    dp_counterpart_size: int


def build_pools(
    intersect_spec: MechanismSpec,
    union_spec: Optional[MechanismSpec] = None,
    *,
    intersect_spec_y: Optional[MechanismSpec] = None,
    union_spec_y: Optional[MechanismSpec] = None,
) -> Pools:
    """Mint the public dummy pools for the given noise specs.

    Each pool is exactly as large as its party's noise support maximum, so
    every possible draw has enough identifiers to sample from. By default
    both parties use the same specs; pass the ``*_y`` variants when the
    parties run different budgets. Unbounded specs are rejected: they
    would need infinite pools.
    """
    size_ax = _required_pool_size(intersect_spec)
    size_ay = _required_pool_size(intersect_spec_y or intersect_spec)
    size_bx = _required_pool_size(union_spec) if union_spec is not None else 0
    if union_spec_y is not None:
        size_by = _required_pool_size(union_spec_y)
    else:
        size_by = size_bx

    def mint(tag: str, count: int) -> Tuple[str, ...]:
        return tuple(f"{POOL_NAMESPACE}{tag}:{i:06d}" for i in range(count))

    return Pools(
        a_x=mint("ax", size_ax),
        a_y=mint("ay", size_ay),
        b_x=mint("bx", size_bx),
        b_y=mint("by", size_by),
    )


def _required_pool_size(spec: MechanismSpec) -> int:
    if not spec.bounded or not spec.integer_valued:
        raise UnsupportedMechanismError(
            f"family {spec.family!r} cannot back a dummy pool: pools must be "
            "finite, which needs an integer-valued noise with bounded support"
        )
    return int(spec.support_max)


def _uniform_subset(items: Tuple[str, ...], k: int, rng: RngStream) -> Tuple[str, ...]:
    """Uniform k-subset via a partial Fisher-Yates pass (53-bit uniforms)."""
    n = len(items)
    if k > n:
        raise ProtocolViolationError(
            f"draw {k} exceeds pool size {n}; pools must cover the support maximum"
        )
    if k == 0:
        return ()
    idx = list(range(n))
    u = rng.uniforms(k)
    for j in range(k):
        t = j + int(u[j] * (n - j))
        idx[j], idx[t] = idx[t], idx[j]
    return tuple(items[i] for i in idx[:k])


def pad_input(
    party: PartyInput, pools: Pools, rng: RngStream, union_mode: bool = False
) -> PaddedInput:
    """Draw this party's noise and assemble its padded submission.

    The submission is real data, a z-sized random sample of the party's
    own A pool, and the counterpart's entire A pool (in union mode also a
    v-sized sample of the own B pool). Including the whole counterpart
    pool is what guarantees the counterpart's sampled dummies all collide.
    """
    if party.role == ROLE_X:
        own_a, other_a, own_b = pools.a_x, pools.a_y, pools.b_x
    else:
        own_a, other_a, own_b = pools.a_y, pools.a_x, pools.b_y
    if len(own_a) != _required_pool_size(party.intersect_noise_spec):
        raise ParameterError("pools were built for a different intersect spec")

    z = sample(party.intersect_noise_spec, rng)
    a_sample = _uniform_subset(own_a, z, rng)

    v = 0
    b_sample: Tuple[str, ...] = ()
    if union_mode:
        if party.union_noise_spec is None:
            raise ParameterError("union_mode requires a union noise spec")
        if len(own_b) != _required_pool_size(party.union_noise_spec):
            raise ParameterError("pools were built for a different union spec")
        v = sample(party.union_noise_spec, rng)
        b_sample = _uniform_subset(own_b, v, rng)

    tags: Dict[str, str] = {ident: TAG_REAL for ident in party.real_set}
    tags.update({ident: TAG_INTERSECT_PAD for ident in a_sample})
    tags.update({ident: TAG_COUNTERPART_POOL for ident in other_a})
    tags.update({ident: TAG_UNION_PAD for ident in b_sample})

    submitted = frozenset(party.real_set) | set(a_sample) | set(other_a) | set(b_sample)
    return PaddedInput(
        role=party.role, submitted_set=submitted, z_own=z, v_own=v, dummy_tags=tags
    )


def run_blackbox_psi(in_x: PaddedInput, in_y: PaddedInput) -> PsiTranscript:
    """Exact set cardinalities of the two submissions (the idealized leak)."""
    sx, sy = in_x.submitted_set, in_y.submitted_set
    inter = len(sx & sy)
    return PsiTranscript(
        size_x=len(sx),
        size_y=len(sy),
        intersection_size=inter,
        union_size=len(sx) + len(sy) - inter,
    )


def party_view(
    transcript: PsiTranscript, own: PaddedInput, pools: Pools, union_mode: bool = False
) -> PartyView:
    """Subtract a party's private draws and public pool sizes from the leak.

    What remains is the truth plus only the *counterpart's* draws:
    intersection -> I + z_other, union -> |union| + v_other, counterpart
    input size -> |D_other| + z_other (+ v_other in union mode). Without
    union padding the recovered union is exact, i.e. not private.
    """
    pool_total = len(pools.a_x) + len(pools.a_y)
    own_a_size = len(pools.a_x) if own.role == ROLE_X else len(pools.a_y)
    other_size = transcript.size_y if own.role == ROLE_X else transcript.size_x

    dp_intersection = transcript.intersection_size - own.z_own
    dp_union = transcript.union_size - pool_total - own.v_own
    dp_counterpart = other_size - own_a_size
    if min(dp_intersection, dp_union, dp_counterpart) < 0:
        raise ProtocolViolationError(
            "negative recovered cardinality; transcript does not match this input"
        )
    return PartyView(
        dp_intersection=dp_intersection,
        dp_union=dp_union,
        dp_counterpart_size=dp_counterpart,
    )


def one_party_pad(
    observer: PartyInput, holder: PartyInput, pools: Pools, rng: RngStream
) -> Tuple[PaddedInput, PaddedInput]:
    """Padding for the setting where only the observer sees the leak.

    Only the holder's noise is needed: the holder submits its real set
    plus a z-sized sample of its own pool, the observer submits its real
    set plus that entire pool. The observer's intersection reading is then
    I + z_holder. Returns (observer_padded, holder_padded).
    """
    if observer.role != ROLE_X or holder.role != ROLE_Y:
        raise ParameterError("the observer must be party X and the holder party Y")
    holder_pool = pools.a_y
    if len(holder_pool) != _required_pool_size(holder.intersect_noise_spec):
        raise ParameterError("pools were built for a different intersect spec")

    z = sample(holder.intersect_noise_spec, rng)
    a_sample = _uniform_subset(holder_pool, z, rng)

    holder_tags: Dict[str, str] = {i: TAG_REAL for i in holder.real_set}
    holder_tags.update({i: TAG_INTERSECT_PAD for i in a_sample})
    holder_padded = PaddedInput(
        role=ROLE_Y,
        submitted_set=frozenset(holder.real_set) | set(a_sample),
        z_own=z,
        v_own=0,
        dummy_tags=holder_tags,
    )

    obs_tags: Dict[str, str] = {i: TAG_REAL for i in observer.real_set}
    obs_tags.update({i: TAG_COUNTERPART_POOL for i in holder_pool})
    observer_padded = PaddedInput(
        role=ROLE_X,
        submitted_set=frozenset(observer.real_set) | set(holder_pool),
        z_own=0,
        v_own=0,
        dummy_tags=obs_tags,
    )
    return observer_padded, holder_padded


def attach_null_values(
    padded: PaddedInput,
    null_value: float,
    real_values: Optional[Mapping[str, float]] = None,
) -> List[Tuple[str, float]]:
    """Associate a value with every submitted identifier, sorted by id.

    Dummy rows carry ``null_value`` — the identity element of whatever the
    downstream aggregation is (0 for sums, 1 for products) — so padding
    never perturbs computed results. Real rows take their mapped value
    (0.0 when absent from the map).
    """
    real_values = real_values or {}
    rows: List[Tuple[str, float]] = []
    for ident in sorted(padded.submitted_set):
        if padded.dummy_tags.get(ident) == TAG_REAL:
            rows.append((ident, float(real_values.get(ident, 0.0))))
        else:
            rows.append((ident, float(null_value)))
    return rows
