"""Deterministic and seeded generators for every support-set family used here.

All randomness flows through numpy's counter-based Philox generator keyed by
SeedSequence(seed, spawn_key=streams); identical (spec, seed) inputs replay
bit-identically across platforms.  Generators never trust their own
construction: structural claims (pivots, homogeneity, containment) are
re-validated post hoc.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .congruence import SupportSet, classify, pivots, validate_pivot_vector
from .errors import ContractViolationError, InvalidInputError

FAMILY_KINDS = (
    "elementary",
    "homogeneous",
    "consecutive",
    "ap",
    "gap",
    "uoe",
    "uoh",
    "random_subset",
    "jstar",
)


def rng_from_seed(seed: int, *streams: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in streams))
    return np.random.Generator(np.random.Philox(seed=ss))


def draw_coefficients(
    k: int, rng: np.random.Generator, nonzero: bool = True
) -> np.ndarray:
    """Random spectrum values; `nonzero` draws magnitudes in [0.5, 1.5)."""
    if nonzero:
        mag = 0.5 + rng.random(k)
        ang = rng.random(k) * 2 * np.pi
        return mag * np.exp(1j * ang)
    return rng.normal(size=k) + 1j * rng.normal(size=k)


def gen_elementary(r: int, M: int, seed: int) -> SupportSet:
    """One random element per congruence class mod 2^r; pivots exactly 0..r-1."""
    if r < 0 or r > M:
        raise InvalidInputError("need 0 <= r <= M")
    rng = rng_from_seed(seed, 0)
    highs = rng.integers(0, 1 << (M - r), size=1 << r)
    idx = (np.arange(1 << r) + (highs << r)) % (1 << M)
    return SupportSet.make(1 << M, idx.tolist())


def gen_homogeneous(r: Sequence[int], M: int, seed: int) -> SupportSet:
    """A homogeneous set with the exact pivot vector r.

    Construction: a + sum_i b_i c_i 2^{r_i} mod N over all bit patterns b,
    with odd multipliers c_i and a random offset a.  Differences between two
    patterns have 2-adic valuation equal to the smallest differing pivot, so
    the realized pivot set is exactly r; this is re-checked before returning.
    """
    rt = validate_pivot_vector(r, M)
    N = 1 << M
    rng = rng_from_seed(seed, 1)
    a = int(rng.integers(0, N))
    cs = [1 + 2 * int(rng.integers(0, max(1 << (M - ri - 1), 1))) for ri in rt]
    idx = set()
    for bits in itertools.product((0, 1), repeat=len(rt)):
        idx.add((a + sum(b * c << ri for b, c, ri in zip(bits, cs, rt))) % N)
    J = SupportSet.make(N, idx)
    if pivots(J) != rt:
        raise ContractViolationError("homogeneous construction missed its pivots")
    return J


def gen_consecutive(a: int, k: int, N: int) -> SupportSet:
    return gen_ap(a, 1, k, N)


def gen_ap(a: int, s: int, k: int, N: int) -> SupportSet:
    """Arithmetic progression {a, a+s, ..., a+(k-1)s} mod N; must be collision-free."""
    if k < 1 or k > N:
        raise InvalidInputError("need 1 <= k <= N")
    idx = {(a + i * s) % N for i in range(k)}
    if len(idx) != k:
        raise InvalidInputError("arithmetic progression collides mod N")
    return SupportSet.make(N, idx)


@dataclass(frozen=True)
class GapSpec:
    """Generalized arithmetic progression {a + sum n_i s_i : 0 <= n_i < N_i}."""

    base: int
    steps: tuple[int, ...]
    lengths: tuple[int, ...]
    N: int

    def __post_init__(self) -> None:
        if len(self.steps) != len(self.lengths):
            raise InvalidInputError("steps and lengths must align")
        if not (1 <= len(self.steps) <= 4):
            raise InvalidInputError("GAP dimension capped at 4")
        if any(n < 1 for n in self.lengths):
            raise InvalidInputError("GAP lengths must be positive")
        if math.prod(self.lengths) > 1 << 14:
            raise InvalidInputError("GAP volume capped at 2^14")

    @property
    def dimension(self) -> int:
        return len(self.steps)

    @property
    def volume(self) -> int:
        return math.prod(self.lengths)


@dataclass(frozen=True)
class GapResult:
    support: SupportSet
    proper: bool


def gen_gap(spec: GapSpec) -> GapResult:
    """Materialize the GAP; proper iff all volume-many sums are distinct mod N."""
    grids = np.meshgrid(*[np.arange(n, dtype=np.int64) for n in spec.lengths], indexing="ij")
    total = np.full(grids[0].shape, spec.base, dtype=np.int64)
    for g, s in zip(grids, spec.steps):
        total = total + g * s
    vals = np.unique(total.ravel() % spec.N)
    return GapResult(SupportSet.make(spec.N, vals.tolist()), len(vals) == spec.volume)


def gap_pivot_envelope(d: int, k: int) -> float:
    """log2 k + log2 log2 k + B(d), B(d) = 10 d max(1, log2 d) + 10.

    A concrete instantiation of the asymptotic O(d log d) term in the GAP
    pivot bound, deliberately generous at desk scale.
    """
    if k < 2:
        return 10.0
    b = 10.0 * d * max(1.0, math.log2(max(d, 1))) + 10.0
    return math.log2(k) + math.log2(max(math.log2(k), 1.0)) + b


def gap_pivot_bound_check(J: SupportSet, d: int) -> bool:
    return len(pivots(J)) <= gap_pivot_envelope(d, len(J))


def doubling(J: SupportSet) -> int:
    """|J + J| mod N, by direct enumeration (|J| capped at 2^12)."""
    if len(J) > 1 << 12:
        raise InvalidInputError("doubling enumeration capped at |J| <= 2^12")
    arr = J.as_array()
    sums = (arr[:, None] + arr[None, :]) % J.N
    return int(np.unique(sums).size)


def gen_uoe(
    a_n: int,
    etas: Sequence[int],
    M: int,
    seed: int,
    alpha: float = 1.0,
    max_attempts: int = 100,
) -> SupportSet:
    """Union of eta_i elementary sets of size 2^i for i = 0..a_n.

    The realized union must satisfy a_n <= log2 |J| + alpha (not too much
    overlap); regenerates with fresh substreams up to max_attempts times.
    """
    etas = [int(e) for e in etas]
    if len(etas) != a_n + 1:
        raise InvalidInputError("need one eta per size exponent 0..a_n")
    if a_n > M:
        raise InvalidInputError("a_n exceeds M")
    if all(e == 0 for e in etas):
        raise InvalidInputError("empty union")
    for attempt in range(max_attempts):
        rng = rng_from_seed(seed, 2, attempt)
        idx: set[int] = set()
        for i, eta in enumerate(etas):
            for _ in range(eta):
                highs = rng.integers(0, 1 << (M - i), size=1 << i)
                idx.update(((np.arange(1 << i) + (highs << i)) % (1 << M)).tolist())
        J = SupportSet.make(1 << M, idx)
        if a_n <= math.log2(len(J)) + alpha:
            return J
    raise ContractViolationError(
        f"could not realize a_n <= log2 k + {alpha} in {max_attempts} attempts"
    )


def gen_uoh(
    K: SupportSet,
    a_n: int,
    etas: Sequence[int],
    seed: int,
    alpha: float = 1.0,
    max_attempts: int = 100,
) -> SupportSet:
    """Union of homogeneous subsets of a homogeneous base K.

    The size-2^i constituents vary the first i pivot bits of K and freeze
    the rest, so each is (first i pivots)-homogeneous and contained in K.
    """
    cls = classify(K)
    if not cls.is_homogeneous:
        raise InvalidInputError("UoH base set must be homogeneous")
    l = cls.pivots
    if a_n > len(l):
        raise InvalidInputError("a_n exceeds the base pivot count")
    etas = [int(e) for e in etas]
    if len(etas) != a_n + 1:
        raise InvalidInputError("need one eta per size exponent 0..a_n")
    if all(e == 0 for e in etas):
        raise InvalidInputError("empty union")
    # index K's elements by their bits at the pivot positions
    by_pattern: dict[int, int] = {}
    for j in K.indices:
        pat = 0
        for i, li in enumerate(l):
            pat |= ((j >> li) & 1) << i
        by_pattern[pat] = j
    s = len(l)
    for attempt in range(max_attempts):
        rng = rng_from_seed(seed, 3, attempt)
        idx: set[int] = set()
        for i, eta in enumerate(etas):
            for _ in range(eta):
                fixed = int(rng.integers(0, 1 << (s - i))) << i if s > i else 0
                for low in range(1 << i):
                    idx.add(by_pattern[fixed | low])
        J = SupportSet.make(K.N, idx)
        if a_n <= math.log2(len(J)) + alpha:
            return J
    raise ContractViolationError(
        f"could not realize a_n <= log2 k + {alpha} in {max_attempts} attempts"
    )


def gen_random_subset(K: SupportSet, k: int, seed: int) -> SupportSet:
    """Bernoulli(k/|K|) subset of K; k = |K| returns K itself."""
    if k < 1 or k > len(K):
        raise InvalidInputError("need 1 <= k <= |K|")
    p = k / len(K)
    for attempt in range(100):
        rng = rng_from_seed(seed, 4, attempt)
        mask = rng.random(len(K)) < p
        if mask.any():
            return SupportSet.make(K.N, K.as_array()[mask].tolist())
    raise ContractViolationError("random subset repeatedly empty")  # p >= 1/k makes this ~impossible


def gen_random_subset_zn(M: int, k: int, seed: int) -> SupportSet:
    """Bernoulli(k/N) subset of the full frequency range, without materializing Z_N."""
    N = 1 << M
    if k < 1 or k > N:
        raise InvalidInputError("need 1 <= k <= N")
    for attempt in range(100):
        rng = rng_from_seed(seed, 4, attempt)
        hits = np.nonzero(rng.random(N) < k / N)[0]
        if hits.size:
            return SupportSet.make(N, hits.tolist())
    raise ContractViolationError("random subset repeatedly empty")


def gen_jstar(M: int) -> SupportSet:
    """The powers-of-two set {1, 2, 4, ..., 2^(M-1)}: a pivot at every level."""
    if M < 1:
        raise InvalidInputError("need M >= 1")
    return SupportSet.make(1 << M, [1 << i for i in range(M)])


@dataclass(frozen=True)
class FamilyInstance:
    support: SupportSet
    kind: str
    meta: dict


@dataclass(frozen=True)
class FamilySpec:
    """Serializable description of one family draw (kind + parameters + seed)."""

    kind: str
    params: dict
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in FAMILY_KINDS:
            raise InvalidInputError(f"unknown family kind {self.kind!r}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_json(cls, obj: dict) -> "FamilySpec":
        try:
            return cls(obj["kind"], dict(obj.get("params", {})), int(obj.get("seed", 0)))
        except KeyError as e:
            raise InvalidInputError(f"family spec missing key {e}") from None

    def build(self) -> FamilyInstance:
        p = dict(self.params)
        kind = self.kind
        if kind == "elementary":
            J = gen_elementary(p["r"], p["M"], self.seed)
            return FamilyInstance(J, kind, {"policy": "uoe"})
        if kind == "homogeneous":
            J = gen_homogeneous(tuple(p["pivots"]), p["M"], self.seed)
            return FamilyInstance(J, kind, {"policy": "auto"})
        if kind == "consecutive":
            J = gen_consecutive(p["a"], p["k"], p["N"])
            return FamilyInstance(J, kind, {"policy": "auto"})
        if kind == "ap":
            J = gen_ap(p["a"], p["s"], p["k"], p["N"])
            return FamilyInstance(J, kind, {"policy": "auto"})
        if kind == "gap":
            res = gen_gap(GapSpec(p["a"], tuple(p["steps"]), tuple(p["lengths"]), p["N"]))
            return FamilyInstance(
                res.support, kind, {"policy": "auto", "proper": res.proper}
            )
        if kind == "uoe":
            J = gen_uoe(p["a_n"], p["etas"], p["M"], self.seed, p.get("alpha", 1.0))
            return FamilyInstance(J, kind, {"policy": "uoe"})
        if kind == "uoh":
            K = gen_homogeneous(tuple(p["base_pivots"]), p["M"], self.seed + 1)
            J = gen_uoh(K, p["a_n"], p["etas"], self.seed, p.get("alpha", 1.0))
            return FamilyInstance(
                J, kind, {"policy": "uoh", "base_pivots": pivots(K)}
            )
        if kind == "random_subset":
            if p.get("base", "zn") == "zn":
                J = gen_random_subset_zn(p["M"], p["k"], self.seed)
                base_pivots = tuple(range(p["M"]))
            else:
                K = gen_homogeneous(tuple(p["base_pivots"]), p["M"], self.seed + 1)
                J = gen_random_subset(K, p["k"], self.seed)
                base_pivots = pivots(K)
            return FamilyInstance(
                J, kind, {"policy": "random_subset", "base_pivots": base_pivots}
            )
        if kind == "jstar":
            return FamilyInstance(gen_jstar(p["M"]), kind, {"policy": "auto"})
        raise InvalidInputError(f"unhandled kind {kind}")
