"""The homogeneity-induced DFT: a generalized radix-2 butterfly.

For an r-part-homogeneous support J the transform computes, at height n,
one value per congruence-tree node at level r_{s-n}+1: exactly the product
F(J, I) @ f_I over the pivoted sample set I = I_{r^{n-}} (unscaled, forward
kernel), evaluated with the same butterfly structure as decimation-in-time
radix-2.  Counted cost is exactly 1.5 * A * log2(A) with A = |I|; the
butterfly always processes the full 2^(s-n) slot lattice, padding branches
that are empty in the tree, so the count never depends on the tree shape.

A shift argument a computes the transform of the shifted signal tau^a f,
i.e. the samples are read at locations I - a (mod N).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .congruence import (
    SupportSet,
    assert_part_homogeneous,
    classify,
    validate_pivot_vector,
)
from .core import BandlimitedSignal, submatrix_apply
from .counting import OpCounter
from .errors import ContractViolationError, InvalidInputError
from .sampling import pivoted_pattern


def _fetch(source, locations: np.ndarray, N: int) -> np.ndarray:
    """Read signal samples at mod-N locations from any supported source."""
    loc = np.asarray(locations, dtype=np.int64) % N
    if isinstance(source, BandlimitedSignal):
        if source.N != N:
            raise InvalidInputError("signal modulus does not match support")
        return source.sample_block(loc)
    if callable(source):
        vals = np.asarray(source(loc), dtype=np.complex128)
        if vals.shape != loc.shape:
            raise InvalidInputError("sample callback returned wrong shape")
        return vals
    arr = np.asarray(source, dtype=np.complex128)
    if arr.ndim != 1 or arr.size != N:
        raise InvalidInputError("dense signal must be a length-N vector")
    return arr[loc]


@dataclass
class ButterflyPlan:
    """Precomputed slot structure for one (J, used-pivots) combination."""

    support: SupportSet
    used: tuple[int, ...]          # pivots merged by the butterfly, ascending
    level: int                     # output nodes live at this tree level
    element_slots: np.ndarray      # slot index of each support element
    slot_residues: np.ndarray      # output residue per slot (virtual slots padded)
    slot_real: np.ndarray          # which slots correspond to actual tree nodes
    twiddles: list[np.ndarray]     # stage k merges used[k]; array of size 2^k

    @property
    def n_slots(self) -> int:
        return 1 << len(self.used)


def _build_plan(J: SupportSet, used: tuple[int, ...]) -> ButterflyPlan:
    arr = J.as_array()
    s = len(used)
    M = J.M
    pats = np.zeros(len(arr), dtype=np.int64)
    for i, rk in enumerate(used):
        pats |= ((arr >> rk) & 1) << i
    # least member per slot prefix, stage by stage; virtual slots inherit the
    # parent's shared residue with the branch bit patched in
    reps = np.asarray([int(arr.min())], dtype=np.int64)
    twiddles: list[np.ndarray] = []
    big = np.int64(np.iinfo(np.int64).max)
    for k, rk in enumerate(used, start=1):
        shared = reps % (1 << rk)
        twiddles.append(np.exp(-2j * np.pi * (shared + (1 << rk)) / float(1 << (rk + 1))))
        minm = np.full(1 << k, big, dtype=np.int64)
        prefix = pats & ((1 << k) - 1)
        np.minimum.at(minm, prefix, arr)
        virtual = minm == big
        branch = (np.arange(1 << k) >> (k - 1)) & 1
        inherited = shared[np.arange(1 << k) & ((1 << (k - 1)) - 1)] + (branch << rk)
        reps = np.where(virtual, inherited, minm)
    level = used[-1] + 1 if s else 0
    slot_residues = reps % (1 << level)
    slot_real = np.zeros(1 << s, dtype=bool)
    slot_real[pats] = True
    return ButterflyPlan(J, used, level, pats, slot_residues, slot_real, twiddles)


@dataclass
class HiDftResult:
    """Per-node transform values at one height, plus the run's exact cost."""

    support: SupportSet
    pivots: tuple[int, ...]
    height: int
    shift: int
    level: int
    node_residues: tuple[int, ...]
    node_values: np.ndarray
    slot_values: np.ndarray
    slot_residues: np.ndarray
    slot_real: np.ndarray
    ops_adds: int
    ops_mults: int

    @property
    def values(self) -> dict[int, complex]:
        return {int(r): complex(v) for r, v in zip(self.node_residues, self.node_values)}

    def value_at_index(self, j: int) -> complex:
        """Transform value of the node containing frequency index j."""
        res = j % (1 << self.level)
        vals = self.values
        if res not in vals:
            raise InvalidInputError(f"index {j} belongs to no stored node")
        return vals[res]

    def values_by_index(self) -> np.ndarray:
        """One value per support element, in support order."""
        vals = self.values
        return np.asarray(
            [vals[j % (1 << self.level)] for j in self.support.indices], dtype=np.complex128
        )


def hidft(
    source,
    J: SupportSet,
    r: Sequence[int],
    height: int = 0,
    shift: int = 0,
    counter: OpCounter | None = None,
) -> HiDftResult:
    """Generalized radix-2 transform of tau^shift applied to the signal.

    Output values equal submatrix_apply(node-representatives, I_{r^{n-}})
    applied to the shifted sample vector, with no extra scaling.  Exactly
    1.5 * A * log2(A) complex operations are counted, A = 2^(size(r)-height).
    """
    rt = validate_pivot_vector(r, J.M)
    assert_part_homogeneous(J, rt)
    if height < 0 or height > len(rt):
        raise InvalidInputError(f"height must be in [0, {len(rt)}]")
    used = rt[: len(rt) - height]
    plan = _build_plan(J, used)
    A = plan.n_slots
    offsets = np.zeros(A, dtype=np.int64)
    for i, rk in enumerate(used):
        offsets += ((np.arange(A) >> i) & 1) << (J.M - 1 - rk)
    v = _fetch(source, offsets - shift, J.N)
    for k in range(1, len(used) + 1):
        half = 1 << (k - 1)
        v = v.reshape(-1, 2, half)
        t = plan.twiddles[k - 1][None, :] * v[:, 1, :]
        v = np.stack([v[:, 0, :] - t, v[:, 0, :] + t], axis=1).reshape(-1)
        if counter is not None:
            counter.mul(A // 2, phase="hidft")
            counter.add(A, phase="hidft")
    node_res = plan.slot_residues[plan.slot_real]
    node_vals = v[plan.slot_real]
    order = np.argsort(node_res)
    stages = len(used)
    return HiDftResult(
        support=J,
        pivots=rt,
        height=height,
        shift=shift,
        level=plan.level,
        node_residues=tuple(int(x) for x in node_res[order]),
        node_values=node_vals[order].copy(),
        slot_values=v,
        slot_residues=plan.slot_residues,
        slot_real=plan.slot_real,
        ops_adds=A * stages,
        ops_mults=(A // 2) * stages,
    )


def hidft_to_dft(res: HiDftResult, counter: OpCounter | None = None) -> np.ndarray:
    """Recover (F f)_J from a height-0 transform of a homogeneous support.

    The butterfly output at a singleton node {j} is (|J|/N) * F f(j), so the
    coefficients are the node values times N/|J|.  The scaling is skipped
    (and uncounted) when the factor is exactly 1.
    """
    J = res.support
    cls = classify(J)
    if not cls.is_homogeneous:
        raise ContractViolationError("hidft_to_dft requires a homogeneous support")
    if res.height != 0:
        raise ContractViolationError("hidft_to_dft requires a height-0 transform")
    vals = res.values_by_index()
    factor = J.N / len(J)
    if factor == 1.0:
        return vals
    if counter is not None:
        counter.mul(len(J), phase="read")
    return vals * factor


def hidft_oracle(
    source, J: SupportSet, r: Sequence[int], height: int = 0, shift: int = 0
) -> HiDftResult:
    """Same contract as hidft, evaluated by the dense submatrix product."""
    rt = validate_pivot_vector(r, J.M)
    assert_part_homogeneous(J, rt)
    used = rt[: len(rt) - height]
    level = used[-1] + 1 if used else 0
    pattern = pivoted_pattern(used, J.M)
    cols = pattern.as_array()
    samples = _fetch(source, cols - shift, J.N)
    residues = sorted({j % (1 << level) for j in J.indices})
    reps = np.asarray(residues, dtype=np.int64)
    vals = submatrix_apply(reps, cols, samples, J.N)
    return HiDftResult(
        support=J,
        pivots=rt,
        height=height,
        shift=shift,
        level=level,
        node_residues=tuple(int(x) for x in reps),
        node_values=vals,
        slot_values=vals,
        slot_residues=reps,
        slot_real=np.ones(len(reps), dtype=bool),
        ops_adds=0,
        ops_mults=0,
    )


@dataclass(frozen=True)
class BlockFactorizationReport:
    passed: bool
    max_err: float
    n_pairs: int
    skipped: tuple[int, ...]  # height-1 parent residues lacking a sibling


def block_factorization_check(
    J: SupportSet, r: Sequence[int], tol: float = 1e-12
) -> BlockFactorizationReport:
    """Verify F(J, I_r) = [[I, D], [I, -D]] @ blockdiag(B, B) entrywise.

    Rows are ordered left-branch representatives then their right siblings
    (height-1 split order), columns I_{r^-} then its translate; B is the
    half-size submatrix F(J_1, I_{r^-}) and D the diagonal of r_max+1 order
    twiddles.  Height-1 parents with a missing sibling are skipped and
    reported.
    """
    rt = validate_pivot_vector(r, J.M)
    if not rt:
        raise InvalidInputError("block factorization needs at least one pivot")
    assert_part_homogeneous(J, rt)
    r_max = rt[-1]
    level = r_max + 1
    # height-0 nodes keyed by residue at level r_max+1
    nodes = sorted({j % (1 << level) for j in J.indices})
    rep_of = {}
    for j in J.indices:
        rep_of.setdefault(j % (1 << level), j)
    pairs = []
    skipped = []
    seen = set()
    for res in nodes:
        if res in seen:
            continue
        sib = res ^ (1 << r_max)
        seen.update({res, sib})
        if sib in rep_of:
            left, right = (res, sib) if (res >> r_max) & 1 else (sib, res)
            pairs.append((rep_of[left], rep_of[right]))
        else:
            skipped.append(res)
    if not pairs:
        return BlockFactorizationReport(True, 0.0, 0, tuple(skipped))
    j1 = np.asarray([p[0] for p in pairs], dtype=np.int64)
    j2 = np.asarray([p[1] for p in pairs], dtype=np.int64)
    a = 1 << (J.M - 1 - r_max)
    sub = pivoted_pattern(rt[:-1], J.M).as_array()
    cols = np.concatenate([sub, sub + a])
    rows = np.concatenate([j1, j2])
    N = J.N
    full = np.exp(-2j * np.pi * (np.outer(rows, cols % N) % N) / N)
    B = np.exp(-2j * np.pi * (np.outer(j1, sub) % N) / N)
    D = np.exp(-2j * np.pi * j1 / float(1 << (r_max + 1)))
    m = len(pairs)
    recon = np.empty_like(full)
    recon[:m, :len(sub)] = B
    recon[:m, len(sub):] = D[:, None] * B
    recon[m:, :len(sub)] = B
    recon[m:, len(sub):] = -D[:, None] * B
    err = float(np.max(np.abs(full - recon)))
    return BlockFactorizationReport(err <= tol, err, m, tuple(skipped))


@dataclass(frozen=True)
class SpectralityReport:
    passed: bool
    max_err: float
    pattern: tuple[int, ...]


def spectrality_check(J: SupportSet, tol: float = 1e-9) -> SpectralityReport:
    """Pass iff F(J, I_r) F(J, I_r)^H = |J| Id with r = pivots(J).

    Passes exactly for homogeneous supports: the Gram off-diagonal entries
    are aliasing-pattern values at pair differences (all structural zeros),
    and the diagonal is |I_r|, which equals |J| iff J is homogeneous.
    """
    k = len(J)
    if k & (k - 1):
        raise InvalidInputError("spectrality check needs |J| a power of two")
    from .congruence import pivots as _pivots

    r = _pivots(J)
    pattern = pivoted_pattern(r, J.M)
    A = np.exp(-2j * np.pi * (np.outer(J.as_array(), pattern.as_array()) % J.N) / J.N)
    gram = A @ A.conj().T
    err = float(np.max(np.abs(gram - k * np.eye(k))))
    return SpectralityReport(err <= tol, err, pattern.samples)


def submatrix_unitarity(rows, cols, N: int) -> float:
    """Max deviation of F(rows, cols) F^H from |rows| Id (unitary up to scale)."""
    r = np.asarray(rows, dtype=np.int64)
    c = np.asarray(cols, dtype=np.int64)
    if r.size != c.size:
        raise InvalidInputError("square submatrix required")
    A = np.exp(-2j * np.pi * (np.outer(r % N, c % N) % N) / N)
    return float(np.max(np.abs(A @ A.conj().T - r.size * np.eye(r.size))))
