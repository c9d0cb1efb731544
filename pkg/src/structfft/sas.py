"""Shift-and-sample decoding: repeated shifted butterflies plus per-node
Vandermonde systems.

The transform picks a pivot vector r with the support r-part-homogeneous,
computes the generalized butterfly of tau^j f for j = 0..mu*-1 (mu* = the
largest node weight at the decoding level r_max+1), and solves one
Vandermonde system per aliased node:

    (N/|I|) * Hidft(tau^j f)(v) = sum_{l in v} Ff(l) * x_l^j,
    x_l = e^{-2 pi i l / N}.

Weight-1 nodes skip the solver and read their coefficient directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _ddc
from .congruence import (
    CongruenceTree,
    SupportSet,
    assert_part_homogeneous,
    build_tree,
    pivots as support_pivots,
    validate_pivot_vector,
)
from .core import BandlimitedSignal
from .counting import CostReport, OpCounter
from .errors import ContractViolationError, InvalidInputError
from .hidft import hidft
from .sampling import pivoted_pattern

C1 = 1.5  # per-stage butterfly constant
C2 = 6.0  # Vandermonde solve constant

SUBMATRIX_SIZE_CAP = 1 << 12

POLICIES = ("balanced", "uoe", "uoh", "random_subset", "auto")


def _log_pivot_count(k: int) -> int:
    """floor(log2 k - log2 log2 k), the stock pivot-count choice; 0 for k < 3."""
    if k < 3:
        return max(k - 1, 0)  # k=2 -> 1 pivot, k=1 -> none
    return max(int(math.floor(math.log2(k) - math.log2(math.log2(k)))), 0)


def predicted_cost(size_r: int, mu_star: int, node_weights: Sequence[int]) -> float:
    return C1 * size_r * (1 << size_r) * mu_star + C2 * sum(w * w for w in node_weights)


@dataclass(frozen=True)
class SasPlan:
    pivots: tuple[int, ...]
    decode_level: int
    mu_star: int
    node_weights: tuple[int, ...]
    predicted_cost: float

    @property
    def shifts(self) -> range:
        return range(self.mu_star)

    @classmethod
    def plan(cls, J: SupportSet, r: Sequence[int], counter: OpCounter | None = None) -> "SasPlan":
        rt = validate_pivot_vector(r, J.M)
        assert_part_homogeneous(J, rt)
        level = rt[-1] + 1 if rt else 0
        tree = build_tree(J, level, counter)
        weights = tuple(n.weight for n in tree.nodes_at_level(level))
        mu = max(weights)
        return cls(rt, level, mu, weights, predicted_cost(len(rt), mu, weights))


def _plan_bound_for_prefix(J: SupportSet, prefix: tuple[int, ...]) -> float:
    level = prefix[-1] + 1 if prefix else 0
    mod = 1 << level
    weights: dict[int, int] = {}
    for j in J.indices:
        weights[j % mod] = weights.get(j % mod, 0) + 1
    return predicted_cost(len(prefix), max(weights.values()), list(weights.values()))


def select_pivots(J: SupportSet, policy: str = "auto", family_meta: dict | None = None) -> tuple[int, ...]:
    """Choose the pivot vector for a shift-and-sample run.

    auto          minimize the predicted-cost bound over all prefixes of
                  pivots(J), smallest prefix winning ties
    balanced      pivots supplied by family metadata ("pivots")
    uoe           consecutive prefix (0..t-1), t = floor(log2 k - log2 log2 k)
    uoh           t-prefix of the base set's pivots ("base_pivots")
    random_subset same prefix rule as uoh

    The returned vector is always verified to leave J part-homogeneous.
    """
    if policy not in POLICIES:
        raise InvalidInputError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    meta = family_meta or {}
    k = len(J)
    if policy == "auto":
        p = support_pivots(J)
        best: tuple[int, ...] | None = None
        best_cost = math.inf
        for t in range(len(p) + 1):
            cost = _plan_bound_for_prefix(J, p[:t])
            if cost < best_cost:  # strict: ties keep the smaller prefix
                best, best_cost = p[:t], cost
        r = best if best is not None else ()
    elif policy == "balanced":
        if "pivots" not in meta:
            raise InvalidInputError("balanced policy needs family_meta['pivots']")
        r = tuple(int(x) for x in meta["pivots"])
    elif policy == "uoe":
        t = min(_log_pivot_count(k), J.M)
        r = tuple(range(t))
    else:  # uoh / random_subset
        if "base_pivots" not in meta:
            raise InvalidInputError(f"{policy} policy needs family_meta['base_pivots']")
        base = tuple(int(x) for x in meta["base_pivots"])
        t = min(_log_pivot_count(k), len(base))
        r = base[:t]
    rt = validate_pivot_vector(r, J.M)
    assert_part_homogeneous(J, rt)
    return rt


# Vandermonde machinery --------------------------------------------------------


def _leja_order(x: np.ndarray) -> np.ndarray:
    n = len(x)
    order = np.empty(n, dtype=np.int64)
    order[0] = int(np.argmax(np.abs(x)))
    chosen = np.zeros(n, dtype=bool)
    chosen[order[0]] = True
    prod = np.abs(x - x[order[0]])
    for t in range(1, n):
        prod_masked = np.where(chosen, -1.0, prod)
        i = int(np.argmax(prod_masked))
        order[t] = i
        chosen[i] = True
        prod = prod * np.abs(x - x[i])
    return order


def _bp_core(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bjorck-Pereyra sweep for sum_m c_m x_m^j = y_j (power rows)."""
    n = len(x)
    c = np.array(y, dtype=np.complex128)
    for k in range(0, n - 1):
        for j in range(n - 1, k, -1):
            c[j] = c[j] - x[k] * c[j - 1]
    for k in range(n - 2, -1, -1):
        for j in range(k + 1, n):
            c[j] = c[j] / (x[j] - x[j - k - 1])
        for j in range(k, n - 1):
            c[j] = c[j] - c[j + 1]
    return c


def vandermonde_solve(
    nodes,
    rhs,
    counter: OpCounter | None = None,
    phase: str = "solve",
    leja: bool = True,
) -> np.ndarray:
    """Solve sum_m c_m x_m^j = y_j for distinct nodes x_m in O(m^2) counted ops.

    The progressive elimination costs exactly 2.5*m*(m-1) operations (the
    2x2 case is 5, matching the classic count); Leja reordering of the nodes
    adds m*(m-1) more and buys backward stability on clustered nodes.  Total
    stays under the 6*m^2 budget.
    """
    x = np.asarray(nodes, dtype=np.complex128)
    y = np.asarray(rhs, dtype=np.complex128)
    if x.ndim != 1 or x.shape != y.shape:
        raise InvalidInputError("nodes and rhs must be 1-D of equal length")
    m = len(x)
    if len(np.unique(x)) != m:
        raise InvalidInputError("duplicate Vandermonde nodes")
    if m == 1:
        return y.copy()
    use_leja = leja and m >= 3
    if use_leja:
        perm = _leja_order(x)
        c = np.empty(m, dtype=np.complex128)
        c[perm] = _bp_core(x[perm], y)
    else:
        c = _bp_core(x, y)
    if counter is not None:
        half = m * (m - 1) // 2
        counter.mul(m * (m - 1), phase=phase)      # phase-1 products + divides
        counter.add(half * 3, phase=phase)         # phase-1/2 subtractions
        if use_leja:
            counter.mul(half, phase=phase)
            counter.add(half, phase=phase)
    return c


def _forward_apply(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    V = np.vander(x, len(x), increasing=True).T
    return V @ c


_MEASUREMENT_NOISE = 100 * np.finfo(np.float64).eps  # rounding already in y


def _error_estimate(x: np.ndarray, y: np.ndarray, c: np.ndarray) -> float:
    """Uncounted forward-error estimate for a decoded node system.

    Two effects matter: the solver's own error (probed by re-solving on the
    residual) and the system's amplification of the rounding noise carried
    by the measured right-hand side, gauged by the exact inf-norm of the
    inverse (cheap at these sizes, and diagnostics are not counted).
    """
    m = len(x)
    if m == 1:
        return 0.0
    denom = max(float(np.max(np.abs(c))), 1e-300)
    resid = _forward_apply(x, c) - y
    d = vandermonde_solve(x, resid, counter=None)
    est = float(np.max(np.abs(d))) / denom
    V = np.vander(x, m, increasing=True).T
    try:
        amp = float(np.linalg.norm(np.linalg.inv(V), np.inf))
    except np.linalg.LinAlgError:
        return math.inf
    noise = amp * _MEASUREMENT_NOISE * float(np.max(np.abs(y))) / denom
    return max(est, noise)


@dataclass
class NodeSystem:
    residue: int
    members: tuple[int, ...]
    escalated: bool = False
    dense_fallback: bool = False
    residual: float = 0.0

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class SasResult:
    support: SupportSet
    coeffs: np.ndarray
    plan: SasPlan
    report: CostReport
    node_systems: list[NodeSystem]

    def coeff_map(self) -> dict[int, complex]:
        return {int(j): complex(c) for j, c in zip(self.support.indices, self.coeffs)}


class _DDSampleCache:
    """Double-double samples at requested locations, lazily materialized."""

    def __init__(self, source, J: SupportSet):
        self.source = source
        self.J = J
        self._cache: dict[int, tuple] = {}

    def get(self, locations: np.ndarray):
        loc = np.asarray(locations, dtype=np.int64) % self.J.N
        missing = [int(l) for l in loc if int(l) not in self._cache]
        if missing:
            muniq = np.asarray(sorted(set(missing)), dtype=np.int64)
            if isinstance(self.source, BandlimitedSignal):
                vals = _ddc.synthesize_dd(
                    self.J.N, self.source.support.as_array(), self.source.coeffs, muniq
                )
                for i, l in enumerate(muniq):
                    self._cache[int(l)] = _ddc.cdd_index(vals, i)
            else:
                from .hidft import _fetch

                f64 = _fetch(self.source, muniq, self.J.N)
                for l, v in zip(muniq, f64):
                    self._cache[int(l)] = _ddc.cdd_from_complex(v)
        return [self._cache[int(l)] for l in loc]


def _decode_node_dd(
    cache: _DDSampleCache,
    pattern: np.ndarray,
    node: NodeSystem,
    N: int,
    scale: float,
) -> np.ndarray:
    """Re-measure and re-solve one aliased node in double-double precision."""
    tab = _ddc.root_table(N)
    m = node.size
    y_dd = []
    for j in range(m):
        samples = cache.get(pattern - j)
        kernel = tab.gather((-node.residue * pattern) % N)
        acc = _ddc.cdd_zero()
        for i in range(len(pattern)):
            term = _ddc.cdd_mul(samples[i], _ddc.cdd_index(kernel, i))
            acc = _ddc.cdd_add(acc, term)
        y_dd.append(_ddc.cdd_mul_complex(acc, complex(scale)))
    return _ddc.solve_vandermonde_dd(node.members, N, y_dd)


def sas_transform(
    source,
    J: SupportSet,
    r: Sequence[int] | None = None,
    policy: str = "auto",
    family_meta: dict | None = None,
    counter: OpCounter | None = None,
    tolerance: float = 1e-8,
) -> SasResult:
    """Recover (F f)_J from mu* shifted butterfly passes plus node decodes.

    Shift j reads samples at (I_r - j) mod N.  Conditioning guard: after the
    counted float64 decode of a node, an uncounted re-solve estimates the
    forward error; nodes estimated above tolerance/20 are re-measured and
    re-solved in double-double precision (flagged, counts unchanged), which
    restores the exact-arithmetic accuracy the operation-count model assumes.
    """
    counter = counter if counter is not None else OpCounter()
    if r is None:
        rt = select_pivots(J, policy, family_meta)
    else:
        rt = validate_pivot_vector(r, J.M)
    assert_part_homogeneous(J, rt)
    plan = SasPlan.plan(J, rt, counter)
    mu = plan.mu_star
    N = J.N
    pattern = pivoted_pattern(rt, J.M).as_array() if rt else np.zeros(1, dtype=np.int64)
    scale = N / len(pattern)

    measured: list[dict[int, complex]] = []
    for j in range(mu):
        res = hidft(source, J, rt, height=0, shift=j, counter=counter)
        measured.append(res.values)

    samples_touched = int(np.unique(
        (pattern[None, :] - np.arange(mu)[:, None]) % N
    ).size)

    tree = build_tree(J, plan.decode_level)
    esc_threshold = tolerance / 20.0
    dd_cache: _DDSampleCache | None = None
    coeff_of: dict[int, complex] = {}
    systems: list[NodeSystem] = []
    escalated = 0
    fallbacks = 0
    for nodeobj in tree.nodes_at_level(plan.decode_level):
        m = nodeobj.weight
        resid = nodeobj.residue
        node = NodeSystem(resid, nodeobj.members)
        raw = np.asarray([measured[j][resid] for j in range(m)], dtype=np.complex128)
        if m == 1:
            if scale == 1.0:
                val = raw[0]
            else:
                counter.mul(1, phase="read")
                val = raw[0] * scale
            coeff_of[nodeobj.members[0]] = complex(val)
            systems.append(node)
            continue
        if scale != 1.0:
            counter.mul(m, phase="solve")
        y = raw * scale
        x = np.exp(-2j * np.pi * np.asarray(nodeobj.members, dtype=np.float64) / N)
        c = vandermonde_solve(x, y, counter=counter, phase="solve")
        est = _error_estimate(x, y, c)
        if est > esc_threshold:
            if dd_cache is None:
                dd_cache = _DDSampleCache(source, J)
                all_locs = (pattern[None, :] - np.arange(mu)[:, None]).ravel() % N
                dd_cache.get(np.unique(all_locs))
            c = _decode_node_dd(dd_cache, pattern, node, N, scale)
            node.escalated = True
            escalated += 1
        node.residual = float(
            np.linalg.norm(_forward_apply(x, c) - y) / max(np.linalg.norm(y), 1e-300)
        )
        if node.residual > max(tolerance, 1e-9) and not node.escalated:
            # backward-stability failure: dense fallback, dense cost
            c = np.linalg.solve(np.vander(x, m, increasing=True).T, y)
            node.dense_fallback = True
            fallbacks += 1
            counter.mul(m ** 3, phase="solve")
            counter.add(m ** 3, phase="solve")
        for l, cl in zip(nodeobj.members, c):
            coeff_of[l] = complex(cl)
        systems.append(node)

    coeffs = np.asarray([coeff_of[j] for j in J.indices], dtype=np.complex128)
    report = CostReport.from_counter(
        counter,
        samples_touched=samples_touched,
        bound_alg1bnd=plan.predicted_cost,
        bound_hidft=C1 * len(rt) * (1 << len(rt)),
        escalated_nodes=escalated,
        dense_fallbacks=fallbacks,
    )
    return SasResult(J, coeffs, plan, report, systems)


def submatrix_method(
    J: SupportSet,
    source,
    counter: OpCounter | None = None,
    tolerance: float = 1e-8,
) -> np.ndarray:
    """O(k^2) baseline: solve the k x k system from the first k samples.

    N f(i) = sum_l c_l e^{+2 pi i i l / N} for i = 0..k-1; the matrix is
    Vandermonde in the nodes e^{+2 pi i l / N}.  Works for any support, at
    quadratic cost; the same conditioning guard as the node decoder applies.
    """
    k = len(J)
    if k > SUBMATRIX_SIZE_CAP:
        raise InvalidInputError(f"submatrix baseline capped at k <= {SUBMATRIX_SIZE_CAP}")
    counter = counter if counter is not None else OpCounter()
    from .hidft import _fetch

    f = _fetch(source, np.arange(k), J.N)
    counter.mul(k, phase="solve")
    y = f * J.N
    x = np.exp(2j * np.pi * J.as_array() / J.N)
    c = vandermonde_solve(x, y, counter=counter, phase="solve")
    est = _error_estimate(x, y, c)
    if est > tolerance / 20.0:
        cache = _DDSampleCache(source, J)
        tab = _ddc.root_table(J.N)
        y_dd = [
            _ddc.cdd_mul_complex(s, complex(J.N)) for s in cache.get(np.arange(k))
        ]
        c = _ddc.solve_vandermonde_dd([(-l) % J.N for l in J.indices], J.N, y_dd)
    return c
