"""Congruence trees over Z_N (N = 2^M): pivots, weights, heights, homogeneity.

The tree for a support set J refines J by residue mod 2^l, level by level.
A level is a pivot when some node at that level splits; equivalently when
some pair of J differs by an odd multiple of 2^l.  A set is homogeneous when
it has exactly log2|J| pivots, the fewest possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ContractViolationError, InvalidInputError

# pairwise pivot computation is O(k^2); above this size use tree refinement
PAIRWISE_SIZE_CAP = 1 << 16


def v2(x: int) -> int:
    """2-adic valuation of a nonzero integer."""
    x = int(x)
    if x == 0:
        raise InvalidInputError("v2(0) is undefined")
    return (x & -x).bit_length() - 1


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SupportSet:
    """A validated frequency support J, a nonempty subset of Z_N with N = 2^M."""

    N: int
    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not _is_power_of_two(self.N):
            raise InvalidInputError(f"N={self.N} is not a power of two")
        idx = self.indices
        if len(idx) == 0:
            raise InvalidInputError("support set is empty")
        if any(j < 0 or j >= self.N for j in idx):
            raise InvalidInputError("support indices must lie in [0, N)")
        if any(idx[i] >= idx[i + 1] for i in range(len(idx) - 1)):
            raise InvalidInputError("support indices must be strictly increasing")

    @classmethod
    def make(cls, N: int, indices: Iterable[int]) -> "SupportSet":
        ind = tuple(sorted(int(j) for j in indices))
        if len(set(ind)) != len(ind):
            raise InvalidInputError("support indices must be distinct")
        return cls(N, ind)

    @property
    def M(self) -> int:
        return self.N.bit_length() - 1

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, j: int) -> bool:
        return j in set(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)


def pivots(J: SupportSet) -> tuple[int, ...]:
    """All levels l such that some pair of J differs by an odd multiple of 2^l.

    Computed by successive partition refinement (O(k * M) index-bit work),
    which scales past the O(k^2) pairwise definition; `pivots_pairwise`
    implements the definition literally and the two must agree.
    """
    arr = J.as_array()
    if len(arr) == 1:
        return ()
    out = []
    labels = np.zeros(len(arr), dtype=np.int64)
    n_nodes = 1
    for level in range(J.M):
        bit = (arr >> level) & 1
        new_labels = labels * 2 + bit
        uniq = np.unique(new_labels)
        if len(uniq) > n_nodes:
            out.append(level)
        # compress labels so they stay small
        labels = np.searchsorted(uniq, new_labels)
        n_nodes = len(uniq)
        if n_nodes == len(arr):
            break
    # levels >= the first level at which all nodes are singletons cannot split
    return tuple(out)


def pivots_pairwise(J: SupportSet, size_cap: int = PAIRWISE_SIZE_CAP) -> tuple[int, ...]:
    """Pivot set via the pairwise definition {v2(j1 - j2)}; O(k^2)."""
    k = len(J)
    if k > size_cap:
        raise InvalidInputError(
            f"pairwise pivot computation capped at |J| <= {size_cap}; use pivots()"
        )
    arr = J.as_array()
    seen: set[int] = set()
    block = max(1, (1 << 22) // max(k, 1))
    for start in range(0, k, block):
        d = (arr[start:start + block, None] - arr[None, :]) % J.N
        d = d[d != 0]
        if d.size:
            low = d & -d
            seen.update(int(b).bit_length() - 1 for b in np.unique(low))
    return tuple(sorted(seen))


@dataclass(frozen=True)
class TreeNode:
    level: int
    residue: int
    members: tuple[int, ...]

    @property
    def weight(self) -> int:
        return len(self.members)


class CongruenceTree:
    """The mod-2^l refinement tree of J, truncated at `depth` levels.

    Level l holds one node per residue class mod 2^l that meets J.  Empty
    nodes are not stored; weight queries on them return 0.
    """

    def __init__(self, J: SupportSet, depth: int):
        if depth < 0 or depth > J.M:
            raise InvalidInputError(f"depth must be in [0, {J.M}]")
        self.support = J
        self.N = J.N
        self.M = J.M
        self.depth = depth
        self.levels: list[dict[int, TreeNode]] = []
        members = {0: list(J.indices)}
        for level in range(depth + 1):
            nodes = {
                res: TreeNode(level, res, tuple(ms)) for res, ms in sorted(members.items())
            }
            self.levels.append(nodes)
            if level < depth:
                nxt: dict[int, list[int]] = {}
                mod = 1 << (level + 1)
                for res, ms in members.items():
                    for j in ms:
                        nxt.setdefault(j % mod, []).append(j)
                members = nxt

    @property
    def root(self) -> TreeNode:
        return self.levels[0][0]

    def nodes_at_level(self, level: int) -> list[TreeNode]:
        self._check_level(level)
        return list(self.levels[level].values())

    def node(self, level: int, residue: int) -> TreeNode | None:
        self._check_level(level)
        return self.levels[level].get(residue)

    def node_weight(self, level: int, residue: int) -> int:
        n = self.node(level, residue)
        return 0 if n is None else n.weight

    def induced_weight(self, level: int, residue: int, w: Mapping[int, complex]) -> complex:
        """Sum of w over the node's members; 0 for absent nodes."""
        n = self.node(level, residue)
        if n is None:
            return 0j
        return complex(sum(w[j] for j in n.members))

    def children(self, node: TreeNode) -> tuple[TreeNode | None, TreeNode | None]:
        """(left, right) children; left carries bit `node.level` set."""
        if node.level >= self.depth:
            raise InvalidInputError("node has no stored children (below tree depth)")
        lv = self.levels[node.level + 1]
        right = lv.get(node.residue)
        left = lv.get(node.residue + (1 << node.level))
        return left, right

    def parent(self, node: TreeNode) -> TreeNode | None:
        if node.level == 0:
            return None
        return self.levels[node.level - 1][node.residue % (1 << (node.level - 1))]

    def max_weight_at_level(self, level: int) -> int:
        self._check_level(level)
        return max(n.weight for n in self.levels[level].values())

    def split_levels(self) -> tuple[int, ...]:
        """Levels (below depth) at which some stored node has two children."""
        out = []
        for level in range(self.depth):
            if len(self.levels[level + 1]) > len(self.levels[level]):
                out.append(level)
        return tuple(out)

    def _check_level(self, level: int) -> None:
        if level < 0 or level > self.depth:
            raise InvalidInputError(f"level {level} outside stored depth {self.depth}")


def build_tree(J: SupportSet, depth: int, counter=None) -> CongruenceTree:
    """Construct T^depth(J); costs O(|J| * depth) index-bit operations."""
    tree = CongruenceTree(J, depth)
    if counter is not None:
        counter.count_bit_ops(len(J) * max(depth, 1))
    return tree


@dataclass(frozen=True)
class Classification:
    kind: str  # "homogeneous" | "generic"
    pivots: tuple[int, ...]

    @property
    def is_homogeneous(self) -> bool:
        return self.kind == "homogeneous"


def classify(J: SupportSet) -> Classification:
    """Homogeneous iff |J| is a power of two and there are exactly log2|J| pivots."""
    p = pivots(J)
    k = len(J)
    if _is_power_of_two(k) and len(p) == k.bit_length() - 1:
        return Classification("homogeneous", p)
    return Classification("generic", p)


def is_part_homogeneous(J: SupportSet, r: Sequence[int]) -> bool:
    """True iff every pivot of J at or below max(r) is listed in r.

    Entries of r need not themselves be pivots, and J may have extra pivots
    above max(r).  Empty r is part-homogeneous only for singletons or sets
    whose pivots all sit above level -1, i.e. always true.
    """
    r = tuple(r)
    if not r:
        return True
    r_max = max(r)
    rset = set(r)
    return all(p in rset for p in pivots(J) if p <= r_max)


def assert_part_homogeneous(J: SupportSet, r: Sequence[int]) -> None:
    r = tuple(r)
    if not r:
        return
    r_max = max(r)
    rset = set(r)
    for p in pivots(J):
        if p <= r_max and p not in rset:
            raise ContractViolationError(
                f"support is not {r}-part-homogeneous: pivot {p} <= {r_max} missing from r"
            )


def validate_pivot_vector(r: Sequence[int], M: int) -> tuple[int, ...]:
    r = tuple(int(x) for x in r)
    if any(r[i] >= r[i + 1] for i in range(len(r) - 1)):
        raise InvalidInputError("pivot vector must be strictly increasing")
    if any(x < 0 or x >= M for x in r):
        raise InvalidInputError(f"pivots must lie in [0, {M})")
    return r


def height_of(level: int, r: Sequence[int]) -> int:
    """Number of pivots of r between `level` and max(r), endpoints included."""
    r = tuple(r)
    if not r:
        return 0
    return sum(1 for x in r if level <= x <= r[-1])


def node_heights(J: SupportSet, r: Sequence[int]) -> dict[int, int]:
    """level -> height map for an r-part-homogeneous J (contract-checked)."""
    assert_part_homogeneous(J, r)
    return {level: height_of(level, r) for level in range(J.M + 1)}
