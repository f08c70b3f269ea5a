"""Down-neighborhood lattices and level-wise dynamic programs over them.

A view of depth D rooted at x holds every subset z of x missing at most D
elements. Nodes are stored level by level (level = number of removed
elements). Inside a level, nodes follow the colexicographic order of their
removed-index sets, so the node at a given position is the same subset in
every view of the same root: a shallower view is a prefix of a deeper one.

Because every node at level d < D has exactly |x| - d children in the view,
child links are dense integer matrices and every pass is a numpy reduction
along one axis.
"""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np

from privwrap.config import LIMITS
from privwrap.domain import BudgetExceeded, Dataset

_BINOM_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _binom_table(n: int, pmax: int) -> np.ndarray:
    """Table B[e, p] = C(e, p) for 0 <= e <= n, 0 <= p <= pmax, as int64."""
    table = _BINOM_CACHE.get((n, pmax))
    if table is None:
        table = np.array(
            [[math.comb(e, p) for p in range(pmax + 1)] for e in range(n + 1)],
            dtype=np.int64,
        )
        _BINOM_CACHE[(n, pmax)] = table
    return table


def _colex_rank(removed: np.ndarray, binom: np.ndarray) -> np.ndarray:
    """Colex ranks of sorted index rows (shape (m, k))."""
    if removed.shape[1] == 0:
        return np.zeros(removed.shape[0], dtype=np.int64)
    positions = np.arange(1, removed.shape[1] + 1)
    return binom[removed, positions].sum(axis=1)


def _level_combos(n: int, d: int, binom: np.ndarray) -> np.ndarray:
    """All d-subsets of range(n) as sorted rows, in colex order."""
    count = math.comb(n, d)
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    lex = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), d)),
        dtype=np.int64,
        count=count * d,
    ).reshape(count, d)
    out = np.empty_like(lex)
    out[_colex_rank(lex, binom)] = lex
    return out


class LatticeView:
    """The subsets of ``root`` missing at most ``depth`` elements.

    Attributes:
        root: The dataset x.
        n: |x|.
        depth: Effective depth, min(requested depth, |x|).
        sizes: |z| for every node, int64.
        bounds: bounds[d]..bounds[d + 1] is the index range of level d.
        removed: removed[d] holds the removed root positions of level d nodes.
        children: children[d][i, t] is the index of the t-th child of the i-th
            node of level d (for d < depth).
        child_element: root position dropped along that edge.
    """

    def __init__(self, root: Dataset, depth: int):
        if depth < 0:
            raise ValueError(f"depth must be nonnegative, got {depth}")
        self.root = root
        self.n = n = root.size
        self.depth = min(depth, n)
        total = sum(math.comb(n, d) for d in range(self.depth + 1))
        if total > LIMITS.max_view_nodes:
            raise BudgetExceeded(
                f"lattice of depth {self.depth} over {n} elements has {total} nodes, "
                f"above the limit of {LIMITS.max_view_nodes}"
            )
        binom = _binom_table(n, self.depth + 1)
        self._binom = binom
        self.removed = [_level_combos(n, d, binom) for d in range(self.depth + 1)]
        counts = [len(r) for r in self.removed]
        self.bounds = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.sizes = np.repeat(np.arange(n, n - self.depth - 1, -1), counts).astype(np.int64)
        self.children = []
        self.child_element = []
        for d in range(self.depth):
            kids, elems = self._child_links(d)
            self.children.append(kids)
            self.child_element.append(elems)
        self._membership = None

    def _child_links(self, d: int) -> tuple[np.ndarray, np.ndarray]:
        n, binom = self.n, self._binom
        rows = self.removed[d]
        m = rows.shape[0]
        cand = np.broadcast_to(np.arange(n), (m, n))
        is_removed = np.zeros((m, n), dtype=bool)
        if d:
            np.put_along_axis(is_removed, rows, True, axis=1)
        # Kept positions, in increasing order, one row per parent.
        elems = cand[~is_removed].reshape(m, n - d)
        # Rank of rows[i] + {e}: removed entries below e keep their position p,
        # entries above e move to p + 1, and e itself sits at position #below + 1.
        pos = np.arange(1, d + 1)
        low = binom[rows, pos] if d else np.zeros((m, 0), dtype=np.int64)
        high = binom[rows, pos + 1] if d else np.zeros((m, 0), dtype=np.int64)
        below = rows[:, None, :] < elems[:, :, None]
        n_below = below.sum(axis=2)
        rank = np.where(below, low[:, None, :], high[:, None, :]).sum(axis=2)
        rank += binom[elems, n_below + 1]
        return rank + self.bounds[d + 1], elems

    def __len__(self) -> int:
        return int(self.bounds[-1])

    def level(self, d: int) -> slice:
        return slice(int(self.bounds[d]), int(self.bounds[d + 1]))

    def level_end(self, d: int) -> int:
        """Number of nodes in levels 0..d."""
        return int(self.bounds[min(d, self.depth) + 1])

    def depth_of(self, index: int) -> int:
        return int(np.searchsorted(self.bounds, index, side="right") - 1)

    def removed_positions(self, index: int) -> tuple[int, ...]:
        d = self.depth_of(index)
        return tuple(int(e) for e in self.removed[d][index - self.bounds[d]])

    def subset(self, index: int) -> Dataset:
        gone = set(self.removed_positions(index))
        return Dataset(tuple(e for i, e in enumerate(self.root.elements) if i not in gone))

    def mask(self, index: int) -> int:
        """Bitmask over root positions of the node's elements."""
        full = (1 << self.n) - 1
        for e in self.removed_positions(index):
            full ^= 1 << e
        return full

    def index_of_removed(self, removed: tuple[int, ...] | list[int]) -> int:
        """Node index of the subset missing exactly the given root positions."""
        rows = sorted(removed)
        d = len(rows)
        if d > self.depth:
            raise KeyError(f"subset at depth {d} lies outside a view of depth {self.depth}")
        rank = sum(math.comb(e, p) for p, e in enumerate(rows, start=1))
        return int(self.bounds[d]) + rank

    def index_of(self, z: Dataset) -> int:
        pos = self.root.positions(z)
        keep = set(pos)
        return self.index_of_removed([i for i in range(self.n) if i not in keep])

    def index_of_mask(self, mask: int) -> int:
        gone = ((1 << self.n) - 1) ^ mask
        return self.index_of_removed([i for i in range(self.n) if gone >> i & 1])

    @property
    def membership(self) -> np.ndarray:
        """Boolean matrix M[node, position] = root element kept in the node."""
        if self._membership is None:
            member = np.ones((len(self), self.n), dtype=bool)
            for d in range(1, self.depth + 1):
                block = member[self.level(d)]
                np.put_along_axis(block, self.removed[d], False, axis=1)
            self._membership = member
        return self._membership

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """All covering pairs as (parent index, child index) arrays."""
        parents = [
            np.repeat(np.arange(self.bounds[d], self.bounds[d + 1]), self.n - d)
            for d in range(self.depth)
        ]
        kids = [self.children[d].ravel() for d in range(self.depth)]
        if not parents:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        return np.concatenate(parents), np.concatenate(kids)

    def __repr__(self) -> str:
        return f"LatticeView(n={self.n}, depth={self.depth}, nodes={len(self)})"


@functools.lru_cache(maxsize=64)
def down_neighborhood(x: Dataset, depth: int) -> LatticeView:
    """The lambda-down neighborhood of x: all z in x with |x \\ z| <= depth.

    Views are immutable and cached, so repeated evaluations on the same root
    share the enumeration work.
    """
    return LatticeView(x, depth)


def down_max(view: LatticeView, values: np.ndarray) -> np.ndarray:
    """For every node z, the max of ``values`` over all subsets of z in the view."""
    out = np.array(values, dtype=float, copy=True)
    for d in range(view.depth - 1, -1, -1):
        if view.n - d == 0:
            continue
        sl = view.level(d)
        np.maximum(out[sl], out[view.children[d]].max(axis=1), out=out[sl])
    return out


def down_min_within(view: LatticeView, values: np.ndarray, radius: int) -> np.ndarray:
    """For every node z, the min of ``values`` over subsets of z at most ``radius`` below z."""
    cur = np.array(values, dtype=float, copy=True)
    for _ in range(radius):
        nxt = cur.copy()
        for d in range(view.depth):
            sl = view.level(d)
            np.minimum(cur[sl], cur[view.children[d]].min(axis=1), out=nxt[sl])
        cur = nxt
    return cur


def level_reduce(view: LatticeView, values: np.ndarray, op, upto: int | None = None) -> np.ndarray:
    """Apply a numpy reduction (e.g. ``np.min``) to each level 0..upto."""
    last = view.depth if upto is None else min(upto, view.depth)
    return np.array([op(values[view.level(d)]) for d in range(last + 1)], dtype=float)
