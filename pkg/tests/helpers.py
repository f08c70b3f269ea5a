"""Random set functions on small universes, for both the engine and the oracles."""

from __future__ import annotations

import numpy as np

from privwrap import BlackBox, Dataset, RangeSpec
from privwrap.lattice import down_neighborhood


def mask_of(s) -> int:
    return sum(1 << int(e) for e in s)


class TableFn:
    """A function on subsets of {0, ..., N-1} given by a table indexed by bitmask."""

    def __init__(self, table):
        self.table = np.asarray(table, dtype=float)
        self.calls = 0

    def __call__(self, z) -> float:
        self.calls += 1
        return float(self.table[mask_of(getattr(z, "elements", z))])

    def batch(self, view, indices):
        self.calls += len(indices)
        weights = np.array([1 << int(e) for e in view.root.elements], dtype=np.int64)
        return self.table[view.membership[indices].astype(np.int64) @ weights]

    def box(self, range_spec: RangeSpec | None = None, **kw) -> BlackBox:
        return BlackBox(self, range_spec or RangeSpec.unbounded(), **kw)


def random_arbitrary(rng: np.random.Generator, n: int, hi: int = 4, integer: bool = True) -> TableFn:
    vals = rng.integers(0, hi + 1, 2**n) if integer else rng.uniform(0, hi, 2**n)
    return TableFn(vals)


def random_lipschitz(rng: np.random.Generator, n: int, c: float = 1.0, anchors: int = 3, lo=None, hi=None) -> TableFn:
    """c-Lipschitz: c times the min over random anchors a of v_a + |z xor a|, optionally clipped."""
    masks = np.arange(2**n)
    pop = np.array([bin(m).count("1") for m in range(2**n)])
    vals = np.full(2**n, np.inf)
    for a in rng.integers(0, 2**n, anchors):
        dist = pop[masks ^ a]
        vals = np.minimum(vals, rng.integers(0, n + 1) + dist)
    vals = c * vals
    if lo is not None or hi is not None:
        vals = np.clip(vals, lo, hi)
    return TableFn(vals)


def monotone_closure(table: np.ndarray, n: int) -> np.ndarray:
    """g(z) = max of table over subsets of z."""
    out = np.array(table, dtype=float)
    for b in range(n):
        bit = 1 << b
        idx = np.arange(2**n)
        has = (idx & bit) != 0
        out[has] = np.maximum(out[has], out[idx[has] ^ bit])
    return out


def random_monotone(rng: np.random.Generator, n: int, hi: int = 6) -> TableFn:
    return TableFn(monotone_closure(rng.integers(0, hi + 1, 2**n), n))


def full_view(n: int):
    """Full power-set view of {0..n-1} and the bitmask of every node."""
    view = down_neighborhood(Dataset(tuple(range(n))), n)
    masks = view.membership.astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))
    return view, masks


def node_set(view, i: int) -> frozenset:
    return frozenset(view.subset(int(i)).elements)
