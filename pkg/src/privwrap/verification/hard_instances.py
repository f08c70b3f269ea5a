"""Adversarial cone functions on the hypercube, used as privacy stress tests.

A dataset is a subset of {0, ..., n-1}, identified with its indicator vector,
and Delta is Hamming distance (size of the symmetric difference). The null
function is the single cone f^k_x(z) = max(k - Delta(x, z), 0), which is
1-Lipschitz. The planted function glues a second cone of height s at y onto
it, F(z) = f^k_x(z) if Delta(x, z) < Delta(y, z) and f^s_y(z) otherwise, and
is not Lipschitz once max(k, s) > Delta(x, y) / 2.
"""

from __future__ import annotations

import dataclasses

import numpy as np

PLANTED = "planted"
NULL = "null"


@dataclasses.dataclass(frozen=True)
class HardInstance:
    n: int
    x: frozenset
    y: frozenset
    k: int
    s: int
    kind: str

    @property
    def gamma(self) -> int:
        return len(self.x ^ self.y)

    def cone(self, center: frozenset, height: int, z: frozenset) -> int:
        return max(height - len(center ^ z), 0)

    def __call__(self, z) -> float:
        """Evaluate on a frozenset, a Dataset, or any iterable of coordinates."""
        z = frozenset(getattr(z, "elements", z))
        if self.kind == NULL:
            return float(self.cone(self.x, self.k, z))
        if len(self.x ^ z) < len(self.y ^ z):
            return float(self.cone(self.x, self.k, z))
        return float(self.cone(self.y, self.s, z))

    def batch(self, view, indices: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on nodes of a lattice view whose root holds coordinates."""
        coords = np.array(view.root.elements, dtype=int)
        bits = np.zeros((len(indices), self.n), dtype=bool)
        bits[:, coords] = view.membership[indices]

        def dist(center):
            ind = np.zeros(self.n, dtype=bool)
            ind[list(center)] = True
            return (bits != ind).sum(axis=1)

        dx = dist(self.x)
        fx = np.maximum(self.k - dx, 0)
        if self.kind == NULL:
            return fx.astype(float)
        dy = dist(self.y)
        return np.where(dx < dy, fx, np.maximum(self.s - dy, 0)).astype(float)


def make_hard_instance(
    n: int, alpha: int, rho: int, gamma: int, rng: np.random.Generator, kind: str | None = None
) -> HardInstance:
    """Sample x uniformly, y at distance gamma, and two distinct heights from {2a, 4a, ..., rho}.

    ``kind`` is drawn by a fair coin unless given.
    """
    if gamma % 2 == 0:
        raise ValueError(f"gamma must be odd, got {gamma}")
    if not 1 <= gamma <= min(rho, n):
        raise ValueError(f"need 1 <= gamma <= min(rho, n), got gamma={gamma}")
    if alpha < 1 or rho % (2 * alpha):
        raise ValueError("2 alpha must divide rho")
    heights = list(range(2 * alpha, rho + 1, 2 * alpha))
    if len(heights) < 2:
        raise ValueError("need rho >= 4 alpha so that two distinct heights exist")
    x = frozenset(int(i) for i in np.flatnonzero(rng.integers(0, 2, size=n)))
    flips = frozenset(int(i) for i in rng.choice(n, size=gamma, replace=False))
    y = x ^ flips
    k, s = (int(v) for v in rng.choice(heights, size=2, replace=False))
    if kind is None:
        kind = PLANTED if rng.integers(0, 2) else NULL
    if kind not in (PLANTED, NULL):
        raise ValueError(f"unknown kind {kind!r}")
    return HardInstance(n, x, y, k, s, kind)
