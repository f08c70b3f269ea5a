"""Monotonization and the AutoSense privacy wrapper.

AutoSense makes an arbitrary black box safe for Shifted Inverse: it releases a
noisy level ell, replaces f by its level-ell monotonization (the max of f over
subsets of size at least ell, which is monotone for every f), and runs Shifted
Inverse on that. The answer sits between the min and max of f over the
lambda-down neighborhood with high probability.
"""

from __future__ import annotations

import math

import numpy as np

from privwrap.config import PAPER_PROFILE, Profile
from privwrap.domain import Dataset, RangeSpec, TransformedBox, ValidationError
from privwrap.lattice import LatticeView, down_max, down_neighborhood
from privwrap.noise import RandomStream, sample_laplace
from privwrap.output import WrapperOutput
from privwrap.shifted_inverse import GippSolver, shi_depth, shifted_inverse


class MonotonizedBox:
    """M_ell(z) = max({f(z') : z' in z, |z'| >= ell} union {sentinel}).

    Values are computed bottom-up over the down-set of the root, so the base is
    queried once per subset of size at least ell, and never on smaller ones.
    """

    def __init__(self, base, level: int, sentinel: float | None = None):
        self.base = base
        self.level = level
        self.sentinel = base.range.sentinel_low if sentinel is None else sentinel
        self.range = base.range
        self._tables: dict[Dataset, tuple[LatticeView, np.ndarray]] = {}

    @property
    def root(self):
        return self.base.root

    @property
    def ledger(self) -> int:
        return self.base.ledger

    @property
    def realized_depth(self) -> int:
        return self.base.realized_depth

    def set_guard(self, root: Dataset, depth: int | None) -> None:
        self.base.set_guard(root, depth)

    def region_depth(self, n: int) -> int:
        """Depth below a root of size n that the base gets queried at."""
        return min(n, n - self.level)

    def _table(self, root: Dataset, depth: int) -> tuple[LatticeView, np.ndarray]:
        n = root.size
        reach = min(n, max(depth, self.region_depth(n)))
        cached = self._tables.get(root)
        if cached is not None and cached[0].depth >= reach:
            return cached
        ext = down_neighborhood(root, reach)
        vals = np.full(len(ext), -np.inf)
        if self.region_depth(n) >= 0:
            fv = self.base.values(ext, self.region_depth(n))
            vals[: len(fv)] = fv
        table = np.maximum(down_max(ext, vals), self.sentinel)
        self._tables[root] = (ext, table)
        return ext, table

    def values(self, view: LatticeView, depth: int | None = None) -> np.ndarray:
        last = view.depth if depth is None else min(depth, view.depth)
        _, table = self._table(view.root, last)
        return table[: view.level_end(last)]

    def query(self, z: Dataset) -> float:
        _, table = self._table(z, 0)
        return float(table[0])


def monotonize(f, level: int, sentinel: float | None = None) -> MonotonizedBox:
    """The level-``level`` monotonization of f (sentinel defaults to inf of the range)."""
    if sentinel is None and f.range.sentinel_low == -math.inf:
        sentinel = -math.inf
    return MonotonizedBox(f, level, sentinel)


def autosense_lambda(epsilon: float, beta: float, k: int) -> int:
    """Locality of AutoSense: max(2 shi_depth(eps/2, beta/2, k), ceil(8/eps ln(2/beta))), made even."""
    lam = max(2 * shi_depth(epsilon / 2, beta / 2, k), math.ceil(8 / epsilon * math.log(2 / beta)))
    return lam + (lam % 2)


def autosense_wrap(
    f,
    x: Dataset,
    ys: RangeSpec,
    epsilon: float,
    delta: float,
    beta: float,
    rng: RandomStream,
    *,
    profile: Profile = PAPER_PROFILE,
    solver: GippSolver | None = None,
) -> WrapperOutput:
    """AutoSense: (epsilon, 0)-DP for every f, accurate up to down sensitivity.

    Releases ell = floor(|x| - 3 lam / 4 + Z) with Z ~ Lap(2/epsilon), then runs
    Shifted Inverse at depth lam/2 with (epsilon/2, beta/2) on the level-ell
    monotonization of f. With probability 1 - beta the result lies between
    the min and max of f over DN_lam(x).
    """
    if ys.kind != "list":
        raise ValidationError("AutoSense needs a finite output range")
    if not epsilon > 0 or not 0 < beta < 1:
        raise ValidationError("AutoSense needs epsilon > 0 and beta in (0, 1)")
    if f.range != ys:
        f = TransformedBox(f, lambda v, _s: ys.clamp_array(v), ys)
    lam = profile.lam if profile.lam is not None else autosense_lambda(epsilon, beta, ys.k)
    if lam < 2 or lam % 2:
        raise ValidationError(f"AutoSense needs an even lambda >= 2, got {lam}")
    n = x.size
    ell = math.floor(n - 0.75 * lam + sample_laplace(2 / epsilon, rng))
    f.set_guard(x, max(0, n - ell))
    mono = monotonize(f, ell)
    out = shifted_inverse(mono, x, ys, epsilon / 2, delta, beta / 2, rng, lam=lam // 2, solver=solver)
    return WrapperOutput(
        mechanism="autosense",
        result=out,
        released={"ell": ell, "lambda": lam},
        queries=f.ledger,
        realized_depth=f.realized_depth,
        profile=profile.name,
    )
