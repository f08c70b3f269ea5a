"""Stability, stabilization, and the proxy functions T and P.

A set u is ell-stable for f when |u| >= ell and f is 1-Lipschitz on every
covering edge among subsets of u of size at least ell. A claimed Lipschitz
constant c is handled by working with f/c throughout.

Stability is decided from the violating edges of the down-set: u is unstable
exactly when some violating edge (z, z + i) with |z| >= ell lies under u, and
that propagates bottom-up in one pass over the lattice.

Every quantity comes in two forms: a value at the root x (what the mechanisms
use) and a nodewise table giving the value at every node of a view (what the
structural checks use, on full power sets).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from privwrap.config import LIMITS
from privwrap.domain import Dataset, RangeSpec, TransformedBox, ValidationError
from privwrap.lattice import LatticeView, down_max, down_neighborhood


@dataclasses.dataclass(frozen=True)
class ProxyValue:
    """A proxy value with an optional witness subset."""

    value: float
    contributing: tuple[Dataset, ...] | None = None


def stable_flags(view: LatticeView, values: np.ndarray, level: float, tol: float | None = None):
    """Nodewise ell-stability and the per-level violating-edge matrices.

    ``values`` must already be divided by c, and be defined on every node of
    size at least ceil(level). The view must reach that size.
    """
    tol = LIMITS.lipschitz_tol if tol is None else tol
    lo = math.ceil(level)
    n = view.n
    bad = np.zeros(len(view), dtype=bool)
    violating = []
    for d in range(view.depth - 1, -1, -1):
        if n - d - 1 < lo:
            violating.append(None)
            continue
        sl, kids = view.level(d), view.children[d]
        viol = np.abs(values[sl][:, None] - values[kids]) > 1 + tol
        violating.append(viol)
        bad[sl] = (viol | bad[kids]).any(axis=1)
    violating.reverse()
    return (view.sizes >= lo) & ~bad, violating


class StabilityContext:
    """Stability of every subset of x with respect to f/c at a floor level.

    Args:
        f: Box with ``values(view, depth)``.
        x: Root dataset.
        level: Floor ell (may be real; sizes are compared against ceil(ell)).
        c: Claimed Lipschitz constant; stability is tested on f/c.
        depth: Optional larger view depth (the view always reaches size ell).
    """

    def __init__(self, f, x: Dataset, level: float, c: float = 1.0, depth: int | None = None):
        if not c > 0:
            raise ValidationError(f"c must be positive, got {c}")
        self.f, self.x, self.level, self.c = f, x, level, c
        n = x.size
        lo = math.ceil(level)
        self.region = min(n, n - lo)
        reach = max(self.region, 0 if depth is None else depth)
        self.view = down_neighborhood(x, reach)
        self.scaled = np.full(len(self.view), np.nan)
        if self.region >= 0:
            fv = f.values(self.view, self.region)
            self.scaled[: len(fv)] = fv / c
        self.stable, self._violating = stable_flags(self.view, self.scaled, level)
        self.sentinel = f.range.sentinel_low / c

    @property
    def sizes(self) -> np.ndarray:
        return self.view.sizes

    @property
    def violation_count(self) -> int:
        return int(sum(v.sum() for v in self._violating if v is not None))

    def violating_edges(self) -> list[tuple[Dataset, Dataset]]:
        """Violating covering pairs (smaller set, larger set) with the smaller of size >= ell."""
        pairs = []
        for d, viol in enumerate(self._violating):
            if viol is None:
                continue
            start = self.view.bounds[d]
            for i, t in zip(*np.nonzero(viol)):
                parent = int(start + i)
                child = int(self.view.children[d][i, t])
                pairs.append((self.view.subset(child), self.view.subset(parent)))
        return pairs

    def index(self, u: Dataset) -> int:
        try:
            return self.view.index_of(u)
        except KeyError:
            raise ValidationError("subset lies outside the precomputed view") from None

    def size_profile(self, values: np.ndarray) -> np.ndarray:
        """prof[s] = max of values over stable subsets of x of size s (-inf if none)."""
        prof = np.full(self.x.size + 1, -np.inf)
        masked = np.where(self.stable, values, -np.inf)
        for d in range(self.view.depth + 1):
            prof[self.x.size - d] = masked[self.view.level(d)].max()
        return prof


def is_stable(ctx: StabilityContext, u: Dataset) -> bool:
    """Whether u is ell-stable with respect to f/c."""
    return bool(ctx.stable[ctx.index(u)])


def _suffix_max(prof: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(prof[::-1])[::-1]


def _at_least(suffix: np.ndarray, h: float) -> float:
    """max over sizes >= h, given the suffix maxima over sizes 0..n."""
    s = max(math.ceil(h), 0)
    return -np.inf if s >= len(suffix) else float(suffix[s])


def stabilize(
    ctx: StabilityContext,
    h: float,
    x: Dataset | None = None,
    values: np.ndarray | None = None,
    sentinel: float | None = None,
    trace: bool = False,
) -> ProxyValue:
    """S_{ell,h}(x): max of the values over ell-stable subsets of x of size >= h.

    Values default to f/c. Returns the sentinel (inf of the range) when there
    is no such subset. ``x`` defaults to the context root; any node of the
    context view is allowed.
    """
    values = ctx.scaled if values is None else values
    sentinel = ctx.sentinel if sentinel is None else sentinel
    if x is not None and x != ctx.x:
        table = stabilization_table(ctx, h, values, sentinel)
        return ProxyValue(float(table[ctx.index(x)]))
    masked = np.where(ctx.stable & (ctx.sizes >= h), values, -np.inf)
    best = int(np.argmax(masked))
    if masked[best] == -np.inf:
        return ProxyValue(float(sentinel), () if trace else None)
    witness = (ctx.view.subset(best),) if trace else None
    return ProxyValue(float(max(masked[best], sentinel)), witness)


def stabilization_table(ctx: StabilityContext, h: float, values=None, sentinel=None) -> np.ndarray:
    """S_{ell,h}(z) for every node z of the context view."""
    values = ctx.scaled if values is None else values
    sentinel = ctx.sentinel if sentinel is None else sentinel
    masked = np.where(ctx.stable & (ctx.sizes >= h), values, -np.inf)
    return np.maximum(down_max(ctx.view, masked), sentinel)


def max_stable_size(ctx: StabilityContext, x: Dataset | None = None) -> int:
    """m_ell(x): the size of the largest ell-stable subset of x (at least ell)."""
    if x is not None and x != ctx.x:
        m = max_stable_size_table(ctx)[ctx.index(x)]
    else:
        m = ctx.sizes[ctx.stable].max() if ctx.stable.any() else -np.inf
    if m == -np.inf:
        raise ValidationError(f"no stable subset: |x| is below the floor {ctx.level}")
    return int(m)


def max_stable_size_table(ctx: StabilityContext) -> np.ndarray:
    """m_ell(z) for every node z (-inf where |z| < ell)."""
    return down_max(ctx.view, np.where(ctx.stable, ctx.sizes, -np.inf).astype(float))


def cond_monotonize(f) -> TransformedBox:
    """The conditional monotonization (f(z) + |z|) / 2."""
    return TransformedBox(f, lambda v, s: 0.5 * (v + s), RangeSpec.unbounded())


def cond_monotonize_level(f, level: float, variant: str = "floored") -> TransformedBox:
    """(f(z) + |z| - ell) / 2, floored at inf of f's range for the floored variant."""
    floor = f.range.sentinel_low
    if variant == "unfloored" or floor == -math.inf:
        return TransformedBox(f, lambda v, s: 0.5 * (v + s - level), RangeSpec.unbounded())
    if variant != "floored":
        raise ValidationError(f"unknown variant {variant!r}")
    return TransformedBox(
        f,
        lambda v, s: np.maximum(0.5 * (v + s - level), floor),
        RangeSpec("interval", lo=floor, hi=math.inf),
    )


def proxy_T(ctx: StabilityContext, tau: int, x: Dataset | None = None) -> ProxyValue:
    """T(x): exact mean of S_{ell,h}(x) of (f/c + |z|)/2 over h = m(x) - tau .. m(x)."""
    if tau < 1:
        raise ValidationError(f"tau must be at least 1, got {tau}")
    if x is not None and x != ctx.x:
        return ProxyValue(float(proxy_T_table(ctx, tau)[ctx.index(x)]))
    m = max_stable_size(ctx)
    chat = 0.5 * (ctx.scaled + ctx.sizes)
    suffix = _suffix_max(ctx.size_profile(chat))
    # h <= m always leaves the size-m stable set, so no sentinel reaches the sum.
    terms = [_at_least(suffix, h) for h in range(m - tau, m + 1)]
    return ProxyValue(math.fsum(terms) / (tau + 1))


def proxy_T_table(ctx: StabilityContext, tau: int) -> np.ndarray:
    """T(z) for every node z (NaN where |z| < ell)."""
    n = ctx.x.size
    chat = 0.5 * (ctx.scaled + ctx.sizes)
    m = max_stable_size_table(ctx)
    tables = np.stack([stabilization_table(ctx, h, chat, -np.inf) for h in range(n + 1)])
    out = np.full(len(ctx.view), np.nan)
    for i in np.flatnonzero(np.isfinite(m)):
        hs = np.clip(np.arange(m[i] - tau, m[i] + 1), 0, n).astype(int)
        out[i] = math.fsum(tables[hs, i]) / (tau + 1)
    return out


def proxy_P(f, tau: int, x: Dataset, c: float = 1.0) -> ProxyValue:
    """P_tau(x) of f/c: exact mean over ell in |x|-2tau..|x|-tau and
    h in |x|-tau..|x| of S_{ell,h}(x) applied to the floored level-ell
    conditional monotonization, with sentinel the floor of f/c's range.

    Queries stay inside DN_{2 tau}(x).
    """
    if tau < 1:
        raise ValidationError(f"tau must be at least 1, got {tau}")
    n = x.size
    view = down_neighborhood(x, 2 * tau)
    vals = f.values(view) / c
    floor = f.range.sentinel_low / c
    total = []
    for ell in range(n - 2 * tau, n - tau + 1):
        stable, _ = stable_flags(view, vals, ell)
        chat = np.maximum(0.5 * (vals + view.sizes - ell), floor)
        prof = np.full(n + 1, -np.inf)
        masked = np.where(stable, chat, -np.inf)
        for d in range(view.depth + 1):
            prof[n - d] = masked[view.level(d)].max()
        suffix = _suffix_max(prof)
        total.extend(max(_at_least(suffix, h), floor) for h in range(n - tau, n + 1))
    return ProxyValue(math.fsum(total) / (tau + 1) ** 2)


def proxy_P_table(f, tau: int, root: Dataset, c: float = 1.0) -> np.ndarray:
    """P_tau(z) for every subset z of ``root`` (full power-set view)."""
    n = root.size
    view = down_neighborhood(root, n)
    vals = f.values(view) / c
    floor = f.range.sentinel_low / c
    sizes = view.sizes
    # S[ell][h] tables for every level the nodes need.
    cache: dict[int, np.ndarray] = {}
    for ell in range(-2 * tau, n - tau + 1):
        stable, _ = stable_flags(view, vals, ell)
        chat = np.maximum(0.5 * (vals + sizes - ell), floor)
        cache[ell] = np.stack(
            [np.maximum(down_max(view, np.where(stable & (sizes >= h), chat, -np.inf)), floor) for h in range(n + 1)]
        )
    out = np.empty(len(view))
    for i, s in enumerate(sizes):
        terms = [
            cache[ell][max(h, 0), i]
            for ell in range(s - 2 * tau, s - tau + 1)
            for h in range(s - tau, s + 1)
        ]
        out[i] = math.fsum(terms) / (tau + 1) ** 2
    return out
