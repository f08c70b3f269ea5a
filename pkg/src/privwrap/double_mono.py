"""Double monotonization, offsets, and the median exponential mechanism.

The wrapper turns any f with range [0, r] into a monotone function g (the
level-ell monotonization of (f + |z| - ell)/2), reads off the offsets
g_0(x), ..., g_tau(x), and privately picks a median of them. For Lipschitz f
the offsets are evenly spaced and the noise that results is symmetric about
f(x) with exponential tails, under pure DP.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from privwrap.autosense import MonotonizedBox
from privwrap.claimed import _unit_box
from privwrap.domain import Dataset, RangeSpec, TransformedBox, ValidationError
from privwrap.lattice import LatticeView, down_min_within, down_neighborhood
from privwrap.noise import PiecewiseScore, RandomStream, exp_mech_interval, sample_laplace
from privwrap.output import WrapperOutput
from privwrap.stabilization import cond_monotonize_level


def double_monotonize(f, level: int) -> MonotonizedBox:
    """g(z) = max({(f(z') + |z'| - ell)/2 : z' in z, |z'| >= ell} union {-ell/2})."""
    return MonotonizedBox(cond_monotonize_level(f, level, "unfloored"), level, sentinel=-level / 2)


def offsets(g, x: Dataset, tau: int) -> np.ndarray:
    """y_j = g_j(x) = min over z in DN_j(x) of g(z) - |z| + |x| - j, for j = 0..tau.

    One pass over levels: the minimum over DN_j is the running minimum of the
    per-level minima of g(z) - |z|.
    """
    if tau < 0:
        raise ValidationError(f"tau must be nonnegative, got {tau}")
    n = x.size
    depth = min(tau, n)
    view = down_neighborhood(x, depth)
    gv = g.values(view, depth)
    shifted = gv - view.sizes[: len(gv)]
    running = np.minimum.accumulate([shifted[view.level(d)].min() for d in range(depth + 1)])
    j = np.arange(tau + 1)
    return n - j + running[np.minimum(j, depth)]


def offset(g, j: int, x: Dataset) -> float:
    """The j-th offset g_j(x)."""
    return float(offsets(g, x, j)[j])


def offsets_table(view: LatticeView, gvals: np.ndarray, j: int) -> np.ndarray:
    """g_j(z) for every node z of a view (exact where z's subsets down to depth j are in view)."""
    return down_min_within(view, gvals - view.sizes, j) + view.sizes - j


def median_score(a: float, y: Sequence[float]) -> float:
    """max(0, K - #{y_i < a}, K - #{y_i > a}) with K = floor(m/2), m = len(y).

    Changing one y_i moves each count by at most one, so the score has
    sensitivity 1 under interleaving. On evenly spaced y_0 < ... < y_tau with
    tau even it equals floor(|center - a|) inside the span and tau/2 outside.
    """
    y = np.asarray(y, dtype=float)
    k = len(y) // 2
    return float(max(0, k - np.sum(y < a), k - np.sum(y > a)))


def median_score_pieces(y: Sequence[float], lo: float, hi: float) -> PiecewiseScore:
    """The median score on [lo, hi] as a piecewise constant utility (-score)."""
    if len(y) == 0:
        raise ValidationError("median of an empty list")
    inner = sorted({float(v) for v in y if lo < v < hi})
    bps = [float(lo), *inner, float(hi)]
    utilities = tuple(-median_score(0.5 * (a + b), y) for a, b in zip(bps, bps[1:]))
    return PiecewiseScore(tuple(bps), utilities)


def median_exp_mech(y: Sequence[float], epsilon0: float, interval: tuple[float, float], rng: RandomStream) -> float:
    """A point of ``interval`` drawn with density proportional to exp(-(epsilon0/2) score(a; y))."""
    lo, hi = interval
    return exp_mech_interval(median_score_pieces(y, lo, hi), epsilon0, 1.0, rng)


def double_mono_tau(r: float, epsilon: float, beta: float) -> int:
    """ceil((16/epsilon) ln(4 r / beta)); requires r to be at least the unrounded value."""
    threshold = 16 / epsilon * math.log(4 * r / beta)
    if r < threshold:
        raise ValidationError(f"need r >= (16/epsilon) ln(4r/beta) = {threshold:.3f}, got r = {r}")
    return math.ceil(threshold)


def double_mono_wrap(
    f, x: Dataset, r: float, epsilon: float, beta: float, rng: RandomStream, c: float = 1.0
) -> WrapperOutput:
    """Double-monotonization privacy wrapper, (epsilon, 0)-DP for every f.

    Releases w = |x| + Lap(2/epsilon) and ell = floor(w - tau - (2/epsilon) ln(2/beta)),
    computes the offsets of the level-ell double monotonization of f/c, picks
    their private median a on [-3 tau/2, (r/c + 5 tau)/2], and returns
    c (2a + tau + ell - w).
    """
    if not epsilon > 0 or not 0 < beta < 1 or not c > 0:
        raise ValidationError("need epsilon > 0, beta in (0, 1) and c > 0")
    rc = r / c
    tau = double_mono_tau(rc, epsilon, beta)
    n = x.size
    w = n + sample_laplace(2 / epsilon, rng)
    ell = math.floor(w - tau - 2 / epsilon * math.log(2 / beta))
    box = _unit_box(f, c, r)
    unit = box if c == 1 else TransformedBox(box, lambda v, _s: v / c, RangeSpec.interval(rc))
    box.set_guard(x, max(0, min(n, n - ell)))
    ys = offsets(double_monotonize(unit, ell), x, tau)
    a = median_exp_mech(ys, epsilon / 2, (-1.5 * tau, (rc + 5 * tau) / 2), rng)
    return WrapperOutput(
        "double-mono",
        c * (2 * a + tau + ell - w),
        {"w": w, "ell": ell, "tau": tau},
        box.ledger,
        box.realized_depth,
        "paper-faithful",
    )
