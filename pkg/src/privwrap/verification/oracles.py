"""Brute-force reference implementations.

Everything here works on plain frozensets and plain callables, enumerates
subsets with itertools, and evaluates definitions literally. Nothing is
imported from the engine, so a shared bug cannot make an oracle agree with
the code it checks. Only use these on tiny sets.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterable

SetFn = Callable[[frozenset], float]


def subsets(x: Iterable, min_size: int = 0) -> list[frozenset]:
    """All subsets of x with at least ``min_size`` elements, largest first."""
    items = sorted(x)
    out = []
    for size in range(len(items), max(min_size, 0) - 1, -1):
        out.extend(frozenset(c) for c in itertools.combinations(items, size))
    return out


def down_neighborhood(x: Iterable, lam: int) -> list[frozenset]:
    x = frozenset(x)
    return subsets(x, len(x) - lam)


def down_neighborhood_bfs(x: Iterable, lam: int) -> set[frozenset]:
    """Same set as :func:`down_neighborhood`, built by repeated single removals."""
    frontier = {frozenset(x)}
    seen = set(frontier)
    for _ in range(lam):
        frontier = {z - {e} for z in frontier for e in z} - seen
        seen |= frontier
    return seen


def down_sensitivity(f: SetFn, x: Iterable, lam: int) -> float:
    x = frozenset(x)
    fx = f(x)
    return max(abs(fx - f(z)) for z in down_neighborhood(x, lam))


def down_sensitivity_bfs(f: SetFn, x: Iterable, lam: int) -> float:
    x = frozenset(x)
    fx = f(x)
    return max(abs(fx - f(z)) for z in down_neighborhood_bfs(x, lam))


def lipschitz_on(f: SetFn, domain: Iterable[frozenset], c: float = 1.0, tol: float = 1e-9) -> bool:
    """Whether |f(z) - f(z + e)| <= c on every covering pair inside ``domain``."""
    dom = set(domain)
    for z in dom:
        for e in z:
            if z - {e} in dom and abs(f(z) - f(z - {e})) > c + tol:
                return False
    return True


def lipschitz_on_dn(f: SetFn, x: Iterable, lam: int, c: float = 1.0) -> bool:
    return lipschitz_on(f, down_neighborhood(x, lam), c)


def is_monotone_on(f: SetFn, domain: Iterable[frozenset], tol: float = 1e-9) -> bool:
    dom = set(domain)
    return all(f(z - {e}) <= f(z) + tol for z in dom for e in z if z - {e} in dom)


def inverse_loss(f: SetFn, x: Iterable, y: float) -> float:
    """min |x \\ s| over s in x with f(s) <= y (inf if none)."""
    x = frozenset(x)
    losses = [len(x) - len(s) for s in subsets(x) if f(s) <= y]
    return min(losses, default=math.inf)


def monotonize(f: SetFn, x: Iterable, level: int, sentinel: float) -> float:
    """max({f(z) : z in x, |z| >= level} union {sentinel})."""
    return max([f(z) for z in subsets(x, level)] + [sentinel])


def is_stable(f: SetFn, u: Iterable, level: float, c: float = 1.0, tol: float = 1e-9) -> bool:
    """|u| >= level and f/c is 1-Lipschitz on all subsets of u of size >= level."""
    u = frozenset(u)
    if len(u) < level:
        return False
    return lipschitz_on(lambda z: f(z) / c, [z for z in subsets(u) if len(z) >= level], 1.0, tol)


def stabilize(f: SetFn, x: Iterable, level: float, h: float, sentinel: float, c: float = 1.0, g: SetFn | None = None) -> float:
    """max of g over level-stable (w.r.t. f/c) subsets of x of size >= h, else sentinel.

    ``g`` defaults to f/c.
    """
    g = g or (lambda z: f(z) / c)
    vals = [g(u) for u in subsets(x) if len(u) >= h and is_stable(f, u, level, c)]
    return max(vals + [sentinel])


def max_stable_size(f: SetFn, x: Iterable, level: float, c: float = 1.0) -> int:
    sizes = [len(u) for u in subsets(x) if is_stable(f, u, level, c)]
    if not sizes:
        raise ValueError("no stable subset")
    return max(sizes)


def proxy_T(f: SetFn, x: Iterable, level: float, tau: int, c: float = 1.0) -> float:
    """Mean over h = m - tau .. m of the stabilization of (f/c + |z|)/2."""
    x = frozenset(x)
    m = max_stable_size(f, x, level, c)
    chat = lambda z: 0.5 * (f(z) / c + len(z))  # noqa: E731
    terms = [stabilize(f, x, level, h, -math.inf, c, chat) for h in range(m - tau, m + 1)]
    return math.fsum(terms) / (tau + 1)


def proxy_P(f: SetFn, x: Iterable, tau: int, floor: float, c: float = 1.0) -> float:
    """Mean over level in |x|-2tau..|x|-tau and h in |x|-tau..|x| of the
    stabilization of max((f/c + |z| - level)/2, floor), sentinel ``floor``."""
    x = frozenset(x)
    n = len(x)
    terms = []
    for level in range(n - 2 * tau, n - tau + 1):
        g = lambda z, lv=level: max(0.5 * (f(z) / c + len(z) - lv), floor)  # noqa: E731
        for h in range(n - tau, n + 1):
            terms.append(stabilize(f, x, level, h, floor, c, g))
    return math.fsum(terms) / (tau + 1) ** 2


def double_monotonize(f: SetFn, x: Iterable, level: int) -> float:
    """max({(f(z) + |z| - level)/2 : z in x, |z| >= level} union {-level/2})."""
    return max([0.5 * (f(z) + len(z) - level) for z in subsets(x, level)] + [-level / 2])


def offset(g: SetFn, x: Iterable, j: int) -> float:
    """min over z in DN_j(x) of g(z) - |z| + |x| - j."""
    x = frozenset(x)
    return min(g(z) - len(z) + len(x) - j for z in down_neighborhood(x, j))


def median_score(a: float, y: Iterable[float]) -> int:
    """Fewest entries of y to change so that at least floor(m/2) entries lie
    strictly below a and at least floor(m/2) strictly above, found by search."""
    y = list(y)
    half = len(y) // 2
    for k in range(len(y) + 1):
        for idx in itertools.combinations(range(len(y)), k):
            # Changed entries go wherever they help most: try every split.
            keep = [v for i, v in enumerate(y) if i not in idx]
            below = sum(v < a for v in keep)
            above = sum(v > a for v in keep)
            if any(below + s >= half and above + k - s >= half for s in range(k + 1)):
                return k
    return len(y)
