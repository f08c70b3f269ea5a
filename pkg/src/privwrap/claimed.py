"""Privacy wrappers for an analyst-claimed Lipschitz constant c.

All four work on f/c and rescale by c at the end. Subset Extension and
Modified TAHOE are (epsilon, delta)-DP for every f; the small-diameter
mechanism is (epsilon, 0)-DP for every f with range [0, r]; the Lipschitz
filter is deterministic and returns f(x) itself whenever f is c-Lipschitz
near x.
"""

from __future__ import annotations

import math

import numpy as np

from privwrap.config import PAPER_PROFILE, Profile
from privwrap.domain import Dataset, RangeSpec, TransformedBox, ValidationError
from privwrap.noise import RandomStream, sample_laplace, sample_truncated_laplace
from privwrap.output import WrapperOutput
from privwrap.stabilization import StabilityContext, max_stable_size, proxy_P, proxy_T


def _check_common(c: float, epsilon: float, delta: float | None = None) -> None:
    if not c > 0:
        raise ValidationError(f"c must be positive, got {c}")
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    if delta is not None and not 0 < delta < 1:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")


def subset_extension_constants(epsilon: float, delta: float, profile: Profile = PAPER_PROFILE):
    """(eps0, delta0, q, tau) of Subset Extension."""
    eps0, delta0 = epsilon / 3, delta / 2
    tau = profile.tau if profile.tau is not None else math.ceil(math.log(1 / delta0) / eps0)
    return eps0, delta0, profile.q, tau


def subset_extension(
    f, x: Dataset, c: float, epsilon: float, delta: float, rng: RandomStream, profile: Profile = PAPER_PROFILE
) -> WrapperOutput:
    """Subset Extension.

    Releases ell = ceil(|x| - q tau + R0) with R0 ~ TLap(1/eps0, tau), then
    b = 1{m_ell(x) + R1 <= (|x| + ell)/2 + 5 tau} with R1 ~ TLap(2/eps0, 2 tau).
    On b = 0 it returns c (2 T(x) - |x| + Z) with Z ~ Lap(10 q / eps0), and the
    nonresponse symbol otherwise. For c-Lipschitz f the result is distributed
    as f(x) + c Lap(10 q / eps0).
    """
    _check_common(c, epsilon, delta)
    eps0, _, q, tau = subset_extension_constants(epsilon, delta, profile)
    n = x.size
    ell = math.ceil(n - q * tau + sample_truncated_laplace(1 / eps0, tau, rng))
    released: dict = {"ell": ell}

    def output(result, diagnostics=()):
        return WrapperOutput("subset-extension", result, released, f.ledger, f.realized_depth, profile.name, list(diagnostics))

    if ell > n:
        released["b"] = 1
        return output(None, ["dataset too small for the parameters: floor above |x|"])
    f.set_guard(x, n - max(ell, 0))
    ctx = StabilityContext(f, x, ell, c)
    m = max_stable_size(ctx)
    b = int(m + sample_truncated_laplace(2 / eps0, 2 * tau, rng) <= 0.5 * (n + ell) + 5 * tau)
    released["b"] = b
    if b:
        return output(None)
    t = proxy_T(ctx, tau).value
    z = sample_laplace(10 * q / eps0, rng)
    return output(c * (2 * t - n + z))


def tahoe_constants(epsilon: float, delta: float, profile: Profile = PAPER_PROFILE):
    """(eps0, delta0, tau) of Modified TAHOE."""
    eps0, delta0 = epsilon / 4, delta / 3
    tau = profile.tau if profile.tau is not None else math.ceil(math.log(1 / delta0) / eps0)
    return eps0, delta0, tau


def modified_tahoe(
    f, x: Dataset, c: float, epsilon: float, delta: float, rng: RandomStream, profile: Profile = PAPER_PROFILE
) -> WrapperOutput:
    """Modified TAHOE.

    Releases the real floor ell = |x| - 11 tau - r1 with r1 ~ TLap(1/eps0, tau),
    draws a secret h = |x| - 2 tau - r2 with r2 ~ TLap(2/eps0, 2 tau), and
    returns nonresponse if no ell-stable subset of size >= h exists. Otherwise
    it returns f(u) + c Lap(10 tau / eps0) for u the lexicographically least
    largest ell-stable subset of size >= |x| - 4 tau.
    """
    _check_common(c, epsilon, delta)
    eps0, _, tau = tahoe_constants(epsilon, delta, profile)
    n = x.size
    ell = n - 11 * tau - sample_truncated_laplace(1 / eps0, tau, rng)
    h = n - 2 * tau - sample_truncated_laplace(2 / eps0, 2 * tau, rng)
    released = {"ell": ell}

    def output(result):
        return WrapperOutput("tahoe", result, released, f.ledger, f.realized_depth, profile.name)

    f.set_guard(x, max(0, min(n, n - math.ceil(ell))))
    ctx = StabilityContext(f, x, ell, c)
    if not np.any(ctx.stable & (ctx.sizes >= h)):
        return output(None)
    cand = np.flatnonzero(ctx.stable & (ctx.sizes >= n - 4 * tau))
    top = ctx.sizes[cand].max()
    best = min((ctx.view.subset(int(i)).elements, int(i)) for i in cand[ctx.sizes[cand] == top])[1]
    value = c * float(ctx.scaled[best])
    return output(value + c * sample_laplace(10 * tau / eps0, rng))


def _unit_box(f, c: float, r: float):
    """f clamped to [0, r], divided by c."""
    box = f
    if f.range != RangeSpec.interval(r):
        box = TransformedBox(f, lambda v, _s: np.clip(v, 0.0, r), RangeSpec.interval(r))
    return box


def small_diameter(f, x: Dataset, c: float, r: float, epsilon: float, rng: RandomStream) -> WrapperOutput:
    """Small-diameter Subset Extension: pure DP, O(r/c)-down local.

    With tau = 3 ceil(r/c), returns c (2 P_tau(x) - 3 tau / 2 + Z) for
    Z ~ Lap(10/epsilon). For c-Lipschitz f with range [0, r] the result is
    distributed as f(x) + c Lap(10/epsilon).
    """
    _check_common(c, epsilon)
    if not r > 0:
        raise ValidationError(f"r must be positive, got {r}")
    rc = r / c
    tau = 3 * math.ceil(rc)
    # Sensitivity of 2P is at most 2 (4 + 3 (r/c) / tau), which the noise scale covers.
    assert 2 * (4 + 3 * rc / tau) <= 10
    box = _unit_box(f, c, r)
    box.set_guard(x, 2 * tau)
    p = proxy_P(box, tau, x, c).value
    z = sample_laplace(10 / epsilon, rng)
    return WrapperOutput(
        "small-diameter", c * (2 * p - 1.5 * tau + z), {"tau": tau}, box.ledger, box.realized_depth, PAPER_PROFILE.name
    )


def lipschitz_filter(f, x: Dataset, c: float, r: float) -> float:
    """Deterministic local Lipschitz filter.

    Returns y_x = c (2 P_tau(x) - 3 tau / 2) with tau = ceil(r/c). The map
    x -> y_x is 14c-Lipschitz for every f with range [0, r], and y_x = f(x)
    when f is c-Lipschitz on the subsets of x missing at most 2 tau elements.
    """
    if not c > 0 or not r > 0:
        raise ValidationError("c and r must be positive")
    tau = math.ceil(r / c)
    box = _unit_box(f, c, r)
    box.set_guard(x, 2 * tau)
    return c * (2 * proxy_P(box, tau, x, c).value - 1.5 * tau)
