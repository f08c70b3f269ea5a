"""Empirical privacy-loss estimation from output histograms.

This is a heuristic: it reports a statistically corrected lower-confidence
estimate of the largest log-likelihood ratio between the output
distributions on two neighboring datasets. It can catch a broken mechanism;
it can never certify a correct one.
"""

from __future__ import annotations

import dataclasses
import json
import math
from collections.abc import Callable

import numpy as np
from scipy import stats

BOTTOM_BIN = "bottom"
# Bin mass at which the auditor's resolution is quoted.
RESOLUTION_MASS = 0.01


def slack(trials: int, confidence: float = 0.95, mass: float = RESOLUTION_MASS) -> float:
    """Resolution of the log-ratio estimate for a bin of probability ``mass``.

    Two binomial proportions each known to relative error z sqrt((1-p)/(N p))
    give a log ratio known to about twice that.
    """
    z = stats.norm.ppf(0.5 + confidence / 2)
    return 2 * z * math.sqrt((1 - mass) / (trials * mass))


@dataclasses.dataclass(frozen=True)
class DpAuditReport:
    epsilon_hat: float
    delta_slack: float
    trials: int
    bins: int
    confidence: float
    counts_x: tuple[int, ...]
    counts_neighbor: tuple[int, ...]
    edges: tuple[float, ...]
    worst_bin: str | None
    heuristic: bool = True

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)


def _clopper_pearson(k: np.ndarray, n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Two-sided (1 - alpha) Clopper-Pearson bounds for k successes out of n."""
    lo = np.where(k > 0, stats.beta.ppf(alpha / 2, k, n - k + 1), 0.0)
    hi = np.where(k < n, stats.beta.ppf(1 - alpha / 2, k + 1, n - k), 1.0)
    return lo, hi


def histogram(outputs_a: list, outputs_b: list, bins: int):
    """Shared equal-width bins over the observed finite outputs, plus a bottom bin."""
    fin_a = np.array([v for v in outputs_a if v is not None], dtype=float)
    fin_b = np.array([v for v in outputs_b if v is not None], dtype=float)
    both = np.concatenate([fin_a, fin_b])
    if both.size:
        lo, hi = float(both.min()), float(both.max())
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
    else:
        edges = np.linspace(0.0, 1.0, bins + 1)
    ca = np.append(np.histogram(fin_a, edges)[0], len(outputs_a) - fin_a.size)
    cb = np.append(np.histogram(fin_b, edges)[0], len(outputs_b) - fin_b.size)
    return ca, cb, edges


def estimate_epsilon(ca: np.ndarray, cb: np.ndarray, trials: int, delta: float = 0.0, confidence: float = 0.95):
    """max over bins and both directions of ln((p_lo - delta) / q_hi).

    Bounds are Clopper-Pearson at a Bonferroni-corrected level across all
    bins and both directions. Returns (epsilon_hat, worst bin index or None).
    """
    alpha = (1 - confidence) / (2 * len(ca))
    lo_a, hi_a = _clopper_pearson(ca, trials, alpha)
    lo_b, hi_b = _clopper_pearson(cb, trials, alpha)
    best, where = 0.0, None
    for lo, hi in ((lo_a, hi_b), (lo_b, hi_a)):
        num = lo - delta
        ok = num > 0
        if ok.any():
            ratios = np.full(len(ca), -np.inf)
            ratios[ok] = np.log(num[ok] / hi[ok])
            i = int(np.argmax(ratios))
            if ratios[i] > best:
                best, where = float(ratios[i]), i
    return best, where


def dp_audit(
    mechanism: Callable[[object, object], float | None],
    x,
    neighbor,
    trials: int,
    bins: int,
    rng,
    *,
    delta: float = 0.0,
    confidence: float = 0.95,
) -> DpAuditReport:
    """Run ``mechanism(dataset, stream)`` ``trials`` times on each dataset and estimate epsilon.

    Trial i on either dataset uses ``rng.spawn(2 i)`` / ``rng.spawn(2 i + 1)``,
    so the report is a pure function of the seed. None outputs are nonresponse.
    """
    if trials < 1 or bins < 1:
        raise ValueError("trials and bins must be positive")
    out_a = [mechanism(x, rng.spawn(2 * i)) for i in range(trials)]
    out_b = [mechanism(neighbor, rng.spawn(2 * i + 1)) for i in range(trials)]
    return audit_outputs(out_a, out_b, bins, delta=delta, confidence=confidence)


def audit_outputs(out_a: list, out_b: list, bins: int, *, delta: float = 0.0, confidence: float = 0.95) -> DpAuditReport:
    """The estimate from two already collected output samples of equal size."""
    if len(out_a) != len(out_b):
        raise ValueError("samples must have equal size")
    ca, cb, edges = histogram(out_a, out_b, bins)
    eps, where = estimate_epsilon(ca, cb, len(out_a), delta, confidence)
    label = None if where is None else (BOTTOM_BIN if where == bins else f"[{edges[where]:.6g}, {edges[where + 1]:.6g})")
    return DpAuditReport(
        epsilon_hat=eps,
        delta_slack=delta,
        trials=len(out_a),
        bins=bins,
        confidence=confidence,
        counts_x=tuple(int(v) for v in ca),
        counts_neighbor=tuple(int(v) for v in cb),
        edges=tuple(float(e) for e in edges),
        worst_bin=label,
    )
