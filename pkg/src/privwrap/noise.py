"""Seeded samplers: Laplace, truncated Laplace, and exponential mechanisms.

All samplers use inverse-CDF transforms of a single uniform draw, so a draw
costs a bounded amount of work and is reproducible from the seed. Uniforms are
taken from the open grid {(k + 1/2) / 2^53}, which is symmetric about 1/2 and
never hits 0 or 1.

Finite-precision leakage of floating point Laplace sampling is a known issue
that this module does not address.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Sequence

import numpy as np

from privwrap.domain import ValidationError

_GRID = 2.0**53


class RandomStream:
    """Deterministic uniform stream keyed by a 64-bit seed (Philox)."""

    def __init__(self, seed: int):
        self.seed = int(seed) % 2**64
        self.counter = 0
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def uniform(self) -> float:
        """A uniform draw from the open interval (0, 1)."""
        self.counter += 1
        k = int(self._gen.integers(0, 2**53))
        return (k + 0.5) / _GRID

    def spawn(self, index: int) -> RandomStream:
        """An independent child stream (for trials that need disjoint streams)."""
        child_seed = int(np.random.SeedSequence([self.seed, int(index)]).generate_state(1, np.uint64)[0])
        return RandomStream(child_seed)


def _check_positive(**kwargs) -> None:
    for name, value in kwargs.items():
        if not value > 0:
            raise ValidationError(f"{name} must be positive, got {value}")


def laplace_cdf(t: float | np.ndarray, scale: float):
    t = np.asarray(t, dtype=float)
    return np.where(t < 0, 0.5 * np.exp(t / scale), 1 - 0.5 * np.exp(-t / scale))


def laplace_quantile(u: float, scale: float) -> float:
    v = u - 0.5
    return -scale * math.copysign(1.0, v) * math.log1p(-2 * abs(v))


def sample_laplace(scale: float, rng: RandomStream) -> float:
    """One draw from Lap(scale), density exp(-|t|/scale) / (2 scale)."""
    _check_positive(scale=scale)
    return laplace_quantile(rng.uniform(), scale)


def truncated_laplace_cdf(t: float | np.ndarray, scale: float, bound: float):
    """CDF of Laplace(scale) conditioned on [-bound, bound]."""
    t = np.clip(np.asarray(t, dtype=float), -bound, bound)
    mass = -math.expm1(-bound / scale)
    half = 0.5 * (-np.expm1(-np.abs(t) / scale)) / mass
    return np.where(t < 0, 0.5 - half, 0.5 + half)


def truncated_laplace_quantile(u: float, scale: float, bound: float) -> float:
    v = 2 * u - 1
    mass = -math.expm1(-bound / scale)
    t = -scale * math.log1p(-abs(v) * mass)
    return math.copysign(min(t, bound), v) if v else 0.0


def sample_truncated_laplace(scale: float, bound: float, rng: RandomStream) -> float:
    """One draw from TLap(scale, bound): Laplace restricted to [-bound, bound]."""
    _check_positive(scale=scale, bound=bound)
    return truncated_laplace_quantile(rng.uniform(), scale, bound)


def _softmax(logits: np.ndarray) -> np.ndarray:
    """exp(logits) normalized, shifted by the max first so nothing overflows."""
    w = np.exp(logits - logits.max())
    return w / w.sum()


def exp_mech_probabilities(scores: Sequence[float], epsilon: float, sensitivity: float) -> np.ndarray:
    """Selection probabilities proportional to exp(epsilon * score / (2 sensitivity))."""
    _check_positive(epsilon=epsilon, sensitivity=sensitivity)
    logits = np.asarray(scores, dtype=float) * (epsilon / (2 * sensitivity))
    if logits.size == 0:
        raise ValidationError("exponential mechanism needs at least one score")
    if np.all(np.isneginf(logits)):
        raise ValidationError("all scores are -inf")
    return _softmax(logits)


def _pick(probs: np.ndarray, u: float) -> int:
    cdf = np.cumsum(probs)
    return int(min(np.searchsorted(cdf, u * cdf[-1], side="right"), len(probs) - 1))


def exp_mech_finite(scores: Sequence[float], epsilon: float, sensitivity: float, rng: RandomStream) -> int:
    """Index j drawn with probability proportional to exp(epsilon * scores[j] / (2 sensitivity))."""
    probs = exp_mech_probabilities(scores, epsilon, sensitivity)
    return _pick(probs, rng.uniform())


@dataclasses.dataclass(frozen=True)
class PiecewiseScore:
    """A score that is constant on each piece [b_i, b_{i+1}] of an interval.

    Higher scores are more likely. Values at the breakpoints themselves do not
    matter since they carry no mass.
    """

    breakpoints: tuple[float, ...]
    scores: tuple[float, ...]

    def __post_init__(self):
        b = self.breakpoints
        if len(b) < 2 or len(self.scores) != len(b) - 1:
            raise ValidationError("need k + 1 breakpoints for k scores")
        if any(not lo <= hi for lo, hi in zip(b, b[1:])):
            raise ValidationError("breakpoints must be sorted")
        if not b[-1] > b[0]:
            raise ValidationError("zero-length interval")

    def lengths(self) -> np.ndarray:
        return np.diff(np.asarray(self.breakpoints, dtype=float))

    def piece_probabilities(self, epsilon: float, sensitivity: float) -> np.ndarray:
        lengths = self.lengths()
        with np.errstate(divide="ignore"):
            logw = np.log(lengths) + np.asarray(self.scores) * (epsilon / (2 * sensitivity))
        return _softmax(logw)


def exp_mech_interval(score: PiecewiseScore, epsilon: float, sensitivity: float, rng: RandomStream) -> float:
    """A real drawn with density proportional to exp(epsilon * score(a) / (2 sensitivity))."""
    _check_positive(epsilon=epsilon, sensitivity=sensitivity)
    probs = score.piece_probabilities(epsilon, sensitivity)
    i = _pick(probs, rng.uniform())
    lo, hi = score.breakpoints[i], score.breakpoints[i + 1]
    return lo + (hi - lo) * rng.uniform()
