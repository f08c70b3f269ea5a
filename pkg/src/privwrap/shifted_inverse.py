"""Inverse loss, the generalized interior point problem, and Shifted Inverse.

For a monotone f, the inverse loss of a candidate output y is the number of
elements that must be removed from x before f drops to y or below. It has
sensitivity 1 in x, so scoring the candidates of a finite range with it gives
a low-sensitivity selection problem whose solutions lie between f(x) minus the
down sensitivity at depth lambda and f(x).
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from typing import Protocol

import numpy as np

from privwrap.domain import Dataset, RangeSpec, ValidationError
from privwrap.lattice import down_neighborhood
from privwrap.noise import RandomStream, exp_mech_finite


def shi_depth(epsilon: float, beta: float, k: int) -> int:
    """ceil((4/epsilon) ln(k/beta)) + 1, which clears lambda > (4/epsilon) ln(k/beta) - 1 with margin."""
    return math.ceil(4 / epsilon * math.log(k / beta)) + 1


def inverse_loss(f, x: Dataset, y: float, cap: int) -> int:
    """min{|x \\ s| : s in x, f(s) <= y}, or ``cap`` if that is at least cap.

    Searches level by level and stops at the first level holding a subset with
    f(s) <= y, so only DN_{cap-1}(x) is ever queried.
    """
    if cap < 1:
        raise ValidationError(f"cap must be at least 1, got {cap}")
    view = down_neighborhood(x, cap - 1)
    for d in range(view.depth + 1):
        vals = f.values(view, d)
        if vals[view.level(d)].min() <= y:
            return d
    return cap


@dataclasses.dataclass(frozen=True)
class GippInstance:
    """Scores g(x, 1..k) in [0, 1], nondecreasing for monotone f.

    The boundary conventions are g(x, 0) = 0 and g(x, k + 1) = 1.
    """

    g_values: np.ndarray
    delta: float

    def __post_init__(self):
        g = np.asarray(self.g_values, dtype=float)
        if g.ndim != 1 or g.size == 0 or np.any((g < 0) | (g > 1)):
            raise ValidationError("g values must be a nonempty vector in [0, 1]")
        if not 0 < self.delta <= 1:
            raise ValidationError(f"sensitivity must lie in (0, 1], got {self.delta}")
        object.__setattr__(self, "g_values", g)

    @property
    def k(self) -> int:
        return self.g_values.size

    def scores(self) -> np.ndarray:
        """min{g(x, j), 1 - g(x, j - 1)} for j = 1..k."""
        prev = np.concatenate([[0.0], self.g_values[:-1]])
        return np.minimum(self.g_values, 1 - prev)

    def is_solution(self, j: int) -> bool:
        """Whether the 0-based index j solves the problem: g(j) > 0 and g(j-1) < 1."""
        prev = self.g_values[j - 1] if j > 0 else 0.0
        return bool(self.g_values[j] > 0 and prev < 1)


def build_gipp(f, x: Dataset, ys: RangeSpec, lam: int) -> GippInstance:
    """g(x, j) = max(0, 1 - inverse_loss(f, x, y_j, lam + 1) / (lam + 1)).

    One level-ordered pass serves every y_j: the running minimum of f over
    levels 0..d is <= y_j exactly when the inverse loss of y_j is at most d.
    """
    if lam < 1:
        raise ValidationError(f"lambda must be at least 1, got {lam}")
    y = np.asarray(ys.values, dtype=float)
    view = down_neighborhood(x, lam)
    running = []
    best = math.inf
    for d in range(view.depth + 1):
        vals = f.values(view, d)
        best = min(best, float(vals[view.level(d)].min()))
        running.append(best)
        if best <= y[0]:
            break
    running = np.array(running)
    # First level whose running minimum is <= y; running is nonincreasing.
    loss = np.searchsorted(-running, -y, side="left").astype(float)
    loss[loss >= len(running)] = lam + 1
    loss = np.minimum(loss, lam + 1)
    return GippInstance(np.maximum(0.0, 1 - loss / (lam + 1)), 1 / (lam + 1))


class GippSolver(Protocol):
    """Anything that privately returns a solution index of a GippInstance."""

    def solve(self, instance: GippInstance, epsilon: float, rng: RandomStream) -> int: ...


class PureDPGippSolver:
    """Exponential mechanism with score min{g(x, j), 1 - g(x, j - 1)}."""

    def solve(self, instance: GippInstance, epsilon: float, rng: RandomStream) -> int:
        return exp_mech_finite(instance.scores(), epsilon, instance.delta, rng)


def shifted_inverse(
    f,
    x: Dataset,
    ys: RangeSpec,
    epsilon: float,
    delta: float,
    beta: float,
    rng: RandomStream,
    *,
    lam: int | None = None,
    solver: GippSolver | None = None,
) -> float:
    """Shifted Inverse on a function promised to be monotone.

    Private only under the monotonicity promise. With probability at least
    1 - beta the output lies in [f(x) - DS_lam(x), f(x)], and only DN_lam(x)
    is queried.

    Args:
        f: Box with ``values(view, depth)``.
        x: The dataset.
        ys: Finite output range y_1 < ... < y_k.
        epsilon: Privacy parameter.
        delta: Must be 0 unless an approximate-DP ``solver`` is supplied.
        beta: Failure probability used to set lambda.
        rng: Random stream.
        lam: Overrides the locality depth (defaults to :func:`shi_depth`).
        solver: Selection routine; the pure exponential mechanism by default.
    """
    if ys.kind != "list":
        raise ValidationError("shifted inverse needs a finite output range")
    if delta > 0 and solver is None:
        warnings.warn(
            "no approximate-DP interior point solver is installed; falling back to the pure-DP solver",
            stacklevel=2,
        )
    solver = solver or PureDPGippSolver()
    lam = shi_depth(epsilon, beta, ys.k) if lam is None else lam
    instance = build_gipp(f, x, ys, lam)
    return ys.values[solver.solve(instance, epsilon, rng)]
