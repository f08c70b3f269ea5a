"""Built-in black boxes for the command line and the experiments.

Each one is a plain callable on datasets plus a vectorized ``batch`` over
lattice views. Numeric builtins read an element's value as the element
itself, or as its first component for multiset-adapted elements (v, i).
"""

from __future__ import annotations

import warnings

import numpy as np

from privwrap.domain import Dataset, ValidationError


def element_value(e) -> float:
    if isinstance(e, tuple):
        e = e[0]
    try:
        return float(e)
    except (TypeError, ValueError):
        raise ValidationError(f"element {e!r} is not numeric") from None


def _root_values(view) -> np.ndarray:
    return np.array([element_value(e) for e in view.root.elements], dtype=float)


class Count:
    name = "count"

    def __call__(self, z: Dataset) -> float:
        return float(z.size)

    def batch(self, view, indices):
        return view.sizes[indices].astype(float)


class Constant:
    def __init__(self, value: float):
        self.value = float(value)
        self.name = f"constant:{value}"

    def __call__(self, z: Dataset) -> float:
        return self.value

    def batch(self, view, indices):
        return np.full(len(indices), self.value)


class SumClamped:
    """Sum of the values clipped to [lo, hi]."""

    def __init__(self, lo: float = 0.0, hi: float = 1.0):
        if not hi >= lo:
            raise ValidationError(f"clamp interval needs lo <= hi, got [{lo}, {hi}]")
        self.lo, self.hi = float(lo), float(hi)
        self.name = f"sum-clamped:{lo}:{hi}"

    def _clip(self, v):
        return np.clip(v, self.lo, self.hi)

    def __call__(self, z: Dataset) -> float:
        return float(self._clip(np.array([element_value(e) for e in z], dtype=float)).sum())

    def batch(self, view, indices):
        return view.membership[indices] @ self._clip(_root_values(view))


class AverageClamped(SumClamped):
    """Mean of the values clipped to [lo, hi]; the empty set maps to the midpoint."""

    def __init__(self, lo: float = 0.0, hi: float = 1.0):
        super().__init__(lo, hi)
        self.name = f"average-clamped:{lo}:{hi}"

    def __call__(self, z: Dataset) -> float:
        if z.size == 0:
            return 0.5 * (self.lo + self.hi)
        return super().__call__(z) / z.size

    def batch(self, view, indices):
        sizes = view.sizes[indices]
        sums = super().batch(view, indices)
        return np.where(sizes > 0, sums / np.maximum(sizes, 1), 0.5 * (self.lo + self.hi))


class Median:
    """Median of the values (mean of the middle two for even sizes); 0 on the empty set."""

    name = "median"

    def __call__(self, z: Dataset) -> float:
        if z.size == 0:
            return 0.0
        return float(np.median([element_value(e) for e in z]))

    def batch(self, view, indices):
        vals = np.where(view.membership[indices], _root_values(view), np.nan)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            med = np.nanmedian(vals, axis=1) if vals.shape[1] else np.full(len(indices), np.nan)
        return np.nan_to_num(med, nan=0.0)


def _hard_instance(params: str):
    from privwrap.verification.hard_instances import make_hard_instance

    fields = {"n": 8, "alpha": 1, "rho": 4, "gamma": 3, "seed": 0, "kind": None}
    for part in filter(None, params.split(",")):
        key, sep, value = part.partition("=")
        if not sep or key not in fields:
            raise ValidationError(f"bad hard-instance parameter {part!r}; keys are {sorted(fields)}")
        fields[key] = value if key == "kind" else int(value)
    try:
        return make_hard_instance(
            fields["n"], fields["alpha"], fields["rho"], fields["gamma"],
            np.random.default_rng(fields["seed"]), fields["kind"],
        )
    except ValueError as err:
        raise ValidationError(str(err)) from None


def make_builtin(spec: str):
    """Parse ``count``, ``sum-clamped[:LO:HI]``, ``average-clamped[:LO:HI]``,
    ``median``, ``constant:K`` or ``hard-instance:KEY=V,...``."""
    name, _, rest = spec.partition(":")
    try:
        if name == "count":
            return Count()
        if name == "median":
            return Median()
        if name == "constant":
            return Constant(float(rest))
        if name in ("sum-clamped", "average-clamped"):
            bounds = [float(v) for v in rest.split(":")] if rest else [0.0, 1.0]
            if len(bounds) != 2:
                raise ValidationError(f"{name} takes LO:HI, got {rest!r}")
            return (SumClamped if name == "sum-clamped" else AverageClamped)(*bounds)
        if name == "hard-instance":
            return _hard_instance(rest)
    except ValueError as err:
        if isinstance(err, ValidationError):
            raise
        raise ValidationError(f"cannot parse builtin {spec!r}: {err}") from None
    raise ValidationError(f"unknown builtin {spec!r}")
