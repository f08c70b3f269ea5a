"""Datasets, declared ranges, and the instrumented black-box query interface."""

from __future__ import annotations

import collections
import dataclasses
import functools
import math
from collections.abc import Callable, Hashable, Iterable
from typing import TYPE_CHECKING, Any

import numpy as np

from privwrap.config import LIMITS

if TYPE_CHECKING:
    from privwrap.lattice import LatticeView


class PrivwrapError(Exception):
    """Base class of all errors raised by this package."""


class ValidationError(PrivwrapError, ValueError):
    """Invalid parameters or inputs."""


class PluginFailure(PrivwrapError):
    """The external evaluator crashed, hung, or replied with a non-number."""


class BudgetExceeded(PrivwrapError):
    """A lattice or query count went past its configured limit."""


class LocalityViolation(PrivwrapError):
    """A mechanism queried outside its own locality guard. Always a bug."""


@dataclasses.dataclass(frozen=True)
class Dataset:
    """A finite set of universe elements, kept sorted.

    Elements are opaque but must be mutually comparable; their order fixes the
    enumeration order of lattices and all tie-breaking.
    """

    elements: tuple

    def __post_init__(self):
        els = self.elements
        if not isinstance(els, tuple):
            object.__setattr__(self, "elements", els := tuple(els))
        for a, b in zip(els, els[1:]):
            if not a < b:
                raise ValidationError(f"dataset elements must be distinct and sorted, saw {a!r}, {b!r}")

    @classmethod
    def of(cls, items: Iterable[Hashable]) -> Dataset:
        items = list(items)
        if len(set(items)) != len(items):
            raise ValidationError("dataset has duplicate elements; use the multiset adapter")
        try:
            return cls(tuple(sorted(items)))
        except TypeError as err:
            raise ValidationError(f"dataset elements are not mutually ordered: {err}") from None

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, item) -> bool:
        return item in self._index

    @functools.cached_property
    def _index(self) -> dict:
        return {e: i for i, e in enumerate(self.elements)}

    def positions(self, z: Dataset) -> list[int]:
        """Positions in this dataset of the elements of z (z must be a subset)."""
        try:
            return [self._index[e] for e in z.elements]
        except KeyError as err:
            raise LocalityViolation(f"{err.args[0]!r} is not an element of the root dataset") from None

    def issubset(self, other: Dataset) -> bool:
        return all(e in other for e in self.elements)

    def without(self, element) -> Dataset:
        return Dataset(tuple(e for e in self.elements if e != element))

    def with_element(self, element) -> Dataset:
        return Dataset.of(self.elements + (element,))

    def is_neighbor(self, other: Dataset) -> bool:
        """True when one dataset equals the other plus one element."""
        small, big = sorted((self, other), key=len)
        return len(big) == len(small) + 1 and small.issubset(big)


def multiset_adapter(values: Iterable[Hashable]) -> Dataset:
    """Map a multiset to a set by tagging the i-th copy of v as (v, i)."""
    counts = collections.Counter(values)
    return Dataset.of((v, i) for v, c in counts.items() for i in range(1, c + 1))


def multiset_restore(x: Dataset) -> tuple:
    """Inverse of :func:`multiset_adapter`: the sorted multiset of tagged values."""
    return tuple(sorted(v for v, _ in x.elements))


@dataclasses.dataclass(frozen=True)
class RangeSpec:
    """Declared output range of a black box.

    ``kind`` is ``"list"`` (finite sorted values), ``"interval"`` ([lo, hi]) or
    ``"unbounded"``.
    """

    kind: str
    values: tuple[float, ...] = ()
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if self.kind == "list":
            vals = tuple(float(v) for v in self.values)
            if not vals or any(not a < b for a, b in zip(vals, vals[1:])):
                raise ValidationError("finite range must be nonempty and strictly increasing")
            object.__setattr__(self, "values", vals)
            object.__setattr__(self, "lo", vals[0])
            object.__setattr__(self, "hi", vals[-1])
        elif self.kind == "interval":
            if not self.hi > self.lo:
                raise ValidationError(f"interval needs hi > lo, got [{self.lo}, {self.hi}]")
        elif self.kind != "unbounded":
            raise ValidationError(f"unknown range kind {self.kind!r}")

    @classmethod
    def finite_list(cls, values: Iterable[float]) -> RangeSpec:
        return cls("list", tuple(values))

    @classmethod
    def interval(cls, hi: float, lo: float = 0.0) -> RangeSpec:
        return cls("interval", lo=float(lo), hi=float(hi))

    @classmethod
    def unbounded(cls) -> RangeSpec:
        return cls("unbounded")

    @property
    def sentinel_low(self) -> float:
        """inf of the range: lo, the smallest listed value, or -inf."""
        return self.lo

    @property
    def k(self) -> int:
        return len(self.values)

    def clamp(self, v: float) -> float:
        return float(self.clamp_array(np.array([v], dtype=float))[0])

    def clamp_array(self, v: np.ndarray) -> np.ndarray:
        """Closest in-range value; ties between listed values go to the lower one."""
        if self.kind == "unbounded":
            return v
        if self.kind == "interval":
            return np.clip(v, self.lo, self.hi)
        vals = np.asarray(self.values)
        hi_idx = np.clip(np.searchsorted(vals, v, side="left"), 0, len(vals) - 1)
        lo_idx = np.clip(hi_idx - 1, 0, len(vals) - 1)
        pick_hi = np.abs(vals[hi_idx] - v) < np.abs(v - vals[lo_idx])
        return np.where(pick_hi, vals[hi_idx], vals[lo_idx])

    def scaled(self, c: float) -> RangeSpec:
        """The range of f/c."""
        if self.kind == "list":
            return RangeSpec.finite_list(v / c for v in self.values)
        if self.kind == "interval":
            return RangeSpec("interval", lo=self.lo / c, hi=self.hi / c)
        return self

    @classmethod
    def parse(cls, text: str) -> RangeSpec:
        """Parse ``list:0..20``, ``list:9.5..10.5:0.01``, ``list:1,2,5``,
        ``interval:R`` (meaning [0, R]), ``interval:LO,HI`` or ``unbounded``."""
        kind, _, body = text.partition(":")
        try:
            if kind == "unbounded":
                return cls.unbounded()
            if kind == "interval":
                parts = [float(p) for p in body.split(",")]
                return cls.interval(parts[-1], lo=parts[0] if len(parts) == 2 else 0.0)
            if kind == "list":
                if ".." in body:
                    start, _, rest = body.partition("..")
                    stop, _, step = rest.partition(":")
                    step_f = float(step) if step else 1.0
                    count = int(round((float(stop) - float(start)) / step_f)) + 1
                    return cls.finite_list(round(float(start) + i * step_f, 12) for i in range(count))
                return cls.finite_list(float(p) for p in body.split(","))
        except (ValueError, IndexError) as err:
            raise ValidationError(f"cannot parse range {text!r}: {err}") from None
        raise ValidationError(f"cannot parse range {text!r}")

    def describe(self) -> str:
        if self.kind == "list":
            return f"list[{self.values[0]}..{self.values[-1]}, k={self.k}]"
        if self.kind == "interval":
            return f"interval[{self.lo}, {self.hi}]"
        return "unbounded"


Evaluator = Callable[[Dataset], float]


def _as_real(raw: Any) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise PluginFailure(f"evaluator returned a non-number: {raw!r}") from None
    if math.isnan(value):
        raise PluginFailure("evaluator returned NaN")
    return value


class BlackBox:
    """Instrumented query access to an untrusted function of subsets.

    Values are clamped into the declared range, memoized, and counted: the
    ledger is the number of distinct subsets evaluated. Once bound to a root
    dataset x (by :meth:`set_guard` or the first lattice evaluation), every
    query must be a subset of x, and with a guard depth, miss at most that
    many elements of x.

    Lattice evaluations (:meth:`values`) always cover whole levels 0..L of a
    view, so the memo for them is a single array prefix in canonical node
    order. Isolated single queries outside that prefix live in a dict.

    An evaluator may expose ``batch(view, indices) -> array`` to evaluate many
    nodes at once; otherwise it is called once per subset.
    """

    def __init__(self, evaluator: Evaluator, range_spec: RangeSpec | None = None, *, budget: int | None = None):
        self.evaluator = evaluator
        self.range = range_spec if range_spec is not None else RangeSpec.unbounded()
        self.budget = LIMITS.query_budget if budget is None else budget
        self.root: Dataset | None = None
        self.guard: int | None = None
        self._prefix = np.zeros(0)
        self._prefix_levels = -1
        self._view: LatticeView | None = None
        self._extra: dict[Any, float] = {}
        self._max_depth = -1

    def fresh(self) -> BlackBox:
        """An unused box with the same evaluator, range and budget."""
        return BlackBox(self.evaluator, self.range, budget=self.budget)

    @property
    def ledger(self) -> int:
        return len(self._prefix) + len(self._extra)

    @property
    def realized_depth(self) -> int:
        """max |x \\ z| over queried z (-1 before any query)."""
        return self._max_depth

    def set_guard(self, root: Dataset, depth: int | None) -> None:
        """Bind to ``root`` and, if ``depth`` is given, forbid deeper queries."""
        self._bind(root)
        self.guard = None if depth is None else max(int(depth), 0)

    def _bind(self, root: Dataset) -> None:
        if self.root == root:
            return
        if self.root is not None and self.ledger:
            raise ValueError("black box already holds queries for another root; use fresh()")
        self.root = root
        # Rekey single queries made before binding.
        old, self._extra = self._extra, {}
        for key, value in old.items():
            z = Dataset(key[1])
            self._extra[self._key(z)] = value

    def _key(self, z: Dataset):
        if self.root is None:
            return ("e", z.elements)
        if not z.issubset(self.root):
            raise LocalityViolation(f"query {z.elements!r} is not a subset of the root")
        mask = 0
        for p in self.root.positions(z):
            mask |= 1 << p
        return ("m", mask)

    def _check_depth(self, depth: int) -> None:
        if self.guard is not None and depth > self.guard:
            raise LocalityViolation(f"query at depth {depth} exceeds the guard depth {self.guard}")

    def _charge(self, count: int) -> None:
        if self.ledger + count > self.budget:
            raise BudgetExceeded(f"query budget of {self.budget} distinct subsets exceeded")

    def _finish(self, raw: Iterable[Any]) -> np.ndarray:
        if isinstance(raw, np.ndarray) and raw.dtype.kind in "biuf":
            vals = raw.astype(float)
            if np.isnan(vals).any():
                raise PluginFailure("evaluator returned NaN")
        else:
            vals = np.fromiter((_as_real(v) for v in raw), dtype=float)
        if self.range.kind == "unbounded" and not np.all(np.isfinite(vals)):
            raise PluginFailure("evaluator returned an infinite value for an unbounded range")
        return self.range.clamp_array(vals)

    def query(self, z: Dataset) -> float:
        """f(z) clamped into the declared range."""
        key = self._key(z)
        if key[0] == "m":
            depth = self.root.size - z.size
            self._check_depth(depth)
            if depth <= self._prefix_levels:
                return float(self._prefix[self._view.index_of_mask(key[1])])
        if key in self._extra:
            return self._extra[key]
        self._charge(1)
        value = float(self._finish([self.evaluator(z)])[0])
        self._extra[key] = value
        if key[0] == "m":
            self._max_depth = max(self._max_depth, self.root.size - z.size)
        return value

    def values(self, view: LatticeView, depth: int | None = None) -> np.ndarray:
        """Clamped values of all nodes of ``view`` in levels 0..depth."""
        if self.root is None:
            self._bind(view.root)
        last = view.depth if depth is None else min(depth, view.depth)
        if last < 0:
            return np.zeros(0)
        if view.root != self.root:
            return np.array([self.query(view.subset(i)) for i in range(view.level_end(last))])
        if last > self._prefix_levels:
            self._check_depth(last)
            self._extend(view, last)
        return self._prefix[: view.level_end(last)]

    def _extend(self, view: LatticeView, last: int) -> None:
        start, stop = view.level_end(self._prefix_levels), view.level_end(last)
        fresh = np.full(stop - start, np.nan)
        known = np.zeros(stop - start, dtype=bool)
        for key in [k for k in self._extra if k[0] == "m"]:
            if self.root.size - key[1].bit_count() <= last:
                i = view.index_of_mask(key[1]) - start
                fresh[i], known[i] = self._extra.pop(key), True
        todo = np.flatnonzero(~known) + start
        self._charge(len(todo))
        if len(todo):
            batch = getattr(self.evaluator, "batch", None)
            if batch is not None:
                raw = batch(view, todo)
            else:
                raw = []
                try:
                    for i in todo:
                        raw.append(self.evaluator(view.subset(int(i))))
                except PluginFailure:
                    self._keep_partial(view, todo, raw)
                    raise
            fresh[todo - start] = self._finish(raw)
        self._prefix = np.concatenate([self._prefix, fresh])
        self._prefix_levels = last
        self._view = view if self._view is None or view.depth > self._view.depth else self._view
        self._max_depth = max(self._max_depth, last)

    def _keep_partial(self, view: LatticeView, todo: np.ndarray, raw: list) -> None:
        """Record the answers received before an evaluator failure, so the ledger stays truthful."""
        try:
            done = self._finish(raw)
        except PluginFailure:
            return
        for i, v in zip(todo, done):
            self._extra[("m", view.mask(int(i)))] = float(v)
            self._max_depth = max(self._max_depth, view.depth_of(int(i)))


class MemoEvaluator:
    """Memoizing wrapper around a plain evaluator, shared across boxes.

    Useful when many independent evaluations hit the same deterministic
    function on the same root: each run still owns a fresh :class:`BlackBox`
    and ledger, only the underlying function calls are shared.
    """

    def __init__(self, fn: Evaluator):
        self.fn = fn
        self._memo: dict[tuple, float] = {}
        self._arrays: dict[Dataset, np.ndarray] = {}

    def __call__(self, z: Dataset) -> float:
        if z.elements not in self._memo:
            self._memo[z.elements] = self.fn(z)
        return self._memo[z.elements]

    def batch(self, view: LatticeView, indices: np.ndarray) -> np.ndarray:
        arr = self._arrays.get(view.root)
        need = int(indices.max()) + 1 if len(indices) else 0
        if arr is None or len(arr) < need:
            old = np.zeros(0) if arr is None else arr
            grown = np.full(max(need, len(old)), np.nan)
            grown[: len(old)] = old
            arr = self._arrays[view.root] = grown
        missing = indices[np.isnan(arr[indices])]
        for i in missing:
            arr[i] = _as_real(self(view.subset(int(i))))
        return arr[indices]


class TransformedBox:
    """A pointwise transform ``fn(values, sizes)`` of another box.

    Queries, ledger and guard are those of the base box; only values change.
    """

    def __init__(self, base, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], range_spec: RangeSpec):
        self.base = base
        self.fn = fn
        self.range = range_spec

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

    def query(self, z: Dataset) -> float:
        v = self.fn(np.array([self.base.query(z)]), np.array([z.size]))
        return float(v[0])

    def values(self, view: LatticeView, depth: int | None = None) -> np.ndarray:
        v = self.base.values(view, depth)
        return self.fn(v, view.sizes[: len(v)])


def rescale(f, c: float):
    """The box f/c, with its declared range divided by c."""
    if c == 1:
        return f
    return TransformedBox(f, lambda v, _sizes: v / c, f.range.scaled(c))
