import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from helpers import TableFn, full_view, node_set, random_arbitrary, random_lipschitz
from privwrap import BlackBox, Dataset, RangeSpec, ValidationError, double_mono_wrap, double_monotonize, offset
from privwrap.builtins import Constant
from privwrap.domain import MemoEvaluator
from privwrap.double_mono import double_mono_tau, median_exp_mech, median_score, median_score_pieces, offsets, offsets_table
from privwrap.noise import RandomStream
from privwrap.verification import oracles


def root(n):
    return Dataset(tuple(range(n)))


def test_double_monotonize_examples():
    zero = BlackBox(Constant(0), RangeSpec.interval(5))
    x = root(6)
    assert double_monotonize(zero, 2).query(x) == 2
    assert double_monotonize(BlackBox(Constant(0), RangeSpec.interval(5)), 8).query(x) == -4
    rng = np.random.default_rng(0)
    f = random_lipschitz(rng, 6, lo=0, hi=5)
    for level in (-2, 0, 3):
        assert double_monotonize(f.box(RangeSpec.interval(5)), level).query(x) == pytest.approx(0.5 * (f(x) + 6 - level))


@pytest.mark.parametrize("seed", range(10))
def test_double_monotonize_matches_oracle_and_is_monotone(seed):
    rng = np.random.default_rng(seed)
    n = 6
    f = random_arbitrary(rng, n, 5)
    level = int(rng.integers(-2, n + 2))
    view, _ = full_view(n)
    g = double_monotonize(f.box(RangeSpec.interval(5)), level).values(view)
    for i in range(len(view)):
        assert g[i] == pytest.approx(oracles.double_monotonize(f, node_set(view, i), level))
    parents, kids = view.edges()
    assert np.all(g[kids] <= g[parents])


def test_offset_examples():
    x = root(5)
    rng = np.random.default_rng(3)
    lip = random_lipschitz(rng, 5)
    for j in range(6):
        assert offset(BlackBox(Constant(4)), j, x) == 4 - j
        assert offset(lip.box(), j, x) == pytest.approx(lip(x) - j)
    assert offset(BlackBox(Constant(4)), 0, x) == 4
    with pytest.raises(ValidationError):
        offsets(BlackBox(Constant(1)), x, -1)


@pytest.mark.parametrize("seed", range(8))
def test_offsets_match_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 6
    f = random_arbitrary(rng, n, 6)
    x = root(n)
    tau = int(rng.integers(0, n + 3))
    ys = offsets(f.box(), x, tau)
    assert len(ys) == tau + 1
    for j in range(tau + 1):
        assert ys[j] == pytest.approx(oracles.offset(f, frozenset(range(n)), j))
    assert np.all(np.diff(ys) <= 0)


@pytest.mark.parametrize("seed", range(6))
def test_offset_interleaving_exhaustive(seed):
    rng = np.random.default_rng(seed)
    n = 7
    f = random_arbitrary(rng, n, 5)
    level = int(rng.integers(0, 5))
    view, _ = full_view(n)
    g = double_monotonize(f.box(RangeSpec.interval(5)), level).values(view)
    parents, kids = view.edges()
    tables = [offsets_table(view, g, j) for j in range(n + 1)]
    for j in range(n):
        assert np.all(tables[j + 1][parents] <= tables[j][kids] + 1e-9)
        assert np.all(tables[j][kids] <= tables[j][parents] + 1e-9)


def test_offsets_for_lipschitz_are_evenly_spaced():
    rng = np.random.default_rng(7)
    n = 8
    for level in (-1, 2):
        f = random_lipschitz(rng, n, lo=0, hi=6)
        box = f.box(RangeSpec.interval(6))
        g_x = oracles.double_monotonize(f, frozenset(range(n)), level)
        ys = offsets(double_monotonize(box, level), root(n), n - max(level, 0))
        assert np.allclose(ys, g_x - np.arange(len(ys)))


@pytest.mark.parametrize("tau", [2, 4, 6, 10])
def test_median_score_on_evenly_spaced_points(tau):
    g = 3.7
    y = g - np.arange(tau + 1)
    for a in np.linspace(g - tau, g, 97):
        assert median_score(a, y) == math.floor(abs(g - tau / 2 - a) + 1e-12)
    for a in (g - tau - 0.5, g + 0.1, g + 50):
        assert median_score(a, y) == tau / 2
    assert median_score(g - tau / 2, y) == 0


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=6), st.integers(-1, 7))
def test_median_score_matches_brute_force(y, a2):
    a = a2 + 0.5
    assume(a not in y)
    assert median_score(a, y) == oracles.median_score(a, y)


def nonincreasing(m, hi):
    for combo in itertools.combinations_with_replacement(range(hi, -1, -1), m):
        yield np.array(combo, dtype=float)


def test_median_score_sensitivity_under_interleaving():
    """For y'_{j+1} <= y_j <= y'_j, scores differ by at most one, at every a."""
    grid = np.arange(-1.0, 5.5, 0.5)
    for m in range(1, 5):
        for yp in nonincreasing(m, 4):
            ranges = [range(int(yp[j + 1]) if j + 1 < m else 0, int(yp[j]) + 1) for j in range(m)]
            for y in itertools.product(*ranges):
                for a in grid:
                    assert abs(median_score(a, y) - median_score(a, yp)) <= 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8), st.floats(-6, 6))
def test_score_pieces_agree_with_score(y, a):
    lo, hi = -6.0, 6.0
    pieces = median_score_pieces(y, lo, hi)
    assume(a not in y and lo < a < hi)
    k = int(np.searchsorted(pieces.breakpoints, a)) - 1
    assert -pieces.scores[k] == median_score(a, y)


def test_median_exp_mech_concentrates_on_median():
    y = 10 - np.arange(11.0)
    draws = np.array([median_exp_mech(y, 8.0, (-20, 30), RandomStream(s)) for s in range(2000)])
    assert abs(np.median(draws) - 5) < 0.5 and np.all((-20 <= draws) & (draws <= 30))
    with pytest.raises(ValidationError):
        median_score_pieces([], 0, 1)


def test_double_mono_tau():
    assert double_mono_tau(9, 8, 0.5) == math.ceil(2 * math.log(72))
    with pytest.raises(ValidationError):
        double_mono_tau(5, 1, 0.1)


def test_double_mono_wrap_lipschitz_is_symmetric():
    n, r, eps, beta = 12, 9.0, 8.0, 0.5
    x = root(n)
    memo = MemoEvaluator(lambda z: float(min(z.size, r)))
    outs = [double_mono_wrap(BlackBox(memo, RangeSpec.interval(r)), x, r, eps, beta, RandomStream(s)) for s in range(1500)]
    err = np.array([o.result for o in outs]) - r
    above = int(np.sum(err > 0))
    assert abs(above - 750) < 3 * math.sqrt(1500 / 4)
    assert abs(np.median(err)) < 0.5
    for o in outs[:50]:
        assert set(o.released) == {"w", "ell", "tau"} and o.released["tau"] == double_mono_tau(r, eps, beta)
        assert o.realized_depth <= max(0, n - o.released["ell"])


def test_double_mono_wrap_constant_and_scaling():
    n, r, eps, beta = 10, 9.0, 8.0, 0.5
    x = root(n)
    memo = MemoEvaluator(lambda z: 4.0)
    vals = [double_mono_wrap(BlackBox(memo, RangeSpec.interval(r)), x, r, eps, beta, RandomStream(s)).result for s in range(800)]
    assert abs(np.mean(vals) - 4) < 0.3
    scaled = MemoEvaluator(lambda z: 8.0)
    out2 = double_mono_wrap(BlackBox(scaled, RangeSpec.interval(18)), x, 18.0, eps, beta, RandomStream(0), c=2.0)
    out1 = double_mono_wrap(BlackBox(memo, RangeSpec.interval(9)), x, 9.0, eps, beta, RandomStream(0))
    assert out2.result == pytest.approx(2 * out1.result)


def test_double_mono_wrap_validation():
    with pytest.raises(ValidationError):
        double_mono_wrap(BlackBox(Constant(0)), root(3), 1.0, 1.0, 0.1, RandomStream(0))
    with pytest.raises(ValidationError):
        double_mono_wrap(BlackBox(Constant(0)), root(3), 100.0, 1.0, 1.5, RandomStream(0))
