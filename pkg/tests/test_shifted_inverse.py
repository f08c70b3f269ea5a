import math
import warnings

import numpy as np
import pytest

from helpers import TableFn, full_view, random_arbitrary, random_monotone
from privwrap import BlackBox, Dataset, RangeSpec, ValidationError, build_gipp, inverse_loss, shifted_inverse
from privwrap.builtins import Constant, Count
from privwrap.noise import RandomStream
from privwrap.shifted_inverse import GippInstance, PureDPGippSolver, shi_depth
from privwrap.verification import oracles


def test_inverse_loss_examples():
    x3 = Dataset.of("abc")
    assert inverse_loss(BlackBox(Count()), x3, 1, 4) == 2
    assert inverse_loss(BlackBox(Constant(5)), x3, 5, 4) == 0
    assert inverse_loss(BlackBox(Count()), Dataset.of(range(10)), 0, 3) == 3


def test_inverse_loss_queries_only_below_cap():
    box = BlackBox(Count())
    x = Dataset.of(range(8))
    box.set_guard(x, 2)
    assert inverse_loss(box, x, 0, 3) == 3
    assert box.realized_depth == 2


@pytest.mark.parametrize("seed", range(20))
def test_inverse_loss_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 8))
    f = random_arbitrary(rng, n, 6)
    x = Dataset(tuple(range(n)))
    for y in range(-1, 7):
        expect = oracles.inverse_loss(f, x.elements, y)
        got = inverse_loss(f.box(), x, y, n + 1)
        assert got == (n + 1 if expect == math.inf else expect)


def test_inverse_loss_sensitivity_monotone():
    """|loss(u, y) - loss(v, y)| <= 1 on every covering pair, for monotone f."""
    rng = np.random.default_rng(0)
    n = 6
    view, _ = full_view(n)
    parents, kids = view.edges()
    ys = RangeSpec.finite_list(range(-1, 8))
    for _ in range(10):
        f = random_monotone(rng, n)
        loss = {}
        for i in range(len(view)):
            z = view.subset(i)
            g = build_gipp(f.box(), z, ys, n).g_values
            loss[i] = np.round((1 - g) * (n + 1)).astype(int)
        for p, k in zip(parents, kids):
            assert np.all(np.abs(loss[p] - loss[k]) <= 1)


def test_build_gipp_examples():
    x = Dataset.of(range(4))
    ys = RangeSpec.finite_list(range(5))
    g = build_gipp(BlackBox(Constant(2)), x, ys, 3).g_values
    assert list(g) == [0, 0, 1, 1, 1]
    g = build_gipp(BlackBox(Count()), x, ys, 4).g_values
    assert np.allclose(g, [(1 + j) / 5 for j in range(5)])
    g = build_gipp(BlackBox(Constant(4)), x, ys, 1).g_values
    assert g[-1] == 1


@pytest.mark.parametrize("seed", range(10))
def test_build_gipp_matches_oracle_and_is_monotone(seed):
    rng = np.random.default_rng(seed)
    n = 5
    f = random_monotone(rng, n)
    x = Dataset(tuple(range(n)))
    ys = RangeSpec.finite_list(range(0, 8))
    lam = int(rng.integers(1, n + 2))
    inst = build_gipp(f.box(), x, ys, lam)
    expect = [max(0.0, 1 - min(oracles.inverse_loss(f, x.elements, y), lam + 1) / (lam + 1)) for y in ys.values]
    assert np.allclose(inst.g_values, expect)
    assert np.all(np.diff(inst.g_values) >= 0)
    assert inst.delta == 1 / (lam + 1)


def test_gipp_instance_validation_and_solutions():
    inst = GippInstance(np.array([0.0, 0.5, 1.0, 1.0]), 0.5)
    assert [inst.is_solution(j) for j in range(4)] == [False, True, True, False]
    assert np.allclose(inst.scores(), [0.0, 0.5, 0.5, 0.0])
    with pytest.raises(ValidationError):
        GippInstance(np.array([1.5]), 0.5)
    with pytest.raises(ValidationError):
        GippInstance(np.array([0.5]), 0.0)


def test_shifted_inverse_constant_and_singleton():
    x = Dataset.of(range(6))
    ys = RangeSpec.finite_list(range(11))
    hits = sum(shifted_inverse(BlackBox(Constant(4)), x, ys, 1.0, 0, 0.1, RandomStream(s)) == 4 for s in range(1000))
    assert hits >= 1000 * (1 - 0.1)
    one = RangeSpec.finite_list([3])
    assert all(shifted_inverse(BlackBox(Count()), x, one, 1.0, 0, 0.1, RandomStream(s)) == 3 for s in range(20))


def test_shifted_inverse_count_accuracy_and_validity():
    x = Dataset.of(range(12))
    ys = RangeSpec.finite_list(range(21))
    eps, beta = 2.0, 0.1
    lam = shi_depth(eps, beta, ys.k)
    good = valid = 0
    solver = PureDPGippSolver()
    for s in range(1000):
        box = BlackBox(Count())
        out = shifted_inverse(box, x, ys, eps, 0, beta, RandomStream(s), solver=solver)
        good += 12 - lam <= out <= 12
        assert box.realized_depth <= lam
        inst = build_gipp(BlackBox(Count()), x, ys, lam)
        valid += inst.is_solution(ys.values.index(out))
    assert good >= 1000 * (1 - beta)
    assert valid >= 1000 * (1 - beta)


def test_shifted_inverse_errors_and_warning():
    x = Dataset.of(range(3))
    with pytest.raises(ValidationError):
        shifted_inverse(BlackBox(Count()), x, RangeSpec.interval(3), 1.0, 0, 0.1, RandomStream(0))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        shifted_inverse(BlackBox(Count()), x, RangeSpec.finite_list(range(4)), 1.0, 1e-6, 0.1, RandomStream(0))
    assert any("falling back" in str(w.message) for w in caught)


def test_shi_depth_clears_the_strict_bound():
    for eps, beta, k in [(1.0, 0.1, 10), (0.3, 0.05, 1001), (8, 0.5, 2)]:
        lam = shi_depth(eps, beta, k)
        bound = 4 / eps * math.log(k / beta) - 1
        assert lam > bound and lam == math.ceil(bound + 1) + 1
