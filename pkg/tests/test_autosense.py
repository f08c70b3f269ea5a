import math

import numpy as np
import pytest

from helpers import TableFn, full_view, node_set, random_arbitrary, random_monotone
from privwrap import BlackBox, Dataset, RangeSpec, TEST_PROFILE, ValidationError, autosense_wrap, monotonize
from privwrap.autosense import autosense_lambda
from privwrap.builtins import Constant, Count
from privwrap.lattice import down_neighborhood
from privwrap.noise import RandomStream
from privwrap.verification import oracles


class SizeRecorder:
    def __init__(self, fn):
        self.fn = fn
        self.sizes = []

    def __call__(self, z):
        self.sizes.append(z.size)
        return self.fn(z)


def test_monotonize_examples():
    r = RangeSpec.interval(10)
    assert monotonize(BlackBox(Constant(7), r), 3).query(Dataset.of(range(4))) == 7
    assert monotonize(BlackBox(Constant(7), r), 5).query(Dataset.of(range(4))) == 0
    neg = BlackBox(lambda z: -z.size)
    assert monotonize(neg, 2).query(Dataset.of(range(5))) == -2
    assert monotonize(neg, 7).query(Dataset.of(range(5))) == -math.inf


@pytest.mark.parametrize("seed", range(15))
def test_monotonize_matches_oracle_and_is_monotone(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    f = random_arbitrary(rng, n, 9)
    level = int(rng.integers(-1, n + 2))
    view, _ = full_view(n)
    m = monotonize(f.box(RangeSpec.interval(9)), level).values(view)
    for i in range(len(view)):
        assert m[i] == oracles.monotonize(f, node_set(view, i), level, 0.0)
    parents, kids = view.edges()
    assert np.all(m[kids] <= m[parents])


def test_monotonize_fixes_monotone_functions():
    rng = np.random.default_rng(1)
    n = 6
    f = random_monotone(rng, n)
    view, masks = full_view(n)
    m = monotonize(f.box(RangeSpec.interval(6)), 2).values(view)
    big = view.sizes >= 2
    assert np.array_equal(m[big], f.table[masks][big])


def test_monotonize_queries_only_large_subsets():
    rec = SizeRecorder(lambda z: float(z.size % 3))
    box = BlackBox(rec)
    m = monotonize(box, 4)
    m.values(down_neighborhood(Dataset.of(range(7)), 7))
    assert min(rec.sizes) == 4 and box.ledger == sum(math.comb(7, k) for k in range(4, 8))


def test_autosense_lambda():
    for eps, beta, k in [(1.0, 0.1, 5), (8.0, 0.2, 21), (0.5, 0.01, 1000)]:
        lam = autosense_lambda(eps, beta, k)
        assert lam % 2 == 0 and lam >= 8 / eps * math.log(2 / beta)


def test_autosense_constant():
    x = Dataset.of(range(6))
    ys = RangeSpec.finite_list(range(11))
    outs = [autosense_wrap(BlackBox(Constant(5), ys), x, ys, 1.0, 0, 0.1, RandomStream(s)).result for s in range(1000)]
    assert sum(o == 5 for o in outs) >= 900


def test_autosense_count_accuracy_and_membership():
    n, eps, beta = 16, 8.0, 0.2
    x = Dataset.of(range(n))
    ys = RangeSpec.finite_list(range(n + 1))
    lam = autosense_lambda(eps, beta, ys.k)
    good = 0
    for s in range(300):
        out = autosense_wrap(BlackBox(Count(), ys), x, ys, eps, 0, beta, RandomStream(s))
        assert out.result in ys.values
        assert out.realized_depth <= max(0, n - out.released["ell"])
        good += n - lam <= out.result <= n
    assert good >= 300 * (1 - beta)


def test_autosense_clamps_to_finite_range():
    x = Dataset.of(range(5))
    ys = RangeSpec.finite_list([0, 10, 20])
    out = autosense_wrap(BlackBox(Constant(13.7)), x, ys, 1.0, 0, 0.1, RandomStream(0), profile=TEST_PROFILE)
    assert out.result in ys.values and out.profile == "test-constants"


def test_autosense_validation():
    x = Dataset.of(range(3))
    with pytest.raises(ValidationError):
        autosense_wrap(BlackBox(Count()), x, RangeSpec.interval(3), 1.0, 0, 0.1, RandomStream(0))
    with pytest.raises(ValidationError):
        autosense_wrap(BlackBox(Count()), x, RangeSpec.finite_list([0, 1]), 0.0, 0, 0.1, RandomStream(0))


def test_autosense_small_dataset_still_runs():
    x = Dataset.of([1])
    ys = RangeSpec.finite_list(range(3))
    out = autosense_wrap(BlackBox(Count(), ys), x, ys, 1.0, 0, 0.1, RandomStream(0))
    assert out.result in ys.values
