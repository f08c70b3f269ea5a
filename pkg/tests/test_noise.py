import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from privwrap.domain import ValidationError
from privwrap.noise import (
    PiecewiseScore,
    RandomStream,
    exp_mech_finite,
    exp_mech_interval,
    exp_mech_probabilities,
    laplace_cdf,
    sample_laplace,
    sample_truncated_laplace,
    truncated_laplace_cdf,
    truncated_laplace_quantile,
)

N = 100_000


def draws(fn, n=N, seed=0):
    rng = RandomStream(seed)
    return np.array([fn(rng) for _ in range(n)])


def test_laplace_moments_and_tails():
    z = draws(lambda r: sample_laplace(1.0, r))
    assert abs(z.mean()) < 0.02
    for beta in (0.5, 0.1, 0.01):
        frac = np.mean(np.abs(z) >= math.log(1 / beta))
        assert abs(frac - beta) <= 3 * math.sqrt(beta * (1 - beta) / N)
    assert stats.kstest(z[:20_000], lambda t: laplace_cdf(t, 1.0)).pvalue > 0.01


def test_determinism_and_spawn():
    a = draws(lambda r: sample_laplace(2.0, r), 100, seed=42)
    b = draws(lambda r: sample_laplace(2.0, r), 100, seed=42)
    assert np.array_equal(a, b)
    root = RandomStream(5)
    assert root.spawn(1).uniform() == RandomStream(5).spawn(1).uniform()
    assert root.spawn(1).uniform() != root.spawn(2).uniform()


def test_uniform_grid_is_open():
    rng = RandomStream(0)
    u = [rng.uniform() for _ in range(1000)]
    assert 0 < min(u) and max(u) < 1 and rng.counter == 1000


def test_truncated_laplace_support_and_symmetry():
    z = draws(lambda r: sample_truncated_laplace(1.0, 2.0, r))
    assert np.all(np.abs(z) <= 2.0)
    assert abs(z.mean()) < 0.02
    assert float(truncated_laplace_cdf(0.0, 1.0, 2.0)) == 0.5
    assert truncated_laplace_quantile(0.5, 1.0, 2.0) == 0.0
    assert stats.kstest(z[:20_000], lambda t: truncated_laplace_cdf(t, 1.0, 2.0)).pvalue > 0.01


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1 - 1e-3), st.floats(0.05, 10), st.floats(0.05, 10))
def test_truncated_quantile_inverts_cdf(u, scale, bound):
    t = truncated_laplace_quantile(u, scale, bound)
    assert -bound <= t <= bound
    assert float(truncated_laplace_cdf(t, scale, bound)) == pytest.approx(u, abs=1e-9)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_parameters(bad):
    with pytest.raises(ValidationError):
        sample_laplace(bad, RandomStream(0))
    with pytest.raises(ValidationError):
        sample_truncated_laplace(1.0, bad, RandomStream(0))


def test_exp_mech_uniform_on_equal_scores():
    idx = draws(lambda r: exp_mech_finite([1.0] * 5, 1.0, 1.0, r)).astype(int)
    counts = np.bincount(idx, minlength=5)
    assert stats.chisquare(counts).pvalue > 0.01


def test_exp_mech_ratio_and_tv():
    eps, sens = 1.0, 0.5
    scores = [0.0, math.log(2) * 2 * sens / eps]
    idx = draws(lambda r: exp_mech_finite(scores, eps, sens, r)).astype(int)
    assert abs(idx.mean() - 2 / 3) < 3 * math.sqrt(2 / 9 / N)
    rng = np.random.default_rng(1)
    for _ in range(3):
        s = rng.uniform(-3, 3, rng.integers(1, 9))
        p = exp_mech_probabilities(s, 2.0, 1.0)
        emp = np.bincount(draws(lambda r: exp_mech_finite(s, 2.0, 1.0, r), 30_000, 7).astype(int), minlength=len(s))
        assert 0.5 * np.abs(emp / 30_000 - p).sum() < 0.01


def test_exp_mech_edge_cases():
    assert exp_mech_finite([3.0], 1.0, 1.0, RandomStream(0)) == 0
    assert exp_mech_finite([-math.inf, 0.0, -math.inf], 1.0, 1.0, RandomStream(0)) == 1
    with pytest.raises(ValidationError):
        exp_mech_finite([], 1.0, 1.0, RandomStream(0))
    with pytest.raises(ValidationError):
        exp_mech_finite([-math.inf], 1.0, 1.0, RandomStream(0))


def test_interval_uniform_for_constant_score():
    z = draws(lambda r: exp_mech_interval(PiecewiseScore((0.0, 0.3, 1.0), (2.0, 2.0)), 1.0, 1.0, r), 20_000)
    assert stats.kstest(z, "uniform").pvalue > 0.01


def test_interval_piece_mass_ratio():
    eps0 = 1.0
    score = PiecewiseScore((0.0, 1.0, 2.0), (math.log(4) * 2 / eps0, 0.0))
    z = draws(lambda r: exp_mech_interval(score, eps0, 1.0, r))
    frac = np.mean(z < 1.0)
    assert abs(frac - 0.8) < 3 * math.sqrt(0.16 / N)
    assert np.allclose(score.piece_probabilities(eps0, 1.0), [0.8, 0.2])


def test_interval_pieces_match_analytic_weights():
    score = PiecewiseScore((-1.0, 0.0, 0.5, 3.0), (0.0, -1.0, -2.0))
    p = score.piece_probabilities(2.0, 1.0)
    z = draws(lambda r: exp_mech_interval(score, 2.0, 1.0, r))
    counts = np.histogram(z, score.breakpoints)[0] / N
    assert np.all(np.abs(counts - p) <= 3 * np.sqrt(p * (1 - p) / N))


def test_interval_degenerate_and_invalid():
    assert 2.0 <= exp_mech_interval(PiecewiseScore((2.0, 3.0), (0.0,)), 1.0, 1.0, RandomStream(0)) <= 3.0
    with pytest.raises(ValidationError):
        PiecewiseScore((1.0, 1.0), (0.0,))
    with pytest.raises(ValidationError):
        PiecewiseScore((0.0, 1.0), (0.0, 1.0))
