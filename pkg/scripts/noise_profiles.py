"""Error quantiles of the real-valued wrappers on a Lipschitz input.

f is a random 1-Lipschitz function with range [0, 9] on subsets of
{0..n-1}. Each wrapper runs ``--trials`` times; the script prints the
quantiles of out - f(x) next to the nominal Laplace scale.

    python scripts/noise_profiles.py --n 12 --trials 2000
"""

from __future__ import annotations

import argparse
import json

import numpy as np

from privwrap import TEST_PROFILE, BlackBox, Dataset, RangeSpec, double_mono_wrap, small_diameter, subset_extension
from privwrap.claimed import subset_extension_constants
from privwrap.domain import MemoEvaluator
from privwrap.noise import RandomStream


def lipschitz_table(rng, n, hi):
    pop = np.array([bin(m).count("1") for m in range(2**n)])
    masks = np.arange(2**n)
    vals = np.full(2**n, np.inf)
    for a in rng.integers(0, 2**n, 3):
        vals = np.minimum(vals, rng.integers(0, n + 1) + pop[masks ^ a])
    return np.clip(vals, 0, hi)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--epsilon", type=float, default=8.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    n, eps, r = args.n, args.epsilon, 9.0
    table = lipschitz_table(np.random.default_rng(args.seed), n, r)
    memo = MemoEvaluator(lambda z: float(table[sum(1 << e for e in z.elements)]))
    x = Dataset(tuple(range(n)))
    fx = float(table[2**n - 1])
    eps0, _, q, _ = subset_extension_constants(eps, 0.05, TEST_PROFILE)
    runs = {
        "subset-extension (test profile)": (
            lambda s: subset_extension(BlackBox(memo), x, 1.0, eps, 0.05, s, TEST_PROFILE).result,
            10 * q / eps0,
        ),
        "small-diameter": (lambda s: small_diameter(BlackBox(memo, RangeSpec.interval(r)), x, 1.0, r, eps, s).result, 10 / eps),
        "double-mono": (lambda s: double_mono_wrap(BlackBox(memo, RangeSpec.interval(r)), x, r, eps, 0.5, s).result, None),
    }
    for name, (fn, scale) in runs.items():
        outs = [fn(RandomStream(args.seed + t)) for t in range(args.trials)]
        err = np.array([o for o in outs if o is not None]) - fx
        q10, q50, q90 = np.quantile(err, [0.1, 0.5, 0.9])
        print(json.dumps({
            "mechanism": name,
            "f_x": fx,
            "bottoms": len(outs) - len(err),
            "q10": round(float(q10), 3),
            "median": round(float(q50), 3),
            "q90": round(float(q90), 3),
            "mean_abs": round(float(np.abs(err).mean()), 3),
            "laplace_scale": scale,
        }))


if __name__ == "__main__":
    main()
