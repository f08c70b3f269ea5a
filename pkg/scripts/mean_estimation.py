"""Private mean of bounded reals through AutoSense on the average.

Draws n reals uniformly from [10 - sigma, 10 + sigma], runs AutoSense with
the output grid list:9.5..10.5:0.001 and reports the error against the
down-sensitivity bound 2 lam sigma / (n - lam).

    python scripts/mean_estimation.py --n 50 100 200 --trials 500
"""

from __future__ import annotations

import argparse
import json

import numpy as np

from privwrap import PAPER_PROFILE, TEST_PROFILE, BlackBox, Dataset, RangeSpec, autosense_wrap
from privwrap.domain import MemoEvaluator
from privwrap.noise import RandomStream


def average(z):
    return float(np.mean(z.elements)) if z.size else 10.0


def run(n, trials, epsilon, beta, sigma, seed, profile):
    rng = np.random.default_rng(seed)
    x = Dataset.of(rng.uniform(10 - sigma, 10 + sigma, n).tolist())
    avg = float(np.mean(x.elements))
    ys = RangeSpec.parse("list:9.5..10.5:0.001")
    memo = MemoEvaluator(average)
    outs = [autosense_wrap(BlackBox(memo), x, ys, epsilon, 0.0, beta, RandomStream(seed + s), profile=profile) for s in range(trials)]
    lam = outs[0].released["lambda"]
    err = np.abs(np.array([o.result for o in outs]) - avg)
    bound = 2 * lam * sigma / (n - lam)
    return {
        "n": n,
        "lambda": lam,
        "bound": round(bound, 6),
        "within_bound": float(np.mean(err <= bound)),
        "median_abs_err": float(np.median(err)),
        "p90_abs_err": float(np.quantile(err, 0.9)),
        "max_depth": max(o.realized_depth for o in outs),
        "profile": profile.name,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--epsilon", type=float, default=50.0)
    ap.add_argument("--beta", type=float, default=0.1)
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--paper-profile", action="store_true", help="derive lambda from epsilon and beta (deep lattices)")
    args = ap.parse_args()
    profile = PAPER_PROFILE if args.paper_profile else TEST_PROFILE
    for n in args.n:
        print(json.dumps(run(n, args.trials, args.epsilon, args.beta, args.sigma, args.seed, profile)))


if __name__ == "__main__":
    main()
