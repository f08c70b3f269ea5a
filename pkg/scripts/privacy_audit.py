"""Heuristic privacy audit of every wrapper on a planted hard instance.

The black box is a planted two-cone function on subsets of {0..7}; the
neighbor drops the smallest element of the dataset. Prints one JSON line per
mechanism with the estimated epsilon and the auditor slack. Evidence only.

    python scripts/privacy_audit.py --trials 10000
"""

from __future__ import annotations

import argparse
import json

import numpy as np

from privwrap import (
    BlackBox,
    Dataset,
    RangeSpec,
    autosense_wrap,
    double_mono_wrap,
    modified_tahoe,
    small_diameter,
    subset_extension,
)
from privwrap.domain import MemoEvaluator
from privwrap.noise import RandomStream, sample_laplace
from privwrap.verification import PLANTED, dp_audit, make_hard_instance, slack

MECHANISMS = {
    "laplace": None,
    "autosense": lambda box, x, s, eps: autosense_wrap(box, x, RangeSpec.finite_list(range(5)), eps, 0.0, 0.1, s).result,
    "subset-extension": lambda box, x, s, eps: subset_extension(box, x, 1.0, eps, 0.05, s).result,
    "tahoe": lambda box, x, s, eps: modified_tahoe(box, x, 1.0, eps, 0.05, s).result,
    "small-diameter": lambda box, x, s, eps: small_diameter(box, x, 1.0, 4.0, eps, s).result,
    "double-mono": lambda box, x, s, eps: double_mono_wrap(box, x, 120.0, eps, 0.5, s).result,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--bins", type=int, default=20)
    ap.add_argument("--epsilon", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=606)
    ap.add_argument("--only", nargs="*", choices=list(MECHANISMS))
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    inst = make_hard_instance(8, 1, 4, 3, rng, kind=PLANTED)
    while not 0 < len(inst.x) < 8:
        inst = make_hard_instance(8, 1, 4, 3, rng, kind=PLANTED)
    memo = MemoEvaluator(inst)
    x = Dataset(tuple(sorted(inst.x)))
    neighbor = x.without(min(inst.x))

    for name in args.only or MECHANISMS:
        run = MECHANISMS[name]
        if run is None:
            rep = dp_audit(lambda d, s: float(d) + sample_laplace(1 / args.epsilon, s), 0, 1, args.trials, args.bins, RandomStream(args.seed))
        else:
            mech = lambda d, s, run=run: run(BlackBox(memo, RangeSpec.interval(4)), d, s, args.epsilon)  # noqa: E731
            rep = dp_audit(mech, x, neighbor, args.trials, args.bins, RandomStream(args.seed))
        print(json.dumps({
            "mechanism": name,
            "epsilon": args.epsilon,
            "epsilon_hat": round(rep.epsilon_hat, 4),
            "slack": round(slack(args.trials), 4),
            "worst_bin": rep.worst_bin,
            "heuristic": True,
        }))


if __name__ == "__main__":
    main()
