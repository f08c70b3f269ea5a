"""Command line front end: wrap, audit, oracle and bench.

Exit codes: 0 on success (a nonresponse is a success), 2 for invalid
parameters, 3 when the plugin fails, 4 when a query or lattice budget is
exceeded. Reports go to stdout as JSON with sorted keys, so identical
invocations give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from privwrap.autosense import autosense_wrap
from privwrap.builtins import make_builtin
from privwrap.claimed import lipschitz_filter, modified_tahoe, small_diameter, subset_extension
from privwrap.config import PAPER_PROFILE, RNG_NAME, TEST_PROFILE
from privwrap.domain import (
    BlackBox,
    BudgetExceeded,
    Dataset,
    PluginFailure,
    RangeSpec,
    ValidationError,
    multiset_adapter,
)
from privwrap.double_mono import double_mono_wrap
from privwrap.noise import RandomStream
from privwrap.output import BOTTOM, WrapperOutput
from privwrap.plugin import PluginEvaluator
from privwrap.verification import oracles
from privwrap.verification.audit import audit_outputs, slack

MECHANISMS = ("autosense", "subset-extension", "tahoe", "small-diameter", "double-mono", "lipschitz-filter")
EXIT_VALIDATION, EXIT_PLUGIN, EXIT_BUDGET = 2, 3, 4


def _token(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def load_dataset(path: str, multiset: bool = False) -> Dataset:
    """One identifier per line, or a JSON array. Numeric tokens become numbers."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ValidationError(f"cannot read dataset {path!r}: {err}") from None
    if text.lstrip().startswith("["):
        try:
            items = json.loads(text)
        except json.JSONDecodeError as err:
            raise ValidationError(f"bad JSON dataset: {err}") from None
        items = [tuple(v) if isinstance(v, list) else v for v in items]
    else:
        items = [_token(line.strip()) for line in text.splitlines() if line.strip()]
    return multiset_adapter(items) if multiset else Dataset.of(items)


def make_evaluator(spec: str, timeout: float):
    kind, _, rest = spec.partition(":")
    if kind == "builtin":
        return make_builtin(rest)
    if kind == "plugin":
        return PluginEvaluator(rest, timeout)
    raise ValidationError(f"black box must be builtin:NAME or plugin:CMD, got {spec!r}")


def _r_param(args, range_spec: RangeSpec) -> float:
    if args.r is not None:
        return args.r
    if range_spec.kind == "interval" and range_spec.lo == 0:
        return range_spec.hi
    raise ValidationError(f"{args.mechanism} needs --r or an interval range [0, r]")


def _box_range(args, range_spec: RangeSpec) -> RangeSpec:
    if args.mechanism in ("small-diameter", "double-mono", "lipschitz-filter") and range_spec.kind == "unbounded":
        return RangeSpec.interval(_r_param(args, range_spec))
    return range_spec


def run_mechanism(args, box, x: Dataset, range_spec: RangeSpec, rng: RandomStream) -> WrapperOutput:
    profile = TEST_PROFILE if args.unsafe_test_constants else PAPER_PROFILE
    m = args.mechanism
    if m == "autosense":
        return autosense_wrap(box, x, range_spec, args.epsilon, args.delta, args.beta, rng, profile=profile)
    if m == "subset-extension":
        return subset_extension(box, x, args.c, args.epsilon, args.delta, rng, profile)
    if m == "tahoe":
        return modified_tahoe(box, x, args.c, args.epsilon, args.delta, rng, profile)
    r = _r_param(args, range_spec)
    if m == "small-diameter":
        return small_diameter(box, x, args.c, r, args.epsilon, rng)
    if m == "double-mono":
        return double_mono_wrap(box, x, r, args.epsilon, args.beta, rng, args.c)
    value = lipschitz_filter(box, x, args.c, r)
    return WrapperOutput(m, value, {}, box.ledger, box.realized_depth, PAPER_PROFILE.name)


def _params(args) -> dict:
    keys = ("epsilon", "delta", "beta", "c", "r", "range", "blackbox", "dataset", "multiset")
    return {k: getattr(args, k, None) for k in keys if getattr(args, k, None) is not None}


def _profile_name(args) -> str:
    return (TEST_PROFILE if args.unsafe_test_constants else PAPER_PROFILE).name


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True, default=_json_default) + "\n")


def _base_report(args) -> dict:
    report = {
        "mechanism": args.mechanism,
        "params": _params(args),
        "seed": args.seed,
        "profile": _profile_name(args),
    }
    if args.unsafe_test_constants:
        report["warning"] = "test constants: the privacy guarantee does not hold"
    return report


def cmd_wrap(args, evaluator) -> int:
    x = load_dataset(args.dataset, args.multiset)
    range_spec = _box_range(args, RangeSpec.parse(args.range))
    box = BlackBox(evaluator, range_spec, budget=args.budget)
    report = _base_report(args)
    try:
        out = run_mechanism(args, box, x, range_spec, RandomStream(args.seed))
    except (PluginFailure, BudgetExceeded) as err:
        report.update(result=None, released={}, queries=box.ledger, realized_depth=box.realized_depth, error=str(err))
        emit(report)
        raise
    report.update(
        result=out.to_dict()["result"],
        released=out.released,
        queries=out.queries,
        realized_depth=out.realized_depth,
    )
    if out.diagnostics:
        report["diagnostics"] = out.diagnostics
    emit(report)
    return 0


def _neighbor(args, x: Dataset) -> Dataset:
    if args.neighbor:
        nb = load_dataset(args.neighbor, args.multiset)
        if not nb.is_neighbor(x):
            raise ValidationError("--neighbor must differ from the dataset in exactly one element")
        return nb
    if x.size == 0:
        raise ValidationError("cannot form a neighbor of the empty dataset; pass --neighbor")
    return x.without(x.elements[-1])


def cmd_audit(args, evaluator) -> int:
    x = load_dataset(args.dataset, args.multiset)
    nb = _neighbor(args, x)
    range_spec = _box_range(args, RangeSpec.parse(args.range))
    root = RandomStream(args.seed)

    def sample(data, i):
        out = run_mechanism(args, BlackBox(evaluator, range_spec, budget=args.budget), data, range_spec, root.spawn(i))
        return out.result

    outs_x = [sample(x, 2 * i) for i in range(args.trials)]
    outs_nb = [sample(nb, 2 * i + 1) for i in range(args.trials)]
    rep = audit_outputs(outs_x, outs_nb, args.bins, delta=args.delta)
    report = _base_report(args)
    report.update(audit=json.loads(rep.to_json()), slack=slack(args.trials), bound=args.epsilon + slack(args.trials))
    emit(report)
    return 0


def cmd_oracle(args, evaluator) -> int:
    x = load_dataset(args.dataset, args.multiset)
    box = BlackBox(evaluator, RangeSpec.parse(args.range), budget=args.budget)
    box.set_guard(x, None)
    f = lambda s: box.query(Dataset.of(s))  # noqa: E731
    if args.oracle == "down-sensitivity":
        value = oracles.down_sensitivity(f, x.elements, args.lam)
    else:
        value = oracles.lipschitz_on_dn(f, x.elements, args.lam, args.c)
    emit({"oracle": args.oracle, "lambda": args.lam, "value": value, "queries": box.ledger})
    return 0


def cmd_bench(args, evaluator) -> int:
    x = load_dataset(args.dataset, args.multiset)
    range_spec = _box_range(args, RangeSpec.parse(args.range))
    root = RandomStream(args.seed)
    results, queries, depths = [], [], []
    start = time.perf_counter()
    for i in range(args.trials):
        box = BlackBox(evaluator, range_spec, budget=args.budget)
        out = run_mechanism(args, box, x, range_spec, root.spawn(i))
        results.append(out.result)
        queries.append(out.queries)
        depths.append(out.realized_depth)
    elapsed = time.perf_counter() - start
    values = [v for v in results if v is not None]
    report = _base_report(args)
    report.update(
        trials=args.trials,
        bottom_rate=1 - len(values) / args.trials,
        mean=statistics.fmean(values) if values else None,
        median=statistics.median(values) if values else None,
        stdev=statistics.stdev(values) if len(values) > 1 else None,
        max_queries=max(queries),
        max_realized_depth=max(depths),
        seconds_per_run=elapsed / args.trials,
    )
    emit(report)
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, help="file with one element per line, or a JSON array")
    p.add_argument("--multiset", action="store_true", help="treat repeated values as distinct copies")
    p.add_argument("--blackbox", required=True, help="builtin:NAME or plugin:CMD")
    p.add_argument("--range", default="unbounded", help="list:A..B[:STEP], list:V,V,..., interval:R, interval:LO,HI, unbounded")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None, help="max distinct subsets queried")
    p.add_argument("--timeout", type=float, default=5.0, help="per-query plugin time limit in seconds")


def _mechanism_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mechanism", required=True, choices=MECHANISMS)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--c", type=float, default=1.0, help="claimed Lipschitz constant")
    p.add_argument("--r", type=float, default=None, help="range width for small-diameter, double-mono and lipschitz-filter")
    p.add_argument("--unsafe-test-constants", action="store_true", help="small constants for tests; voids privacy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privwrap", description=f"Privacy wrappers for black-box functions (RNG: {RNG_NAME}).")
    sub = parser.add_subparsers(dest="command", required=True)
    wrap = sub.add_parser("wrap", help="run one mechanism once")
    _mechanism_args(wrap)
    _common(wrap)
    audit = sub.add_parser("audit", help="empirical privacy-loss estimate on a neighbor pair (heuristic)")
    _mechanism_args(audit)
    _common(audit)
    audit.add_argument("--neighbor", default=None, help="neighboring dataset (default: drop the last element)")
    audit.add_argument("--trials", type=int, default=10_000)
    audit.add_argument("--bins", type=int, default=20)
    oracle = sub.add_parser("oracle", help="brute-force reference values")
    oracle.add_argument("oracle", choices=("down-sensitivity", "lipschitz"))
    oracle.add_argument("--lambda", dest="lam", type=int, required=True)
    oracle.add_argument("--c", type=float, default=1.0)
    _common(oracle)
    bench = sub.add_parser("bench", help="repeat a mechanism and summarize")
    _mechanism_args(bench)
    _common(bench)
    bench.add_argument("--trials", type=int, default=100)
    return parser


COMMANDS = {"wrap": cmd_wrap, "audit": cmd_audit, "oracle": cmd_oracle, "bench": cmd_bench}


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    evaluator = None
    try:
        for name in ("epsilon", "trials", "bins", "budget"):
            v = getattr(args, name, None)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"--{name} must be positive")
        evaluator = make_evaluator(args.blackbox, args.timeout)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *_a, **_k: print(f"warning: {msg}", file=sys.stderr)
            return COMMANDS[args.command](args, evaluator)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except PluginFailure as err:
        print(f"plugin failure: {err}", file=sys.stderr)
        return EXIT_PLUGIN
    except BudgetExceeded as err:
        print(f"budget exceeded: {err}", file=sys.stderr)
        return EXIT_BUDGET
    finally:
        if isinstance(evaluator, PluginEvaluator):
            evaluator.close()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
