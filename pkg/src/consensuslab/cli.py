"""Command-line interface.

Subcommands: simulate, compare, dominance-check, duality, drift-bound,
lower-bound, two-phase. Results go to JSON-lines (one record per trial)
plus an optional CSV summary. Exit codes: 0 success, 1 usage error,
2 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .coalescing import complete_graph, cycle_graph, duality_check, graph_from_edge_list
from .core import StopCondition, canonicalize
from .dominance import check_dominance, empirical_time_dominance
from .drift import (
    additive_drift_bound,
    power_law,
    variable_drift_bound_generalized,
    variable_drift_bound_lw14,
)
from .harness import (
    METADATA,
    ExperimentSpec,
    InitialCondition,
    LowerBoundParams,
    run_experiment,
    run_lower_bound_experiment,
    run_two_phase_check,
    write_csv_summary,
    write_jsonl,
)
from .rules import UpdateRule, h_majority_rule, two_choices_rule, voter_rule
from .sampler import RngStream

USAGE_ERROR = 1
VALIDATION_FAILURE = 2


class UsageError(ValueError):
    pass


def parse_rule(text: str) -> UpdateRule:
    text = text.strip().lower()
    if text == "voter":
        return voter_rule()
    if text == "2choices":
        return two_choices_rule()
    if text.startswith("hmaj:"):
        try:
            h = int(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"rule: bad h in {text!r}")
        return h_majority_rule(h)
    # accept the shorter aliases used in reports
    if text.endswith("maj") and text[:-3].isdigit():
        return h_majority_rule(int(text[:-3]))
    raise UsageError(f"rule: unknown rule {text!r} (want voter|2choices|hmaj:<h>)")


def parse_initial(text: str) -> InitialCondition:
    parts = text.strip().lower().split(":")
    if parts[0] == "ncolor":
        return InitialCondition("ncolor")
    if parts[0] == "balanced" and len(parts) == 2:
        return InitialCondition("balanced", k=int(parts[1]))
    if parts[0] == "biased" and len(parts) == 3:
        return InitialCondition("biased", k=int(parts[1]), bias=int(parts[2]))
    if parts[0] == "explicit" and len(parts) == 2:
        counts = tuple(int(tok) for tok in parts[1].split(","))
        return InitialCondition("explicit", counts=counts)
    raise UsageError(f"init: cannot parse {text!r}")


def spec_from_json(path: str) -> tuple[ExperimentSpec, int]:
    with open(path) as fh:
        raw = json.load(fh)
    try:
        rules = tuple(parse_rule(r) for r in raw["rules"])
        spec = ExperimentSpec(
            rules=rules,
            n=int(raw["n"]),
            initial=parse_initial(raw["initial"]),
            stop=StopCondition(
                kappa=int(raw.get("kappa", 1)),
                max_rounds=int(raw.get("max_rounds", 10**6)),
            ),
            trials=int(raw["trials"]),
            seed=int(raw["seed"]),
            record_every=int(raw.get("record_every", 0)),
        )
    except KeyError as exc:
        raise UsageError(f"spec: missing field {exc.args[0]!r}")
    except ValueError as exc:
        raise UsageError(f"spec: {exc}")
    return spec, int(raw.get("workers", 1))


def _spec_from_args(args, rules) -> ExperimentSpec:
    if args.n < 1:
        raise UsageError("n: must be >= 1")
    return ExperimentSpec(
        rules=tuple(rules),
        n=args.n,
        initial=parse_initial(args.init),
        stop=StopCondition(kappa=args.kappa, max_rounds=args.max_rounds),
        trials=args.trials,
        seed=args.seed,
        record_every=0,
    )


def _emit(records: list[dict], args) -> None:
    if args.out:
        write_jsonl(records, args.out)
        if getattr(args, "summary", None):
            write_csv_summary(records, args.summary)
    else:
        for rec in records:
            print(json.dumps(rec, sort_keys=True))


def cmd_simulate(args) -> int:
    if args.spec:
        spec, workers = spec_from_json(args.spec)
        workers = args.workers or workers
    else:
        spec = _spec_from_args(args, [parse_rule(args.rule)])
        workers = args.workers or 1
    records = run_experiment(spec, workers=workers, subcommand="simulate")
    _emit(records, args)
    return 0


def cmd_compare(args) -> int:
    rule_fast = parse_rule(args.fast)
    rule_slow = parse_rule(args.slow)
    init = parse_initial(args.init)
    c0 = init.build(args.n)
    stop = StopCondition(kappa=args.kappa, max_rounds=args.max_rounds)
    report = empirical_time_dominance(
        rule_fast,
        rule_slow,
        c0,
        stop,
        trials=args.trials,
        rng=RngStream(args.seed, ("compare",)),
        epsilon=args.epsilon,
    )
    out = {
        "subcommand": "compare",
        "rule_fast": rule_fast.label(),
        "rule_slow": rule_slow.label(),
        "n": args.n,
        "kappa": args.kappa,
        "seed": args.seed,
        "trials": args.trials,
        "max_cdf_deficit": report.max_cdf_deficit,
        "epsilon": report.epsilon,
        "passed": report.passed,
        "censored_fast": report.censored_fast,
        "censored_slow": report.censored_slow,
        "metadata": METADATA,
    }
    print(json.dumps(out, sort_keys=True))
    if args.out:
        write_jsonl([out], args.out)
    return 0 if report.passed or not args.expect_pass else VALIDATION_FAILURE


def cmd_dominance_check(args) -> int:
    report = check_dominance(parse_rule(args.p), parse_rule(args.q), args.n)
    out = report.to_dict()
    out["subcommand"] = "dominance-check"
    out["metadata"] = METADATA
    print(f"{len(report.violations)} violations over {report.pairs_checked} pairs")
    print(json.dumps(out, sort_keys=True))
    if args.out:
        write_jsonl([out], args.out)
    if args.expect_zero and report.violations:
        return VALIDATION_FAILURE
    return 0


def _parse_graph(text: str):
    parts = text.strip().split(":")
    if parts[0] == "complete" and len(parts) == 2:
        return complete_graph(int(parts[1]))
    if parts[0] == "cycle" and len(parts) == 2:
        return cycle_graph(int(parts[1]))
    if parts[0] == "file" and len(parts) == 2:
        with open(parts[1]) as fh:
            return graph_from_edge_list(fh.read())
    raise UsageError(f"graph: cannot parse {text!r} (want complete:<n>|cycle:<n>|file:<path>)")


def cmd_duality(args) -> int:
    g = _parse_graph(args.graph)
    for run in range(args.runs):
        duality_check(g, args.t_max, RngStream(args.seed, ("duality", run)))
    out = {
        "subcommand": "duality",
        "graph": args.graph,
        "t_max": args.t_max,
        "runs": args.runs,
        "seed": args.seed,
        "violations": 0,
        "metadata": METADATA,
    }
    print(json.dumps(out, sort_keys=True))
    if args.out:
        write_jsonl([out], args.out)
    return 0


def cmd_drift_bound(args) -> int:
    if args.form == "additive":
        res = additive_drift_bound(args.m, args.k_prime, args.c)
    else:
        h = power_law(args.a, args.b, args.x_min, args.x_max)
        if args.form == "lw14":
            res = variable_drift_bound_lw14(h, args.x0)
        else:
            res = variable_drift_bound_generalized(h, args.m, args.k_prime)
    out = {
        "subcommand": "drift-bound",
        "form": res.form_used,
        "bound": res.bound,
        "integral_error_estimate": res.integral_error_estimate,
        "metadata": METADATA,
    }
    print(json.dumps(out, sort_keys=True))
    if args.out:
        write_jsonl([out], args.out)
    return 0


def cmd_lower_bound(args) -> int:
    init = parse_initial(args.init)
    c0 = init.build(args.n)
    params = LowerBoundParams(gamma=args.gamma, ell=c0.counts[0], n=args.n)
    report = run_lower_bound_experiment(
        params, c0, args.trials, RngStream(args.seed, ("lower-bound",))
    )
    report["subcommand"] = "lower-bound"
    print(json.dumps(report, sort_keys=True))
    if args.out:
        write_jsonl([report], args.out)
    return 0


def cmd_two_phase(args) -> int:
    report = run_two_phase_check(
        args.n,
        args.trials,
        RngStream(args.seed, ("two-phase",)),
        k_split=args.k_split,
        seed=args.seed,
    )
    report["subcommand"] = "two-phase"
    print(json.dumps(report, sort_keys=True))
    if args.out:
        write_jsonl([report], args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="consensuslab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_init=True):
        p.add_argument("--n", type=int, default=1024)
        p.add_argument("--kappa", type=int, default=1)
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-rounds", type=int, default=10**6)
        if with_init:
            p.add_argument("--init", default="ncolor")
        p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="stopping-time runs for one rule")
    p.add_argument("--rule", default="voter")
    p.add_argument("--spec", default=None, help="JSON ExperimentSpec file")
    p.add_argument("--workers", type=int, default=0)
    p.add_argument("--summary", default=None, help="CSV summary path")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="paired stopping-time CDF dominance")
    p.add_argument("--fast", required=True)
    p.add_argument("--slow", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--expect-pass", action="store_true")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dominance-check", help="exhaustive one-step dominance check")
    p.add_argument("--p", required=True, help="candidate dominating rule")
    p.add_argument("--q", required=True, help="candidate dominated rule")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--expect-zero", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dominance_check)

    p = sub.add_parser("duality", help="exact voter/coalescence duality check")
    p.add_argument("--graph", default="complete:64")
    p.add_argument("--t-max", type=int, default=200)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_duality)

    p = sub.add_parser("drift-bound", help="drift-theorem bound calculators")
    p.add_argument("--form", choices=["additive", "lw14", "generalized"], required=True)
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--k-prime", type=float, default=0.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--x-min", type=float, default=1.0)
    p.add_argument("--x-max", type=float, default=1e9)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_drift_bound)

    p = sub.add_parser("lower-bound", help="2-Choices slow-start experiment")
    p.add_argument("--gamma", type=float, default=4.0)
    common(p)
    p.set_defaults(func=cmd_lower_bound)

    p = sub.add_parser("two-phase", help="phase-split timing for 3-majority")
    p.add_argument("--k-split", type=int, default=None)
    common(p, with_init=False)
    p.set_defaults(func=cmd_two_phase)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
