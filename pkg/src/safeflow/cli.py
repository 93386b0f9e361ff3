"""Command-line entry point: ``safeflow {solve,bound,gen,stats,check}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import margin, mcmf, oracle, rounding
from .instance import (
    GenerationFailed,
    InvalidInstance,
    ParseError,
    generate_random,
    normalize,
    read_instance,
    to_dict,
    validate,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_SAFE = 2
EXIT_NOT_FOUND = 3
EXIT_CAPACITY = 4

BOUND_SCHEMA = "safeflow.bound/1"
STATS_SCHEMA = "safeflow.stats/1"
VERDICT_EXIT = {
    rounding.FOUND: EXIT_OK,
    rounding.NO_SAFE_SOLUTION: EXIT_NO_SAFE,
    rounding.NOT_FOUND: EXIT_NOT_FOUND,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("SAFEFLOW_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"SAFEFLOW_SEED must be an integer, got {raw!r}")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    cfg = rounding.DriverConfig(r=args.trials, seed=args.seed, rho_floor=args.rho_floor)
    report = rounding.solve(inst, cfg)
    _emit(report.to_json(), args.out)
    if args.dump_flow and report.flow is not None:
        with open(args.dump_flow, "w", encoding="utf-8") as fh:
            fh.write(mcmf.flow_csv(report.flow))
    if report.verdict != rounding.FOUND:
        print(rounding.MESSAGES[report.verdict], file=sys.stderr)
    return VERDICT_EXIT[report.verdict]


def bound_table(inst, trials=(1, 10, 20)) -> str:
    norm, _ = normalize(inst)
    m = norm.m
    buf = io.StringIO()
    buf.write(f"# schema: {BOUND_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "id", "capacity", "rho", "shrunk_capacity", "failure_bound", "status"])
    for e in norm.edges:
        r = margin.rho(e.capacity, m)
        if r > 0:
            w.writerow(["edge", e.id, repr(e.capacity), repr(r), repr(r * e.capacity), "", "ok"])
        else:
            w.writerow(["edge", e.id, repr(e.capacity), repr(r), "", "", "margin undefined"])
    for r in trials:
        w.writerow(["theorem", r, "", "", "", repr(margin.failure_bound(r)), ""])
    return buf.getvalue()


def cmd_bound(args) -> int:
    _emit(bound_table(read_instance(args.instance)), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    inst = generate_random(
        nodes=args.nodes,
        edge_prob=args.edge_prob,
        capacity_range=tuple(args.cap_range),
        k=args.k,
        demand_range=tuple(args.demand_range),
        seed=args.seed,
        cost_range=tuple(args.cost_range),
    )
    _emit(json.dumps(to_dict(inst), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_stats(args) -> int:
    norm, _, safety = rounding.prepare(read_instance(args.instance))
    try:
        flow = mcmf.relax(norm, safety)
    except mcmf.NoSafeSolution as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NO_SAFE
    st = rounding.sample_loads(flow, norm, args.roundings, args.seed)
    buf = io.StringIO()
    buf.write(f"# schema: {STATS_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["edge", "flow", "mean_load", "std_load", "max_load", "roundings"])
    for j in range(norm.m):
        w.writerow([j, repr(float(st.flow[j])), repr(float(st.mean[j])), repr(float(st.std[j])),
                    repr(float(st.max[j])), st.roundings])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    inst = read_instance(args.instance)
    if not args.oracle:
        res = validate(inst)
        _emit(json.dumps({"ok": res.ok, "violations": list(res.violations)}, indent=2) + "\n",
              args.out)
        return EXIT_OK if res.ok else EXIT_ERROR
    norm, _, safety = rounding.prepare(inst)
    verdict = oracle.exact_feasibility(norm, safety.shrunk_capacity)
    _emit(json.dumps(verdict.to_dict(norm), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="safeflow", description="Unsplittable flow via safe randomized rounding.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    seed = _default_seed()

    s = sub.add_parser("solve", help="run the solver and print a JSON report")
    s.add_argument("instance")
    s.add_argument("--trials", "-r", type=int, default=20)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--rho-floor", type=float, default=0.0)
    s.add_argument("--dump-flow", metavar="PATH")
    s.add_argument("--out", metavar="PATH")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bound", help="per-edge margins and failure bounds as CSV")
    b.add_argument("instance")
    b.add_argument("--out", metavar="PATH")
    b.set_defaults(func=cmd_bound)

    g = sub.add_parser("gen", help="write a random instance")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--edge-prob", type=float, default=0.5)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--cap-range", type=float, nargs=2, default=(20.0, 40.0), metavar=("LO", "HI"))
    g.add_argument("--demand-range", type=float, nargs=2, default=(0.1, 1.0),
                   metavar=("LO", "HI"))
    g.add_argument("--cost-range", type=float, nargs=2, default=(1.0, 10.0), metavar=("LO", "HI"))
    g.add_argument("--seed", type=int, default=seed)
    g.add_argument("--out", metavar="PATH")
    g.set_defaults(func=cmd_gen)

    st = sub.add_parser("stats", help="empirical rounded loads versus relaxation flow")
    st.add_argument("instance")
    st.add_argument("--roundings", "-N", type=int, default=1000)
    st.add_argument("--seed", type=int, default=seed)
    st.add_argument("--out", metavar="PATH")
    st.set_defaults(func=cmd_stats)

    c = sub.add_parser("check", help="validate an instance, or run the exact oracle")
    c.add_argument("instance")
    c.add_argument("--oracle", action="store_true")
    c.add_argument("--out", metavar="PATH")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        return args.func(args)
    except margin.CapacityTooSmall as exc:
        print(f"capacity too small: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (OSError, ParseError, InvalidInstance, GenerationFailed, ValueError,
            oracle.OracleTooLarge, mcmf.IterationLimit) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
