"""Command-line entry point: ``crbs solve | campaign | sweep``.

Exit codes for ``solve``: 0 SAT, 1 UNSAT, 2 TIMEOUT, 64 usage error,
65 bad instance input.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import nullcontext

from .campaign import (
    compare,
    format_comparison,
    format_summary,
    run_campaign,
    run_single,
    run_theta_sweep,
    summarize,
    unique_labels,
    write_rows_csv,
    write_summary_csv,
    write_sweep_csv,
)
from .heuristics import KINDS, HeuristicConfig
from .instances import InstanceError, InstanceSpec, preset
from .search import Budget, RestartPolicy, count_solutions, BudgetExhausted
from .instances import generate

EXIT_STATUS = {"SAT": 0, "UNSAT": 1, "TIMEOUT": 2}
EXIT_USAGE = 64
EXIT_INPUT = 65


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which would read as TIMEOUT
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_restart(text: str) -> RestartPolicy | None:
    if text == "off":
        return None
    try:
        init, rho = text.split(":")
        return RestartPolicy(int(init), float(rho))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected INIT:RHO or off, got {text!r} ({exc})") from None


def parse_thetas(text: str) -> list[float]:
    """Comma list ("0,0.1,0.5") or range "start:stop:step" (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = map(float, text.split(":"))
            count = int(round((stop - start) / step)) + 1
            return [round(start + i * step, 10) for i in range(count)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad theta grid {text!r}") from None


def _common(p: argparse.ArgumentParser, many_heuristics: bool) -> None:
    if many_heuristics:
        p.add_argument("--heuristic", action="append", choices=KINDS,
                       help="heuristic to run (repeatable; default: all six)")
    else:
        p.add_argument("--heuristic", choices=KINDS, default="crbs-sum")
    p.add_argument("--theta", type=float, default=0.1, help="crbs-sum future weight (default 0.1)")
    p.add_argument("--gamma", type=float, default=0.999, help="ABS activity decay (default 0.999)")
    p.add_argument("--exclude-past", action="store_true",
                   help="skip past variables when decrementing correlations")
    p.add_argument("--timeout-s", type=float, default=None)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--restart", type=parse_restart, default=RestartPolicy(),
                   metavar="INIT:RHO|off", help="geometric restarts (default 10:1.1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", metavar="PATH", help="write per-run CSV rows here ('-' for stdout)")
    p.add_argument("-v", "--verbose", action="store_true")


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", action="append", default=[], metavar="SPEC",
                   help="instance spec family:key=value,... (repeatable)")
    p.add_argument("--preset", choices=("desk", "qg", "tiny"), action="append", default=[])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crbs", description="Correlation-based variable ordering for CSP search.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--family", choices=("queens", "latin", "quasigroup", "coloring",
                                        "random-binary", "pigeonhole"))
    s.add_argument("--n", type=int)
    s.add_argument("--order", type=int)
    s.add_argument("--holes", type=int)
    s.add_argument("--prefilled", help="latin prefills as row.col.value;...")
    s.add_argument("--k", type=int, help="colors")
    s.add_argument("--myciel", type=int)
    s.add_argument("--edge-p", type=float, help="random graph edge probability")
    s.add_argument("--d", type=int)
    s.add_argument("--p1", type=float)
    s.add_argument("--p2", type=float)
    s.add_argument("--file", help="native instance file")
    s.add_argument("--dimacs", help="DIMACS graph for coloring (with --k)")
    s.add_argument("--instance", metavar="SPEC")
    s.add_argument("--count", action="store_true", help="count all solutions (restarts off)")
    s.add_argument("--print-solution", action="store_true")
    _common(s, many_heuristics=False)

    c = sub.add_parser("campaign", help="compare heuristics over an instance set")
    _instance_args(c)
    _common(c, many_heuristics=True)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--summary", metavar="PATH", help="also write the text summary here")
    c.add_argument("--summary-csv", metavar="PATH")
    c.add_argument("--rank-by", choices=("time", "nodes"), default="time")

    w = sub.add_parser("sweep", help="crbs-sum theta sweep")
    _instance_args(w)
    _common(w, many_heuristics=False)
    w.add_argument("--thetas", type=parse_thetas, default=parse_thetas("0:1:0.1"),
                   help="comma list or start:stop:step (default 0:1:0.1)")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--runs-csv", metavar="PATH", help="per-run rows for every theta")
    return parser


def _solve_spec(args) -> InstanceSpec:
    if args.instance:
        return InstanceSpec.parse(args.instance)
    if args.file:
        return InstanceSpec.make("file", path=args.file)
    if args.dimacs:
        if args.k is None:
            raise InstanceError("--dimacs needs --k")
        return InstanceSpec.make("coloring", dimacs=args.dimacs, k=args.k)
    if not args.family:
        raise InstanceError("give --family, --instance, --file or --dimacs")
    fam = args.family
    names = {
        "queens": ("n",),
        "pigeonhole": ("n",),
        "latin": ("order", "prefilled"),
        "quasigroup": ("order", "holes", "seed"),
        "random-binary": ("n", "d", "p1", "p2", "seed"),
        "coloring": ("k", "myciel", "n", "seed"),
    }[fam]
    params = {k: getattr(args, k) for k in names if getattr(args, k) is not None}
    if fam == "coloring" and args.edge_p is not None:
        params["p"] = args.edge_p
    return InstanceSpec.make(fam, **params)


def _open(path):
    if path in (None, "-"):
        return nullcontext(sys.stdout)
    return open(path, "w", newline="", encoding="utf-8")


def _config(args, kind) -> HeuristicConfig:
    return HeuristicConfig(kind=kind, theta=args.theta, gamma=args.gamma, exclude_past=args.exclude_past)


def _specs(args) -> list[InstanceSpec]:
    specs = [InstanceSpec.parse(t) for t in args.instance]
    for name in args.preset:
        specs += preset(name, args.seed)
    if not specs:
        raise InstanceError("no instances: give --instance and/or --preset")
    return specs


def cmd_solve(args) -> int:
    spec = _solve_spec(args)
    config = _config(args, args.heuristic)
    budget = Budget(args.timeout_s, args.max_nodes)
    if args.count:
        problem = generate(spec)
        try:
            n, stats = count_solutions(problem, config, budget, return_stats=True)
        except BudgetExhausted as exc:
            print(f"count aborted: {exc}")
            return EXIT_STATUS["TIMEOUT"]
        print(f"solutions={n} nodes={stats.nodes} failures={stats.failures} "
              f"time_ms={stats.time_s * 1000:.1f}")
        return 0
    row, outcome = run_single(spec, config, budget, args.restart, seed=args.seed)
    print(f"{row.instance_id} heuristic={row.heuristic} status={row.status} nodes={row.nodes} "
          f"failures={row.failures} restarts={row.restarts} time_ms={row.time_ms:.1f}")
    if args.print_solution and outcome.solution is not None:
        print("solution", " ".join(map(str, outcome.solution)))
    if args.csv:
        with _open(args.csv) as fh:
            write_rows_csv([row], fh)
    return EXIT_STATUS[row.status]


def cmd_campaign(args) -> int:
    specs = _specs(args)
    kinds = args.heuristic or list(KINDS)
    configs = [_config(args, k) for k in kinds]
    labels = unique_labels(configs)
    rows = run_campaign(specs, configs, Budget(args.timeout_s, args.max_nodes), args.restart,
                        args.workers, args.seed)
    if args.csv:
        with _open(args.csv) as fh:
            write_rows_csv(rows, fh)
    table = summarize(rows, labels)
    text = format_summary(table, labels) + "\n" + format_comparison(compare(table, labels, args.rank_by), labels)
    print(text)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.summary_csv:
        with _open(args.summary_csv) as fh:
            write_summary_csv(table, labels, fh)
    return 0


def cmd_sweep(args) -> int:
    specs = _specs(args)
    base = _config(args, "crbs-sum")
    sweep, runs = run_theta_sweep(specs, args.thetas, Budget(args.timeout_s, args.max_nodes),
                                  args.restart, args.workers, args.seed, base)
    with _open(args.csv) as fh:
        write_sweep_csv(sweep, fh)
    if args.runs_csv:
        with _open(args.runs_csv) as fh:
            write_rows_csv(runs, fh)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"solve": cmd_solve, "campaign": cmd_campaign, "sweep": cmd_sweep}[args.command]
    try:
        return handler(args)
    except (InstanceError, ValueError) as exc:
        print(f"crbs: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
