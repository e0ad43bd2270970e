"""Benchmark harness: single runs, heuristic comparison campaigns and theta sweeps.

Every (instance, heuristic) pair yields one :class:`RunRow`. Rows serialize to
CSV with the columns in :data:`CSV_COLUMNS`. Summaries follow the usual
conventions for solver comparison tables: a "total" line over all instances
of a family, where any timeout turns the mean time cell into "k TO", and a
"solved by all" line restricted to instances every listed heuristic finished.
"""

from __future__ import annotations

import csv
import io
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

from .heuristics import HeuristicConfig
from .instances import InstanceSpec, generate
from .search import Budget, RestartPolicy, solve

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "family",
    "instance_id",
    "heuristic",
    "theta",
    "status",
    "nodes",
    "failures",
    "restarts",
    "time_ms",
    "seed",
)
FINISHED = ("SAT", "UNSAT")


@dataclass(frozen=True)
class RunRow:
    family: str
    instance_id: str
    heuristic: str
    theta: float | None
    status: str
    nodes: int
    failures: int
    restarts: int
    time_ms: float
    seed: int | None

    @property
    def solved(self) -> bool:
        return self.status in FINISHED


@dataclass(frozen=True)
class Job:
    spec: InstanceSpec
    config: HeuristicConfig
    label: str
    restart: RestartPolicy | None
    budget: Budget
    seed: int | None = None


def run_single(spec: InstanceSpec, config: HeuristicConfig, budget: Budget | None = None,
               restart: RestartPolicy | None = RestartPolicy(), label: str | None = None,
               seed: int | None = None):
    """Solve one instance; returns (RunRow, SearchOutcome)."""
    problem = generate(spec)
    outcome = solve(problem, config, restart=restart, budget=budget)
    s = outcome.stats
    row = RunRow(
        family=spec.family,
        instance_id=spec.label,
        heuristic=label or config.label,
        theta=config.theta if config.kind == "crbs-sum" else None,
        status=outcome.status.value,
        nodes=s.nodes,
        failures=s.failures,
        restarts=s.restarts,
        time_ms=round(s.time_s * 1000.0, 3),
        seed=spec.seed if spec.seed is not None else seed,
    )
    return row, outcome


def _run_job(job: Job) -> RunRow:
    try:
        row, _ = run_single(job.spec, job.config, job.budget, job.restart, job.label, job.seed)
        return row
    except Exception as exc:  # a broken instance must not sink the campaign
        log.error("job %s / %s failed: %s", job.spec.label, job.label, exc)
        return RunRow(job.spec.family, job.spec.label, job.label,
                      job.config.theta if job.config.kind == "crbs-sum" else None,
                      "ERROR", 0, 0, 0, 0.0, job.spec.seed if job.spec.seed is not None else job.seed)


def _execute(jobs: list[Job], workers: int) -> list[RunRow]:
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order, so output order is independent of scheduling
        return list(pool.map(_run_job, jobs))


def unique_labels(configs: list[HeuristicConfig]) -> list[str]:
    """Labels for the heuristic columns; repeated entries get '#2', '#3'..."""
    seen = {}
    out = []
    for c in configs:
        base = c.label
        seen[base] = seen.get(base, 0) + 1
        out.append(base if seen[base] == 1 else f"{base}#{seen[base]}")
    return out


def run_campaign(specs: list[InstanceSpec], configs: list[HeuristicConfig],
                 budget: Budget | None = None, restart: RestartPolicy | None = RestartPolicy(),
                 workers: int = 1, seed: int | None = None) -> list[RunRow]:
    if not specs or not configs:
        raise ValueError("a campaign needs at least one instance and one heuristic")
    budget = budget or Budget()
    labels = unique_labels(configs)
    jobs = [
        Job(spec, cfg, label, restart, budget, seed)
        for spec in specs
        for cfg, label in zip(configs, labels)
    ]
    return _execute(jobs, workers)


def run_theta_sweep(specs: list[InstanceSpec], thetas, budget: Budget | None = None,
                    restart: RestartPolicy | None = RestartPolicy(), workers: int = 1,
                    seed: int | None = None, base: HeuristicConfig | None = None):
    """crbs-sum over a theta grid; returns (sweep rows, run rows)."""
    thetas = [float(t) for t in thetas]
    if not thetas:
        raise ValueError("empty theta grid")
    for t in thetas:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"theta {t} outside [0, 1]")
    base = base or HeuristicConfig("crbs-sum")
    configs = [replace(base, kind="crbs-sum", theta=t) for t in thetas]
    runs = run_campaign(specs, configs, budget, restart, workers, seed)
    sweep = []
    for t, label in zip(thetas, unique_labels(configs)):
        rows = [r for r in runs if r.heuristic == label]
        sweep.append({
            "theta": t,
            "mean_time": statistics.fmean(r.time_ms / 1000.0 for r in rows),
            "mean_nodes": statistics.fmean(r.nodes for r in rows),
            "instances": len(rows),
            "timeouts": sum(r.status == "TIMEOUT" for r in rows),
        })
    return sweep, runs


# CSV ------------------------------------------------------------------------

def write_rows_csv(rows, fh) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
    w.writeheader()
    for r in rows:
        d = asdict(r)
        d["theta"] = "" if r.theta is None else r.theta
        d["seed"] = "" if r.seed is None else r.seed
        w.writerow(d)


def read_rows_csv(fh) -> list[RunRow]:
    out = []
    for d in csv.DictReader(fh):
        out.append(RunRow(
            family=d["family"],
            instance_id=d["instance_id"],
            heuristic=d["heuristic"],
            theta=float(d["theta"]) if d["theta"] else None,
            status=d["status"],
            nodes=int(d["nodes"]),
            failures=int(d["failures"]),
            restarts=int(d["restarts"]),
            time_ms=float(d["time_ms"]),
            seed=int(d["seed"]) if d["seed"] else None,
        ))
    return out


SWEEP_COLUMNS = ("theta", "mean_time", "mean_nodes", "instances", "timeouts")


def write_sweep_csv(sweep, fh) -> None:
    w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
    w.writeheader()
    w.writerows(sweep)


# Summaries ------------------------------------------------------------------

@dataclass
class Cell:
    mean_time: float | None  # seconds
    mean_nodes: float | None
    timeouts: int = 0
    count: int = 0


@dataclass
class FamilyRow:
    family: str
    n_total: int
    total: dict  # heuristic -> Cell
    n_solved_by_all: int
    solved_by_all: dict


def _cell(rows) -> Cell:
    if not rows:
        return Cell(None, None, 0, 0)
    tos = sum(not r.solved for r in rows)
    return Cell(
        statistics.fmean(r.time_ms / 1000.0 for r in rows),
        statistics.fmean(r.nodes for r in rows),
        tos,
        len(rows),
    )


def summarize(rows: list[RunRow], heuristics: list[str] | None = None) -> list[FamilyRow]:
    """Per-family table rows plus a final "Total" row."""
    if heuristics is None:
        heuristics = list(dict.fromkeys(r.heuristic for r in rows))
    families = list(dict.fromkeys(r.family for r in rows))
    by_key = {(r.instance_id, r.heuristic): r for r in rows}
    out = []

    def build(name, instances):
        solved_all = [i for i in instances
                      if all((i, h) in by_key and by_key[(i, h)].solved for h in heuristics)]
        total = {h: _cell([by_key[(i, h)] for i in instances if (i, h) in by_key]) for h in heuristics}
        sba = {h: _cell([by_key[(i, h)] for i in solved_all]) for h in heuristics}
        return FamilyRow(name, len(instances), total, len(solved_all), sba)

    all_instances = []
    for fam in families:
        instances = list(dict.fromkeys(r.instance_id for r in rows if r.family == fam))
        all_instances += instances
        out.append(build(fam, instances))
    out.append(build("Total", all_instances))
    return out


def rank_keys(row: FamilyRow, heuristics, rank_by: str = "time") -> dict:
    """Family-level ranking key: fewer timeouts first, then mean time (or nodes)."""
    keys = {}
    for h in heuristics:
        c = row.total[h]
        metric = c.mean_time if rank_by == "time" else c.mean_nodes
        keys[h] = (c.timeouts, metric if metric is not None else float("inf"))
    return keys


def compare(table: list[FamilyRow], heuristics: list[str], rank_by: str = "time") -> dict:
    """Pairwise "faster than" counts plus fastest / second-fastest counts over families."""
    fams = [r for r in table if r.family != "Total"]
    faster = {a: {b: 0 for b in heuristics if b != a} for a in heuristics}
    fastest = dict.fromkeys(heuristics, 0)
    second = dict.fromkeys(heuristics, 0)
    for row in fams:
        keys = rank_keys(row, heuristics, rank_by)
        for a in heuristics:
            for b in heuristics:
                if a != b and keys[a] < keys[b]:
                    faster[a][b] += 1
        levels = sorted(set(keys.values()))
        for h in heuristics:
            if keys[h] == levels[0]:
                fastest[h] += 1
            elif len(levels) > 1 and keys[h] == levels[1]:
                second[h] += 1
    return {"faster": faster, "fastest": fastest, "second": second, "families": len(fams)}


def _fmt_time(c: Cell) -> str:
    if c.count == 0:
        return "-"
    if c.timeouts:
        return f"{c.timeouts} TO"
    return f"{c.mean_time:.3f}"


def _fmt_nodes(c: Cell) -> str:
    if c.count == 0 or c.timeouts or c.mean_nodes is None:
        return "-"
    m = c.mean_nodes
    if m >= 1e6:
        return f"{m / 1e6:.0f}M"
    if m >= 1e4:
        return f"{m / 1e3:.0f}K"
    return f"{m:.0f}"


def format_summary(table: list[FamilyRow], heuristics: list[str]) -> str:
    width = max(10, *(len(h) + 1 for h in heuristics))
    head = f"{'family':<16}{'':<22}" + "".join(f"{h:>{width}}" for h in heuristics)
    buf = io.StringIO()
    print("mean time (s)".center(len(head)), file=buf)
    print(head, file=buf)
    print("-" * len(head), file=buf)
    for row in table:
        t = f"total ({row.n_total})"
        s = f"solved by all ({row.n_solved_by_all})"
        print(f"{row.family:<16}{t:<22}" + "".join(f"{_fmt_time(row.total[h]):>{width}}" for h in heuristics), file=buf)
        print(f"{'':<16}{s:<22}" + "".join(f"{_fmt_time(row.solved_by_all[h]):>{width}}" for h in heuristics), file=buf)
    print(file=buf)
    print("nodes".center(len(head)), file=buf)
    print(head, file=buf)
    print("-" * len(head), file=buf)
    for row in table:
        t = f"total ({row.n_total})"
        s = f"solved by all ({row.n_solved_by_all})"
        print(f"{row.family:<16}{t:<22}" + "".join(f"{_fmt_nodes(row.total[h]):>{width}}" for h in heuristics), file=buf)
        print(f"{'':<16}{s:<22}" + "".join(f"{_fmt_nodes(row.solved_by_all[h]):>{width}}" for h in heuristics), file=buf)
    return buf.getvalue()


def format_comparison(cmp: dict, heuristics: list[str]) -> str:
    width = max(10, *(len(h) + 1 for h in heuristics))
    lab = 28
    buf = io.StringIO()
    print(f"{'':<{lab}}" + "".join(f"{h:>{width}}" for h in heuristics), file=buf)
    for b in heuristics:
        cells = ["-" if a == b else str(cmp["faster"][a][b]) for a in heuristics]
        print(f"{('faster than ' + b):<{lab}}" + "".join(f"{c:>{width}}" for c in cells), file=buf)
    print(f"{'fastest':<{lab}}" + "".join(f"{cmp['fastest'][h]:>{width}}" for h in heuristics), file=buf)
    print(f"{'second fastest':<{lab}}" + "".join(f"{cmp['second'][h]:>{width}}" for h in heuristics), file=buf)
    print(f"({cmp['families']} families)", file=buf)
    return buf.getvalue()


def write_summary_csv(table: list[FamilyRow], heuristics: list[str], fh) -> None:
    w = csv.writer(fh)
    w.writerow(["family", "row", "instances", "heuristic", "mean_time", "mean_nodes", "timeouts"])
    for row in table:
        for kind, n, cells in (("total", row.n_total, row.total),
                               ("solved_by_all", row.n_solved_by_all, row.solved_by_all)):
            for h in heuristics:
                c = cells[h]
                w.writerow([row.family, kind, n, h,
                            "" if c.mean_time is None else f"{c.mean_time:.6f}",
                            "" if c.mean_nodes is None else f"{c.mean_nodes:.3f}",
                            c.timeouts])
