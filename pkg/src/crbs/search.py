"""Binary-branching backtracking search with geometric restarts."""

from __future__ import annotations

import copy
import enum
import math
import time
from dataclasses import dataclass, field

from .heuristics import Heuristic, HeuristicConfig, make_heuristic
from .model import Problem
from .propagate import (
    Decision,
    Polarity,
    SearchState,
    backtrack,
    decide_and_propagate,
    propagate_root,
)


@dataclass
class RestartPolicy:
    """Failure cutoffs growing as ``cutoff += init_cutoff * rho**k`` (floored)."""

    init_cutoff: int = 10
    rho: float = 1.1
    current_cutoff: int = field(init=False)
    k: int = field(init=False, default=0)

    def __post_init__(self):
        if self.init_cutoff < 1:
            raise ValueError("init_cutoff must be positive")
        if self.rho <= 1:
            raise ValueError("rho must be greater than 1")
        self.current_cutoff = self.init_cutoff

    def reset(self) -> None:
        self.current_cutoff = self.init_cutoff
        self.k = 0

    def next_cutoff(self) -> int:
        self.k += 1
        self.current_cutoff = math.floor(self.current_cutoff + self.init_cutoff * self.rho**self.k)
        return self.current_cutoff


def next_cutoff(policy: RestartPolicy) -> int:
    return policy.next_cutoff()


def cutoff_sequence(policy: RestartPolicy, count: int) -> list[int]:
    """First ``count`` cutoffs of a fresh copy of ``policy`` (k = 0, 1, ...)."""
    p = copy.copy(policy)
    p.reset()
    seq = [p.current_cutoff]
    while len(seq) < count:
        seq.append(p.next_cutoff())
    return seq


@dataclass(frozen=True)
class Budget:
    time_s: float | None = None
    max_nodes: int | None = None


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"


@dataclass
class SearchStats:
    nodes: int = 0
    failures: int = 0
    restarts: int = 0
    time_s: float = 0.0


@dataclass
class SearchOutcome:
    status: Status
    solution: list[int] | None
    stats: SearchStats


class BudgetExhausted(RuntimeError):
    pass


class _Search:
    def __init__(self, problem, heuristic, restart, budget, queue_seed=None, trace=None):
        self.problem = problem
        self.heuristic = heuristic
        self.restart = restart
        self.budget = budget or Budget()
        self.state = SearchState(problem, queue_seed)
        self.stats = SearchStats()
        self.trace = trace
        self._since_restart = 0
        self._restart_due = False
        self._start = time.perf_counter()

    def _check_budget(self) -> None:
        b = self.budget
        if b.max_nodes is not None and self.stats.nodes >= b.max_nodes:
            raise BudgetExhausted("node limit reached")
        if b.time_s is not None and time.perf_counter() - self._start >= b.time_s:
            raise BudgetExhausted("time limit reached")

    def _apply(self, decision: Decision) -> bool:
        self._check_budget()
        state = self.state
        report = decide_and_propagate(state, decision)
        self.stats.nodes += 1
        self.heuristic.observe(decision, report, state)
        if self.trace is not None:
            self.trace(decision, report, state)
        if report.conflict:
            self.stats.failures += 1
            self._since_restart += 1
            if self.restart is not None and self._since_restart >= self.restart.current_cutoff:
                self._restart_due = True
            backtrack(state)
            return False
        return True

    def _do_restart(self) -> None:
        while self.state.decisions:
            backtrack(self.state)
        self.stats.restarts += 1
        self._since_restart = 0
        self._restart_due = False
        self.restart.next_cutoff()

    def _next_branch(self, closed: Decision) -> bool:
        """Move to the next open branch after ``closed`` was undone.

        Returns False once the whole tree is exhausted.
        """
        d = closed
        while True:
            if self._restart_due:
                self._do_restart()
                return True
            if d.polarity is Polarity.ASSIGN:
                refute = Decision(d.var, d.value, Polarity.REFUTE)
                if self._apply(refute):
                    return True
                d = refute
                continue
            if not self.state.decisions:
                return False
            d = backtrack(self.state)

    def run(self, on_solution) -> bool:
        """Depth-first search; ``on_solution`` returns True to stop.

        Returns True if stopped at a solution, False if the tree was exhausted.
        Raises BudgetExhausted.
        """
        state = self.state
        if propagate_root(state) is not None:
            return False
        while True:
            x = self.heuristic.select(state)
            if x is None:
                if on_solution(state.values()):
                    return True
                if not state.decisions:
                    return False
                if not self._next_branch(backtrack(state)):
                    return False
                continue
            d = Decision(x, state.domains[x].min(), Polarity.ASSIGN)
            if not self._apply(d) and not self._next_branch(d):
                return False

    def elapsed(self) -> float:
        return time.perf_counter() - self._start


def _prepare(config, restart):
    if config is None:
        config = HeuristicConfig()
    elif isinstance(config, str):
        config = HeuristicConfig(kind=config)
    if restart is not None:
        restart = copy.copy(restart)
        restart.reset()
    return config, restart


def solve(
    problem: Problem,
    config: HeuristicConfig | str | None = None,
    restart: RestartPolicy | None = RestartPolicy(),
    budget: Budget | None = None,
    queue_seed: int | None = None,
    trace=None,
    heuristic: Heuristic | None = None,
) -> SearchOutcome:
    """Find one solution. ``restart=None`` disables restarts.

    The policy passed in is copied, never mutated. ``heuristic`` may supply a
    pre-built selector (whose learned state then persists across calls).
    """
    config, restart = _prepare(config, restart)
    heuristic = heuristic or make_heuristic(problem, config)
    search = _Search(problem, heuristic, restart, budget, queue_seed, trace)
    found = []

    def keep(solution):
        found.append(solution)
        return True

    try:
        sat = search.run(keep)
        status = Status.SAT if sat else Status.UNSAT
    except BudgetExhausted:
        status = Status.TIMEOUT
    search.stats.time_s = search.elapsed()
    return SearchOutcome(status, found[0] if found else None, search.stats)


def count_solutions(
    problem: Problem,
    config: HeuristicConfig | str | None = None,
    budget: Budget | None = None,
    return_stats: bool = False,
):
    """Exhaustively count solutions, restarts off. Raises BudgetExhausted."""
    config, _ = _prepare(config, None)
    search = _Search(problem, make_heuristic(problem, config), None, budget)
    count = 0

    def tally(solution):
        nonlocal count
        count += 1
        return False

    search.run(tally)
    search.stats.time_s = search.elapsed()
    if return_stats:
        return count, search.stats
    return count
