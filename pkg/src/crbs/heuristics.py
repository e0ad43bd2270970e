"""Variable-ordering heuristics.

The correlation heuristics keep a symmetric integer matrix ``a`` over variable
pairs. After an assignment ``x_i = v`` propagates without conflict, entries
``a[i][j]`` move up by one for every variable whose domain shrank and down by
one for every variable left untouched, and ``a[i][i]`` drops by one. A
conflicting assignment bumps the whole row and column of ``i`` by one (the
diagonal by two). ``crbs-sum`` scores a future variable by its summed
correlation with past variables plus ``theta`` times the sum over future
variables; ``crbs-max`` takes the largest correlation with a past variable.
Both pick the variable maximizing ``score / |dom|``.

The baselines (dom, dom/deg, dom/wdeg, activity-based search) share the same
selection interface. Ties are always broken towards the smallest variable id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import Problem
from .propagate import Decision, Polarity, PropagationReport, SearchState

KINDS = ("crbs-sum", "crbs-max", "dom", "dom-deg", "dom-wdeg", "abs")


@dataclass(frozen=True)
class HeuristicConfig:
    kind: str = "crbs-sum"
    theta: float = 0.1
    gamma: float = 0.999
    # leave past variables out of the "unchanged" decrement
    exclude_past: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown heuristic {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")

    @property
    def label(self) -> str:
        if self.kind == "crbs-sum" and self.theta != 0.1:
            return f"crbs-sum[theta={self.theta:g}]"
        if self.kind == "abs" and self.gamma != 0.999:
            return f"abs[gamma={self.gamma:g}]"
        return self.kind


class CorrelationMatrix:
    """Symmetric n x n integer correlation matrix, zero at construction."""

    def __init__(self, n: int):
        self.n = n
        self.a = np.zeros((n, n), dtype=np.int64)
        self.updates = 0

    def __getitem__(self, ij) -> int:
        return int(self.a[ij])

    def tolist(self) -> list[list[int]]:
        return self.a.tolist()

    def is_symmetric(self) -> bool:
        return bool((self.a == self.a.T).all())

    def update_no_conflict(self, i: int, report: PropagationReport, ignore: Iterable[int] = ()) -> None:
        updated, unchanged = report.updated, report.unchanged
        if (
            i in updated
            or i in unchanged
            or updated & unchanged
            or len(updated) + len(unchanged) != self.n - 1
        ):
            raise ValueError(f"report must partition every variable except {i}")
        ignore = set(ignore)
        a = self.a
        up = np.fromiter(updated, dtype=np.intp, count=len(updated))
        down = np.fromiter((j for j in unchanged if j not in ignore), dtype=np.intp)
        a[i, up] += 1
        a[up, i] += 1
        a[i, down] -= 1
        a[down, i] -= 1
        a[i, i] -= 1
        self.updates += 1

    def update_conflict(self, i: int) -> None:
        # row and column overlap on the diagonal, which therefore gains 2
        self.a[i, :] += 1
        self.a[:, i] += 1
        self.updates += 1


def update_no_conflict(matrix: CorrelationMatrix, i: int, report: PropagationReport) -> None:
    matrix.update_no_conflict(i, report)


def update_conflict(matrix: CorrelationMatrix, i: int, n: int | None = None) -> None:
    if n is not None and n != matrix.n:
        raise ValueError(f"matrix is {matrix.n} x {matrix.n}, got n={n}")
    matrix.update_conflict(i)


def crbs_sum_score(matrix: CorrelationMatrix, i: int, past, future, theta: float) -> float:
    """Past correlation plus ``theta`` times future correlation (``a[i][i]`` included)."""
    row = matrix.a[i]
    past_sum = sum(int(row[j]) for j in past)
    future_sum = sum(int(row[j]) for j in future)
    return past_sum + theta * future_sum


def crbs_max_score(matrix: CorrelationMatrix, i: int, past) -> float:
    past = list(past)
    if not past:
        return 0
    row = matrix.a[i]
    return max(int(row[j]) for j in past)


def abs_update(activity: np.ndarray, report: PropagationReport, gamma: float, future=None) -> None:
    """Activity bump for changed variables, ``gamma`` decay for unchanged future ones.

    ``future`` is a boolean mask; when omitted every unchanged variable decays.
    """
    for j in report.updated:
        activity[j] += 1.0
    for j in report.unchanged:
        if future is None or future[j]:
            activity[j] *= gamma


class Heuristic:
    """Base selector. Subclasses provide ``_scores`` over the future variables."""

    maximize = True

    def __init__(self, problem: Problem, config: HeuristicConfig):
        self.problem = problem
        self.config = config

    def select(self, state: SearchState) -> int | None:
        future = np.flatnonzero(~np.asarray(state.assigned, dtype=bool))
        if future.size == 0:
            return None
        doms = state.domains
        sizes = np.array([doms[v].size for v in future], dtype=np.float64)
        key = self._key(state, future, sizes)
        # argmax/argmin return the first extremum, i.e. the smallest id
        idx = np.argmax(key) if self.maximize else np.argmin(key)
        return int(future[idx])

    def _key(self, state, future, sizes):
        raise NotImplementedError

    def observe(self, decision: Decision, report: PropagationReport, state: SearchState) -> None:
        pass


class DomHeuristic(Heuristic):
    maximize = False

    def _key(self, state, future, sizes):
        return sizes


class DomDegHeuristic(Heuristic):
    maximize = False

    def __init__(self, problem, config):
        super().__init__(problem, config)
        self.degree = np.array([problem.degree(v) for v in range(problem.n)], dtype=np.float64)

    def _key(self, state, future, sizes):
        with np.errstate(divide="ignore"):
            return sizes / self.degree[future]


class DomWdegHeuristic(Heuristic):
    maximize = False

    def __init__(self, problem, config):
        super().__init__(problem, config)
        m = len(problem.constraints)
        self.weight = np.ones(m, dtype=np.int64)
        self.incidence = np.zeros((problem.n, m), dtype=np.int64)
        for cid, c in enumerate(problem.constraints):
            self.incidence[list(c.scope), cid] = 1

    def on_wipeout(self, cid: int) -> None:
        self.weight[cid] += 1

    def wdeg(self, state: SearchState) -> np.ndarray:
        """Weighted degree counting constraints with at least two future variables."""
        fut = 1 - np.asarray(state.assigned, dtype=np.int64)
        live = (fut @ self.incidence) >= 2
        return self.incidence @ (self.weight * live)

    def _key(self, state, future, sizes):
        w = self.wdeg(state)[future].astype(np.float64)
        with np.errstate(divide="ignore"):
            return sizes / w

    def observe(self, decision, report, state):
        if report.wiped_constraint is not None:
            self.on_wipeout(report.wiped_constraint)


class ActivityHeuristic(Heuristic):
    def __init__(self, problem, config):
        super().__init__(problem, config)
        self.activity = np.zeros(problem.n, dtype=np.float64)

    def _key(self, state, future, sizes):
        return self.activity[future] / sizes

    def observe(self, decision, report, state):
        abs_update(self.activity, report, self.config.gamma, [not a for a in state.assigned])


class CorrelationHeuristic(Heuristic):
    def __init__(self, problem, config):
        super().__init__(problem, config)
        self.matrix = CorrelationMatrix(problem.n)

    def observe(self, decision, report, state):
        if decision.polarity is not Polarity.ASSIGN:
            return
        i = decision.var
        if report.conflict:
            self.matrix.update_conflict(i)
        else:
            ignore = [j for j in state.past if j != i] if self.config.exclude_past else ()
            self.matrix.update_no_conflict(i, report, ignore)


class CrbsSumHeuristic(CorrelationHeuristic):
    def scores(self, state, future):
        past_mask = np.asarray(state.assigned, dtype=np.int64)
        rows = self.matrix.a[future]
        return rows @ past_mask + self.config.theta * (rows @ (1 - past_mask))

    def _key(self, state, future, sizes):
        return self.scores(state, future) / sizes


class CrbsMaxHeuristic(CorrelationHeuristic):
    def scores(self, state, future):
        past = np.flatnonzero(np.asarray(state.assigned, dtype=bool))
        if past.size == 0:
            return np.zeros(len(future), dtype=np.float64)
        return self.matrix.a[np.ix_(future, past)].max(axis=1).astype(np.float64)

    def _key(self, state, future, sizes):
        return self.scores(state, future) / sizes


_CLASSES = {
    "crbs-sum": CrbsSumHeuristic,
    "crbs-max": CrbsMaxHeuristic,
    "dom": DomHeuristic,
    "dom-deg": DomDegHeuristic,
    "dom-wdeg": DomWdegHeuristic,
    "abs": ActivityHeuristic,
}


def make_heuristic(problem: Problem, config: HeuristicConfig | str) -> Heuristic:
    if isinstance(config, str):
        config = HeuristicConfig(kind=config)
    return _CLASSES[config.kind](problem, config)


def select_variable(heuristic: Heuristic, state: SearchState) -> int | None:
    return heuristic.select(state)
