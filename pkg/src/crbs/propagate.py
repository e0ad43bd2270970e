"""Arc-consistency propagation with a trail for exact undo.

Every branching decision is applied under a fresh trail mark and followed by
propagation to a fixpoint. The resulting :class:`PropagationReport` splits the
other variables into those whose domain changed (``updated``) and those that
did not (``unchanged``), which is what the learning heuristics consume.
"""

from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass
from math import prod

from .model import BinaryPredicate, Domain, NegativeTable, Predicate, Problem


class Polarity(enum.Enum):
    ASSIGN = "assign"
    REFUTE = "refute"


@dataclass(frozen=True)
class Decision:
    var: int
    value: int
    polarity: Polarity = Polarity.ASSIGN


@dataclass(frozen=True)
class PropagationReport:
    updated: frozenset
    unchanged: frozenset
    conflict: bool
    wiped_constraint: int | None = None


class Trail:
    """Undo log of (variable, removed value) entries with nested marks."""

    def __init__(self):
        self.entries: list[tuple[int, int]] = []
        self.marks: list[int] = []

    def __len__(self):
        return len(self.entries)

    @property
    def depth(self) -> int:
        return len(self.marks)

    def push_mark(self) -> None:
        self.marks.append(len(self.entries))

    def record(self, var: int, value: int) -> None:
        self.entries.append((var, value))

    def pop_to_mark(self, domains: list[Domain]) -> None:
        if not self.marks:
            raise IndexError("pop_to_mark on a trail without marks")
        mark = self.marks.pop()
        entries = self.entries
        while len(entries) > mark:
            var, value = entries.pop()
            domains[var].unremove(value)


# Propagators. ``revise`` enforces arc consistency on one constraint until it
# is locally stable and returns (changed variables, wiped out?). Variables
# other than ``trigger`` (the one whose change woke the constraint) are
# filtered first.


class _BinaryPropagator:
    __slots__ = ("x", "y", "kind", "k")

    def __init__(self, scope, relation: BinaryPredicate):
        self.x, self.y = scope
        kind, k = relation.kind, relation.k
        if kind is Predicate.ABS_DIFF_NE and k == 0:
            kind = Predicate.NE
        self.kind, self.k = kind, k

    def _unsupported(self, dx: Domain, dy: Domain, x_side: bool) -> list[int]:
        """Values of ``dx`` with no support in ``dy``."""
        kind = self.kind
        if kind is Predicate.NE or kind is Predicate.NE_OFFSET:
            if dy.size != 1:
                return []
            (b,) = dy
            if kind is Predicate.NE:
                bad = b
            else:
                # x != y + k
                bad = b + self.k if x_side else b - self.k
            return [bad] if bad in dx else []
        if kind is Predicate.ABS_DIFF_NE:
            if dy.size > 2:
                return []
            k = self.k
            ys = dy.as_set()
            return [a for a in dx if ys <= {a - k, a + k}]
        if kind is Predicate.EQ:
            return [a for a in dx if a not in dy]
        # x < y
        if x_side:
            hi = dy.max()
            return [a for a in dx if a >= hi]
        lo = dy.min()
        return [b for b in dx if b <= lo]

    def revise(self, state: "SearchState", trigger: int | None = None):
        doms = state.domains
        dx, dy = doms[self.x], doms[self.y]
        kind = self.kind
        if kind is Predicate.NE or kind is Predicate.NE_OFFSET:
            if dx.size > 1 and dy.size > 1:
                return [], False
        elif kind is Predicate.ABS_DIFF_NE and dx.size > 2 and dy.size > 2:
            return [], False
        sides = ((self.x, dx, dy, True), (self.y, dy, dx, False))
        if trigger == self.x:
            sides = sides[::-1]
        changed = []
        while True:
            progress = False
            for var, d, other, x_side in sides:
                bad = self._unsupported(d, other, x_side)
                if bad:
                    for a in bad:
                        state.remove(var, a)
                    if var not in changed:
                        changed.append(var)
                    if d.size == 0:
                        return changed, True
                    progress = True
            if not progress:
                return changed, False


class _TablePropagator:
    """Generic support checking over the currently valid tuples."""

    __slots__ = ("scope", "tuples", "positive")

    def __init__(self, scope, relation):
        self.scope = scope
        self.tuples = tuple(sorted(set(relation.tuples)))
        self.positive = not isinstance(relation, NegativeTable)

    def revise(self, state: "SearchState", trigger: int | None = None):
        doms = [state.domains[v] for v in self.scope]
        arity = len(doms)
        order = sorted(range(arity), key=lambda k: self.scope[k] == trigger)
        changed = []
        while True:
            valid = [t for t in self.tuples if all(t[k] in doms[k] for k in range(arity))]
            if self.positive:
                supported = [set() for _ in range(arity)]
                for t in valid:
                    for k in range(arity):
                        supported[k].add(t[k])
                bad = [[a for a in doms[k] if a not in supported[k]] for k in range(arity)]
            else:
                counts = [{} for _ in range(arity)]
                for t in valid:
                    for k in range(arity):
                        counts[k][t[k]] = counts[k].get(t[k], 0) + 1
                sizes = [d.size for d in doms]
                bad = []
                for k in range(arity):
                    others = prod(sizes[:k] + sizes[k + 1:])
                    bad.append([a for a in doms[k] if counts[k].get(a, 0) >= others])
            if not any(bad):
                return changed, False
            for k in order:
                if bad[k]:
                    var = self.scope[k]
                    for a in bad[k]:
                        state.remove(var, a)
                    if var not in changed:
                        changed.append(var)
                    if doms[k].size == 0:
                        return changed, True


def _make_propagator(constraint):
    if isinstance(constraint.relation, BinaryPredicate):
        return _BinaryPropagator(constraint.scope, constraint.relation)
    return _TablePropagator(constraint.scope, constraint.relation)


class SearchState:
    """Mutable solver state: current domains, trail and the decision path.

    ``queue_seed`` randomizes the propagation queue order; the fixpoint (and
    therefore every non-conflict report) does not depend on it.
    """

    def __init__(self, problem: Problem, queue_seed: int | None = None):
        self.problem = problem
        self.domains = [Domain(d) for d in problem.initial_domains]
        self.trail = Trail()
        self.decisions: list[tuple[Decision, bool]] = []
        self.assigned = [False] * problem.n
        self.past: list[int] = []
        self._propagators = [_make_propagator(c) for c in problem.constraints]
        self._rng = random.Random(queue_seed) if queue_seed is not None else None

    @property
    def n(self) -> int:
        return self.problem.n

    def remove(self, var: int, value: int) -> None:
        self.domains[var].remove(value)
        self.trail.record(var, value)

    def future(self) -> list[int]:
        return [v for v in range(self.n) if not self.assigned[v]]

    def sizes(self) -> list[int]:
        return [d.size for d in self.domains]

    def snapshot(self) -> list[frozenset]:
        return [d.as_set() for d in self.domains]

    def values(self) -> list[int]:
        """Current values of a fully instantiated state."""
        out = []
        for d in self.domains:
            if d.size != 1:
                raise ValueError("state is not fully instantiated")
            out.append(d.values[0])
        return out

    def fixpoint(self, seeds, trigger: int | None = None) -> int | None:
        """Propagate constraints in ``seeds`` (and whatever they wake up).

        Returns the id of the constraint that wiped out a domain, else None.
        """
        adjacency = self.problem.adjacency
        queue = deque()
        queued = [False] * len(self._propagators)
        woken_by = [None] * len(self._propagators)
        for c in seeds:
            if not queued[c]:
                queued[c] = True
                woken_by[c] = trigger
                queue.append(c)
        rng = self._rng
        while queue:
            if rng is not None and len(queue) > 1:
                i = rng.randrange(len(queue))
                queue.rotate(-i)
                c = queue.popleft()
                queue.rotate(i)
            else:
                c = queue.popleft()
            queued[c] = False
            changed, wiped = self._propagators[c].revise(self, woken_by[c])
            if wiped:
                return c
            for v in changed:
                for c2 in adjacency[v]:
                    if c2 != c and not queued[c2]:
                        queued[c2] = True
                        woken_by[c2] = v
                        queue.append(c2)
        return None


def propagate_root(state: SearchState) -> int | None:
    """Initial propagation of every constraint, below any trail mark.

    Returns the wiping constraint id, or None if the root is consistent.
    """
    return state.fixpoint(range(len(state.problem.constraints)))


def decide_and_propagate(state: SearchState, decision: Decision) -> PropagationReport:
    var, value = decision.var, decision.value
    dom = state.domains[var]
    if state.assigned[var]:
        raise ValueError(f"variable {var} is already assigned")
    if value not in dom:
        raise ValueError(f"value {value} not in the current domain of variable {var}")

    before = state.sizes()
    state.trail.push_mark()
    if decision.polarity is Polarity.ASSIGN:
        for a in [a for a in dom if a != value]:
            state.remove(var, a)
    else:
        state.remove(var, value)

    wiped = None
    if dom.size == 0:
        conflict = True
    else:
        wiped = state.fixpoint(state.problem.adjacency[var], var)
        conflict = wiped is not None

    became_past = decision.polarity is Polarity.ASSIGN and not conflict
    state.decisions.append((decision, became_past))
    if became_past:
        state.assigned[var] = True
        state.past.append(var)

    doms = state.domains
    updated, unchanged = [], []
    for j in range(state.n):
        if j == var:
            continue
        (updated if doms[j].size != before[j] else unchanged).append(j)
    return PropagationReport(frozenset(updated), frozenset(unchanged), conflict, wiped)


def backtrack(state: SearchState) -> Decision:
    """Undo the most recent decision and return it."""
    if not state.decisions:
        raise IndexError("backtrack at the root: no decision to undo")
    decision, became_past = state.decisions.pop()
    state.trail.pop_to_mark(state.domains)
    if became_past:
        state.assigned[decision.var] = False
        state.past.pop()
    return decision
