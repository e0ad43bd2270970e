"""Problem representation: variables, finite integer domains and constraints."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence


class ModelError(ValueError):
    """Raised when a problem definition is inconsistent."""


@dataclass(frozen=True)
class Variable:
    id: int
    name: str


class Domain:
    """Sparse-set domain over a fixed universe of integers.

    Live values occupy ``values[:size]``. Removing a value swaps it just past
    the live region, so undoing removals in reverse order (or resetting
    ``size`` to an earlier mark) restores the exact earlier value set.
    """

    __slots__ = ("values", "_pos", "size")

    def __init__(self, values: Iterable[int]):
        self.values = sorted(set(values))
        self._pos = {v: i for i, v in enumerate(self.values)}
        self.size = len(self.values)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, value) -> bool:
        i = self._pos.get(value)
        return i is not None and i < self.size

    def __iter__(self) -> Iterator[int]:
        return iter(self.values[: self.size])

    def __repr__(self) -> str:
        return f"Domain({sorted(self)})"

    def remove(self, value: int) -> None:
        i = self._pos[value]
        last = self.size - 1
        if i > last:
            raise KeyError(value)
        other = self.values[last]
        self.values[i], self.values[last] = other, value
        self._pos[other], self._pos[value] = i, last
        self.size = last

    def unremove(self, value: int) -> None:
        """Undo the most recent removal, which must have been ``value``."""
        if self.values[self.size] != value:
            raise ValueError(f"{value} was not the last removed value")
        self.size += 1

    def mark(self) -> int:
        return self.size

    def restore(self, mark: int) -> None:
        self.size = mark

    def min(self) -> int:
        return min(self.values[: self.size])

    def max(self) -> int:
        return max(self.values[: self.size])

    def as_set(self) -> frozenset:
        return frozenset(self.values[: self.size])


class Predicate(enum.Enum):
    NE = "ne"  # x != y
    NE_OFFSET = "neoff"  # x != y + k
    ABS_DIFF_NE = "absne"  # |x - y| != k
    EQ = "eq"  # x == y
    LT = "lt"  # x < y


@dataclass(frozen=True)
class BinaryPredicate:
    kind: Predicate
    k: int = 0

    def accepts(self, t: Sequence[int]) -> bool:
        x, y = t
        kind = self.kind
        if kind is Predicate.NE:
            return x != y
        if kind is Predicate.NE_OFFSET:
            return x != y + self.k
        if kind is Predicate.ABS_DIFF_NE:
            return abs(x - y) != self.k
        if kind is Predicate.EQ:
            return x == y
        return x < y


@dataclass(frozen=True)
class PositiveTable:
    tuples: tuple

    @cached_property
    def tuple_set(self) -> frozenset:
        return frozenset(self.tuples)

    def accepts(self, t: Sequence[int]) -> bool:
        return tuple(t) in self.tuple_set


@dataclass(frozen=True)
class NegativeTable:
    tuples: tuple

    @cached_property
    def tuple_set(self) -> frozenset:
        return frozenset(self.tuples)

    def accepts(self, t: Sequence[int]) -> bool:
        return tuple(t) not in self.tuple_set


Relation = BinaryPredicate | PositiveTable | NegativeTable


@dataclass(frozen=True)
class Constraint:
    scope: tuple
    relation: Relation

    def accepts(self, assignment: Sequence[int]) -> bool:
        return self.relation.accepts([assignment[v] for v in self.scope])


def ne(x: int, y: int) -> Constraint:
    return Constraint((x, y), BinaryPredicate(Predicate.NE))


def ne_offset(x: int, y: int, k: int) -> Constraint:
    return Constraint((x, y), BinaryPredicate(Predicate.NE_OFFSET, k))


def abs_diff_ne(x: int, y: int, k: int) -> Constraint:
    return Constraint((x, y), BinaryPredicate(Predicate.ABS_DIFF_NE, k))


def eq(x: int, y: int) -> Constraint:
    return Constraint((x, y), BinaryPredicate(Predicate.EQ))


def lt(x: int, y: int) -> Constraint:
    return Constraint((x, y), BinaryPredicate(Predicate.LT))


def table(scope: Sequence[int], tuples: Iterable[Sequence[int]], positive: bool = True) -> Constraint:
    rows = tuple(tuple(int(v) for v in t) for t in tuples)
    cls = PositiveTable if positive else NegativeTable
    return Constraint(tuple(scope), cls(rows))


@dataclass(frozen=True)
class Problem:
    variables: tuple
    initial_domains: tuple  # sorted tuple of ints per variable
    constraints: tuple
    adjacency: tuple = field(compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.variables)

    def degree(self, var: int) -> int:
        return len(self.adjacency[var])


def build_problem(variables, domains, constraints) -> Problem:
    """Validate and freeze a problem.

    ``variables`` may be a list of names, a list of :class:`Variable` or an
    integer count. Domains are iterables of ints.
    """
    if isinstance(variables, int):
        variables = [f"x{i}" for i in range(variables)]
    vs = []
    for i, v in enumerate(variables):
        if isinstance(v, Variable):
            if v.id != i:
                raise ModelError(f"variable ids must be contiguous, got {v.id} at position {i}")
            vs.append(v)
        else:
            vs.append(Variable(i, str(v)))
    domains = [tuple(sorted(set(int(x) for x in d))) for d in domains]
    if len(domains) != len(vs):
        raise ModelError(f"{len(vs)} variables but {len(domains)} domains")
    for i, d in enumerate(domains):
        if not d:
            raise ModelError(f"empty initial domain for variable {i}")

    n = len(vs)
    adjacency = [[] for _ in range(n)]
    for cid, c in enumerate(constraints):
        if not c.scope:
            raise ModelError(f"constraint {cid} has an empty scope")
        for v in c.scope:
            if not (0 <= v < n):
                raise ModelError(f"constraint {cid}: unknown variable {v}")
        if len(set(c.scope)) != len(c.scope):
            raise ModelError(f"constraint {cid}: repeated variable in scope {c.scope}")
        rel = c.relation
        if isinstance(rel, BinaryPredicate):
            if len(c.scope) != 2:
                raise ModelError(f"constraint {cid}: binary predicate needs 2 variables")
        else:
            for t in rel.tuples:
                if len(t) != len(c.scope):
                    raise ModelError(
                        f"constraint {cid}: arity mismatch, tuple {t} for scope {c.scope}"
                    )
                for v, a in zip(c.scope, t):
                    if a not in domains[v]:
                        raise ModelError(
                            f"constraint {cid}: tuple {t} uses value {a} outside the domain of {v}"
                        )
        for v in c.scope:
            adjacency[v].append(cid)
    return Problem(
        variables=tuple(vs),
        initial_domains=tuple(domains),
        constraints=tuple(constraints),
        adjacency=tuple(tuple(a) for a in adjacency),
    )


def check_assignment(problem: Problem, assignment: Sequence[int]) -> bool:
    """Ground-truth solution test: every constraint accepts its projection."""
    if len(assignment) != problem.n:
        raise ValueError(f"expected {problem.n} values, got {len(assignment)}")
    for v, dom in zip(assignment, problem.initial_domains):
        if v not in dom:
            raise ValueError(f"value {v} outside initial domain {dom}")
    return all(c.accepts(assignment) for c in problem.constraints)
