"""Correlation-based variable ordering for constraint satisfaction search."""

from .heuristics import CorrelationMatrix, HeuristicConfig, make_heuristic, select_variable
from .model import Constraint, Domain, Problem, Variable, build_problem, check_assignment
from .propagate import Decision, Polarity, PropagationReport, SearchState, backtrack, decide_and_propagate
from .search import Budget, RestartPolicy, SearchOutcome, Status, count_solutions, solve

__all__ = [
    "Budget",
    "Constraint",
    "CorrelationMatrix",
    "Decision",
    "Domain",
    "HeuristicConfig",
    "Polarity",
    "Problem",
    "PropagationReport",
    "RestartPolicy",
    "SearchOutcome",
    "SearchState",
    "Status",
    "Variable",
    "backtrack",
    "build_problem",
    "check_assignment",
    "count_solutions",
    "decide_and_propagate",
    "make_heuristic",
    "select_variable",
    "solve",
]
