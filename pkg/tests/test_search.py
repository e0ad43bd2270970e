import pytest

from crbs.heuristics import KINDS, HeuristicConfig
from crbs.instances import latin, pigeonhole, queens, random_binary
from crbs.model import build_problem, check_assignment, ne
from crbs.propagate import Polarity
from crbs.search import (
    Budget,
    BudgetExhausted,
    RestartPolicy,
    Status,
    count_solutions,
    cutoff_sequence,
    next_cutoff,
    solve,
)

from oracles import brute_force


def test_next_cutoff_examples():
    p = RestartPolicy()
    assert p.current_cutoff == 10
    assert next_cutoff(p) == 21
    assert next_cutoff(p) == 33
    assert next_cutoff(p) == 46
    assert p.k == 3


def test_cutoff_sequence_does_not_mutate():
    p = RestartPolicy()
    assert cutoff_sequence(p, 4) == [10, 21, 33, 46]
    assert p.current_cutoff == 10


def test_restart_policy_validation():
    with pytest.raises(ValueError):
        RestartPolicy(0, 1.1)
    with pytest.raises(ValueError):
        RestartPolicy(10, 1.0)


def test_immediate_wipeout_unsat():
    p = build_problem(2, [[0], [0]], [ne(0, 1)])
    out = solve(p, "dom")
    assert out.status is Status.UNSAT
    assert out.stats.nodes <= 2


@pytest.mark.parametrize("kind", KINDS)
def test_four_queens_sat(kind):
    out = solve(queens(4), kind)
    assert out.status is Status.SAT
    assert tuple(out.solution) in {(1, 3, 0, 2), (2, 0, 3, 1)}


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("restart", [None, RestartPolicy()])
def test_pigeonhole_three_values_unsat(kind, restart):
    p = build_problem(3, [[0, 1]] * 3, [ne(0, 1), ne(0, 2), ne(1, 2)])
    assert solve(p, kind, restart=restart).status is Status.UNSAT


@pytest.mark.parametrize("kind", KINDS)
def test_solution_counts(kind):
    assert count_solutions(queens(4), kind) == 2
    assert count_solutions(queens(6), kind) == 4


def test_count_agrees_with_brute_force_on_random():
    for seed in range(10):
        p = random_binary(6, 3, 0.5, 0.3, seed)
        expected, _ = brute_force(p)
        assert count_solutions(p, "crbs-sum") == expected


def test_count_budget_exhaustion():
    with pytest.raises(BudgetExhausted):
        count_solutions(queens(8), "dom", Budget(max_nodes=5))


def test_timeout_status_on_node_cap():
    out = solve(queens(30), "dom", budget=Budget(max_nodes=10))
    assert out.status is Status.TIMEOUT
    assert out.stats.nodes == 10


def test_time_budget():
    out = solve(pigeonhole(9), "dom", budget=Budget(time_s=0.05))
    assert out.status is Status.TIMEOUT


def test_empty_problem_is_sat():
    p = build_problem(0, [], [])
    assert solve(p).status is Status.SAT
    assert count_solutions(p) == 1


def test_no_constraints_every_assignment():
    p = build_problem(2, [range(3)] * 2, [])
    assert count_solutions(p, "abs") == 9


@pytest.mark.parametrize("kind", KINDS)
def test_determinism(kind):
    p = random_binary(12, 5, 0.5, 0.35, 3)
    a = solve(p, kind)
    b = solve(p, kind)
    assert a.status == b.status and a.solution == b.solution
    assert (a.stats.nodes, a.stats.failures, a.stats.restarts) == (b.stats.nodes, b.stats.failures, b.stats.restarts)


@pytest.mark.parametrize("kind", KINDS)
def test_restarts_happen_and_stay_sound(kind):
    p = pigeonhole(6)
    out = solve(p, kind, restart=RestartPolicy(2, 1.5))
    assert out.status is Status.UNSAT
    assert out.stats.restarts > 0


def test_past_future_partition_along_path():
    p = queens(8)
    seen = []

    def trace(decision, report, state):
        path_assigns = [d.var for d, past in state.decisions if past]
        assert state.past == path_assigns
        assert set(state.past) == {v for v in range(p.n) if state.assigned[v]}
        for v in state.past:
            assert len(state.domains[v]) == 1
        seen.append(decision.polarity)

    out = solve(p, "crbs-sum", trace=trace)
    assert out.status is Status.SAT and check_assignment(p, out.solution)
    assert Polarity.REFUTE in seen


def test_solve_does_not_mutate_policy():
    policy = RestartPolicy()
    solve(pigeonhole(5), "dom", restart=policy)
    assert policy.current_cutoff == 10 and policy.k == 0


def test_latin_counted_by_all_heuristics():
    for kind in KINDS:
        assert count_solutions(latin(3), kind) == 12


def test_exclude_past_variant_still_correct():
    cfg = HeuristicConfig("crbs-sum", exclude_past=True)
    assert count_solutions(queens(6), cfg) == 4
