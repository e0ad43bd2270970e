import random

import pytest

from crbs.instances import latin, queens, random_binary
from crbs.model import build_problem, ne, eq, lt, ne_offset, abs_diff_ne, table
from crbs.propagate import (
    Decision,
    Polarity,
    SearchState,
    backtrack,
    decide_and_propagate,
    propagate_root,
)

from oracles import ac_fixpoint, brute_force

ASSIGN, REFUTE = Polarity.ASSIGN, Polarity.REFUTE


def test_all_different_triangle_assign():
    p = build_problem(3, [range(3)] * 3, [ne(0, 1), ne(0, 2), ne(1, 2)])
    st = SearchState(p)
    r = decide_and_propagate(st, Decision(0, 0, ASSIGN))
    assert r.updated == {1, 2}
    assert r.unchanged == set()
    assert not r.conflict


def test_forced_wipeout():
    p = build_problem(2, [[0], [0]], [ne(0, 1)])
    st = SearchState(p)
    r = decide_and_propagate(st, Decision(0, 0, ASSIGN))
    assert r.conflict
    assert r.updated == {1}
    assert r.wiped_constraint == 0


def test_four_queens_first_row_left_wipes_out():
    # full AC refutes x0=0 outright: 4-queens has no solution with x0=0
    p = queens(4)
    doms = [list(d) for d in p.initial_domains]
    doms[0] = [0]
    assert ac_fixpoint(p, doms) is None

    st = SearchState(p)
    r = decide_and_propagate(st, Decision(0, 0, ASSIGN))
    assert r.conflict
    assert r.updated == {1, 2, 3}


def test_four_queens_x0_one_matches_oracle():
    p = queens(4)
    st = SearchState(p)
    r = decide_and_propagate(st, Decision(0, 1, ASSIGN))
    assert not r.conflict
    assert [d.as_set() for d in st.domains] == [{1}, {3}, {0}, {2}]
    assert r.updated == {1, 2, 3}


def test_refute_removes_value():
    p = build_problem(2, [range(3)] * 2, [ne(0, 1)])
    st = SearchState(p)
    r = decide_and_propagate(st, Decision(0, 1, REFUTE))
    assert st.domains[0].as_set() == {0, 2}
    assert r.unchanged == {1} and not r.conflict
    assert st.past == []


def test_refute_last_value_is_conflict():
    p = build_problem(2, [[4], range(3)], [])
    st = SearchState(p)
    r = decide_and_propagate(st, Decision(0, 4, REFUTE))
    assert r.conflict and r.wiped_constraint is None


def test_precondition_violations():
    p = build_problem(2, [range(3)] * 2, [ne(0, 1)])
    st = SearchState(p)
    with pytest.raises(ValueError):
        decide_and_propagate(st, Decision(0, 7, ASSIGN))
    decide_and_propagate(st, Decision(0, 1, ASSIGN))
    with pytest.raises(ValueError):
        decide_and_propagate(st, Decision(0, 1, ASSIGN))


def test_backtrack_round_trip_and_nesting():
    p = queens(6)
    st = SearchState(p)
    root = st.snapshot()
    decide_and_propagate(st, Decision(0, 1, ASSIGN))
    after_outer = st.snapshot()
    decide_and_propagate(st, Decision(2, min(st.domains[2]), ASSIGN))
    assert st.past == [0, 2]
    backtrack(st)
    assert st.snapshot() == after_outer
    assert st.past == [0]
    backtrack(st)
    assert st.snapshot() == root
    assert st.past == [] and not any(st.assigned)


def test_backtrack_at_root_raises():
    st = SearchState(queens(4))
    with pytest.raises(IndexError):
        backtrack(st)


def test_conflicting_assign_does_not_become_past():
    p = build_problem(2, [[0], [0]], [ne(0, 1)])
    st = SearchState(p)
    decide_and_propagate(st, Decision(0, 0, ASSIGN))
    assert st.past == []
    backtrack(st)
    assert [d.as_set() for d in st.domains] == [{0}, {0}]


def _random_problem(rng):
    n = rng.randint(2, 5)
    d = rng.randint(2, 4)
    cons = []
    for _ in range(rng.randint(1, 6)):
        x, y = rng.sample(range(n), 2)
        kind = rng.randrange(7)
        k = rng.randint(-2, 2)
        if kind == 0:
            cons.append(ne(x, y))
        elif kind == 1:
            cons.append(ne_offset(x, y, k))
        elif kind == 2:
            cons.append(abs_diff_ne(x, y, abs(k)))
        elif kind == 3:
            cons.append(eq(x, y))
        elif kind == 4:
            cons.append(lt(x, y))
        else:
            arity = min(n, rng.randint(1, 3))
            scope = rng.sample(range(n), arity)
            rows = {tuple(rng.randrange(d) for _ in scope) for _ in range(rng.randint(1, d ** arity))}
            cons.append(table(scope, sorted(rows), positive=kind == 5))
    return build_problem(n, [range(d)] * n, cons)


def test_fixpoint_matches_naive_oracle():
    rng = random.Random(11)
    for _ in range(300):
        p = _random_problem(rng)
        st = SearchState(p)
        wiped = propagate_root(st)
        expected = ac_fixpoint(p, p.initial_domains)
        if expected is None:
            assert wiped is not None
            continue
        assert wiped is None
        assert [d.as_set() for d in st.domains] == expected
        var = rng.randrange(p.n)
        val = rng.choice(sorted(expected[var]))
        pol = rng.choice([ASSIGN, REFUTE])
        if pol is REFUTE and len(expected[var]) == 1:
            continue
        r = decide_and_propagate(st, Decision(var, val, pol))
        doms = [set(s) for s in expected]
        doms[var] = {val} if pol is ASSIGN else doms[var] - {val}
        exp2 = ac_fixpoint(p, doms)
        assert r.conflict == (exp2 is None)
        if exp2 is not None:
            assert [d.as_set() for d in st.domains] == exp2
            assert r.updated == {j for j in range(p.n) if j != var and exp2[j] != expected[j]}


def test_fixpoint_soundness_against_enumeration():
    rng = random.Random(5)
    for seed in range(40):
        p = random_binary(6, 4, 0.5, 0.3, seed)
        _, sols = brute_force(p)
        st = SearchState(p)
        if propagate_root(st) is not None:
            assert not sols
            continue
        var = rng.randrange(p.n)
        val = rng.choice(sorted(st.domains[var]))
        r = decide_and_propagate(st, Decision(var, val, ASSIGN))
        consistent = [s for s in sols if s[var] == val]
        if r.conflict:
            assert not consistent
        else:
            for s in consistent:
                assert all(s[j] in st.domains[j] for j in range(p.n))


def test_report_partition_and_exactness():
    p = latin(4, [(0, 0, 1)])
    st = SearchState(p)
    propagate_root(st)
    before = st.snapshot()
    r = decide_and_propagate(st, Decision(5, min(st.domains[5]), ASSIGN))
    after = st.snapshot()
    assert r.updated | r.unchanged == set(range(p.n)) - {5}
    assert not (r.updated & r.unchanged)
    assert r.updated == {j for j in range(p.n) if j != 5 and before[j] != after[j]}


def test_report_independent_of_queue_order():
    for seed in range(30):
        p = random_binary(8, 4, 0.5, 0.25, seed)
        reference = SearchState(p)
        if propagate_root(reference) is not None:
            continue
        var = seed % p.n
        val = min(reference.domains[var])
        r0 = decide_and_propagate(reference, Decision(var, val, ASSIGN))
        for qseed in range(5):
            st = SearchState(p, queue_seed=qseed)
            propagate_root(st)
            r = decide_and_propagate(st, Decision(var, val, ASSIGN))
            assert r.conflict == r0.conflict
            if not r0.conflict:
                assert (r.updated, r.unchanged) == (r0.updated, r0.unchanged)
                assert st.snapshot() == reference.snapshot()
