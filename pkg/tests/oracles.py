"""Independent reference implementations used by the tests.

Nothing here calls into the solver's propagation or heuristic code; these
are deliberately naive so that agreement means something.
"""

import itertools

import numpy as np

from crbs.model import BinaryPredicate, NegativeTable, Predicate


def _constraint_mask(c, cols):
    rel = c.relation
    if isinstance(rel, BinaryPredicate):
        x, y = cols[c.scope[0]], cols[c.scope[1]]
        if rel.kind is Predicate.NE:
            return x != y
        if rel.kind is Predicate.NE_OFFSET:
            return x != y + rel.k
        if rel.kind is Predicate.ABS_DIFF_NE:
            return np.abs(x - y) != rel.k
        if rel.kind is Predicate.EQ:
            return x == y
        return x < y
    rows = len(cols[c.scope[0]])
    hit = np.zeros(rows, dtype=bool)
    for t in set(rel.tuples):
        m = np.ones(rows, dtype=bool)
        for v, a in zip(c.scope, t):
            m &= cols[v] == a
        hit |= m
    return ~hit if isinstance(rel, NegativeTable) else hit


def brute_force(problem, max_chunk=1 << 18):
    """Enumerate the full Cartesian product of initial domains.

    Returns (solution count, sorted list of solutions if count <= 1000 else None).
    """
    n = problem.n
    doms = [np.array(d, dtype=np.int64) for d in problem.initial_domains]
    if n == 0:
        return 1, [()]
    # split into an outer python loop over a prefix and a vectorized suffix
    split = n
    size = 1
    while split > 0 and size * len(doms[split - 1]) <= max_chunk:
        split -= 1
        size *= len(doms[split])
    suffix = doms[split:]
    grids = np.meshgrid(*suffix, indexing="ij") if suffix else []
    suffix_cols = [g.ravel() for g in grids]
    rows = suffix_cols[0].size if suffix_cols else 1
    count = 0
    sols = []
    for prefix in itertools.product(*[d.tolist() for d in doms[:split]]):
        cols = [np.full(rows, a, dtype=np.int64) for a in prefix] + suffix_cols
        ok = np.ones(rows, dtype=bool)
        for c in problem.constraints:
            ok &= _constraint_mask(c, cols)
            if not ok.any():
                break
        k = int(ok.sum())
        if k:
            count += k
            if len(sols) <= 1000:
                idx = np.flatnonzero(ok)
                sols.extend(tuple(int(col[i]) for col in cols) for i in idx)
    return count, (sorted(sols) if count <= 1000 else None)


def ac_fixpoint(problem, domains):
    """Naive arc consistency: drop any value without a supporting tuple, repeat."""
    doms = [set(d) for d in domains]
    changed = True
    while changed:
        changed = False
        for c in problem.constraints:
            scope = c.scope
            for pos, var in enumerate(scope):
                for a in sorted(doms[var]):
                    others = [sorted(doms[v]) if k != pos else [a] for k, v in enumerate(scope)]
                    if not any(c.relation.accepts(t) for t in itertools.product(*others)):
                        doms[var].discard(a)
                        changed = True
                if not doms[var]:
                    return None
    return doms


def replay_matrix(n, events):
    """Straight-line recomputation of the correlation matrix from zeros.

    ``events`` holds (i, updated, unchanged, conflict) tuples.
    """
    a = [[0] * n for _ in range(n)]
    for i, updated, unchanged, conflict in events:
        if conflict:
            for j in range(n):
                if j != i:
                    a[i][j] += 1
                    a[j][i] += 1
            a[i][i] += 2
        else:
            for j in updated:
                a[i][j] += 1
                a[j][i] += 1
            for j in unchanged:
                a[i][j] -= 1
                a[j][i] -= 1
            a[i][i] -= 1
    return a


def latin_count_rowwise(order):
    """Latin squares counted by choosing each row as a permutation."""
    perms = list(itertools.permutations(range(order)))
    count = 0
    for rows in itertools.product(perms, repeat=order):
        if all(len({r[c] for r in rows}) == order for c in range(order)):
            count += 1
    return count
