"""Benchmark instance generators, DIMACS graph input and the native text format.

Native format (UTF-8, one statement per line, ``#`` starts a comment)::

    vars 3
    name 0 a            # optional display name
    dom 0 0 1 2
    dom 1 0 1 2
    dom 2 0 1 2
    ne 0 1              # x0 != x1
    neoff 0 1 2         # x0 != x1 + 2
    absne 0 1 1         # |x0 - x1| != 1
    eq 1 2
    lt 1 2
    table + 0 1 2       # allowed tuples follow, one "t" line each
    t 0 1 2
    t 2 1 0
    table - 0 2         # forbidden tuples
    t 1 1
"""

from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass
from pathlib import Path

from .model import (
    BinaryPredicate,
    Constraint,
    ModelError,
    NegativeTable,
    Predicate,
    Problem,
    abs_diff_ne,
    build_problem,
    ne,
    table,
)

FAMILIES = ("queens", "latin", "quasigroup", "coloring", "random-binary", "pigeonhole", "file")


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple  # 0-based (u, v) pairs


def queens(n: int) -> Problem:
    """One variable per row holding the queen's column."""
    if n < 1:
        raise InstanceError("queens needs n >= 1")
    cons = []
    for i, j in itertools.combinations(range(n), 2):
        cons.append(ne(i, j))
        cons.append(abs_diff_ne(i, j, j - i))
    return build_problem([f"q{i}" for i in range(n)], [range(n)] * n, cons)


def latin(order: int, prefilled=()) -> Problem:
    """Latin square as ``order**2`` cells with row/column NotEqual cliques.

    ``prefilled`` holds ``(row, col, value)`` triples, encoded as unary tables.
    """
    if order < 1:
        raise InstanceError("latin needs order >= 1")
    n = order
    cell = lambda r, c: r * n + c  # noqa: E731
    cons = []
    for r in range(n):
        for c1, c2 in itertools.combinations(range(n), 2):
            cons.append(ne(cell(r, c1), cell(r, c2)))
    for c in range(n):
        for r1, r2 in itertools.combinations(range(n), 2):
            cons.append(ne(cell(r1, c), cell(r2, c)))
    for r, c, v in prefilled:
        if not (0 <= r < n and 0 <= c < n and 0 <= v < n):
            raise InstanceError(f"prefilled cell {(r, c, v)} out of range for order {n}")
        cons.append(table([cell(r, c)], [(v,)]))
    names = [f"c{r}_{c}" for r in range(n) for c in range(n)]
    return build_problem(names, [range(n)] * (n * n), cons)


def random_latin_square(order: int, rng: random.Random) -> list[list[int]]:
    """Cyclic square with rows, columns and symbols shuffled."""
    rows = list(range(order))
    cols = list(range(order))
    syms = list(range(order))
    rng.shuffle(rows)
    rng.shuffle(cols)
    rng.shuffle(syms)
    return [[syms[(rows[r] + cols[c]) % order] for c in range(order)] for r in range(order)]


def quasigroup_completion(order: int, holes: int, seed: int = 0) -> Problem:
    """Punch ``holes`` cells out of a seeded complete Latin square (always satisfiable)."""
    if not 0 <= holes <= order * order:
        raise InstanceError(f"holes must lie in [0, {order * order}]")
    rng = random.Random(seed)
    square = random_latin_square(order, rng)
    empty = set(rng.sample(range(order * order), holes))
    prefilled = [
        (r, c, square[r][c]) for r in range(order) for c in range(order) if r * order + c not in empty
    ]
    return latin(order, prefilled)


def coloring(graph: Graph, k: int) -> Problem:
    if k < 1:
        raise InstanceError("coloring needs k >= 1")
    cons = [ne(u, v) for u, v in graph.edges]
    return build_problem([f"v{i}" for i in range(graph.n_vertices)], [range(k)] * graph.n_vertices, cons)


def mycielski(m: int) -> Graph:
    """Mycielski graph with chromatic number ``m`` (m=2 is K2, m=3 is C5)."""
    if m < 2:
        raise InstanceError("mycielski needs m >= 2")
    n, edges = 2, [(0, 1)]
    for _ in range(m - 2):
        new = list(edges)
        for u, v in edges:
            new.append((u, n + v))
            new.append((n + u, v))
        new.extend((n + i, 2 * n) for i in range(n))
        n, edges = 2 * n + 1, new
    return Graph(n, tuple(edges))


def random_graph(n: int, p: float, seed: int = 0) -> Graph:
    if not 0.0 <= p <= 1.0:
        raise InstanceError("edge probability must lie in [0, 1]")
    rng = random.Random(seed)
    edges = tuple((u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p)
    return Graph(n, edges)


def _ceil(x: float) -> int:
    # absorb float noise such as 0.1 * 30 = 3.0000000000000004
    return math.ceil(x - 1e-9)


def random_binary(n: int, d: int, p1: float, p2: float, seed: int = 0) -> Problem:
    """Model B: exactly ceil(p1*n(n-1)/2) constraints, each forbidding ceil(p2*d^2) pairs."""
    if n < 1 or d < 1:
        raise InstanceError("random-binary needs n >= 1 and d >= 1")
    if not (0.0 <= p1 <= 1.0 and 0.0 <= p2 <= 1.0):
        raise InstanceError("density and tightness must lie in [0, 1]")
    rng = random.Random(seed)
    pairs = list(itertools.combinations(range(n), 2))
    chosen = sorted(rng.sample(pairs, _ceil(p1 * len(pairs))))
    all_tuples = list(itertools.product(range(d), repeat=2))
    n_forbidden = _ceil(p2 * d * d)
    cons = []
    for x, y in chosen:
        forbidden = sorted(rng.sample(all_tuples, n_forbidden))
        cons.append(table([x, y], forbidden, positive=False))
    return build_problem(n, [range(d)] * n, cons)


def pigeonhole(n: int) -> Problem:
    """n + 1 pigeons into n holes (UNSAT for every n >= 1)."""
    if n < 1:
        raise InstanceError("pigeonhole needs n >= 1")
    cons = [ne(i, j) for i, j in itertools.combinations(range(n + 1), 2)]
    return build_problem(n + 1, [range(n)] * (n + 1), cons)


def read_dimacs_graph(path) -> Graph:
    """Parse a DIMACS ``p edge N M`` file; vertices become 0-based."""
    n_vertices = None
    declared = 0
    edges = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.split()
            if not parts or parts[0] == "c":
                continue
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] not in ("edge", "col"):
                    raise InstanceError(f"{path}:{lineno}: malformed header {raw.strip()!r}")
                try:
                    n_vertices, declared = int(parts[2]), int(parts[3])
                except ValueError:
                    raise InstanceError(f"{path}:{lineno}: malformed header {raw.strip()!r}") from None
            elif parts[0] == "e":
                if n_vertices is None:
                    raise InstanceError(f"{path}:{lineno}: malformed header, edge before 'p' line")
                try:
                    u, v = int(parts[1]), int(parts[2])
                except (IndexError, ValueError):
                    raise InstanceError(f"{path}:{lineno}: malformed edge {raw.strip()!r}") from None
                if not (1 <= u <= n_vertices and 1 <= v <= n_vertices):
                    raise InstanceError(f"{path}:{lineno}: edge endpoint out of range 1..{n_vertices}")
                if u == v:
                    raise InstanceError(f"{path}:{lineno}: self-loop on vertex {u}")
                key = (min(u, v), max(u, v))
                if key in seen:
                    continue
                seen.add(key)
                edges.append((u - 1, v - 1))
    if n_vertices is None:
        raise InstanceError(f"{path}: malformed header, no 'p edge' line")
    if len(edges) != declared:
        warnings.warn(f"{path}: header declares {declared} edges, found {len(edges)} distinct", stacklevel=2)
    return Graph(n_vertices, tuple(edges))


def write_dimacs_graph(graph: Graph, path) -> None:
    lines = [f"p edge {graph.n_vertices} {len(graph.edges)}"]
    lines += [f"e {u + 1} {v + 1}" for u, v in graph.edges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


_PRED_WORDS = {p.value: p for p in Predicate}


def write_native(problem: Problem, path) -> None:
    lines = [f"vars {problem.n}"]
    for v in problem.variables:
        if v.name != f"x{v.id}":
            lines.append(f"name {v.id} {v.name}")
    for i, dom in enumerate(problem.initial_domains):
        lines.append(f"dom {i} " + " ".join(map(str, dom)))
    for c in problem.constraints:
        rel = c.relation
        scope = " ".join(map(str, c.scope))
        if isinstance(rel, BinaryPredicate):
            if rel.kind in (Predicate.NE_OFFSET, Predicate.ABS_DIFF_NE):
                lines.append(f"{rel.kind.value} {scope} {rel.k}")
            else:
                lines.append(f"{rel.kind.value} {scope}")
        else:
            sign = "-" if isinstance(rel, NegativeTable) else "+"
            lines.append(f"table {sign} {scope}")
            lines.extend("t " + " ".join(map(str, t)) for t in rel.tuples)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_native(path) -> Problem:
    n = None
    names = {}
    domains = {}
    cons = []  # (scope, kind, payload)
    open_table = None

    def fail(lineno, msg):
        raise InstanceError(f"{path}:{lineno}: {msg}")

    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, *rest = line.split()
        if word != "t":
            open_table = None
        if word != "vars" and n is None:
            fail(lineno, "expected 'vars N' header first")
        try:
            if word == "vars":
                if n is not None:
                    fail(lineno, "duplicate 'vars' header")
                (n,) = map(int, rest)
            elif word == "name":
                names[int(rest[0])] = rest[1]
            elif word == "dom":
                i, *vals = map(int, rest)
                domains[i] = vals
            elif word == "table":
                sign, *scope = rest
                if sign not in "+-" or len(sign) != 1:
                    fail(lineno, f"table sign must be + or -, got {sign!r}")
                open_table = (tuple(map(int, scope)), sign, [])
                cons.append(open_table)
            elif word == "t":
                if open_table is None:
                    fail(lineno, "'t' line outside a table")
                row = tuple(map(int, rest))
                if len(row) != len(open_table[0]):
                    fail(lineno, f"table row arity {len(row)} != scope arity {len(open_table[0])}")
                open_table[2].append(row)
            elif word in _PRED_WORDS:
                kind = _PRED_WORDS[word]
                vals = list(map(int, rest))
                want = 3 if kind in (Predicate.NE_OFFSET, Predicate.ABS_DIFF_NE) else 2
                if len(vals) != want:
                    fail(lineno, f"'{word}' takes {want} integers")
                cons.append((tuple(vals[:2]), kind, vals[2] if want == 3 else 0))
            else:
                fail(lineno, f"unknown statement or predicate kind {word!r}")
        except ValueError as exc:
            if isinstance(exc, InstanceError):
                raise
            fail(lineno, f"bad integer field in {raw.strip()!r}")
    if n is None:
        raise InstanceError(f"{path}: empty file, expected 'vars N'")
    missing = [i for i in range(n) if i not in domains]
    if missing or any(i >= n or i < 0 for i in domains):
        raise InstanceError(f"{path}: domains must be given exactly for variables 0..{n - 1}")
    constraints = []
    for scope, kind, payload in cons:
        if kind in ("+", "-"):
            constraints.append(table(scope, payload, positive=kind == "+"))
        else:
            constraints.append(Constraint(scope, BinaryPredicate(kind, payload)))
    try:
        return build_problem(
            [names.get(i, f"x{i}") for i in range(n)], [domains[i] for i in range(n)], constraints
        )
    except ModelError as exc:
        raise InstanceError(f"{path}: {exc}") from None


# Instance specs ("family:key=value,...") used by the CLI and campaigns.

_PARAMS = {
    "queens": {"n": int},
    "latin": {"order": int, "prefilled": str},
    "quasigroup": {"order": int, "holes": int, "seed": int},
    "coloring": {"k": int, "dimacs": str, "myciel": int, "n": int, "p": float, "seed": int},
    "random-binary": {"n": int, "d": int, "p1": float, "p2": float, "seed": int},
    "pigeonhole": {"n": int},
    "file": {"path": str},
}
_ALIASES = {"qg": "quasigroup", "rb": "random-binary", "random": "random-binary", "php": "pigeonhole"}


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    params: tuple = ()  # sorted (key, value) pairs

    @classmethod
    def make(cls, family: str, **params) -> "InstanceSpec":
        family = _ALIASES.get(family, family)
        if family not in _PARAMS:
            raise InstanceError(f"unknown family {family!r}; expected one of {', '.join(_PARAMS)}")
        for key in params:
            if key not in _PARAMS[family]:
                raise InstanceError(f"family {family!r} has no parameter {key!r}")
        return cls(family, tuple(sorted(params.items())))

    @classmethod
    def parse(cls, text: str) -> "InstanceSpec":
        """Parse ``family:key=value,key=value``."""
        family, _, rest = text.partition(":")
        family = _ALIASES.get(family.strip(), family.strip())
        if family not in _PARAMS:
            raise InstanceError(f"unknown family {family!r} in {text!r}")
        params = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq_, value = item.partition("=")
            if not eq_ or key not in _PARAMS[family]:
                raise InstanceError(f"bad parameter {item!r} for family {family!r}")
            try:
                params[key] = _PARAMS[family][key](value)
            except ValueError:
                raise InstanceError(f"bad value in {item!r}") from None
        return cls.make(family, **params)

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    @property
    def label(self) -> str:
        return self.family + ":" + ",".join(f"{k}={v}" for k, v in self.params)

    @property
    def seed(self):
        return self.get("seed")

    def __str__(self):
        return self.label


def _need(spec: InstanceSpec, *keys):
    p = dict(spec.params)
    missing = [k for k in keys if k not in p]
    if missing:
        raise InstanceError(f"{spec.family} spec missing {', '.join(missing)}")
    return [p[k] for k in keys]


def _parse_prefilled(text: str):
    # "r.c.v;r.c.v"
    cells = []
    for item in filter(None, text.split(";")):
        try:
            r, c, v = map(int, item.split("."))
        except ValueError:
            raise InstanceError(f"bad prefilled cell {item!r}, expected row.col.value") from None
        cells.append((r, c, v))
    return cells


def generate(spec: InstanceSpec) -> Problem:
    f = spec.family
    if f == "queens":
        (n,) = _need(spec, "n")
        return queens(n)
    if f == "latin":
        (order,) = _need(spec, "order")
        return latin(order, _parse_prefilled(spec.get("prefilled", "")))
    if f == "quasigroup":
        order, holes = _need(spec, "order", "holes")
        return quasigroup_completion(order, holes, spec.get("seed", 0))
    if f == "coloring":
        (k,) = _need(spec, "k")
        if spec.get("dimacs") is not None:
            try:
                graph = read_dimacs_graph(spec.get("dimacs"))
            except OSError as exc:
                raise InstanceError(f"cannot read graph file: {exc}") from None
        elif spec.get("myciel") is not None:
            graph = mycielski(spec.get("myciel"))
        else:
            n, p = _need(spec, "n", "p")
            graph = random_graph(n, p, spec.get("seed", 0))
        return coloring(graph, k)
    if f == "random-binary":
        n, d, p1, p2 = _need(spec, "n", "d", "p1", "p2")
        return random_binary(n, d, p1, p2, spec.get("seed", 0))
    if f == "pigeonhole":
        (n,) = _need(spec, "n")
        return pigeonhole(n)
    if f == "file":
        (path,) = _need(spec, "path")
        try:
            return read_native(path)
        except OSError as exc:
            raise InstanceError(f"cannot read instance file: {exc}") from None
    raise InstanceError(f"unknown family {f!r}")


def preset(name: str, seed: int = 0) -> list[InstanceSpec]:
    """Named desk-scale instance sets."""
    mk = InstanceSpec.make
    if name == "desk":
        return (
            [mk("queens", n=n) for n in (10, 11, 12, 13, 14)]
            + [mk("quasigroup", order=10, holes=60, seed=seed + s) for s in range(5)]
            + [mk("coloring", n=18, p=0.4, k=4, seed=seed + s) for s in range(5)]
            + [mk("random-binary", n=20, d=6, p1=0.3, p2=0.42, seed=seed + s) for s in range(5)]
            + [mk("pigeonhole", n=n) for n in (3, 4, 5, 6, 7)]
        )
    if name == "qg":
        return [mk("quasigroup", order=10, holes=60, seed=seed + s) for s in range(5)]
    if name == "tiny":
        return [
            mk("queens", n=6),
            mk("pigeonhole", n=4),
            mk("coloring", myciel=3, k=4),
            mk("random-binary", n=8, d=4, p1=0.4, p2=0.3, seed=seed),
            mk("quasigroup", order=4, holes=8, seed=seed),
        ]
    raise InstanceError(f"unknown preset {name!r}; expected desk, qg or tiny")
