"""Finite structures, graphs and model checking.

The evaluator works bottom-up over the hash-consed formula DAG: every
subformula becomes a boolean table indexed by its free variables (in sorted
name order), with a leading batch axis so a whole family of models can be
checked in one pass. Cost is the sum over subformulas of n ** #free.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .logic import (
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Truth,
    Var,
    Vocabulary,
    compile_dag,
)


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True, eq=True)
class Structure:
    """Finite structure on {1..size}; relation symbol -> set of ordered pairs."""

    size: int
    relations: Mapping[str, frozenset[tuple[int, int]]]

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("structure domain must be nonempty")
        rels = {}
        for name, pairs in self.relations.items():
            fs = frozenset((int(a), int(b)) for a, b in pairs)
            for a, b in fs:
                if not (1 <= a <= self.size and 1 <= b <= self.size):
                    raise ValueError(f"pair ({a},{b}) of {name} outside 1..{self.size}")
            rels[name] = fs
        object.__setattr__(self, "relations", rels)

    __hash__ = None

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary(tuple(self.relations))

    def has_self_loop(self) -> bool:
        return any(a == b for pairs in self.relations.values() for a, b in pairs)

    def matrices(self) -> dict[str, np.ndarray]:
        out = {}
        for name, pairs in self.relations.items():
            m = np.zeros((self.size, self.size), dtype=bool)
            for a, b in pairs:
                m[a - 1, b - 1] = True
            out[name] = m
        return out


@dataclass(frozen=True, eq=True)
class Graph:
    """Undirected loop-free graph on {1..size}; edges stored as (a, b), a < b."""

    size: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.size < 0:
            raise ValueError("graph size must be nonnegative")
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (1 <= a <= self.size and 1 <= b <= self.size):
                raise ValueError(f"edge {a}-{b} outside 1..{self.size}")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, size: int, edges: Iterable[tuple[int, int]]) -> Graph:
        return cls(size, frozenset(edges))

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def adjacency(self) -> dict[int, set[int]]:
        adj = {v: set() for v in range(1, self.size + 1)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.size, self.size), dtype=bool)
        if self.edges:
            e = np.array(sorted(self.edges)) - 1
            m[e[:, 0], e[:, 1]] = True
            m[e[:, 1], e[:, 0]] = True
        return m

    def with_edge(self, a: int, b: int) -> Graph:
        return Graph(self.size, self.edges | {(min(a, b), max(a, b))})

    def without_edge(self, a: int, b: int) -> Graph:
        return Graph(self.size, self.edges - {(min(a, b), max(a, b))})

    def add_vertex(self) -> Graph:
        return Graph(self.size + 1, self.edges)


Model = Union[Structure, Graph]


def graph_view(g: Graph) -> Structure:
    """The graph as a structure over {E} with both orientations of each edge."""
    pairs = set()
    for a, b in g.edges:
        pairs.add((a, b))
        pairs.add((b, a))
    return Structure(max(g.size, 1), {"E": frozenset(pairs)})


def _interpretation(model: Model) -> tuple[int, dict[str, np.ndarray]]:
    if isinstance(model, Graph):
        if model.size == 0:
            raise EvaluationError("cannot evaluate on the empty graph")
        return model.size, {"E": model.matrix()[None]}
    if isinstance(model, Structure):
        return model.size, {k: v[None] for k, v in model.matrices().items()}
    raise TypeError(f"not a model: {model!r}")


class CompiledFormula:
    """Formulas compiled once, evaluated against many models.

    ``tables(n, rels)`` takes relation tensors of shape (B, n, n) and returns
    one table per root, shaped (B,) + (n,) * len(free_vars).
    """

    def __init__(self, *roots: Formula):
        if not roots:
            raise ValueError("nothing to compile")
        self.roots = roots
        self.nodes, self.root_ids = compile_dag(roots)
        uses = [0] * len(self.nodes)
        for node in self.nodes:
            for k in node.kids:
                uses[k] += 1
        for r in self.root_ids:
            uses[r] += 1
        self._uses = uses

    @property
    def relations(self) -> set[str]:
        return {n.data[0] for n in self.nodes if n.kind == "atom"}

    def free(self, i: int = 0) -> tuple[Var, ...]:
        return self.nodes[self.root_ids[i]].free

    def tables(self, n: int, rels: Mapping[str, np.ndarray]) -> list[np.ndarray]:
        nodes = self.nodes
        remaining = list(self._uses)
        vals: list[np.ndarray | None] = [None] * len(nodes)
        batch = max((r.shape[0] for r in rels.values()), default=1)
        eye = np.eye(n, dtype=bool)[None]

        def take(k: int) -> np.ndarray:
            v = vals[k]
            remaining[k] -= 1
            if remaining[k] == 0:
                vals[k] = None
            return v

        def align(arr: np.ndarray, have: tuple, want: tuple) -> np.ndarray:
            if have == want:
                return arr
            shape = (arr.shape[0],) + tuple(n if v in have else 1 for v in want)
            return arr.reshape(shape)

        for i, node in enumerate(nodes):
            kind = node.kind
            if kind == "const":
                out = np.array([node.data[0]])
            elif kind == "atom":
                rel, x, y = node.data
                if rel not in rels:
                    raise EvaluationError(f"uninterpreted relation symbol {rel!r}")
                m = rels[rel]
                if x == y:
                    out = np.diagonal(m, axis1=1, axis2=2)
                else:
                    out = m if x < y else np.swapaxes(m, 1, 2)
            elif kind == "eq":
                x, y = node.data
                out = np.ones((1, n), dtype=bool) if x == y else eye
            elif kind == "not":
                out = ~take(node.kids[0])
            elif kind in ("and", "or", "implies", "iff"):
                a, b = node.kids
                fa, fb = nodes[a].free, nodes[b].free
                va = align(take(a), fa, node.free)
                vb = align(take(b), fb, node.free)
                if kind == "and":
                    out = va & vb
                elif kind == "or":
                    out = va | vb
                elif kind == "implies":
                    out = ~va | vb
                else:
                    out = va == vb
            else:  # exists / forall
                c = node.kids[0]
                child = take(c)
                var = node.data[0]
                cfree = nodes[c].free
                if var in cfree:
                    axis = 1 + cfree.index(var)
                    out = child.any(axis=axis) if kind == "exists" else child.all(axis=axis)
                else:
                    out = child
            vals[i] = out
        results = []
        for r in self.root_ids:
            t = vals[r]
            free = nodes[r].free
            results.append(np.broadcast_to(t, (batch,) + (n,) * len(free)))
        return results

    def table(self, model: Model, root: int = 0) -> np.ndarray:
        """Truth table of one root on one model (batch axis dropped)."""
        n, rels = _interpretation(model)
        return self.tables(n, rels)[root][0]

    def all_tables(self, model: Model) -> list[np.ndarray]:
        n, rels = _interpretation(model)
        return [t[0] for t in self.tables(n, rels)]

    def holds(self, model: Model, asg: Mapping[Var, int] | None = None, root: int = 0) -> bool:
        t = self.table(model, root)
        return bool(t[_index(self.free(root), asg, _size(model))])


def _size(model: Model) -> int:
    return model.size


def _index(free: Sequence[Var], asg: Mapping[Var, int] | None, n: int) -> tuple[int, ...]:
    asg = asg or {}
    idx = []
    for v in free:
        if v not in asg:
            raise EvaluationError(f"unassigned free variable {v!r}")
        e = asg[v]
        if not 1 <= e <= n:
            raise EvaluationError(f"{v} := {e} outside domain 1..{n}")
        idx.append(e - 1)
    return tuple(idx)


def evaluate(f: Formula, model: Model, asg: Mapping[Var, int] | None = None) -> bool:
    """Tarskian truth of ``f`` in ``model`` under ``asg`` (1-based elements)."""
    return CompiledFormula(f).holds(model, asg)


def evaluate_naive(f: Formula, model: Model, asg: Mapping[Var, int] | None = None) -> bool:
    """Direct recursive evaluation, no memo. Reference oracle for small cases."""
    asg = dict(asg or {})
    n = model.size
    if isinstance(model, Graph):
        edges = model.edges

        def rel(name, a, b):
            if name != "E":
                raise EvaluationError(f"uninterpreted relation symbol {name!r}")
            return (min(a, b), max(a, b)) in edges
    else:
        relations = model.relations

        def rel(name, a, b):
            if name not in relations:
                raise EvaluationError(f"uninterpreted relation symbol {name!r}")
            return (a, b) in relations[name]

    def look(v):
        if v not in asg:
            raise EvaluationError(f"unassigned free variable {v!r}")
        return asg[v]

    def go(g: Formula) -> bool:
        if isinstance(g, Truth):
            return g.value
        if isinstance(g, Atom):
            return rel(g.rel, look(g.left), look(g.right))
        if isinstance(g, Eq):
            return look(g.left) == look(g.right)
        if isinstance(g, Not):
            return not go(g.child)
        if isinstance(g, And):
            return go(g.left) and go(g.right)
        if isinstance(g, Or):
            return go(g.left) or go(g.right)
        if isinstance(g, Implies):
            return (not go(g.left)) or go(g.right)
        if isinstance(g, Iff):
            return go(g.left) == go(g.right)
        if isinstance(g, (Exists, Forall)):
            saved = asg.get(g.var)
            had = g.var in asg
            results = []
            for e in range(1, n + 1):
                asg[g.var] = e
                r = go(g.child)
                results.append(r)
                if isinstance(g, Exists) and r:
                    break
                if isinstance(g, Forall) and not r:
                    break
            if had:
                asg[g.var] = saved
            else:
                del asg[g.var]
            return any(results) if isinstance(g, Exists) else all(results)
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


# -- bipartiteness ------------------------------------------------------------


def is_bipartite(g: Graph) -> tuple[frozenset[int], frozenset[int]] | None:
    """BFS two-colouring; the colouring is checked edge by edge before return."""
    adj = g.adjacency()
    colour: dict[int, int] = {}
    for start in range(1, g.size + 1):
        if start in colour:
            continue
        colour[start] = 0
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in colour:
                    colour[w] = 1 - colour[v]
                    queue.append(w)
                elif colour[w] == colour[v]:
                    return None
    for a, b in g.edges:
        if colour[a] == colour[b]:
            raise AssertionError("two-colouring certificate failed verification")
    side0 = frozenset(v for v, c in colour.items() if c == 0)
    side1 = frozenset(v for v, c in colour.items() if c == 1)
    return side0, side1


# -- enumeration --------------------------------------------------------------


def _pair_slots(n: int, loop_free: bool) -> list[tuple[int, int]]:
    return [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if not (loop_free and a == b)]


def count_structures(vocab: Vocabulary, n: int, loop_free: bool = True) -> int:
    return 2 ** (len(vocab) * len(_pair_slots(n, loop_free)))


def enumerate_structures(vocab: Vocabulary, n: int, loop_free: bool = True) -> Iterator[Structure]:
    """Every structure of size ``n`` over ``vocab`` once, in counting order.

    Bit ``j`` of the counter decides the ``j``-th (relation, pair) slot,
    relations in vocabulary order and pairs lexicographic.
    """
    slots = [(r, p) for r in vocab.symbols for p in _pair_slots(n, loop_free)]
    for code in range(2 ** len(slots)):
        rels = {r: set() for r in vocab.symbols}
        for j, (r, p) in enumerate(slots):
            if code >> j & 1:
                rels[r].add(p)
        yield Structure(n, {r: frozenset(s) for r, s in rels.items()})


def structure_batches(
    symbols: Sequence[str], n: int, loop_free: bool = True, batch: int = 4096
) -> Iterator[tuple[int, dict[str, np.ndarray]]]:
    """Relation tensors for consecutive blocks of the enumeration order.

    Yields ``(first_code, {symbol: (B, n, n) bool})``; structure ``first_code + b``
    is the same one ``enumerate_structures`` produces at that position.
    """
    slots = _pair_slots(n, loop_free)
    nslots = len(slots) * len(symbols)
    total = 2**nslots
    rows = np.array([a - 1 for a, _ in slots], dtype=np.intp)
    cols = np.array([b - 1 for _, b in slots], dtype=np.intp)
    shifts = np.arange(nslots, dtype=np.int64)
    for start in range(0, total, batch):
        codes = np.arange(start, min(start + batch, total), dtype=np.int64)
        bits = (codes[:, None] >> shifts[None, :]) & 1
        out = {}
        for k, sym in enumerate(symbols):
            m = np.zeros((len(codes), n, n), dtype=bool)
            if slots:
                m[:, rows, cols] = bits[:, k * len(slots):(k + 1) * len(slots)].astype(bool)
            out[sym] = m
        yield start, out


def graph_batches(n: int, batch: int = 4096) -> Iterator[tuple[int, np.ndarray]]:
    """Adjacency tensors (B, n, n) for all graphs on n vertices, counting order."""
    pairs = list(itertools.combinations(range(n), 2))
    total = 2 ** len(pairs)
    shifts = np.arange(len(pairs), dtype=np.int64)
    rows = np.array([a for a, _ in pairs], dtype=np.intp)
    cols = np.array([b for _, b in pairs], dtype=np.intp)
    for start in range(0, total, batch):
        codes = np.arange(start, min(start + batch, total), dtype=np.int64)
        bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(bool)
        m = np.zeros((len(codes), n, n), dtype=bool)
        if pairs:
            m[:, rows, cols] = bits
            m[:, cols, rows] = bits
        yield start, m


def graph_from_code(n: int, code: int) -> Graph:
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    return Graph(n, frozenset(p for j, p in enumerate(pairs) if code >> j & 1))


def structure_from_code(vocab: Vocabulary, n: int, code: int, loop_free: bool = True) -> Structure:
    slots = [(r, p) for r in vocab.symbols for p in _pair_slots(n, loop_free)]
    rels = {r: set() for r in vocab.symbols}
    for j, (r, p) in enumerate(slots):
        if code >> j & 1:
            rels[r].add(p)
    return Structure(n, {r: frozenset(s) for r, s in rels.items()})


def random_structure(rng, vocab: Vocabulary, n: int, density: float = 0.3, loop_free: bool = True) -> Structure:
    rels = {}
    for r in vocab.symbols:
        rels[r] = frozenset(p for p in _pair_slots(n, loop_free) if rng.random() < density)
    return Structure(n, rels)


def random_graph(rng, n: int, density: float = 0.4) -> Graph:
    return Graph(n, frozenset(p for p in itertools.combinations(range(1, n + 1), 2) if rng.random() < density))


# -- file formats -------------------------------------------------------------

_PAIR = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")
_EDGE = re.compile(r"(\d+)\s*-\s*(\d+)")


class FormatError(ValueError):
    pass


def _content_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]


def parse_structure(text: str) -> Structure:
    lines = _content_lines(text)
    if not lines:
        raise FormatError("empty structure file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "structure" or not head[1].isdigit():
        raise FormatError("expected header 'structure <n>'")
    n = int(head[1])
    rels: dict[str, frozenset] = {}
    for ln in lines[1:]:
        name, sep, rest = ln.partition(":")
        name = name.strip()
        if not sep or not name:
            raise FormatError(f"expected '<relation>: (a,b) ...', got {ln!r}")
        leftover = _PAIR.sub("", rest).strip()
        if leftover:
            raise FormatError(f"unreadable pairs in {ln!r}")
        if name in rels:
            raise FormatError(f"relation {name} listed twice")
        rels[name] = frozenset((int(a), int(b)) for a, b in _PAIR.findall(rest))
    try:
        return Structure(n, rels)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def format_structure(s: Structure) -> str:
    lines = [f"structure {s.size}"]
    for name, pairs in s.relations.items():
        body = " ".join(f"({a},{b})" for a, b in sorted(pairs))
        lines.append(f"{name}: {body}".rstrip())
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    lines = _content_lines(text)
    if not lines:
        raise FormatError("empty graph file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "graph" or not head[1].isdigit():
        raise FormatError("expected header 'graph <n>'")
    n = int(head[1])
    edges = []
    for ln in lines[1:]:
        key, sep, rest = ln.partition(":")
        if key.strip() != "edges" or not sep:
            raise FormatError(f"expected 'edges: a-b ...', got {ln!r}")
        if _EDGE.sub("", rest).strip():
            raise FormatError(f"unreadable edges in {ln!r}")
        edges.extend((int(a), int(b)) for a, b in _EDGE.findall(rest))
    try:
        return Graph(n, frozenset(edges))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def format_graph(g: Graph) -> str:
    body = " ".join(f"{a}-{b}" for a, b in sorted(g.edges))
    return f"graph {g.size}\nedges: {body}".rstrip() + "\n"


def to_dot(g: Graph, labels: Mapping[int, str] | None = None, name: str = "G") -> str:
    labels = labels or {}
    out = [f"graph {name} {{"]
    for v in range(1, g.size + 1):
        label = labels.get(v, str(v))
        out.append(f'  {v} [label="{label}"];')
    for a, b in sorted(g.edges):
        out.append(f"  {a} -- {b};")
    out.append("}")
    return "\n".join(out) + "\n"
