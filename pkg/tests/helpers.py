"""Shared corpus, generators and independent oracles for the test suite."""

from __future__ import annotations

import random
from collections import deque
from functools import lru_cache

from hypothesis import strategies as st

from spectra.logic import (
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Iff,
    Implies,
    Not,
    Or,
    Truth,
    Vocabulary,
    free_variables,
    parse_formula,
)
from spectra.reduction import reduce
from spectra.semantics import Graph, Structure

VARS = ("x", "y", "z")
R3 = Vocabulary(("R1", "R2", "R3"))

# three-variable sentences over R1, R2, R3
CORPUS = {
    "tautology": "forall x. forall y. forall z. x = x",
    "exactly-two": "exists x. exists y. (~x = y & forall z. (z = x | z = y))",
    "r1-matching": (
        "forall x. exists y. (R1(x,y) & forall z. (R1(x,z) -> z = y))"
        " & forall x. forall y. (R1(x,y) -> R1(y,x))"
    ),
    "r2-transitive": (
        "forall x. forall y. forall z. (R2(x,y) & R2(y,z) -> R2(x,z))"
        " & exists x. exists y. R2(x,y)"
    ),
    "rebinding": (
        "exists x. exists y. (R1(x,y) & exists x. (R3(y,x) & ~x = y))"
        " | forall z. ~exists x. R2(z,x)"
    ),
    "declared-loop-free": (
        "forall x. ~R1(x,x) & forall x. ~R2(x,x) & forall x. ~R3(x,x)"
        " & forall x. exists y. (R1(x,y) <-> exists z. R3(z,y))"
    ),
}

# sentences over E, read on simple graphs
GRAPH_CORPUS = {
    "tautology": "forall x. forall y. forall z. x = x",
    "exactly-two": "exists x. exists y. (~x = y & forall z. (z = x | z = y))",
    "no-isolated": "forall x. exists y. E(x,y)",
    "triangle": "exists x. exists y. (E(x,y) & exists z. (E(y,z) & E(z,x)))",
    "path-3": "exists x. exists y. (E(x,y) & exists x. (E(y,x) & exists y. (E(x,y) & ~y = x)))",
    "degree-at-most-1": "forall x. forall y. forall z. (E(x,y) & E(x,z) -> y = z)",
    "dominating": "exists x. forall y. (x = y | E(x,y))",
}


def corpus_formula(name: str):
    return parse_formula(CORPUS[name], R3)


@lru_cache(maxsize=None)
def corpus_reduction(name: str):
    return reduce(corpus_formula(name), R3)


def graph_formula(name: str):
    return parse_formula(GRAPH_CORPUS[name], Vocabulary(("E",)))


# ---------------------------------------------------------------------------
# formula generators


def random_formula(rng: random.Random, depth: int, rels=("R1",), vars_=VARS):
    """Uniform-ish random formula of depth at most ``depth``."""
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.6:
            return Atom(rng.choice(rels), rng.choice(vars_), rng.choice(vars_))
        if r < 0.9:
            return Eq(rng.choice(vars_), rng.choice(vars_))
        return Truth(rng.random() < 0.5)
    k = rng.randrange(8)
    sub = lambda: random_formula(rng, depth - 1, rels, vars_)  # noqa: E731
    if k == 0:
        return Not(sub())
    if k in (1, 2, 3, 4):
        return (And, Or, Implies, Iff)[k - 1](sub(), sub())
    q = Exists if k in (5, 6) else Forall
    return q(rng.choice(vars_), sub())


def close(f):
    """Universally close the free variables (so the result is a sentence)."""
    for v in sorted(free_variables(f)):
        f = Forall(v, f)
    return f


def random_sentence(rng: random.Random, depth: int, rels=("R1",)):
    return close(random_formula(rng, depth, rels))


def formulas(rels=("R1",), vars_=VARS, max_leaves=12):
    leaves = st.one_of(
        st.builds(Atom, st.sampled_from(rels), st.sampled_from(vars_), st.sampled_from(vars_)),
        st.builds(Eq, st.sampled_from(vars_), st.sampled_from(vars_)),
        st.builds(Truth, st.booleans()),
    )

    def extend(inner):
        return st.one_of(
            st.builds(Not, inner),
            st.builds(And, inner, inner),
            st.builds(Or, inner, inner),
            st.builds(Implies, inner, inner),
            st.builds(Iff, inner, inner),
            st.builds(Exists, st.sampled_from(vars_), inner),
            st.builds(Forall, st.sampled_from(vars_), inner),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def sentences(rels=("R1",)):
    return formulas(rels).map(close)


def structures(rels=("R1",), max_size=3, loop_free=False):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_size))
        pairs = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if not (loop_free and a == b)]
        return Structure(n, {r: frozenset(draw(st.sets(st.sampled_from(pairs)))) if pairs else frozenset()
                             for r in rels})

    return build()


def graphs(max_size=6):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_size))
        pairs = [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
        edges = draw(st.sets(st.sampled_from(pairs))) if pairs else set()
        return Graph(n, frozenset(edges))

    return build()


# ---------------------------------------------------------------------------
# graph oracles, written directly from the definitions


def degree_one(g: Graph) -> set[int]:
    adj = g.adjacency()
    return {v for v in adj if len(adj[v]) == 1}


def line_vertices(g: Graph) -> set[int]:
    """Not of degree 1, with exactly one degree-1 neighbour."""
    adj = g.adjacency()
    d1 = degree_one(g)
    return {v for v in adj if v not in d1 and len(adj[v] & d1) == 1}


def bfs_within(g: Graph, inside: set[int], src: int) -> dict[int, int]:
    adj = g.adjacency()
    dist = {src: 0}
    todo = deque([src])
    while todo:
        v = todo.popleft()
        for w in adj[v]:
            if w in inside and w not in dist:
                dist[w] = dist[v] + 1
                todo.append(w)
    return dist


def random_ruler_graph(rng: random.Random, max_size: int = 10) -> Graph:
    """Small random graph with pendants, so line vertices actually occur.

    Half the time it is a short ruler (a path with one pendant per vertex)
    with a few pairs toggled, which gives long distances inside U.
    """
    if rng.random() < 0.5:
        length = rng.randint(1, max_size // 2)
        edges = {(i, i + 1) for i in range(1, length)} | {(i, length + i) for i in range(1, length + 1)}
        n = 2 * length
        for _ in range(rng.randint(0, 2)):
            if n < 2:
                break
            a, b = sorted(rng.sample(range(1, n + 1), 2))
            edges ^= {(a, b)}
        return Graph(n, frozenset(edges))
    n = rng.randint(2, max_size)
    core = rng.randint(1, max(1, n // 2 + 1))
    edges = set()
    if rng.random() < 0.4:
        edges.update((a, a + 1) for a in range(1, core))
    for a in range(1, core + 1):
        for b in range(a + 1, core + 1):
            if rng.random() < 0.3:
                edges.add((a, b))
    for v in range(core + 1, n + 1):
        edges.add((rng.randint(1, v - 1), v))
    for _ in range(rng.randint(0, 3)):
        a, b = rng.sample(range(1, n + 1), 2)
        edges.add((min(a, b), max(a, b)))
    return Graph(n, frozenset(edges))
