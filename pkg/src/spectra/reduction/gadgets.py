"""The two fixed graphs of the construction.

C is the ruler: a line u_1..u_{4m+1} with one pendant w_i per line vertex.
D is one domain element: a hub P joined to Q and to one port per relation,
with S hanging off Q.
"""

from __future__ import annotations

from ..semantics import Graph


def line_vertex(i: int) -> int:
    return i


def pendant_vertex(m: int, i: int) -> int:
    return 4 * m + 1 + i


def gadget_c(m: int) -> tuple[Graph, dict[int, str]]:
    length = 4 * m + 1
    edges = [(i, i + 1) for i in range(1, length)]
    edges += [(line_vertex(i), pendant_vertex(m, i)) for i in range(1, length + 1)]
    labels = {line_vertex(i): f"u{i}" for i in range(1, length + 1)}
    labels.update({pendant_vertex(m, i): f"w{i}" for i in range(1, length + 1)})
    return Graph(2 * length, frozenset(edges)), labels


def d_roles(m: int) -> tuple[str, ...]:
    return ("P", "Q", "S") + tuple(f"R{l}" for l in range(1, m + 1))


def d_edges(m: int) -> list[tuple[str, str]]:
    return [("P", "Q"), ("Q", "S")] + [("P", f"R{l}") for l in range(1, m + 1)]


def gadget_d(m: int) -> tuple[Graph, dict[int, str]]:
    roles = d_roles(m)
    vertex = {r: i + 1 for i, r in enumerate(roles)}
    edges = [(vertex[a], vertex[b]) for a, b in d_edges(m)]
    return Graph(len(roles), frozenset(edges)), {v: f"d^{r}" for r, v in vertex.items()}
