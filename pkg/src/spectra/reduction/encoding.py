"""Structures to graphs and back.

``classify_vertices`` is a purely graph-algorithmic reading of the same
conditions the gadget formulas express (the formulas are never evaluated
here), so it doubles as an independent check of them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from ..semantics import Graph, Structure
from .gadgets import d_edges, gadget_c
from .params import ReductionError, ReductionParams


class Role(NamedTuple):
    kind: str  # "U", "W", or an element role "P", "Q", "S", "R<l>"
    index: int  # line position for U/W, element number otherwise


@dataclass(frozen=True)
class RoleClassification:
    n: int
    roles: dict[int, Role]
    line: tuple[int, ...]  # u_1..u_{4m+1}, u_1 at the anchor end
    pendants: tuple[int, ...]  # w_i, aligned with line
    blocks: tuple[dict[str, int], ...]  # element i -> role -> vertex

    def vertices_with(self, kind: str) -> list[int]:
        return sorted(v for v, r in self.roles.items() if r.kind == kind)

    def label(self, v: int) -> str:
        r = self.roles[v]
        if r.kind in ("U", "W"):
            return f"{r.kind.lower()}{r.index}"
        return f"{r.index}^{r.kind}"


class ClassificationError(ReductionError):
    """The graph is not an encoding; ``prop`` names the violated condition."""

    def __init__(self, prop: str, message: str):
        self.prop = prop
        super().__init__(f"{prop}: {message}")


class DecodeError(ReductionError):
    pass


@dataclass(frozen=True)
class Encoding:
    graph: Graph
    classification: RoleClassification

    @property
    def labels(self) -> dict[int, str]:
        return {v: self.classification.label(v) for v in self.classification.roles}


def block_vertex(params: ReductionParams, i: int, role: str) -> int:
    return params.q + (i - 1) * params.p + params.roles.index(role) + 1


def encode_structure(a: Structure, params: ReductionParams) -> Encoding:
    """C plus one copy of D per element, every port on the u_1 side of the line."""
    if set(a.relations) != set(params.relations):
        raise ReductionError(
            f"structure relations {sorted(a.relations)} do not match {list(params.relations)}"
        )
    if a.has_self_loop():
        raise ReductionError("structure has a self-loop; encode needs loop-free relations")
    m, n = params.m, a.size
    c, _ = gadget_c(m)
    edges = set(c.edges)
    roles: dict[int, Role] = {}
    for i in range(1, params.line_length + 1):
        roles[i] = Role("U", i)
        roles[params.line_length + i] = Role("W", i)
    attach = params.attachment
    blocks = []
    for i in range(1, n + 1):
        block = {r: block_vertex(params, i, r) for r in params.roles}
        for r, v in block.items():
            roles[v] = Role(r, i)
            edges.add((attach[r] + 1, v))  # u_{d+1} is at distance d from u_1
        for r1, r2 in d_edges(m):
            edges.add((block[r1], block[r2]))
        blocks.append(block)
    for rel in params.relations:
        port = params.role_of(rel)
        for i, j in a.relations[rel]:
            edges.add((blocks[i - 1][port], blocks[j - 1]["S"]))
    g = Graph(params.size_for(n), frozenset(edges))
    line = tuple(range(1, params.line_length + 1))
    pendants = tuple(params.line_length + i for i in line)
    return Encoding(g, RoleClassification(n, roles, line, pendants, tuple(blocks)))


def _bfs(adj: dict[int, set[int]], inside: set[int], start: int) -> dict[int, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w in inside and w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def classify_vertices(g: Graph, params: ReductionParams) -> RoleClassification:
    """Recover the C/D decomposition or raise ClassificationError.

    Conditions are checked in the order the formulas conjoin them, and the
    first failure is reported.
    """
    top = 4 * params.m
    adj = g.adjacency()
    V = range(1, g.size + 1)

    def fail(prop, msg):
        raise ClassificationError(prop, msg)

    deg1 = {v for v in V if len(adj[v]) == 1}
    in_u = {v for v in V if len(adj[v]) != 1 and len(adj[v] & deg1) == 1}

    # P1
    for v in sorted(deg1):
        (w,) = adj[v]
        if w not in in_u:
            fail("P1", f"degree-1 vertex {v} hangs off {w}, which is not a line vertex")

    # P2
    ends = sorted(v for v in in_u if len(adj[v] & in_u) == 1)
    if len(ends) != 2:
        fail("P2", f"line has {len(ends)} end vertices, expected 2")

    # P3': diameter and BFS layers
    dist = {u: _bfs(adj, in_u, u) for u in in_u}
    for u in sorted(in_u):
        for w in sorted(in_u):
            if dist[u].get(w, top + 1) > top:
                fail("P3", f"line vertices {u} and {w} are not within distance {top}")

    def layers(e):
        out: dict[int, list[int]] = {}
        for w, d in dist[e].items():
            out.setdefault(d, []).append(w)
        return out

    if not any(all(len(ws) <= 1 for d, ws in layers(e).items() if d <= top) for e in ends):
        e = ends[0]
        d, ws = min((d, ws) for d, ws in layers(e).items() if len(ws) > 1)
        fail("P3", f"{len(ws)} line vertices at distance {d} from end {e}")

    # P4
    if dist[ends[0]].get(ends[1]) != top:
        fail("P4", f"ends {ends[0]} and {ends[1]} are not at line distance {top}")

    # orientation
    anchors = [e for e in ends if any(w not in in_u and w not in deg1 for w in adj[e])]
    if len(anchors) > 1:
        fail("orientation", f"both line ends {anchors} carry element vertices")
    start = anchors[0] if anchors else ends[0]
    by_dist = {d: set(ws) for d, ws in layers(start).items()}

    # element roles
    attach = params.attachment
    role_of: dict[int, str] = {}
    for v in V:
        if v in in_u or v in deg1 or not anchors:
            continue
        nbrs = adj[v] & in_u
        for r, d in attach.items():
            if nbrs == by_dist.get(d, set()):
                role_of[v] = r
                break

    # totality
    for v in V:
        if v not in deg1 and v not in in_u and v not in role_of:
            fail("totality", f"vertex {v} is neither pendant, line, nor an element port")

    # P5, bullet by bullet
    def with_role(vs, r):
        return {w for w in vs if role_of.get(w) == r}

    def via(x, mid, target):
        """Vertices of role ``target`` sharing a ``mid``-role neighbour with x."""
        return {y for c in with_role(adj[x], mid) for y in with_role(adj[c], target)}

    def exactly_one_nbr(x, r):
        got = with_role(adj[x], r)
        if len(got) != 1:
            fail("P5", f"{role_of[x]}-vertex {x} has {len(got)} {r}-neighbours")

    def one_distant(x, target, mid):
        got = via(x, mid, target)
        if len(got) != 1:
            fail("P5", f"{role_of[x]}-vertex {x} reaches {len(got)} {target}-vertices via {mid}")
        (y,) = got
        if y in adj[x]:
            fail("P5", f"{role_of[x]}-vertex {x} is adjacent to its block's {target}-vertex {y}")

    def no_edge_between(x, r1, r2):
        for y in with_role(adj[x], r1):
            for z in with_role(adj[x], r2):
                if z in adj[y]:
                    fail("P5", f"neighbours {y} ({r1}) and {z} ({r2}) of {x} are adjacent")

    rs = params.r_roles
    for x in sorted(role_of):
        r = role_of[x]
        if r == "P":
            exactly_one_nbr(x, "Q")
            for rl in rs:
                exactly_one_nbr(x, rl)
            one_distant(x, "S", "Q")
            for rl in rs:
                no_edge_between(x, "Q", rl)
            for i, r1 in enumerate(rs):
                for r2 in rs[i + 1:]:
                    no_edge_between(x, r1, r2)
        elif r == "Q":
            exactly_one_nbr(x, "P")
            exactly_one_nbr(x, "S")
            for rl in rs:
                one_distant(x, rl, "P")
        elif r == "S":
            exactly_one_nbr(x, "Q")
            one_distant(x, "P", "Q")
            for y in with_role(adj[x], "Q"):
                for rl in rs:
                    for z in via(y, "P", rl):
                        if z in adj[x]:
                            fail("P5", f"S-vertex {x} is adjacent to {z}, a port of its own block")
        else:
            exactly_one_nbr(x, "P")
            one_distant(x, "Q", "P")
            for y in with_role(adj[x], "P"):
                for z in via(y, "Q", "S"):
                    if z in adj[x]:
                        fail("P5", f"{r}-vertex {x} is adjacent to {z}, the S-vertex of its own block")

    # P6
    edge_roles = {frozenset(("P", "Q")), frozenset(("Q", "S"))} | {frozenset(("P", r)) for r in rs}

    def same_component(a, b):
        ra, rb = role_of[a], role_of[b]
        if ra == rb:
            return a == b
        if frozenset((ra, rb)) in edge_roles:
            return b in adj[a]
        if ra == "S" and rb in rs:
            return any(b in via(c, "P", rb) for c in with_role(adj[a], "Q"))
        if rb == "S" and ra in rs:
            return same_component(b, a)
        mid = "Q" if {ra, rb} == {"P", "S"} else "P"
        return b in via(a, mid, rb)

    for a, b in sorted(g.edges):
        if a in role_of and b in role_of and not same_component(a, b):
            pair = {role_of[a], role_of[b]}
            if not ("S" in pair and pair & set(rs) and len(pair) == 2):
                fail("P6", f"edge {a}-{b} joins {role_of[a]} and {role_of[b]} of different elements")

    # assemble the partition
    line_order = sorted(in_u, key=lambda u: dist[start][u])
    pendant_of = {u: next(iter(adj[u] & deg1)) for u in line_order}
    roles: dict[int, Role] = {}
    for i, u in enumerate(line_order, start=1):
        roles[u] = Role("U", i)
        roles[pendant_of[u]] = Role("W", i)
    blocks = []
    for i, p in enumerate(sorted(with_role(role_of, "P")), start=1):
        (q,) = with_role(adj[p], "Q")
        (s,) = with_role(adj[q], "S")
        block = {"P": p, "Q": q, "S": s}
        for rl in rs:
            (block[rl],) = with_role(adj[p], rl)
        for r, v in block.items():
            if v in roles:
                fail("partition", f"vertex {v} belongs to two element blocks")
            roles[v] = Role(r, i)
        blocks.append(block)
    if len(roles) != g.size:
        stray = sorted(set(V) - set(roles))
        fail("partition", f"vertices {stray} are not covered by any block")
    return RoleClassification(
        len(blocks),
        roles,
        tuple(line_order),
        tuple(pendant_of[u] for u in line_order),
        tuple(blocks),
    )


def decode_graph(g: Graph, params: ReductionParams) -> Structure:
    """Read the structure back: (i, j) in R_l iff edge i^{R_l} - j^S.

    Elements are numbered by increasing vertex index of their P-vertex.
    """
    cls = classify_vertices(g, params)
    if cls.n == 0:
        raise DecodeError("empty domain: the graph is the bare ruler gadget with no element blocks")
    element = {v: r.index for v, r in cls.roles.items() if r.kind not in ("U", "W")}
    rels = {rel: set() for rel in params.relations}
    adj = g.adjacency()
    for rel in params.relations:
        port = params.role_of(rel)
        for i, block in enumerate(cls.blocks, start=1):
            for w in adj[block[port]]:
                if cls.roles[w].kind == "S" and element[w] != i:
                    rels[rel].add((i, element[w]))
    return Structure(cls.n, {r: frozenset(s) for r, s in rels.items()})
