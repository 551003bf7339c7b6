"""Grounding sentences over a fixed finite domain into CNF.

Each DAG node becomes an array of literals indexed by its free variables,
exactly like the evaluator's truth tables; connectives become Tseitin gates
built a whole array at a time. Constants are folded on the way, so equality
atoms and impossible atoms (graph self-loops) never reach the clause set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .logic import Formula, Vocabulary, compile_dag, free_variables

# Literal sentinels; -TRUE == FALSE so negation is plain arithmetic.
TRUE = np.int64(2**40)
FALSE = -TRUE

GroundAtom = tuple[str, int, int]


@dataclass
class Cnf:
    """Clauses in CSR form: clause i is ``lits[offsets[i]:offsets[i+1]]``.

    ``var_map`` sends ground atoms to variables 1..len(var_map); every other
    variable is a Tseitin auxiliary. ``levels[v]`` is the gate depth of v
    (0 for atoms), recorded so assignments can be completed level by level.
    """

    num_vars: int
    lits: np.ndarray
    offsets: np.ndarray
    var_map: dict[GroundAtom, int]
    kind: str = "structure"
    levels: np.ndarray | None = None
    root: int | None = None

    @property
    def num_clauses(self) -> int:
        return len(self.offsets) - 1

    @property
    def num_atoms(self) -> int:
        return len(self.var_map)

    def clauses(self) -> list[list[int]]:
        lits = self.lits.tolist()
        off = self.offsets.tolist()
        return [lits[off[i]:off[i + 1]] for i in range(self.num_clauses)]

    def iter_clauses(self) -> Iterator[np.ndarray]:
        for i in range(self.num_clauses):
            yield self.lits[self.offsets[i]:self.offsets[i + 1]]

    @classmethod
    def from_clauses(cls, clauses, num_vars: int | None = None, var_map=None) -> Cnf:
        flat = [int(l) for c in clauses for l in c]
        offsets = np.cumsum([0] + [len(c) for c in clauses]).astype(np.int64)
        if num_vars is None:
            num_vars = max((abs(l) for l in flat), default=0)
        return cls(num_vars, np.array(flat, dtype=np.int64), offsets, dict(var_map or {}))


class _Builder:
    def __init__(self, first_var: int):
        self.next = first_var
        self.blocks: list[np.ndarray] = []
        self.levels = [np.zeros(first_var, dtype=np.int32)]

    def level_of(self, lits: np.ndarray) -> np.ndarray:
        lv = np.concatenate(self.levels) if len(self.levels) > 1 else self.levels[0]
        self.levels = [lv]
        const = np.abs(lits) == TRUE
        idx = np.where(const, 0, np.abs(lits))
        return np.where(const, 0, lv[idx])

    def fresh(self, k: int, level: np.ndarray) -> np.ndarray:
        v = np.arange(self.next, self.next + k, dtype=np.int64)
        self.next += k
        self.levels.append(level.astype(np.int32))
        return v

    def clauses(self, *cols: np.ndarray) -> None:
        if cols[0].size:
            self.blocks.append(np.stack(cols, axis=1))

    def long_clauses(self, block: np.ndarray) -> None:
        if block.size:
            self.blocks.append(block)

    # gates over flat arrays of equal length

    def and2(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.where(a == TRUE, b, np.where(b == TRUE, a, np.where(a == b, a, 0)))
        out = np.where((a == FALSE) | (b == FALSE) | (a == -b), FALSE, out)
        rest = out == 0
        if rest.any():
            ra, rb = a[rest], b[rest]
            lv = np.maximum(self.level_of(ra), self.level_of(rb)) + 1
            v = self.fresh(len(ra), lv)
            self.clauses(-v, ra)
            self.clauses(-v, rb)
            self.clauses(v, -ra, -rb)
            out[rest] = v
        return out

    def iff2(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros_like(a)
        out = np.where(a == TRUE, b, out)
        out = np.where(a == FALSE, -b, out)
        out = np.where(b == TRUE, a, out)
        out = np.where(b == FALSE, -a, out)
        out = np.where(a == b, TRUE, out)
        out = np.where(a == -b, FALSE, out)
        rest = out == 0
        if rest.any():
            ra, rb = a[rest], b[rest]
            lv = np.maximum(self.level_of(ra), self.level_of(rb)) + 1
            v = self.fresh(len(ra), lv)
            self.clauses(-v, -ra, rb)
            self.clauses(-v, ra, -rb)
            self.clauses(v, ra, rb)
            self.clauses(v, -ra, -rb)
            out[rest] = v
        return out

    def and_rows(self, rows: np.ndarray) -> np.ndarray:
        """Conjunction of each row of a (k, n) literal matrix."""
        k = rows.shape[0]
        out = np.zeros(k, dtype=np.int64)
        nontrue = rows != TRUE
        count = nontrue.sum(axis=1)
        out[count == 0] = TRUE
        single = count == 1
        if single.any():
            pos = np.argmax(nontrue[single], axis=1)
            out[single] = rows[single][np.arange(single.sum()), pos]
        out[(rows == FALSE).any(axis=1)] = FALSE
        rest = out == 0
        if rest.any():
            sub = rows[rest]
            lv = self.level_of(sub).max(axis=1) + 1
            v = self.fresh(len(sub), lv)
            width = sub.shape[1]
            self.clauses(np.repeat(-v, width), sub.reshape(-1))
            self.long_clauses(np.concatenate([v[:, None], -sub], axis=1))
            out[rest] = v
        return out

    def finish(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.blocks:
            return np.zeros(0, dtype=np.int64), np.zeros(1, dtype=np.int64)
        lits, lengths = [], []
        for block in self.blocks:
            keep_rows = ~(block == TRUE).any(axis=1)
            block = block[keep_rows]
            mask = block != FALSE
            lits.append(block[mask])
            lengths.append(mask.sum(axis=1))
        lengths = np.concatenate(lengths)
        offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        return np.concatenate(lits).astype(np.int64), offsets


def atom_variables(vocab: Vocabulary, n: int, kind: str, loop_free: bool = False) -> dict[GroundAtom, int]:
    """Deterministic numbering of ground atoms, starting at 1."""
    out: dict[GroundAtom, int] = {}
    if kind == "graph":
        for a, b in itertools.combinations(range(1, n + 1), 2):
            out[("E", a, b)] = len(out) + 1
        return out
    for r in vocab.symbols:
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                if not (loop_free and a == b):
                    out[(r, a, b)] = len(out) + 1
    return out


def ground_to_cnf(
    f: Formula,
    n: int,
    kind: str = "structure",
    vocab: Vocabulary | None = None,
    loop_free: bool = False,
) -> Cnf:
    """Equisatisfiable CNF for ``f`` over domain {1..n}.

    ``kind="graph"`` gives one variable per unordered vertex pair, with
    E(a, a) constant false. ``kind="structure"`` needs ``vocab``; with
    ``loop_free`` the diagonal atoms are constant false as well.
    """
    if n < 1:
        raise ValueError("domain size must be at least 1")
    if free_variables(f):
        raise ValueError("can only ground sentences")
    if kind == "graph":
        vocab = Vocabulary(("E",))
    elif kind != "structure":
        raise ValueError(f"unknown grounding kind {kind!r}")
    elif vocab is None:
        raise ValueError("structure grounding needs a vocabulary")
    var_map = atom_variables(vocab, n, kind, loop_free)
    tables = {}
    for r in vocab.symbols:
        t = np.full((n, n), FALSE, dtype=np.int64)
        for (rel, a, b), v in var_map.items():
            if rel == r:
                t[a - 1, b - 1] = v
                if kind == "graph":
                    t[b - 1, a - 1] = v
        tables[r] = t

    nodes, (root,) = compile_dag([f])
    uses = [0] * len(nodes)
    for node in nodes:
        for k in node.kids:
            uses[k] += 1
    uses[root] += 1
    vals: list[np.ndarray | None] = [None] * len(nodes)
    gb = _Builder(len(var_map) + 1)
    eye = np.where(np.eye(n, dtype=bool), TRUE, FALSE)

    def take(k):
        v = vals[k]
        uses[k] -= 1
        if uses[k] == 0:
            vals[k] = None
        return v

    def full(arr, have, want):
        shape = tuple(n if v in have else 1 for v in want)
        return np.broadcast_to(arr.reshape(shape), (n,) * len(want)).reshape(-1)

    for i, node in enumerate(nodes):
        kind_ = node.kind
        if kind_ == "const":
            out = np.array(TRUE if node.data[0] else FALSE)
        elif kind_ == "atom":
            rel, x, y = node.data
            if rel not in tables:
                raise ValueError(f"relation {rel!r} not in the grounding vocabulary")
            m = tables[rel]
            out = np.diagonal(m).copy() if x == y else (m if x < y else m.T.copy())
        elif kind_ == "eq":
            x, y = node.data
            out = np.full(n, TRUE, dtype=np.int64) if x == y else eye
        elif kind_ == "not":
            out = -take(node.kids[0])
        elif kind_ in ("and", "or", "implies", "iff"):
            a, b = node.kids
            va = full(take(a), nodes[a].free, node.free)
            vb = full(take(b), nodes[b].free, node.free)
            if kind_ == "and":
                flat = gb.and2(va, vb)
            elif kind_ == "or":
                flat = -gb.and2(-va, -vb)
            elif kind_ == "implies":
                flat = -gb.and2(va, -vb)
            else:
                flat = gb.iff2(va, vb)
            out = flat.reshape((n,) * len(node.free))
        else:
            c = node.kids[0]
            child = take(c)
            var = node.data[0]
            cfree = nodes[c].free
            if var not in cfree:
                out = child
            else:
                axis = cfree.index(var)
                rows = np.moveaxis(child, axis, -1).reshape(-1, n)
                if kind_ == "forall":
                    res = gb.and_rows(rows)
                else:
                    res = -gb.and_rows(-rows)
                out = res.reshape((n,) * (len(cfree) - 1))
        vals[i] = out

    top = int(vals[root])
    if top == TRUE:
        root_lit = None
    elif top == FALSE:
        gb.long_clauses(np.array([[FALSE]], dtype=np.int64))  # the empty clause
        root_lit = None
    else:
        gb.clauses(np.array([top], dtype=np.int64))
        root_lit = top
    lits, offsets = gb.finish()
    levels = np.concatenate(gb.levels)
    return Cnf(gb.next - 1, lits, offsets, var_map, kind, levels, root_lit)


def graph_assignment(cnf: Cnf, g) -> dict[int, bool]:
    """Values of the atom variables read off a graph."""
    return {v: g.has_edge(a, b) for (_, a, b), v in cnf.var_map.items()}


def structure_assignment(cnf: Cnf, s) -> dict[int, bool]:
    return {v: (a, b) in s.relations.get(r, ()) for (r, a, b), v in cnf.var_map.items()}


def to_dimacs(cnf: Cnf) -> str:
    out = [f"p cnf {cnf.num_vars} {cnf.num_clauses}"]
    for c in cnf.clauses():
        out.append(" ".join(map(str, c + [0])))
    return "\n".join(out) + "\n"


def dimacs_map(cnf: Cnf) -> str:
    return "".join(f"v{v} = {r}({a},{b})\n" for (r, a, b), v in sorted(cnf.var_map.items(), key=lambda kv: kv[1]))


def parse_dimacs(text: str, map_text: str | None = None) -> Cnf:
    clauses, current, num_vars = [], [], None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad DIMACS header {line!r}")
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    var_map = {}
    for line in (map_text or "").splitlines():
        line = line.strip()
        if not line:
            continue
        lhs, _, rhs = line.partition("=")
        rel, _, args = rhs.strip().partition("(")
        a, b = args.rstrip(")").split(",")
        var_map[(rel, int(a), int(b))] = int(lhs.strip()[1:])
    return Cnf.from_clauses(clauses, num_vars, var_map)


def atoms_by_var(cnf: Cnf) -> Mapping[int, GroundAtom]:
    return {v: atom for atom, v in cnf.var_map.items()}
