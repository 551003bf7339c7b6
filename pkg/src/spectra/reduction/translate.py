"""Source-side preprocessing, the formula translation and the top-level reduce."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..logic import (
    FALSE,
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
    conj,
    conjuncts,
    dag_size,
    free_variables,
    is_identifier,
    quantifier_depth,
    relations_used,
    tree_size,
    validate_input,
    variables_used,
)
from ..semantics import Structure
from .formulas import E, PsiBuilder
from .params import ReductionError, ReductionParams

SELF_LOOP_MODES = ("auto", "eliminate", "forbid")


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    while name in taken or not is_identifier(name):
        name += "_"
    taken.add(name)
    return name


def _spare(pool: tuple[Var, ...], *avoid: Var) -> Var:
    for v in pool:
        if v not in avoid:
            return v
    raise ReductionError("at least three variables required")


def _map_atoms(f: Formula, fn) -> Formula:
    memo: dict[int, Formula] = {}

    def go(g: Formula) -> Formula:
        k = id(g)
        if k in memo:
            return memo[k]
        if isinstance(g, Atom):
            out = fn(g)
        elif isinstance(g, (Eq, Truth)):
            out = g
        elif isinstance(g, Not):
            out = Not(go(g.child))
        elif isinstance(g, (And, Or, Implies, Iff)):
            out = type(g)(go(g.left), go(g.right))
        else:
            out = type(g)(g.var, go(g.child))
        memo[k] = out
        return out

    return go(f)


def irreflexive(rel: str, v: Var) -> Formula:
    return Forall(v, Not(Atom(rel, v, v)))


def declared_irreflexive(phi: Formula) -> set[str]:
    """Relations R for which ``forall v. ~R(v,v)`` is a top-level conjunct."""
    out = set()
    for c in conjuncts(phi):
        if (
            isinstance(c, Forall)
            and isinstance(c.child, Not)
            and isinstance(c.child.child, Atom)
            and c.child.child.left == c.var == c.child.child.right
        ):
            out.add(c.child.child.rel)
    return out


def eliminate_self_loops(
    phi: Formula, vocab: Vocabulary, only: tuple[str, ...] | None = None
) -> tuple[Formula, Vocabulary, dict[str, str]]:
    """Move loops of each chosen relation R onto a fresh loop-free marker R'.

    A loop (u,u) in R becomes some pair (u,v), v != u, in R'. Returns the new
    sentence, the extended vocabulary and the map R -> R'.
    """
    pool = variables_used(phi)
    if len(pool) < 3:
        raise ReductionError("at least three variables required")
    targets = vocab.symbols if only is None else tuple(only)
    taken = set(vocab.symbols)
    marker = {r: _fresh(f"{r}_loop", taken) for r in targets}

    def replace(a: Atom) -> Formula:
        if a.rel not in marker:
            return a
        z = _spare(pool, a.left, a.right)
        loop = Exists(z, Atom(marker[a.rel], a.left, z))
        if a.left == a.right:
            return Or(a, loop)
        return Or(a, And(Eq(a.left, a.right), loop))

    body = _map_atoms(phi, replace)
    v = pool[0]
    constraints = []
    for r in targets:
        constraints.append(irreflexive(r, v))
        constraints.append(irreflexive(marker[r], v))
    out_vocab = Vocabulary(vocab.symbols + tuple(marker[r] for r in targets))
    return conj(body, *constraints), out_vocab, marker


def pad_relations(vocab: Vocabulary, minimum: int = 3) -> tuple[Vocabulary, tuple[str, ...]]:
    taken = set(vocab.symbols)
    pads = []
    while len(vocab.symbols) + len(pads) < minimum:
        pads.append(_fresh(f"Pad{len(pads) + 1}", taken))
    return Vocabulary(vocab.symbols + tuple(pads)), tuple(pads)


@dataclass(frozen=True)
class Preprocessed:
    sentence: Formula
    vocab: Vocabulary
    loop_markers: dict[str, str] = field(default_factory=dict)
    pads: tuple[str, ...] = ()


def preprocess(phi: Formula, vocab: Vocabulary, self_loops: str = "auto") -> Preprocessed:
    """Make the sentence imply irreflexivity of every relation and m >= 3.

    ``self_loops``:
      * ``eliminate`` - every relation gets a loop marker (spectrum preserved
        for sizes >= 2);
      * ``forbid`` - loops are simply ruled out;
      * ``auto`` - markers only for relations that occur in the sentence and
        are not already declared irreflexive by a top-level conjunct, which
        preserves the spectrum with no extra symbols whenever possible.
    """
    if self_loops not in SELF_LOOP_MODES:
        raise ReductionError(f"unknown self-loop mode {self_loops!r}")
    report = validate_input(phi, vocab)
    if not report.eligible:
        raise ReductionError("; ".join(report.reasons))
    pool = report.variables
    if self_loops == "eliminate":
        targets = vocab.symbols
    elif self_loops == "forbid":
        targets = ()
    else:
        used = set(relations_used(phi))
        declared = declared_irreflexive(phi)
        targets = tuple(r for r in vocab.symbols if r in used and r not in declared)
    markers: dict[str, str] = {}
    if targets:
        phi, vocab, markers = eliminate_self_loops(phi, vocab, targets)
    vocab, pads = pad_relations(vocab)
    v, w = pool[0], pool[1]
    extra = [irreflexive(r, v) for r in vocab.symbols]
    extra += [Forall(v, Forall(w, Not(Atom(r, v, w)))) for r in pads]
    return Preprocessed(conj(phi, *extra), vocab, markers, pads)


def lift_structure(a: Structure, pre: Preprocessed) -> Structure:
    """The model of the preprocessed sentence that corresponds to ``a``.

    Each loop (u,u) of a marked relation becomes the pair (u,v) of its marker,
    v the least other element; pads are empty. Loops of unmarked relations
    are kept, which makes the result a non-model, as it should be.
    """
    rels: dict[str, set] = {r: set() for r in pre.vocab.symbols}
    for r, pairs in a.relations.items():
        if r not in rels:
            raise ReductionError(f"relation {r!r} not in the preprocessed vocabulary")
        for u, v in pairs:
            if u == v and r in pre.loop_markers:
                others = [w for w in range(1, a.size + 1) if w != u]
                if not others:
                    raise ReductionError("a loop on a one-element structure has no marker pair")
                rels[pre.loop_markers[r]].add((u, others[0]))
            else:
                rels[r].add((u, v))
    return Structure(a.size, {r: frozenset(s) for r, s in rels.items()})


def translate(phi: Formula, params: ReductionParams, pool: tuple[Var, ...] | None = None) -> Formula:
    """Relativize ``phi`` to P-vertices and replace atoms by their gadget paths."""
    pool = variables_used(phi) if pool is None else pool
    if len(pool) < 3:
        raise ReductionError("at least three variables required")
    b = PsiBuilder(params)
    relation_role = {r: params.role_of(r) for r in params.relations}
    memo: dict[int, Formula] = {}

    def guard(v: Var) -> Formula:
        return b.role("P", v)

    def atom(a: Atom) -> Formula:
        x, y = a.left, a.right
        if a.rel not in relation_role:
            raise ReductionError(f"relation {a.rel!r} not in the reduction vocabulary")
        if x == y:
            return FALSE
        z = _spare(pool, x, y)
        port = relation_role[a.rel]
        innermost = Exists(z, conj(b.role(port, z), E(x, z), E(y, z)))
        middle = Exists(y, conj(b.role("S", y), E(z, y), innermost))
        return conj(guard(x), guard(y), Exists(z, conj(b.role("Q", z), E(y, z), middle)))

    def go(g: Formula) -> Formula:
        k = id(g)
        if k in memo:
            return memo[k]
        if isinstance(g, Truth):
            out = g
        elif isinstance(g, Atom):
            out = atom(g)
        elif isinstance(g, Eq):
            if g.left == g.right:
                out = guard(g.left)
            else:
                out = conj(guard(g.left), guard(g.right), g)
        elif isinstance(g, Not):
            out = Not(go(g.child))
        elif isinstance(g, (And, Or, Implies, Iff)):
            out = type(g)(go(g.left), go(g.right))
        elif isinstance(g, Exists):
            out = Exists(g.var, conj(guard(g.var), go(g.child)))
        elif isinstance(g, Forall):
            out = Forall(g.var, Implies(guard(g.var), go(g.child)))
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[k] = out
        return out

    return go(phi)


@dataclass(frozen=True)
class ReductionOutput:
    phi_prime: Formula
    params: ReductionParams
    preprocessed: Preprocessed
    source_vocab: Vocabulary

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def q(self) -> int:
        return self.params.q

    def report(self) -> dict:
        f = self.phi_prime
        return {
            "m": self.params.m,
            "p": self.params.p,
            "q": self.params.q,
            "line_length": self.params.line_length,
            "relations": list(self.params.relations),
            "source_relations": list(self.source_vocab.symbols),
            "loop_markers": dict(self.preprocessed.loop_markers),
            "pads": list(self.preprocessed.pads),
            "work_vars": list(self.params.work_vars),
            "attachment": self.params.attachment,
            "variables": list(variables_used(f)),
            "formula": {
                "tree_nodes": tree_size(f),
                "dag_nodes": dag_size(f),
                "quantifier_depth": quantifier_depth(f),
            },
        }


def reduce(phi: Formula, vocab: Vocabulary, self_loops: str = "auto") -> ReductionOutput:
    """Compile ``phi`` into a sentence over one symmetric relation E.

    Models of size n of the preprocessed sentence correspond to models of the
    result on p*n + q vertices, p = m+3 and q = 8m+2.
    """
    pre = preprocess(phi, vocab, self_loops)
    pool = variables_used(pre.sentence)
    params = ReductionParams(pre.vocab.symbols, work_vars=pool[:3])
    b = PsiBuilder(params)
    phi_prime = conj(b.psi0(), b.p6(), translate(pre.sentence, params, pool))
    assert not free_variables(phi_prime)
    return ReductionOutput(phi_prime, params, pre, vocab)


__all__ = [
    "Preprocessed",
    "ReductionOutput",
    "declared_irreflexive",
    "eliminate_self_loops",
    "lift_structure",
    "pad_relations",
    "preprocess",
    "reduce",
    "translate",
]
