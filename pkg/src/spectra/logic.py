"""First-order formulas over binary relational vocabularies.

Formulas are immutable dataclass trees. Builders are free to share subtrees,
so every traversal here memoizes on node identity and stays linear in the
size of the DAG rather than the unfolded tree.
"""

from __future__ import annotations

import re
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

Var = str

KEYWORDS = frozenset({"exists", "forall", "true", "false", "vocab"})
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class FormulaError(ValueError):
    """Malformed formula or vocabulary."""


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.col = line, col
        super().__init__(f"{message} at line {line}, column {col}")


def is_identifier(name: str) -> bool:
    return bool(_IDENT.match(name)) and name not in KEYWORDS


@dataclass(frozen=True)
class Vocabulary:
    """Ordered binary relation symbols."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        seen = set()
        for s in self.symbols:
            if not isinstance(s, str) or not is_identifier(s):
                raise FormulaError(f"invalid relation symbol {s!r}")
            if s in seen:
                raise FormulaError(f"duplicate relation symbol {s!r}")
            seen.add(s)

    def __contains__(self, name: object) -> bool:
        return name in self.symbols

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def arity(self, name: str) -> int:
        if name not in self.symbols:
            raise FormulaError(f"unknown relation symbol {name!r}")
        return 2


# -- syntax -----------------------------------------------------------------


class Formula:
    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __invert__(self) -> Formula:
        return Not(self)

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True, repr=False)
class Truth(Formula):
    value: bool

    def __repr__(self):
        return f"Truth({self.value})"


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    rel: str
    left: Var
    right: Var

    def __repr__(self):
        return f"Atom({self.rel},{self.left},{self.right})"


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    left: Var
    right: Var

    def __repr__(self):
        return f"Eq({self.left},{self.right})"


@dataclass(frozen=True, repr=False)
class Not(Formula):
    child: Formula

    def __repr__(self):
        return f"Not({self.child!r})"


@dataclass(frozen=True, repr=False)
class _Binary(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class And(_Binary):
    pass


class Or(_Binary):
    pass


class Implies(_Binary):
    pass


class Iff(_Binary):
    pass


@dataclass(frozen=True, repr=False)
class _Quant(Formula):
    var: Var
    child: Formula

    def __repr__(self):
        return f"{type(self).__name__}({self.var}, {self.child!r})"


class Exists(_Quant):
    pass


class Forall(_Quant):
    pass


Binary = Union[And, Or, Implies, Iff]
Quantifier = Union[Exists, Forall]

TRUE = Truth(True)
FALSE = Truth(False)


def conj(*parts: Formula) -> Formula:
    """Balanced conjunction; keeps nesting depth logarithmic."""
    parts = tuple(p for p in parts if p != TRUE)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return And(conj(*parts[:mid]), conj(*parts[mid:]))


def disj(*parts: Formula) -> Formula:
    parts = tuple(p for p in parts if p != FALSE)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return Or(disj(*parts[:mid]), disj(*parts[mid:]))


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.child,)
    if isinstance(f, _Binary):
        return (f.left, f.right)
    if isinstance(f, _Quant):
        return (f.child,)
    return ()


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten a top-level conjunction."""
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if isinstance(g, And):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


# -- analysis ---------------------------------------------------------------


def free_variables(f: Formula) -> frozenset[Var]:
    memo: dict[int, frozenset[Var]] = {}

    def go(g: Formula) -> frozenset[Var]:
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, (Atom, Eq)):
            out = frozenset((g.left, g.right))
        elif isinstance(g, Truth):
            out = frozenset()
        elif isinstance(g, _Quant):
            out = go(g.child) - {g.var}
        else:
            out = frozenset().union(*(go(c) for c in children(g)))
        memo[key] = out
        return out

    with _deep_recursion():
        return go(f)


def variables_used(f: Formula) -> tuple[Var, ...]:
    """All variable names, free or bound, in first-occurrence order."""
    seen: dict[Var, None] = {}
    visited: set[int] = set()

    def go(g: Formula) -> None:
        if id(g) in visited:
            return
        visited.add(id(g))
        if isinstance(g, (Atom, Eq)):
            seen.setdefault(g.left)
            seen.setdefault(g.right)
        elif isinstance(g, _Quant):
            seen.setdefault(g.var)
            go(g.child)
        else:
            for c in children(g):
                go(c)

    with _deep_recursion():
        go(f)
    return tuple(seen)


def relations_used(f: Formula) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for g in iter_nodes(f):
        if isinstance(g, Atom):
            seen.setdefault(g.rel)
    return tuple(seen)


def iter_nodes(f: Formula) -> Iterator[Formula]:
    """Each distinct node object once, parents before children."""
    visited: set[int] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if id(g) in visited:
            continue
        visited.add(id(g))
        yield g
        stack.extend(reversed(children(g)))


def tree_size(f: Formula) -> int:
    """Node count of the fully unfolded tree (what the printer emits)."""
    memo: dict[int, int] = {}

    def go(g):
        k = id(g)
        if k not in memo:
            memo[k] = 1 + sum(go(c) for c in children(g))
        return memo[k]

    with _deep_recursion():
        return go(f)


def dag_size(f: Formula) -> int:
    return sum(1 for _ in iter_nodes(f))


def quantifier_depth(f: Formula) -> int:
    memo: dict[int, int] = {}

    def go(g):
        k = id(g)
        if k not in memo:
            inner = max((go(c) for c in children(g)), default=0)
            memo[k] = inner + (1 if isinstance(g, _Quant) else 0)
        return memo[k]

    with _deep_recursion():
        return go(f)


def check_vocabulary(f: Formula, vocab: Vocabulary) -> None:
    for g in iter_nodes(f):
        if isinstance(g, Atom) and g.rel not in vocab:
            raise FormulaError(f"unknown relation symbol {g.rel!r}")


@dataclass(frozen=True)
class ValidationReport:
    is_sentence: bool
    variables: tuple[Var, ...]
    free: tuple[Var, ...]
    relations: tuple[str, ...]
    reasons: tuple[str, ...] = field(default=())

    @property
    def k(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return len(self.relations)

    @property
    def eligible(self) -> bool:
        return not self.reasons


def validate_input(f: Formula, vocab: Vocabulary) -> ValidationReport:
    variables = variables_used(f)
    free = free_variables(f)
    reasons = []
    if free:
        reasons.append("not a sentence: free variables " + ", ".join(sorted(free)))
    if len(variables) < 3:
        reasons.append(f"k < 3: at least three variables required (found {len(variables)})")
    unknown = [r for r in relations_used(f) if r not in vocab]
    if unknown:
        reasons.append("unknown relation symbols " + ", ".join(unknown))
    return ValidationReport(
        is_sentence=not free,
        variables=variables,
        free=tuple(v for v in variables if v in free),
        relations=vocab.symbols,
        reasons=tuple(reasons),
    )


# -- printing ---------------------------------------------------------------

_IFF, _IMP, _OR, _AND, _UNARY = range(5)
_LEVEL = {Iff: _IFF, Implies: _IMP, Or: _OR, And: _AND}
_SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&"}


def print_formula(f: Formula) -> str:
    """Render ``f`` in the surface grammar, parenthesizing only where needed."""
    out: list[str] = []

    def emit(g: Formula, need: int) -> None:
        level = _LEVEL.get(type(g), _UNARY)
        paren = level < need
        if paren:
            out.append("(")
        if isinstance(g, Truth):
            out.append("true" if g.value else "false")
        elif isinstance(g, Atom):
            out.append(f"{g.rel}({g.left},{g.right})")
        elif isinstance(g, Eq):
            out.append(f"{g.left} = {g.right}")
        elif isinstance(g, Not):
            out.append("~")
            emit(g.child, _UNARY)
        elif isinstance(g, _Quant):
            out.append(f"{'exists' if isinstance(g, Exists) else 'forall'} {g.var}. ")
            emit(g.child, _UNARY)
        else:
            # implication is right-associative, the others left-associative
            if isinstance(g, Implies):
                emit(g.left, level + 1)
                out.append(" -> ")
                emit(g.right, level)
            else:
                emit(g.left, level)
                out.append(f" {_SYMBOL[type(g)]} ")
                emit(g.right, level + 1)
        if paren:
            out.append(")")

    with _deep_recursion():
        emit(f, _IFF)
    return "".join(out)


# -- parsing ----------------------------------------------------------------

_SKIP = re.compile(r"(?:\s+|#[^\n]*)*")
_TOKEN = re.compile(r"(?:(<->|->|[()~&|,.=])|([A-Za-z][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens, pos = [], 0
    while True:
        pos = _SKIP.match(text, pos).end()
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        tokens.append((m.group(1) or m.group(2), pos))
        pos = m.end()
    tokens.append(("<eof>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vocab: Vocabulary | None):
        self.text = text
        self.vocab = vocab
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self, expected: str | None = None) -> str:
        tok, pos = self.tokens[self.i]
        if expected is not None and tok != expected:
            shown = "end of input" if tok == "<eof>" else repr(tok)
            raise ParseError(f"expected {expected!r}, found {shown}", pos, self.text)
        self.i += 1
        return tok

    def ident(self, what: str) -> str:
        tok, pos = self.tokens[self.i]
        if not is_identifier(tok):
            shown = "end of input" if tok == "<eof>" else repr(tok)
            raise ParseError(f"expected {what}, found {shown}", pos, self.text)
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.implies()
        while self.peek() == "<->":
            self.take()
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok in ("exists", "forall"):
            self.take()
            var = self.ident("a variable")
            self.take(".")
            body = self.unary()
            return Exists(var, body) if tok == "exists" else Forall(var, body)
        if tok == "(":
            self.take()
            inner = self.formula()
            self.take(")")
            return inner
        if tok in ("true", "false"):
            self.take()
            return Truth(tok == "true")
        return self.atom()

    def atom(self) -> Formula:
        start = self.pos()
        name = self.ident("a formula")
        if self.peek() == "(":
            if self.vocab is not None and name not in self.vocab:
                raise ParseError(f"unknown relation symbol {name!r}", start, self.text)
            self.take("(")
            args = [self.ident("a variable")]
            while self.peek() == ",":
                self.take()
                args.append(self.ident("a variable"))
            self.take(")")
            if len(args) != 2:
                raise ParseError(
                    f"relation {name!r} has arity 2, got {len(args)} argument(s)", start, self.text
                )
            return Atom(name, args[0], args[1])
        if self.peek() == "=":
            self.take()
            return Eq(name, self.ident("a variable"))
        raise ParseError(f"expected '(' or '=' after {name!r}", self.pos(), self.text)


def parse_formula(text: str, vocab: Vocabulary | None = None) -> Formula:
    """Parse the surface grammar; with ``vocab`` given, relation symbols are checked."""
    p = _Parser(text, vocab)
    with _deep_recursion():
        f = p.formula()
    p.take("<eof>")
    return f


def parse_fo_file(text: str) -> tuple[Formula, Vocabulary]:
    """Parse a ``.fo`` document: a ``vocab`` header line, then the sentence."""
    lines = text.splitlines(keepends=True)
    offset = 0
    for idx, line in enumerate(lines):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            offset += len(line)
            continue
        words = stripped.split()
        if words[0] != "vocab":
            raise ParseError("missing 'vocab' header line", offset, text)
        try:
            vocab = Vocabulary(tuple(words[1:]))
        except FormulaError as exc:
            raise ParseError(str(exc), offset, text) from None
        body = "".join(lines[idx + 1:])
        try:
            return parse_formula(body, vocab), vocab
        except ParseError as exc:
            raise ParseError(str(exc).rsplit(" at line", 1)[0], offset + len(line) + exc.pos, text) from None
    raise ParseError("empty input", len(text), text)


def format_fo_file(f: Formula, vocab: Vocabulary) -> str:
    return "vocab " + " ".join(vocab.symbols) + "\n" + print_formula(f) + "\n"


# -- compiled DAG -------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    """One hash-consed subformula; ``kids`` index earlier nodes."""

    kind: str
    data: tuple
    kids: tuple[int, ...]
    free: tuple[Var, ...]  # sorted


def compile_dag(roots: Sequence[Formula]) -> tuple[list[Node], list[int]]:
    """Hash-cons ``roots`` into a topologically ordered node list.

    Structurally equal subformulas collapse to one node regardless of object
    identity, so a parsed formula gets the same sharing as a built one.
    """
    nodes: list[Node] = []
    index: dict[tuple, int] = {}
    by_id: dict[int, int] = {}

    def intern(kind, data, kids, free):
        key = (kind, data, kids)
        if key not in index:
            index[key] = len(nodes)
            nodes.append(Node(kind, data, kids, free))
        return index[key]

    def go(g: Formula) -> int:
        k = id(g)
        if k in by_id:
            return by_id[k]
        if isinstance(g, Truth):
            out = intern("const", (g.value,), (), ())
        elif isinstance(g, Atom):
            out = intern("atom", (g.rel, g.left, g.right), (), tuple(sorted({g.left, g.right})))
        elif isinstance(g, Eq):
            out = intern("eq", (g.left, g.right), (), tuple(sorted({g.left, g.right})))
        elif isinstance(g, Not):
            c = go(g.child)
            out = intern("not", (), (c,), nodes[c].free)
        elif isinstance(g, _Binary):
            a, b = go(g.left), go(g.right)
            free = tuple(sorted(set(nodes[a].free) | set(nodes[b].free)))
            out = intern(type(g).__name__.lower(), (), (a, b), free)
        elif isinstance(g, _Quant):
            c = go(g.child)
            free = tuple(v for v in nodes[c].free if v != g.var)
            out = intern(type(g).__name__.lower(), (g.var,), (c,), free)
        else:
            raise TypeError(f"not a formula: {g!r}")
        by_id[k] = out
        return out

    with _deep_recursion():
        root_ids = [go(r) for r in roots]
    return nodes, root_ids


@contextmanager
def _deep_recursion(limit: int = 100_000):
    old = sys.getrecursionlimit()
    if old < limit:
        sys.setrecursionlimit(limit)
    try:
        yield
    finally:
        sys.setrecursionlimit(old)
