"""Model existence per size, spectra, and the end-to-end reduction check."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .grounding import graph_assignment, ground_to_cnf
from .logic import Formula, Vocabulary, conj, free_variables, print_formula, relations_used
from .reduction import (
    ClassificationError,
    DecodeError,
    PsiBuilder,
    ReductionOutput,
    classify_vertices,
    decode_graph,
    encode_structure,
    reduce,
)
from .sat import check_assignment, solve_cnf
from .semantics import (
    CompiledFormula,
    Graph,
    Structure,
    graph_batches,
    structure_batches,
    structure_from_code,
)

BRUTE_FORCE_LIMIT = 25
METHODS = ("auto", "brute-force", "grounding")


class InfeasibleError(ValueError):
    """Exhaustive search requested beyond the ground-atom threshold."""


def ground_atom_count(vocab: Vocabulary, n: int, kind: str = "structure", loop_free: bool = False) -> int:
    if kind == "graph":
        return n * (n - 1) // 2
    return len(vocab) * (n * (n - 1) if loop_free else n * n)


def _vocab_for(f: Formula, vocab: Vocabulary | None, kind: str) -> Vocabulary:
    if kind == "graph":
        return Vocabulary(("E",))
    return Vocabulary(tuple(relations_used(f))) if vocab is None else vocab


def _brute_force(compiled: CompiledFormula, vocab: Vocabulary, n: int, kind: str, loop_free: bool):
    """First satisfying enumeration code, or None."""
    if kind == "graph":
        batches = ((start, {"E": m}) for start, m in graph_batches(n))
    else:
        batches = structure_batches(vocab.symbols, n, loop_free)
    for start, rels in batches:
        (t,) = compiled.tables(n, rels)
        hits = t.nonzero()[0]
        if len(hits):
            return start + int(hits[0])
    return None


def has_model(
    f: Formula,
    n: int,
    method: str = "auto",
    budget: int | None = None,
    *,
    kind: str = "structure",
    vocab: Vocabulary | None = None,
    loop_free: bool = False,
    allow_large: bool = False,
) -> bool | None:
    """Whether ``f`` has a model with exactly n elements; None means unknown.

    ``brute-force`` is exact and refuses more than BRUTE_FORCE_LIMIT ground
    atoms unless ``allow_large``; ``grounding`` runs the DPLL solver and
    answers None when the decision budget runs out; ``auto`` picks brute
    force when it is within the limit.
    """
    return _has_model(f, n, method, budget, kind, vocab, loop_free, allow_large)[0]


def _has_model(f, n, method, budget, kind, vocab, loop_free, allow_large):
    if n < 1:
        raise ValueError("model size must be at least 1")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if free_variables(f):
        raise ValueError("model existence is only defined for sentences")
    vocab = _vocab_for(f, vocab, kind)
    atoms = ground_atom_count(vocab, n, kind, loop_free)
    if method == "auto":
        method = "brute-force" if atoms <= BRUTE_FORCE_LIMIT else "grounding"
    if method == "brute-force":
        if atoms > BRUTE_FORCE_LIMIT and not allow_large:
            raise InfeasibleError(
                f"{atoms} ground atoms at size {n} exceeds the brute-force limit of {BRUTE_FORCE_LIMIT}"
            )
        return _brute_force(CompiledFormula(f), vocab, n, kind, loop_free) is not None, method
    cnf = ground_to_cnf(f, n, kind, vocab, loop_free)
    result = solve_cnf(cnf, budget)
    if result.status == "unknown":
        return None, method
    return result.sat, method


@dataclass(frozen=True)
class SpectrumResult:
    formula: str
    max_size: int
    members: tuple[int, ...]
    methods: dict[int, str]
    unknown: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "formula": self.formula,
            "max_size": self.max_size,
            "members": list(self.members),
            "unknown": list(self.unknown),
            "methods": {str(k): v for k, v in sorted(self.methods.items())},
        }


def spectrum(
    f: Formula,
    max_size: int,
    method: str = "auto",
    budget: int | None = None,
    *,
    kind: str = "structure",
    vocab: Vocabulary | None = None,
    loop_free: bool = False,
    allow_large: bool = False,
    witnesses: Mapping[int, Structure | Graph] | None = None,
) -> SpectrumResult:
    """Sizes 1..max_size at which ``f`` has a model.

    A size with a witness in ``witnesses`` that satisfies ``f`` is settled by
    model checking alone and recorded as ``witness-only``.
    """
    if max_size < 1:
        raise ValueError("max size must be at least 1")
    members, unknown, methods = [], [], {}
    compiled = CompiledFormula(f) if witnesses else None
    for n in range(1, max_size + 1):
        w = (witnesses or {}).get(n)
        if w is not None and w.size == n and compiled.holds(w):
            members.append(n)
            methods[n] = "witness-only"
            continue
        answer, used = _has_model(f, n, method, budget, kind, vocab, loop_free, allow_large)
        methods[n] = used
        if answer is None:
            unknown.append(n)
        elif answer:
            members.append(n)
    return SpectrumResult(print_formula(f), max_size, tuple(members), methods, tuple(unknown))


# ---------------------------------------------------------------------------
# end-to-end verification of the reduction


BACKWARD_NOTE = (
    "Exhaustive backward search is infeasible: every model of the compiled "
    "sentence has at least {smallest} vertices, i.e. 2^{pairs} candidate graphs "
    "at the smallest size. The backward direction is evidenced instead by "
    "decode round-trips, mutation coherence on encoded models and, when "
    "requested, a grounded check of an encoded model."
)


def mutation_candidates(enc, params) -> list[tuple[int, int]]:
    """Vertex pairs worth toggling: all pairs touching an element block.

    Pairs inside the ruler mostly just break it; pairs between ports and
    S-vertices are the ones that can leave a valid encoding behind.
    """
    g = enc.graph
    cls = enc.classification
    element = [v for v, r in cls.roles.items() if r.kind not in ("U", "W")]
    ports = [b[r] for b in cls.blocks for r in params.r_roles]
    s_vertices = [b["S"] for b in cls.blocks]
    cross = [(min(a, b), max(a, b)) for a in ports for b in s_vertices]
    touching = [
        (min(a, b), max(a, b)) for a in element for b in range(1, g.size + 1) if a != b
    ]
    return sorted(set(cross)) + sorted(set(touching) - set(cross))


def sample_mutation(enc, params, rng: random.Random) -> tuple[int, int]:
    """A seeded single-pair toggle: half port/S pairs, half anything else."""
    g = enc.graph
    cands = mutation_candidates(enc, params)
    n_cross = len(enc.classification.blocks) ** 2 * params.m
    r = rng.random()
    if r < 0.5 and n_cross:
        return cands[rng.randrange(n_cross)]
    if r < 0.8 and len(cands) > n_cross:
        return cands[n_cross + rng.randrange(len(cands) - n_cross)]
    a, b = rng.sample(range(1, g.size + 1), 2)
    return (min(a, b), max(a, b))


def toggle(g: Graph, a: int, b: int) -> Graph:
    return g.without_edge(a, b) if g.has_edge(a, b) else g.with_edge(a, b)


@dataclass
class MutationOutcome:
    pair: tuple[int, int]
    classified: bool
    prop: str | None
    psi_holds: bool
    phi_prime: bool | None = None
    source: bool | None = None

    @property
    def coherent(self) -> bool:
        if self.classified != self.psi_holds:
            return False
        return not self.classified or self.phi_prime == self.source


class MutationChecker:
    """Compares the graph-side classification with the gadget formulas."""

    def __init__(self, out: ReductionOutput):
        self.out = out
        b = PsiBuilder(out.params)
        self.compiled = CompiledFormula(conj(b.psi0(), b.p6()), out.phi_prime)
        self.source = CompiledFormula(out.preprocessed.sentence)

    def check(self, g: Graph, pair: tuple[int, int]) -> MutationOutcome:
        psi, phi_prime = (bool(t) for t in self.compiled.all_tables(g))
        try:
            classify_vertices(g, self.out.params)
        except ClassificationError as e:
            return MutationOutcome(pair, False, e.prop, psi)
        outcome = MutationOutcome(pair, True, None, psi, phi_prime)
        try:
            decoded = decode_graph(g, self.out.params)
        except DecodeError:
            # empty domain: the source side has no model of size 0
            outcome.source = False
            return outcome
        outcome.source = self.source.holds(decoded)
        return outcome


@dataclass
class SizeCheck:
    n: int
    vertices: int
    models: int
    checked_models: int
    forward_ok: int
    checked_non_models: int
    non_models_rejected: int
    size_law_ok: bool


@dataclass
class VerificationReport:
    sentence: str
    params: dict
    n_max: int
    spec: tuple[int, ...]
    sizes: list[SizeCheck]
    roundtrips: int
    roundtrip_failures: int
    mutations: list[MutationOutcome]
    grounding: dict | None
    backward_note: str
    seed: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def mutation_mismatches(self) -> list[MutationOutcome]:
        return [m for m in self.mutations if not m.coherent]

    @property
    def ok(self) -> bool:
        return (
            all(s.forward_ok == s.checked_models for s in self.sizes)
            and all(s.non_models_rejected == s.checked_non_models for s in self.sizes)
            and all(s.size_law_ok for s in self.sizes)
            and self.roundtrip_failures == 0
            and not self.mutation_mismatches
            and (self.grounding is None or self.grounding["satisfied"])
        )

    def to_dict(self) -> dict:
        return {
            "sentence": self.sentence,
            "ok": self.ok,
            "seed": self.seed,
            "params": self.params,
            "spec": {"n_max": self.n_max, "members": list(self.spec)},
            "forward": [s.__dict__ for s in self.sizes],
            "roundtrip": {"checked": self.roundtrips, "failures": self.roundtrip_failures},
            "mutations": {
                "checked": len(self.mutations),
                "classified": sum(m.classified for m in self.mutations),
                "mismatches": [m.__dict__ for m in self.mutation_mismatches],
            },
            "grounding": self.grounding,
            "backward": self.backward_note,
            "notes": list(self.notes),
        }


def verify_reduction(
    phi: Formula,
    vocab: Vocabulary,
    n_max: int,
    *,
    samples: int = 4,
    mutations: int = 50,
    seed: int = 0,
    self_loops: str = "auto",
    ground_check: bool = False,
) -> VerificationReport:
    """Run both sides of the reduction as far as is feasible.

    The source spectrum up to ``n_max`` is exact. For each size, up to
    ``samples`` models and as many non-models are encoded and checked against
    the compiled sentence, models are round-tripped through decode, and
    ``mutations`` seeded single-edge toggles of encoded models are checked
    for agreement between the graph classification and the formulas.
    """
    out = reduce(phi, vocab, self_loops)
    pre = out.preprocessed
    params = out.params
    rng = random.Random(seed)
    atoms = ground_atom_count(pre.vocab, n_max, loop_free=True)
    if atoms > BRUTE_FORCE_LIMIT:
        raise InfeasibleError(
            f"n_max={n_max} needs {atoms} ground atoms on the source side; the limit is {BRUTE_FORCE_LIMIT}"
        )
    source = CompiledFormula(pre.sentence)
    target = CompiledFormula(out.phi_prime)
    spec, sizes, encoded = [], [], []
    roundtrips = failures = 0
    for n in range(1, n_max + 1):
        hits, misses = [], []
        for start, rels in structure_batches(pre.vocab.symbols, n, loop_free=True):
            (t,) = source.tables(n, rels)
            hits.extend(start + int(i) for i in t.nonzero()[0])
            misses.extend(start + int(i) for i in (~t).nonzero()[0])
        if hits:
            spec.append(n)
        picked = rng.sample(hits, min(samples, len(hits)))
        rejected = rng.sample(misses, min(samples, len(misses)))
        ok = law = 0
        for code in picked:
            a = structure_from_code(pre.vocab, n, code)
            enc = encode_structure(a, params)
            ok += target.holds(enc.graph)
            law += enc.graph.size == params.size_for(n)
            roundtrips += 1
            failures += decode_graph(enc.graph, params) != a
            encoded.append((a, enc))
        non = 0
        for code in rejected:
            enc = encode_structure(structure_from_code(pre.vocab, n, code), params)
            non += not target.holds(enc.graph)
            law += enc.graph.size == params.size_for(n)
        sizes.append(
            SizeCheck(n, params.size_for(n), len(hits), len(picked), ok, len(rejected), non,
                      law == len(picked) + len(rejected))
        )
    checker = MutationChecker(out)
    outcomes = []
    if encoded:
        for _ in range(mutations):
            a, enc = encoded[rng.randrange(len(encoded))]
            pair = sample_mutation(enc, params, rng)
            outcomes.append(checker.check(toggle(enc.graph, *pair), pair))
    grounding = None
    if ground_check and encoded:
        a, enc = min(encoded, key=lambda ae: ae[0].size)
        cnf = ground_to_cnf(out.phi_prime, enc.graph.size, "graph")
        grounding = {
            "vertices": enc.graph.size,
            "variables": cnf.num_vars,
            "clauses": cnf.num_clauses,
            "satisfied": check_assignment(cnf, graph_assignment(cnf, enc.graph)),
        }
    smallest = params.size_for(1)
    note = BACKWARD_NOTE.format(smallest=smallest, pairs=smallest * (smallest - 1) // 2)
    return VerificationReport(
        print_formula(phi), out.report(), n_max, tuple(spec), sizes, roundtrips, failures,
        outcomes, grounding, note, seed,
    )
