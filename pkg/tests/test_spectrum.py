import random

import pytest
from hypothesis import given, settings

from helpers import R3, corpus_formula, corpus_reduction, random_sentence, sentences
from spectra.logic import Vocabulary, parse_formula
from spectra.reduction import encode_structure, lift_structure
from spectra.semantics import Graph, Structure, enumerate_structures
from spectra.spectrum import (
    BRUTE_FORCE_LIMIT,
    InfeasibleError,
    MutationChecker,
    ground_atom_count,
    has_model,
    mutation_candidates,
    sample_mutation,
    spectrum,
    toggle,
    verify_reduction,
)

R1 = Vocabulary(("R1",))


def test_ground_atom_counts():
    assert ground_atom_count(R3, 2) == 12
    assert ground_atom_count(R3, 2, loop_free=True) == 6
    assert ground_atom_count(None, 5, "graph") == 10


def test_spectrum_examples():
    assert spectrum(corpus_formula("exactly-two"), 5).members == (2,)
    assert spectrum(corpus_formula("tautology"), 3).members == (1, 2, 3)
    # a symmetric functional R1 is a perfect matching plus fixed points
    assert spectrum(corpus_formula("r1-matching"), 2, vocab=R3).members == (1, 2)
    odd = parse_formula("forall x. (~E(x,x) & exists y. (E(x,y) & forall z. (E(x,z) -> z = y)))")
    assert spectrum(odd, 6, kind="graph").members == (2, 4, 6)


def test_methods_are_recorded():
    res = spectrum(corpus_formula("exactly-two"), 4, vocab=R1)
    assert res.methods == {1: "brute-force", 2: "brute-force", 3: "brute-force", 4: "brute-force"}
    res = spectrum(corpus_formula("exactly-two"), 6, vocab=R1)
    assert res.methods[6] == "grounding"
    d = res.to_dict()
    assert d["members"] == [2] and d["methods"]["6"] == "grounding"


def test_brute_force_limit():
    f = corpus_formula("tautology")
    with pytest.raises(InfeasibleError):
        has_model(f, 3, "brute-force", vocab=R3)
    assert ground_atom_count(R3, 3) > BRUTE_FORCE_LIMIT
    assert has_model(f, 3, "brute-force", vocab=R3, allow_large=True) is True
    assert has_model(f, 3, vocab=R3) is True


def test_bad_arguments():
    f = corpus_formula("tautology")
    with pytest.raises(ValueError):
        has_model(f, 0)
    with pytest.raises(ValueError):
        has_model(f, 1, "magic")
    with pytest.raises(ValueError):
        has_model(parse_formula("R1(x,y)"), 1)
    with pytest.raises(ValueError):
        spectrum(f, 0)


def test_budget_exhaustion_reports_unknown():
    # pigeonhole over R1: an injective total function into a proper subset
    php = parse_formula(
        "exists z. forall x. exists y. (R1(x,y) & ~y = z)"
        " & forall x. forall y. forall z. (R1(x,y) & R1(z,y) -> x = z)"
        " & forall x. forall y. forall z. (R1(x,y) & R1(x,z) -> y = z)",
        R1,
    )
    assert has_model(php, 4, "grounding", budget=1, vocab=R1) is None
    res = spectrum(php, 4, "grounding", budget=1, vocab=R1)
    assert 4 in res.unknown and 4 not in res.members


def test_witnesses_short_circuit():
    f = corpus_formula("exactly-two")
    w = Structure(2, {r: frozenset() for r in R3.symbols})
    res = spectrum(f, 3, vocab=R3, witnesses={2: w})
    assert res.members == (2,) and res.methods[2] == "witness-only"
    assert res.methods[1] == "brute-force"


def test_loop_free_and_graph_kinds():
    loop = parse_formula("exists x. R1(x,x)", R1)
    assert spectrum(loop, 2, vocab=R1).members == (1, 2)
    assert spectrum(loop, 2, vocab=R1, loop_free=True).members == ()
    edge = parse_formula("exists x. exists y. E(x,y)")
    assert spectrum(edge, 3, kind="graph").members == (2, 3)


@settings(max_examples=25)
@given(sentences(("R1",)))
def test_brute_force_matches_grounding(f):
    for n in (1, 2):
        assert has_model(f, n, "brute-force", vocab=R1) == has_model(f, n, "grounding", vocab=R1)


def test_spectrum_agrees_with_has_model():
    rng = random.Random(3)
    f = parse_formula("exists x. exists y. (~x = y & R1(x,y))", R1)
    assert spectrum(f, 4, vocab=R1).members == (2, 3, 4)
    for _ in range(10):
        g = random_sentence(rng, 3)
        members = spectrum(g, 3, vocab=R1).members
        assert members == tuple(n for n in (1, 2, 3) if has_model(g, n, "grounding", vocab=R1))


def test_mutations_of_encoded_models_are_coherent():
    out = corpus_reduction("exactly-two")
    checker = MutationChecker(out)
    rng = random.Random(1)
    structures = list(enumerate_structures(R3, 2, loop_free=True))
    for _ in range(30):
        a = structures[rng.randrange(len(structures))]
        enc = encode_structure(lift_structure(a, out.preprocessed), out.params)
        pair = sample_mutation(enc, out.params, rng)
        assert pair[0] < pair[1] <= enc.graph.size
        res = checker.check(toggle(enc.graph, *pair), pair)
        assert res.coherent, res


def test_mutation_candidates_start_with_port_s_pairs():
    out = corpus_reduction("tautology")
    a = Structure(2, {r: frozenset() for r in R3.symbols})
    enc = encode_structure(a, out.params)
    cands = mutation_candidates(enc, out.params)
    cross = len(enc.classification.blocks) ** 2 * out.params.m
    s_vertices = {b["S"] for b in enc.classification.blocks}
    assert all(set(p) & s_vertices for p in cands[:cross])
    assert len(set(cands)) == len(cands)


def test_toggle():
    g = Graph(3, frozenset({(1, 2)}))
    assert toggle(g, 1, 2).edges == frozenset()
    assert toggle(g, 2, 3).edges == {(1, 2), (2, 3)}


def test_verify_reduction_exactly_two():
    rep = verify_reduction(corpus_formula("exactly-two"), R3, 2, samples=2, mutations=20, seed=4)
    assert rep.ok
    assert rep.spec == (2,)
    assert [s.vertices for s in rep.sizes] == [32, 38]
    assert rep.roundtrip_failures == 0 and rep.roundtrips == 2
    d = rep.to_dict()
    assert d["ok"] and d["spec"]["members"] == [2] and d["mutations"]["checked"] == 20
    assert "infeasible" in d["backward"]


def test_verify_reduction_is_seeded():
    a = verify_reduction(corpus_formula("tautology"), R3, 1, mutations=15, seed=7).to_dict()
    b = verify_reduction(corpus_formula("tautology"), R3, 1, mutations=15, seed=7).to_dict()
    assert a == b


def test_verify_reduction_limits():
    with pytest.raises(InfeasibleError):
        verify_reduction(corpus_formula("tautology"), R3, 4)
    with pytest.raises(ValueError):
        verify_reduction(parse_formula("forall x. exists y. R1(x,y)", R3), R3, 1)


@pytest.mark.slow
def test_verify_reduction_ground_check():
    rep = verify_reduction(corpus_formula("tautology"), R3, 1, mutations=0, ground_check=True)
    assert rep.grounding["vertices"] == 32 and rep.grounding["satisfied"]
    assert rep.ok
