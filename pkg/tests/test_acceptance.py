"""Acceptance criteria, one test each.

Every criterion function returns ``(passed, detail)``; the pytest wrappers
assert on it and a terminal-summary hook in conftest prints one PASS/FAIL
line per criterion. Run this file directly for the same lines without
pytest.
"""

from __future__ import annotations

import itertools
import random
import time

import numpy as np
import pytest

from helpers import (
    CORPUS,
    GRAPH_CORPUS,
    R3,
    bfs_within,
    corpus_formula,
    corpus_reduction,
    graph_formula,
    line_vertices,
    random_formula,
    random_ruler_graph,
    random_sentence,
)
from spectra.grounding import graph_assignment, ground_to_cnf
from spectra.logic import Vocabulary, free_variables, parse_formula, variables_used
from spectra.reduction import (
    ReductionParams,
    build_dist,
    decode_graph,
    encode_structure,
    gadget_c,
    gadget_d,
    lift_structure,
    reduce,
)
from spectra.sat import check_assignment
from spectra.semantics import (
    CompiledFormula,
    Structure,
    enumerate_structures,
    evaluate,
    evaluate_naive,
    is_bipartite,
    random_graph,
    random_structure,
)
from spectra.spectrum import MutationChecker, has_model, sample_mutation, spectrum, toggle

RESULTS: dict[int, tuple[bool, str]] = {}
TITLES = {
    1: "gadget arithmetic",
    2: "size law",
    3: "reduction constants",
    4: "forward equi-satisfiability",
    5: "round-trip",
    6: "bipartiteness",
    7: "variable preservation",
    8: "distance-formula oracle",
    9: "mutation coherence",
    10: "grounding faithfulness",
    11: "spectrum enumeration",
    12: "evaluator oracle",
}


def relations(m: int) -> tuple[str, ...]:
    return tuple(f"R{l}" for l in range(1, m + 1))


def small_structures(vocab, max_size):
    for n in range(1, max_size + 1):
        yield from enumerate_structures(vocab, n, loop_free=True)


def criterion_1():
    got = {}
    for m in (3, 5):
        c, _ = gadget_c(m)
        d, _ = gadget_d(m)
        got[m] = (c.size, len(c.edges), d.size, len(d.edges))
    ok = got == {3: (26, 25, 6, 5), 5: (42, 41, 8, 7)}
    return ok, f"C/D vertices and edges: {got}"


def criterion_2():
    rng = np.random.default_rng(2)
    bad = []
    for t in range(100):
        m = (3, 4, 5)[t % 3]
        n = int(rng.integers(1, 5))
        params = ReductionParams(relations(m))
        a = random_structure(rng, Vocabulary(relations(m)), n, float(rng.uniform(0.1, 0.6)))
        size = encode_structure(a, params).graph.size
        if size != (m + 3) * n + 8 * m + 2:
            bad.append((m, n, size))
    return not bad, f"100 structures, {len(bad)} violations"


def criterion_3():
    got = {}
    for m in range(3, 7):
        vocab = Vocabulary(relations(m))
        phi = parse_formula(
            " & ".join(f"forall x. ~R{l}(x,x)" for l in range(1, m + 1))
            + " & forall x. forall y. forall z. (R1(x,y) -> R1(x,z) | ~x = z)",
            vocab,
        )
        rep = reduce(phi, vocab).report()
        got[m] = (rep["m"], rep["p"], rep["q"])
    ok = all(got[m] == (m, m + 3, 8 * m + 2) for m in got)
    return ok, f"(m, p, q) = {sorted(got.values())}"


def criterion_4():
    checked = mismatches = positive = 0
    slowest = 0.0
    for name in CORPUS:
        out = corpus_reduction(name)
        phi = corpus_formula(name)
        source = CompiledFormula(out.preprocessed.sentence)
        target = CompiledFormula(out.phi_prime)
        for a in small_structures(R3, 2):
            lifted = lift_structure(a, out.preprocessed)
            want = source.holds(lifted)
            if want != evaluate(phi, a):
                mismatches += 1  # preprocessing must not change loop-free truth
            g = encode_structure(lifted, out.params).graph
            t0 = time.perf_counter()
            got = target.holds(g)
            slowest = max(slowest, time.perf_counter() - t0)
            checked += 1
            positive += want
            mismatches += got != want
    ok = mismatches == 0 and slowest <= 60 and checked == len(CORPUS) * 65
    return ok, (
        f"{len(CORPUS)} sentences x 65 loop-free structures (n<=2): {checked} checked, "
        f"{positive} models, {mismatches} mismatches, slowest model check {slowest:.2f}s"
    )


def criterion_5():
    rng = np.random.default_rng(5)
    params = ReductionParams(relations(3))
    bad = 0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        a = random_structure(rng, R3, n, float(rng.uniform(0.1, 0.7)))
        bad += decode_graph(encode_structure(a, params).graph, params) != a
    return bad == 0, f"100 structures, {bad} round-trip failures"


def criterion_6():
    bad = checked = 0
    for name in CORPUS:
        out = corpus_reduction(name)
        for a in small_structures(R3, 2):
            enc = encode_structure(lift_structure(a, out.preprocessed), out.params)
            sides = is_bipartite(enc.graph)
            checked += 1
            if sides is None:
                bad += 1
                continue
            side_u1 = sides[0] if 1 in sides[0] else sides[1]
            for v, role in enc.classification.roles.items():
                if role.kind == "U":
                    expect = role.index % 2 == 1
                elif role.kind == "W":
                    expect = role.index % 2 == 0
                else:
                    expect = role.kind == "Q" or role.kind.startswith("R")
                if (v in side_u1) != expect:
                    bad += 1
                    break
    return bad == 0, f"{checked} encodings, {bad} without a role-consistent 2-colouring"


def criterion_7():
    bad = [
        name for name in CORPUS
        if set(variables_used(corpus_reduction(name).phi_prime)) != set(variables_used(corpus_formula(name)))
        or len(variables_used(corpus_formula(name))) != 3
    ]
    return not bad, f"{len(CORPUS)} sentences, variable sets differ for {bad or 'none'}"


def criterion_8():
    rng = random.Random(8)
    params = ReductionParams(relations(3))
    top = 4 * params.m
    compiled = CompiledFormula(*[build_dist(params, n) for n in range(top + 1)])
    bad = pairs_in_u = longest = 0
    for _ in range(200):
        g = random_ruler_graph(rng, 10)
        u = line_vertices(g)
        oracle = {a: bfs_within(g, u, a) for a in u}
        tables = compiled.all_tables(g)
        for a, b in itertools.product(range(1, g.size + 1), repeat=2):
            d = oracle[a].get(b) if a in u and b in u else None
            pairs_in_u += d is not None
            longest = max(longest, d or 0)
            for n, t in enumerate(tables):
                if bool(t[a - 1, b - 1]) != (d == n):
                    bad += 1
    return bad == 0, f"200 graphs, distances 0..{top}, {pairs_in_u} connected U-pairs (longest {longest}), {bad} disagreements"


def criterion_9(count: int = 240):
    rng = random.Random(9)
    pool = []
    for name in ("tautology", "exactly-two", "declared-loop-free", "r1-matching"):
        out = corpus_reduction(name)
        for a in small_structures(R3, 2):
            if a.size == 2 or name == "tautology":
                pool.append((out, encode_structure(lift_structure(a, out.preprocessed), out.params)))
    checkers = {}
    bad = classified = 0
    for _ in range(count):
        out, enc = pool[rng.randrange(len(pool))]
        checker = checkers.setdefault(id(out), MutationChecker(out))
        pair = sample_mutation(enc, out.params, rng)
        res = checker.check(toggle(enc.graph, *pair), pair)
        classified += res.classified
        bad += not res.coherent
    ok = bad == 0 and count >= 200
    return ok, (
        f"{count} single-edge mutations, {classified} still encodings, {bad} incoherent "
        "(exhaustive backward search over graphs of 32+ vertices is infeasible; "
        "criteria 5, 9 and 10 stand in for it)"
    )


def criterion_10():
    rng = np.random.default_rng(10)
    gs = [random_graph(rng, int(rng.integers(1, 7)), float(rng.uniform(0.2, 0.7))) for _ in range(50)]
    bad = 0
    for name in GRAPH_CORPUS:
        f = graph_formula(name)
        for g in gs:
            cnf = ground_to_cnf(f, g.size, "graph")
            bad += check_assignment(cnf, graph_assignment(cnf, g)) != evaluate(f, g)
    out = corpus_reduction("tautology")
    empty = Structure(1, {r: frozenset() for r in out.params.relations})
    g = encode_structure(empty, out.params).graph
    t0 = time.perf_counter()
    cnf = ground_to_cnf(out.phi_prime, g.size, "graph")
    big = check_assignment(cnf, graph_assignment(cnf, g))
    took = time.perf_counter() - t0
    ok = bad == 0 and big and g.size == 32
    return ok, (
        f"{len(GRAPH_CORPUS)} sentences x 50 graphs: {bad} disagreements; "
        f"encoded n=1 model satisfies ground compiled sentence at 32 vertices: {big} "
        f"({cnf.num_vars} vars, {cnf.num_clauses} clauses, {took:.1f}s)"
    )


def criterion_11():
    two = spectrum(corpus_formula("exactly-two"), 6).members
    taut = spectrum(corpus_formula("tautology"), 4).members
    rng = random.Random(11)
    disagree = 0
    for _ in range(50):
        f = random_sentence(rng, rng.randint(2, 5), ("R1",))
        n = rng.randint(1, 3)
        bf = has_model(f, n, "brute-force", vocab=Vocabulary(("R1",)))
        gr = has_model(f, n, "grounding", vocab=Vocabulary(("R1",)))
        disagree += bf != gr
    ok = two == (2,) and taut == (1, 2, 3, 4) and disagree == 0
    return ok, f"exactly-two -> {set(two)}, tautology -> {set(taut)}, 50 samples: {disagree} disagreements"


def criterion_12():
    rng = random.Random(12)
    vocab = Vocabulary(("R1",))
    models = [a for n in (1, 2, 3) for a in enumerate_structures(vocab, n, loop_free=False)]
    fs = [random_formula(rng, rng.randint(1, 5)) for _ in range(60)]
    bad = checks = 0
    for f in fs:
        free = sorted(free_variables(f))
        compiled = CompiledFormula(f)
        for a in models:
            table = compiled.table(a)
            for idx in itertools.product(range(a.size), repeat=len(free)):
                asg = {v: i + 1 for v, i in zip(free, idx)}
                checks += 1
                bad += bool(table[idx]) != evaluate_naive(f, a, asg)
    return bad == 0, f"60 formulas (depth<=5) x {len(models)} structures: {checks} evaluations, {bad} disagreements"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in TITLES}


def run_criterion(i: int) -> tuple[bool, str]:
    try:
        RESULTS[i] = CRITERIA[i]()
    except Exception as e:  # a crash is a failure, reported like one
        RESULTS[i] = (False, f"{type(e).__name__}: {e}")
    return RESULTS[i]


def result_line(i: int) -> str:
    ok, detail = RESULTS[i]
    return f"[{'PASS' if ok else 'FAIL'}] criterion {i:2d} ({TITLES[i]}): {detail}"


@pytest.mark.parametrize("i", list(TITLES))
def test_criterion(i):
    ok, detail = run_criterion(i)
    print(result_line(i))
    assert ok, detail


if __name__ == "__main__":
    for i in TITLES:
        run_criterion(i)
        print(result_line(i), flush=True)
