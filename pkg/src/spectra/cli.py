"""Command-line front end.

Exit status: 0 for success or a positive answer, 1 for a negative answer
(false, unsat, empty spectrum, round-trip mismatch), 2 for any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .grounding import dimacs_map, ground_to_cnf, to_dimacs
from .logic import FormulaError, Vocabulary, format_fo_file, parse_fo_file
from .reduction import (
    ReductionError,
    ReductionParams,
    decode_graph,
    encode_structure,
    gadget_c,
    gadget_d,
    lift_structure,
    reduce,
)
from .semantics import (
    EvaluationError,
    FormatError,
    Structure,
    evaluate,
    format_graph,
    format_structure,
    parse_graph,
    parse_structure,
    to_dot,
)
from .spectrum import METHODS, InfeasibleError, spectrum, verify_reduction

OK, NO, ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise CliError(f"file not found: {path}")
    return p.read_text()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _check_output(path: str | None) -> None:
    if path and path != "-" and not Path(path).resolve().parent.is_dir():
        raise CliError(f"output directory does not exist: {path}")


def _relations(args, structure: Structure | None = None) -> tuple[str, ...]:
    if getattr(args, "relations", None):
        return tuple(r.strip() for r in args.relations.split(",") if r.strip())
    if getattr(args, "m", None):
        return tuple(f"R{l}" for l in range(1, args.m + 1))
    if structure is not None:
        return tuple(structure.relations)
    raise CliError("give --relations, --m or --formula to fix the relation order")


def _params_and_lift(args, a: Structure | None):
    """Reduction parameters, plus ``a`` moved onto their vocabulary."""
    if getattr(args, "formula", None):
        phi, vocab = parse_fo_file(_read(args.formula))
        out = reduce(phi, vocab, args.self_loops)
        lifted = lift_structure(a, out.preprocessed) if a is not None else None
        return out.params, lifted
    return ReductionParams(_relations(args, a)), a


def cmd_reduce(args) -> int:
    _check_output(args.out)
    _check_output(args.report)
    phi, vocab = parse_fo_file(_read(args.input))
    out = reduce(phi, vocab, args.self_loops)
    _write(args.out, format_fo_file(out.phi_prime, Vocabulary(("E",))))
    if args.report:
        _write(args.report, json.dumps(out.report(), indent=2, sort_keys=True) + "\n")
    return OK


def cmd_encode(args) -> int:
    _check_output(args.out)
    a = parse_structure(_read(args.structure))
    params, lifted = _params_and_lift(args, a)
    enc = encode_structure(lifted, params)
    if args.format == "dot":
        _write(args.out, to_dot(enc.graph, enc.labels))
    else:
        _write(args.out, format_graph(enc.graph))
    return OK


def cmd_decode(args) -> int:
    _check_output(args.out)
    g = parse_graph(_read(args.graph))
    params, _ = _params_and_lift(args, None)
    _write(args.out, format_structure(decode_graph(g, params)))
    return OK


def cmd_check(args) -> int:
    phi, _ = parse_fo_file(_read(args.formula))
    if args.graph:
        model = parse_graph(_read(args.graph))
    else:
        model = parse_structure(_read(args.structure))
    result = evaluate(phi, model)
    print("true" if result else "false")
    return OK if result else NO


def cmd_spectrum(args) -> int:
    phi, vocab = parse_fo_file(_read(args.formula))
    kind = "graph" if args.graphs else "structure"
    res = spectrum(
        phi, args.max, args.method, args.budget, kind=kind, vocab=vocab,
        loop_free=args.loop_free, allow_large=args.allow_large,
    )
    if args.json:
        print(json.dumps(res.to_dict(), indent=2, sort_keys=True))
    else:
        print("spectrum: {" + ", ".join(map(str, res.members)) + "}")
        if res.unknown:
            print("unknown: {" + ", ".join(map(str, res.unknown)) + "}")
    return OK if res.members else NO


def cmd_ground(args) -> int:
    _check_output(args.out)
    _check_output(args.map)
    phi, vocab = parse_fo_file(_read(args.formula))
    kind = "graph" if args.graphs else "structure"
    cnf = ground_to_cnf(phi, args.size, kind, vocab, args.loop_free)
    _write(args.out, to_dimacs(cnf))
    if args.map:
        _write(args.map, dimacs_map(cnf))
    print(f"c {cnf.num_vars} variables, {cnf.num_clauses} clauses", file=sys.stderr)
    return OK


def cmd_gadget(args) -> int:
    _check_output(args.out)
    if args.m < 1:
        raise CliError("--m must be positive")
    g, labels = gadget_c(args.m) if args.which == "C" else gadget_d(args.m)
    if args.format == "dot":
        _write(args.out, to_dot(g, labels, name=args.which))
    else:
        lines = [format_graph(g).rstrip("\n")]
        lines += [f"# {v} {labels[v]}" for v in sorted(labels)]
        _write(args.out, "\n".join(lines) + "\n")
    return OK


def cmd_verify(args) -> int:
    _check_output(args.json)
    phi, vocab = parse_fo_file(_read(args.formula))
    rep = verify_reduction(
        phi, vocab, args.n_max, samples=args.samples, mutations=args.mutations,
        seed=args.seed, self_loops=args.self_loops, ground_check=args.ground_check,
    )
    d = rep.to_dict()
    if args.json:
        _write(args.json, json.dumps(d, indent=2, sort_keys=True) + "\n")
    p = d["params"]
    print(f"m={p['m']} p={p['p']} q={p['q']}")
    print(f"(a) source spectrum up to {args.n_max}: {{{', '.join(map(str, rep.spec))}}}")
    for s in rep.sizes:
        print(
            f"(b) n={s.n} |V|={s.vertices}: models {s.forward_ok}/{s.checked_models} satisfy, "
            f"non-models {s.non_models_rejected}/{s.checked_non_models} rejected, size law {'ok' if s.size_law_ok else 'FAILED'}"
        )
    print(f"(c) round-trips: {rep.roundtrips - rep.roundtrip_failures}/{rep.roundtrips}")
    print(
        f"(d) mutations: {len(rep.mutations)} checked, "
        f"{sum(m.classified for m in rep.mutations)} still encodings, "
        f"{len(rep.mutation_mismatches)} mismatches"
    )
    if rep.grounding:
        print(f"    grounded check at {rep.grounding['vertices']} vertices: {rep.grounding['satisfied']}")
    print(f"(e) {rep.backward_note}")
    print("ok" if rep.ok else "FAILED")
    return OK if rep.ok else NO


def cmd_roundtrip(args) -> int:
    a = parse_structure(_read(args.structure))
    params, lifted = _params_and_lift(args, a)
    back = decode_graph(encode_structure(lifted, params).graph, params)
    same = back == lifted
    print("equal" if same else "different")
    return OK if same else NO


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectra", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def loops(p):
        p.add_argument("--self-loops", choices=("auto", "eliminate", "forbid"), default="auto")

    def relation_order(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--relations", help="comma-separated relation order, e.g. R1,R2,R3")
        g.add_argument("--m", type=int, help="use relations R1..Rm")
        g.add_argument("--formula", help="take the relation order from reducing this .fo file")
        loops(p)

    p = sub.add_parser("reduce", help="compile a sentence into one over bipartite graphs")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--report", help="write the parameter report as JSON")
    loops(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("encode", help="structure to graph")
    p.add_argument("--structure", required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("text", "dot"), default="text")
    relation_order(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="graph to structure")
    p.add_argument("--graph", required=True)
    p.add_argument("--out")
    relation_order(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("check", help="model-check a sentence")
    p.add_argument("--formula", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--graph")
    g.add_argument("--structure")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("spectrum", help="sizes up to --max that have a model")
    p.add_argument("--formula", required=True)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--budget", type=int, help="solver decision budget")
    p.add_argument("--graphs", action="store_true", help="search simple graphs over E")
    p.add_argument("--loop-free", action="store_true")
    p.add_argument("--allow-large", action="store_true", help="lift the brute-force limit")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ground", help="DIMACS CNF for a fixed domain size")
    p.add_argument("--formula", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--map", help="sidecar file mapping variables to ground atoms")
    p.add_argument("--graphs", action="store_true")
    p.add_argument("--loop-free", action="store_true")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("gadget", help="print gadget C or D")
    p.add_argument("--which", choices=("C", "D"), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--format", choices=("text", "dot"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("verify", help="end-to-end check of the reduction")
    p.add_argument("--formula", required=True)
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--samples", type=int, default=4)
    p.add_argument("--mutations", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ground-check", action="store_true")
    p.add_argument("--json", help="write the full report here")
    loops(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("roundtrip", help="check decode(encode(A)) == A")
    p.add_argument("--structure", required=True)
    relation_order(p)
    p.set_defaults(func=cmd_roundtrip)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, OSError, FormulaError, FormatError, EvaluationError,
            ReductionError, InfeasibleError, ValueError) as e:
        print(f"spectra {args.command}: error: {e}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
