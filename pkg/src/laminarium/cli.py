"""Command line entry points: farey, hier, model, teich, kleinian, laminarium.

Exit codes: 0 result, 1 parse or semantic error, 2 inconclusive, 3 internal.
"""
from __future__ import annotations

import argparse
import sys
import traceback
from fractions import Fraction

import tomli

from . import analyzer, farey, hierarchy, kleinian, model, teich
from .curves import Slope
from .descriptor import load_family, load_record
from .errors import (
    DegenerateTrace,
    LaminariumError,
    MalformedTubeUnion,
    NonAffineExponents,
    ParseError,
    SemanticError,
    SingularSystem,
)

OK, USAGE, INCONCLUSIVE, INTERNAL = 0, 1, 2, 3

_INPUT_ERRORS = (ParseError, SemanticError, NonAffineExponents, MalformedTubeUnion, DegenerateTrace, SingularSystem, ValueError)


def _run(handler, args) -> int:
    try:
        return handler(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (OSError, tomli.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except LaminariumError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL
    except Exception:
        traceback.print_exc()
        return INTERNAL


def _parser(prog: str, desc: str):
    p = argparse.ArgumentParser(prog=prog, description=desc)
    return p, p.add_subparsers(dest="cmd", required=True)


def _main(parser, argv) -> int:
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    return _run(args.func, args)


# --- farey --------------------------------------------------------------------

def _farey_dist(a):
    print(farey.distance(Slope.parse(a.u), Slope.parse(a.v)))
    return OK


def _farey_geo(a):
    print(" ".join(str(s) for s in farey.geodesic(Slope.parse(a.u), Slope.parse(a.v)).vertices))
    return OK


def _farey_proj(a):
    k = farey.annular_projection(Slope.parse(a.core), Slope.parse(a.u))
    print("undefined" if k is None else k)
    return OK


def farey_main(argv=None) -> int:
    p, sub = _parser("farey", "Distances and tight geodesics in the Farey graph.")
    for name, fn_, help_ in (("dist", _farey_dist, "distance"), ("geo", _farey_geo, "lex-least geodesic")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("u")
        s.add_argument("v")
        s.set_defaults(func=fn_)
    s = sub.add_parser("proj", help="annular projection of U to CORE")
    s.add_argument("core")
    s.add_argument("u")
    s.set_defaults(func=_farey_proj)
    return _main(p, argv)


# --- hier ---------------------------------------------------------------------

def _hier_build(a):
    h = hierarchy.build_hierarchy(hierarchy.Marking.parse(a.I), hierarchy.Marking.parse(a.T))
    print("main: " + " ".join(str(v) for v in h.main.vertices))
    for core, g in sorted(h.annular.items(), key=lambda kv: kv[1].index):
        print(f"{g.gid} core {core}: {g.start} -> {g.end} (length {len(g)})")
    if h.generalized:
        print("generalized: initial and terminal bases coincide")
    report = hierarchy.verify_axioms(h)
    print("axioms: " + ("ok" if report.ok else "; ".join(report.violations)))
    if a.resolve or a.emit_markings:
        r = hierarchy.resolve(h)
        print(f"moves: {len(r)}")
        if a.resolve:
            for m in r.moves:
                print(f"  {m.kind} {m.gid} {m.src} -> {m.dst}")
        if a.emit_markings:
            for mu in hierarchy.marking_sequence(r):
                print(f"  {mu}")
    return OK


def hier_main(argv=None) -> int:
    p, sub = _parser("hier", "Hierarchies and resolutions on S1,1.")
    s = sub.add_parser("build", help="hierarchy between two markings")
    s.add_argument("--I", required=True, help='initial marking, e.g. "1/0;0/1"')
    s.add_argument("--T", required=True, help='terminal marking, e.g. "2/5;?"')
    s.add_argument("--resolve", action="store_true")
    s.add_argument("--emit-markings", action="store_true")
    s.set_defaults(func=_hier_build)
    return _main(p, argv)


# --- model --------------------------------------------------------------------

def _level(x):
    return Fraction(x) if isinstance(x, (str, int)) else x


def load_tubes(path) -> model.TubeUnion:
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    allowed = {"geodesic", "xi4", "ray", "domain", "tube"}
    extra = set(data) - allowed
    if extra:
        raise SemanticError(f"unknown keys {sorted(extra)} in tube file")
    simplices = []
    for j, t in enumerate(data.get("tube", []), 1):
        if set(t) - {"vertex", "lo", "hi", "hat_lo", "hat_hi"}:
            raise SemanticError(f"unknown keys in tube {j}")
        simplices.append(model.TubeSimplex(
            t.get("vertex", j), _level(t["lo"]), _level(t["hi"]),
            _level(t["hat_lo"]) if "hat_lo" in t else None, _level(t["hat_hi"]) if "hat_hi" in t else None,
        ))
    u = model.TubeUnion(data.get("geodesic", "g"), tuple(simplices), data.get("xi4", True), data.get("ray"), data.get("domain", "S"))
    u.validate()
    return u


def _model_build(a):
    h = hierarchy.build_hierarchy(hierarchy.Marking.parse(a.I), hierarchy.Marking.parse(a.T))
    m = model.build_model(h)
    for b in m.boundary_blocks[:1] + m.blocks + m.boundary_blocks[1:]:
        print(f"brick {b.domain} [{b.lo}, {b.hi}]")
    for v in m.order:
        t = m.tubes[v]
        w = model.omega(m, v)
        print(f"tube {v} [{t.lo}, {t.hi}] omega {w.real:g}{w.imag:+g}i")
    for problem in model.check_gap_conditions(m):
        print(f"gap: {problem}")
    if a.emit_dot:
        with open(a.emit_dot, "w", encoding="utf-8") as fh:
            fh.write(model.model_dot(m))
    return OK


def _model_classify(a):
    lo, hi = (Fraction(x) for x in a.brick.split(","))
    u = load_tubes(a.tubes)
    c = model.classify_tube_vs_brick(u, model.Brick.span(lo, hi))
    print(c)
    return OK


def _model_wrap(a):
    d = model.limit_brick_diagram(load_family(a.family))
    for t in d.tori:
        print(f"{t.curve}: a = {t.wrap}, {t.parabolic_side.value.lower()} parabolic, locus {t.locus_form}")
    for c in d.obstructing:
        print(f"{c}: no integer wrapping number")
    for c in d.undetermined:
        print(f"{c}: wrapping number undetermined")
    if a.emit_dot:
        with open(a.emit_dot, "w", encoding="utf-8") as fh:
            fh.write(model.diagram_dot(d))
    if d.undetermined:
        return INCONCLUSIVE
    return OK


def model_main(argv=None) -> int:
    p, sub = _parser("model", "Block and tube models, penetration classes, wrapping diagrams.")
    s = sub.add_parser("build", help="model of the hierarchy between two markings")
    s.add_argument("--I", required=True)
    s.add_argument("--T", required=True)
    s.add_argument("--emit-dot")
    s.set_defaults(func=_model_build)
    s = sub.add_parser("classify", help="classify a tube union against a brick")
    s.add_argument("--brick", required=True, help="LO,HI levels, e.g. 1/4,3/4")
    s.add_argument("--tubes", required=True, help="TOML file with [[tube]] entries")
    s.set_defaults(func=_model_classify)
    s = sub.add_parser("wrap", help="wrapping numbers of a sequence family")
    s.add_argument("--family", required=True)
    s.add_argument("--emit-dot")
    s.set_defaults(func=_model_wrap)
    return _main(p, argv)


# --- teich --------------------------------------------------------------------

def _point(text: str) -> teich.TeichPoint:
    length, twist_param = (float(x) for x in text.split(","))
    return teich.fn(length, twist_param)


def _teich_len(a):
    print(f"{teich.length_of_slope(_point(a.fn), Slope.parse(a.slope)):.12g}")
    return OK


def _teich_systole(a):
    s, cert = teich.systole(_point(a.fn))
    print(f"{s} {cert.length:.12g}")
    return OK


def _teich_limit(a):
    fam = load_family(a.family)
    status = OK
    for which in ("lower", "upper"):
        pts = analyzer.side_samples(fam, which, a.samples)
        if len(pts) < 5:
            print(f"{which}: too few samples in range")
            status = INCONCLUSIVE
            continue
        est = teich.thurston_limit_estimate(pts, window=a.window)
        if est is None:
            print(f"{which}: no limit detected")
            status = INCONCLUSIVE
        else:
            print(f"{which}: {est.lamination} residual {est.residual:.3g}")
    return status


def teich_main(argv=None) -> int:
    p, sub = _parser("teich", "Lengths, systoles and Thurston limits on S1,1.")
    s = sub.add_parser("len", help="length of a slope")
    s.add_argument("--fn", required=True, help="Fenchel-Nielsen coordinates L,T")
    s.add_argument("--slope", required=True)
    s.set_defaults(func=_teich_len)
    s = sub.add_parser("systole", help="certified shortest slope")
    s.add_argument("--fn", required=True)
    s.set_defaults(func=_teich_systole)
    s = sub.add_parser("limit", help="Thurston limits of a family's two sides")
    s.add_argument("--family", required=True)
    s.add_argument("--window", type=int, default=4)
    s.add_argument("--samples", type=int, default=analyzer.DEFAULT_SAMPLES)
    s.set_defaults(func=_teich_limit)
    return _main(p, argv)


# --- kleinian -----------------------------------------------------------------

def _kleinian_bq(a):
    r = kleinian.bowditch_bq(kleinian.TraceTriple.parse(a.triple), budget=a.budget)
    print(r)
    return INCONCLUSIVE if r.verdict == "Inconclusive" else OK


def _kleinian_trace(a):
    tr = kleinian.trace_of_slope(kleinian.TraceTriple.parse(a.triple), Slope.parse(a.slope))
    print(f"{tr.real:.12g}{tr.imag:+.12g}i")
    return OK


def kleinian_main(argv=None) -> int:
    p, sub = _parser("kleinian", "Punctured-torus groups from Markov triples.")
    s = sub.add_parser("bq", help="Bowditch condition search")
    s.add_argument("triple", help='"x,y,z" with complex literals such as 2.5-1i')
    s.add_argument("--budget", type=int, default=100_000)
    s.set_defaults(func=_kleinian_bq)
    s = sub.add_parser("trace", help="trace of a slope")
    s.add_argument("triple")
    s.add_argument("slope")
    s.set_defaults(func=_kleinian_trace)
    return _main(p, argv)


# --- laminarium ---------------------------------------------------------------

def _analyze(a):
    result = analyzer.analyze(load_family(a.file), samples=a.samples)
    sys.stdout.write(analyzer.report(result))
    if a.emit_dot:
        with open(a.emit_dot, "w", encoding="utf-8") as fh:
            fh.write(analyzer.report_dot(result))
    return analyzer.exit_code(result.verdict)


def _verdicts(a):
    sys.stdout.write(analyzer.structural_report(load_record(a.record)))
    return OK


def laminarium_main(argv=None) -> int:
    p, sub = _parser("laminarium", "Convergence and divergence checks for quasi-Fuchsian sequences.")
    s = sub.add_parser("analyze", help="analyze a sequence-family descriptor")
    s.add_argument("file")
    s.add_argument("--emit-dot")
    s.add_argument("--samples", type=int, default=analyzer.DEFAULT_SAMPLES)
    s.set_defaults(func=_analyze)
    s = sub.add_parser("verdicts", help="structural conclusions for an end-invariant record")
    s.add_argument("record")
    s.set_defaults(func=_verdicts)
    return _main(p, argv)


if __name__ == "__main__":
    sys.exit(laminarium_main())
