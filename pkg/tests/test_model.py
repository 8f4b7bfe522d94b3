import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import markings, oracle_view, random_tube_config
from oracles import classify_oracle
from laminarium.affine import Affine, parse_affine
from laminarium.curves import INF, ZERO, Slope
from laminarium.errors import MalformedTubeUnion, NoPenetratingUnion, NonAffineExponents, UnknownVertex
from laminarium.hierarchy import Marking, build_hierarchy, verify_axioms
from laminarium.model import (
    Brick,
    Front,
    Side,
    TubeSimplex,
    TubeUnion,
    build_model,
    check_gap_conditions,
    classify_tube_vs_brick,
    diagram_dot,
    drilled,
    induced_range,
    limit_brick_diagram,
    model_dot,
    omega,
    parabolic_side,
    restrict_hierarchy_to_brick,
    restrict_tube_unions,
    solve_wrap,
)


def _union(spans, xi4=False, ray=None, hats=None):
    hats = hats or {}
    sims = []
    for j, (lo, hi) in enumerate(spans, 1):
        hlo, hhi = hats.get(j, (None, None))
        sims.append(TubeSimplex(j, F(lo), F(hi), None if hlo is None else F(hlo), None if hhi is None else F(hhi)))
    return TubeUnion("g", tuple(sims), xi4, ray)


B37 = Brick.span(F("0.3"), F("0.7"))


def test_contiguous_union_penetrates_in_case_a():
    u = _union([("0.2", "0.35"), ("0.35", "0.5"), ("0.5", "0.65"), ("0.65", "0.8")])
    c = classify_tube_vs_brick(u, B37)
    assert (c.family, c.case, c.witness) == ("Penetrates", "a", (2, 3))
    assert induced_range(u, c) == (1, 4)


def test_union_inside_is_totally_contained():
    u = _union([("0.35", "0.4"), ("0.45", "0.5"), ("0.55", "0.6")], xi4=True)
    c = classify_tube_vs_brick(u, B37)
    assert (c.family, c.case) == ("TotallyContained", "a**")


def test_last_tube_straddling_the_bottom_stops_inside():
    u = _union([("0.05", "0.1"), ("0.15", "0.2"), ("0.25", "0.4")], xi4=True)
    c = classify_tube_vs_brick(u, B37)
    assert (c.family, c.case, c.witness) == ("StopsInside", "c*", (3,))


def test_far_union_does_not_interact():
    u = _union([("0.0", "0.1"), ("0.15", "0.2")], xi4=True)
    assert classify_tube_vs_brick(u, B37).family == "NoInteraction"


def test_simply_degenerate_front_enables_case_d():
    u = _union([("0.1", "0.2"), ("0.4", "0.5"), ("0.6", "0.65")], xi4=True, ray="forward")
    sd = Brick.span(F("0.3"), F(1), upper_front=Front.SIMPLY_DEGENERATE)
    c = classify_tube_vs_brick(u, sd)
    assert (c.family, c.case, c.witness) == ("Penetrates", "d", (2,))


def test_malformed_unions_are_rejected():
    with pytest.raises(MalformedTubeUnion):
        classify_tube_vs_brick(_union([("0.2", "0.3"), ("0.3", "0.4")], xi4=True), B37)
    with pytest.raises(MalformedTubeUnion):
        classify_tube_vs_brick(_union([("0.2", "0.3"), ("0.35", "0.4")], xi4=False), B37)
    with pytest.raises(MalformedTubeUnion):
        classify_tube_vs_brick(_union([("0.4", "0.3")]), B37)
    with pytest.raises(MalformedTubeUnion):
        classify_tube_vs_brick(_union([("0.2", "0.3")], hats={1: ("0.25", None)}), B37)
    with pytest.raises(MalformedTubeUnion):
        classify_tube_vs_brick(TubeUnion("g", ()), B37)


@settings(max_examples=400, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_classifier_matches_inequality_oracle(seed):
    u, B = random_tube_config(random.Random(seed))
    got = classify_tube_vs_brick(u, B)
    tubes, b0, b1, kw = oracle_view(u, B)
    assert (got.family, got.case, got.witness) == classify_oracle(tubes, b0, b1, **kw)


def test_model_of_length_one_hierarchy():
    m = build_model(build_hierarchy(Marking(INF, ZERO), Marking(ZERO, INF)))
    assert len(m.blocks) == 1 and len(m.tubes) == 2
    assert check_gap_conditions(m) == []


def test_model_of_degenerate_hierarchy():
    m = build_model(build_hierarchy(Marking(INF, ZERO), Marking(INF, Slope(4, 1))))
    assert len(m.blocks) == 0 and len(m.tubes) == 1
    assert omega(m, INF) == complex(4, 1)


@settings(max_examples=40, deadline=None)
@given(markings(6), markings(20))
def test_model_levels_interleave(I, T):
    h = build_hierarchy(I, T)
    m = build_model(h)
    assert len(m.blocks) == h.length
    assert len(m.tubes) == h.length + 1
    assert check_gap_conditions(m) == []
    levels = []
    for v in m.order:
        levels += [m.tubes[v].lo, m.tubes[v].hi]
    assert levels == sorted(levels) and len(set(levels)) == len(levels)
    assert all(omega(m, v).imag > 0 for v in m.order)


def test_omega_formula():
    h = build_hierarchy(Marking(INF, ZERO), Marking(Slope(1, 3), Slope(0, 1)))
    m = build_model(h)
    inner = m.order[1:-1]
    assert inner
    for v in inner:
        w = omega(m, v)
        assert w.imag == 3
        assert w.real == h.annular[v].signed_length
    with pytest.raises(UnknownVertex):
        omega(m, Slope(7, 9))
    assert drilled(m, 0) == set(m.order)


def test_restriction_of_a_penetrating_union():
    u = _union([("0.2", "0.35"), ("0.35", "0.5"), ("0.5", "0.65"), ("0.65", "0.8")])
    r = restrict_tube_unions([u], B37)
    assert r.hierarchy.main.vertices == (1, 2, 3, 4)
    assert r.hierarchy.generalized


def test_restriction_requires_a_penetrating_first_union():
    inside = _union([("0.35", "0.4"), ("0.45", "0.5"), ("0.55", "0.6")], xi4=True)
    with pytest.raises(NoPenetratingUnion):
        restrict_tube_unions([inside], B37)
    far = _union([("0.0", "0.1")])
    assert restrict_tube_unions([far], B37).empty


def test_restriction_records_stopping_union_as_subordinate():
    main = _union([("0.2", "0.35"), ("0.35", "0.5"), ("0.5", "0.65"), ("0.65", "0.8")])
    stop = TubeUnion("h", (
        TubeSimplex("x", F("0.05"), F("0.1")),
        TubeSimplex("y", F("0.15"), F("0.2")),
        TubeSimplex("z", F("0.25"), F("0.4")),
    ))
    r = restrict_tube_unions([main, stop], B37)
    assert [s.gid for s in r.hierarchy.subordinates] == ["h"]


@settings(max_examples=30, deadline=None)
@given(markings(6), markings(20), st.fractions(0, 1), st.fractions(0, 1))
def test_restricted_hierarchies_pass_generalized_axioms(I, T, a, b):
    lo, hi = sorted((a, b))
    if lo == hi:
        return
    m = build_model(build_hierarchy(I, T))
    try:
        r = restrict_hierarchy_to_brick(m, Brick.span(lo, hi))
    except NoPenetratingUnion:
        return
    if not r.empty:
        assert verify_axioms(r.hierarchy).ok


def test_wrap_examples():
    assert solve_wrap(Affine(-1, 0), Affine(-2, 0)) == 1
    assert solve_wrap(Affine(0, 0), Affine(-1, 0)) == 0
    assert solve_wrap(Affine(-1, 0), Affine(-3, 1)) is None
    assert solve_wrap(Affine(0, 0), Affine(0, 0)) == "all"
    d = limit_brick_diagram([("c", Affine(-1, 0), Affine(-2, 0))])
    t = d.tori[0]
    assert (t.wrap, t.parabolic_side, t.locus_form) == (1, Side.LOWER, (1, 2))
    assert parabolic_side(0) is Side.UPPER and parabolic_side(-3) is Side.UPPER


@given(st.integers(-20, 20), st.integers(1, 9), st.integers(-20, 20))
def test_wrap_solution_is_unique_and_exact(a, k, c):
    # p = -k a i, q = -k (a+1) i solves (a+1) p = a q for exactly one integer a
    p, q = Affine(-k * a, 0), Affine(-k * (a + 1), 0)
    assert solve_wrap(p, q) == a
    assert parabolic_side(a) is (Side.UPPER if a <= 0 else Side.LOWER)
    for other in range(-25, 26):
        if other != a:
            assert (other + 1) * p.coeff != other * q.coeff
    shifted = solve_wrap(Affine(-k * a, c), Affine(-k * (a + 1), c))
    assert shifted == (a if c == 0 else None)


def test_affine_parsing():
    assert parse_affine("2*i-1") == Affine(2, -1)
    assert parse_affine("-i") == Affine(-1, 0)
    assert parse_affine("(i+1)*3") == Affine(3, 3)
    with pytest.raises(NonAffineExponents):
        parse_affine("i*i")


def test_dot_output():
    d = limit_brick_diagram([("c", Affine(-1, 0), Affine(-2, 0)), ("d", Affine(-1, 0), Affine(-3, 1))])
    dot = diagram_dot(d)
    assert dot.startswith("digraph wrapping {")
    assert "a = 1" in dot and "no wrap" in dot
    m = build_model(build_hierarchy(Marking(INF, ZERO), Marking(ZERO, INF)))
    assert model_dot(m).count("->") == len(m.blocks) + len(m.boundary_blocks) + len(m.tubes) - 1
