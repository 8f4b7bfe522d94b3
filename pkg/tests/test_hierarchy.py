import pytest
from hypothesis import given, settings

from conftest import markings
from laminarium.curves import GOLDEN, INF, ZERO, Rational, Slope, intersection_number
from laminarium.errors import NonFinite
from laminarium.farey import annular_projection, distance, geodesic
from laminarium.hierarchy import (
    MAIN,
    Hierarchy,
    Marking,
    Slice,
    advance,
    build_hierarchy,
    build_hierarchy_to_lamination,
    differs_by_one_move,
    initial_slice,
    marking_sequence,
    resolve,
    verify_axioms,
)


def test_marking_parse_and_clean():
    m = Marking.parse("1/0;0/1")
    assert m.base == INF and m.transversal == ZERO and m.clean
    assert not Marking.parse("2/5;?").complete
    assert str(Marking.parse("2/5; ?")) == "2/5;?"
    assert not Marking(INF, Slope(1, 2)).clean


def test_length_one_hierarchy():
    h = build_hierarchy(Marking(INF, ZERO), Marking(ZERO, INF))
    assert h.main.vertices == (INF, ZERO)
    assert set(h.annular) == {INF, ZERO}
    assert verify_axioms(h).ok
    r = resolve(h)
    assert len(r) == 1 + h.total_annular_length()


def test_hierarchy_to_two_fifths():
    h = build_hierarchy(Marking(INF, ZERO), Marking(Slope(2, 5)))
    assert h.main.vertices == geodesic(INF, Slope(2, 5)).vertices
    assert all(v in h.annular for v in h.main.vertices)
    assert verify_axioms(h).ok


def test_equal_bases_give_generalized_hierarchy():
    h = build_hierarchy(Marking(INF, ZERO), Marking(INF, Slope(3, 1)))
    assert h.generalized and h.length == 0
    assert len(h.annular) == 1 and len(h.annular[INF]) == 3
    r = resolve(h)
    assert len(r) == 3
    assert all(m.kind == "twist" for m in r.moves)
    seq = marking_sequence(r)
    assert len(seq) == 4
    assert {m.base for m in seq} == {INF}
    assert [annular_projection(INF, m.transversal) for m in seq] == [0, 1, 2, 3]
    assert verify_axioms(h).ok


def test_deleted_annular_geodesic_is_reported():
    h = build_hierarchy(Marking(INF, ZERO), Marking(Slope(3, 7), Slope(1, 2)))
    broken = Hierarchy(h.main, {k: v for k, v in h.annular.items() if k != h.main.vertices[1]}, h.I, h.T,
                       subordinacy=h.subordinacy)
    report = verify_axioms(broken)
    assert not report.ok
    assert any("completeness" in v for v in report.violations)


def test_generalized_flag_allows_non_vertex_first_simplex():
    h = build_hierarchy(Marking(INF, ZERO), Marking(INF, Slope(2, 1)))
    h.initial_simplex = (INF, ZERO)
    assert verify_axioms(h).ok
    h.generalized = False
    assert not verify_axioms(h).ok


@settings(max_examples=120, deadline=None)
@given(markings(), markings(40))
def test_axioms_and_resolution_bookkeeping(I, T):
    h = build_hierarchy(I, T)
    assert verify_axioms(h).ok
    vs = h.main.vertices
    assert all(distance(vs[i], vs[j]) == j - i for i in range(len(vs)) for j in range(i, len(vs)))
    r = resolve(h)
    assert len(r) == h.length + h.total_annular_length()
    assert all(differs_by_one_move(a, b) for a, b in zip(r.slices, r.slices[1:]))
    assert advance(h, r.slices[-1]) is None
    seq = marking_sequence(r)
    assert len(seq) == len(r.slices)
    assert all(m.clean for m in seq)
    assert seq[0].base == I.base and seq[-1].base == T.base
    assert seq[0] == I and seq[-1] == T


@settings(max_examples=60, deadline=None)
@given(markings(), markings(30))
def test_reversal_symmetry(I, T):
    fwd, back = build_hierarchy(I, T), build_hierarchy(T, I)
    assert back.length == fwd.length
    assert sorted(len(a) for a in back.annular.values()) == sorted(len(a) for a in fwd.annular.values())
    assert len(resolve(back)) == len(resolve(fwd))


@settings(max_examples=60, deadline=None)
@given(markings(), markings(30))
def test_marking_moves_are_elementary(I, T):
    seq = marking_sequence(resolve(build_hierarchy(I, T)))
    for a, b in zip(seq, seq[1:]):
        if a.base == b.base:
            assert abs(annular_projection(a.base, a.transversal) - annular_projection(a.base, b.transversal)) == 1
        else:
            assert b.base == a.transversal or intersection_number(a.base, b.base) == 1


def test_base_swap_happens_once_on_length_one_main():
    r = resolve(build_hierarchy(Marking(INF, Slope(2, 1)), Marking(ZERO, Slope(-3, 1))))
    bases = [m.base for m in marking_sequence(r)]
    swaps = sum(1 for a, b in zip(bases, bases[1:]) if a != b)
    assert swaps == 1


def test_single_slice_resolution():
    I = Marking(INF, ZERO)
    r = resolve(build_hierarchy(I, I))
    assert len(r) == 0
    assert marking_sequence(r) == [I]


def test_slices():
    h = build_hierarchy(Marking(INF, ZERO), Marking(Slope(1, 3), Slope(0, 1)))
    s0 = initial_slice(h)
    assert s0.position(MAIN) == 0
    s1 = advance(h, s0)
    assert differs_by_one_move(s0, s1)
    assert not differs_by_one_move(s0, s0)
    assert not differs_by_one_move(Slice.of((MAIN, 0)), Slice.of((MAIN, 2)))


def test_ray_hierarchy():
    ray = build_hierarchy_to_lamination(Marking(INF, ZERO), GOLDEN)
    h5, h10 = ray.truncate(5), ray.truncate(10)
    assert h10.main.vertices[:6] == h5.main.vertices
    assert verify_axioms(h10).ok
    assert not verify_axioms(ray).ok
    assert len(resolve(h10)) == h10.length + h10.total_annular_length()
    with pytest.raises(NonFinite):
        resolve(ray)
    with pytest.raises(NonFinite):
        initial_slice(ray)
    with pytest.raises(ValueError):
        build_hierarchy_to_lamination(Marking(INF, ZERO), Rational(Slope(1, 2)))
