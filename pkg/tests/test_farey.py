import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_slope, slopes
from oracles import bfs_all, box_adjacency
from laminarium.curves import GOLDEN, INF, ZERO, Irrational, Rational, Slope, apply, twist
from laminarium.errors import BoundExceeded, InsufficientData
from laminarium.farey import (
    GeodesicPath,
    GeodesicRay,
    adjacent,
    annular_projection,
    annulus_distance,
    converges_at_infinity,
    distance,
    distance_bfs,
    geodesic,
    is_geodesic,
    neighbors_in_box,
    pivot_sequence,
    slopes_in_box,
    transversal_for,
)

BOX = 12
ADJ = box_adjacency(20)


def _s(t):
    return Slope(*t)


def test_distance_examples():
    assert distance(INF, ZERO) == 1
    assert distance(INF, Slope(1, 2)) == 2
    assert distance(INF, INF) == 0


def test_distance_to_thirteen_eighths_matches_wide_bfs():
    adj = box_adjacency(64)
    assert distance(ZERO, Slope(13, 8)) == bfs_all(adj, (0, 1))[(13, 8)]


def test_distance_bfs_examples():
    assert distance_bfs(INF, ZERO, 30) == 1
    assert distance_bfs(INF, Slope(5, 8), 30) == distance(INF, Slope(5, 8))
    with pytest.raises(BoundExceeded):
        distance_bfs(INF, Slope(1, 2), 0)


def test_box_neighbours_match_brute_force():
    adj = box_adjacency(BOX)
    for s in slopes_in_box(BOX):
        got = {(w.p, w.q) for w in neighbors_in_box(s, BOX)}
        assert got == set(adj[(s.p, s.q)])


def test_distance_agrees_with_oracle_on_small_box():
    adj = box_adjacency(BOX)
    verts = list(adj)
    for u in verts:
        d = bfs_all(adj, u)
        for v in verts:
            assert distance(_s(u), _s(v)) == d[v]


@given(slopes(30), slopes(30), slopes(30))
def test_metric_axioms(a, b, c):
    assert distance(a, b) == distance(b, a)
    assert distance(a, c) <= distance(a, b) + distance(b, c)
    assert (distance(a, b) == 0) == (a == b)


@given(slopes(60), slopes(60))
def test_geodesic_shape(u, v):
    g = geodesic(u, v)
    assert g.first == u and g.last == v
    assert len(g) == distance(u, v)
    assert all(adjacent(a, b) for a, b in zip(g.vertices, g.vertices[1:]))
    assert is_geodesic(g.vertices)


def _lex_least_geodesic(u, v):
    du, dv = bfs_all(ADJ, u), bfs_all(ADJ, v)
    path = [u]
    while path[-1] != v:
        x = path[-1]
        options = [w for w in ADJ[x] if du[w] == du[x] + 1 and dv[w] == dv[x] - 1]
        path.append(min(options, key=lambda w: _s(w).key()))
    return [_s(w) for w in path]


@settings(max_examples=150)
@given(slopes(BOX))
def test_geodesic_is_lexicographically_least(v):
    # from 1/0 and 0/1 every geodesic stays inside the oracle box
    for start in (INF, ZERO):
        if v == start:
            continue
        expected = _lex_least_geodesic((start.p, start.q), (v.p, v.q))
        assert list(geodesic(start, v).vertices) == expected


def test_geodesic_examples():
    assert geodesic(INF, ZERO).vertices == (INF, ZERO)
    assert geodesic(INF, Slope(1, 2)).vertices == tuple(_lex_least_geodesic((1, 0), (1, 2)))
    assert len(geodesic(ZERO, Slope(8, 13))) == distance(ZERO, Slope(8, 13))


def test_annular_projection_examples():
    assert annular_projection(INF, Slope(7, 2)) == 3
    assert annular_projection(INF, INF) is None
    assert annular_projection(INF, Slope(-1, 3)) == -1


@settings(max_examples=200)
@given(slopes(25), slopes(25), st.integers(-50, 50))
def test_annular_projection_equivariance(core, u, n):
    k = annular_projection(core, u)
    if k is None:
        return
    assert annular_projection(core, apply(twist(core, n), u)) == k + n


@given(slopes(25), st.integers(-30, 30))
def test_transversal_round_trip(core, k):
    t = transversal_for(core, k)
    assert adjacent(core, t)
    assert annular_projection(core, t) == k


def test_annulus_distance_convention():
    assert annulus_distance(3, 3) == 0
    assert annulus_distance(-2, 3) == 6


def test_pivot_sequence_examples():
    assert pivot_sequence(INF, Rational(ZERO)) == [INF, ZERO]
    golden = pivot_sequence(INF, GOLDEN, max_terms=6)
    assert golden == [INF, Slope(1, 1), Slope(2, 1), Slope(3, 2), Slope(5, 3), Slope(8, 5), Slope(13, 8)]
    fives = pivot_sequence(INF, Rational(Slope(5, 8)))
    assert fives == [INF, ZERO, Slope(1, 1), Slope(1, 2), Slope(2, 3), Slope(5, 8)]


@given(slopes(40), slopes(40))
def test_pivot_neighbours_are_adjacent(u, v):
    if u == v:
        return
    seq = pivot_sequence(u, Rational(v))
    assert seq[0] == u and seq[-1] == v
    assert all(adjacent(a, b) for a, b in zip(seq, seq[1:]))


def test_ray_prefixes_are_stable_geodesics():
    ray = GeodesicRay(INF, GOLDEN)
    p5, p10 = ray.prefix(5), ray.prefix(10)
    assert p10.vertices[:6] == p5.vertices
    assert is_geodesic(p10.vertices)
    lam = Irrational((0, 2), (1, 3))
    ray2 = GeodesicRay(Slope(1, 2), lam)
    assert is_geodesic(ray2.prefix(12).vertices)


def test_converges_at_infinity():
    ray = GeodesicRay(INF, GOLDEN)
    paths = [ray.prefix(d) for d in (20, 30, 40, 50)]
    assert converges_at_infinity(paths) == GOLDEN
    constant = [geodesic(INF, Slope(5, 3))] * 4
    assert converges_at_infinity(constant) is None
    split = [geodesic(INF, Slope(5, 3)), geodesic(INF, Slope(-5, 3)), geodesic(INF, Slope(8, 5))]
    assert converges_at_infinity(split) is None
    with pytest.raises(InsufficientData):
        converges_at_infinity(paths[:2])


def test_random_distances_match_bounded_bfs():
    rng = random.Random(3)
    for _ in range(200):
        u, v = random_slope(rng, 20), random_slope(rng, 20)
        assert distance(u, v) == distance_bfs(u, v, 20)


def test_geodesic_path_reversal():
    g = geodesic(INF, Slope(3, 5))
    assert g.reversed().vertices == tuple(reversed(g.vertices))
    assert isinstance(g.reversed(), GeodesicPath)
