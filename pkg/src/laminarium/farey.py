"""The Farey graph: exact distances, canonical geodesics, pivots, projections.

Every geodesic between two slopes lies in the ladder of Farey triangles
crossed by the hyperbolic geodesic joining them.  After moving the source
to 1/0 the ladder is read off the continued fraction [a0; a1, ..., an] of
the target: consecutive convergents are adjacent, and the fan pivoting at
c_k joins c_{k-1} to c_{k+1} in a_{k+1} steps.  Distances are a shortest
path computation on that chain, so they cost O(n) after a Euclid run.
"""
from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

from . import contfrac
from .curves import (
    Irrational,
    Lamination,
    MappingClass,
    Rational,
    Slope,
    apply,
    normalizer,
)
from .errors import BoundExceeded, InsufficientData, PrecisionExhausted

AnnulusVertex = int


def annulus_distance(a: AnnulusVertex, b: AnnulusVertex) -> int:
    return 0 if a == b else 1 + abs(a - b)


def adjacent(u: Slope, v: Slope) -> bool:
    return abs(u.p * v.q - u.q * v.p) == 1


@dataclass(frozen=True)
class GeodesicPath:
    vertices: tuple
    support: object = "S"

    def __len__(self):
        """Number of edges."""
        return len(self.vertices) - 1

    @property
    def first(self):
        return self.vertices[0]

    @property
    def last(self):
        return self.vertices[-1]

    def reversed(self) -> "GeodesicPath":
        return GeodesicPath(tuple(reversed(self.vertices)), self.support)

    def __str__(self):
        return " ".join(map(str, self.vertices))


# --- ladder machinery ---------------------------------------------------------

class _Ladder:
    """Convergent chain from 1/0 toward a target, in normalized coordinates.

    Node i stands for the convergent c_{i-1}; node 0 is 1/0.  Edge i -> i+1
    costs 1, edge i -> i+2 costs a_{i+1} (a walk around the fan at c_i).
    """

    def __init__(self, terms: Iterable[int]):
        self._it = iter(terms)
        self.terms: list[int] = []
        self.conv: list[tuple[int, int]] = [(1, 0)]
        self.dist: list[int] = [0]
        self.exhausted = False

    def extend(self, n_nodes: int) -> bool:
        while len(self.conv) < n_nodes and not self.exhausted:
            try:
                a = next(self._it)
            except StopIteration:
                self.exhausted = True
                break
            self.terms.append(a)
            k = len(self.terms) - 1
            if k == 0:
                self.conv.append((a, 1))
                self.dist.append(1)
            else:
                (p1, q1), (p2, q2) = self.conv[-1], self.conv[-2]
                self.conv.append((a * p1 + p2, a * q1 + q2))
                self.dist.append(min(self.dist[-1] + 1, self.dist[-2] + a))
        return len(self.conv) >= n_nodes

    def skip_cost(self, i: int) -> int:
        return self.terms[i + 1]

    def fan(self, i: int) -> list[tuple[int, int]]:
        """Vertices strictly inside the walk from node i to node i+2."""
        (p0, q0), (p1, q1) = self.conv[i], self.conv[i + 1]
        return [(p0 + j * p1, q0 + j * q1) for j in range(1, self.terms[i + 1])]


def _frame(u: Slope) -> tuple[MappingClass, MappingClass]:
    g = normalizer(u)
    return g, g.inverse()


def _to_slope(g: MappingClass, vec: tuple[int, int]) -> Slope:
    return apply(g, Slope.of(*vec))


def _finite_ladder(u: Slope, v: Slope) -> tuple[MappingClass, _Ladder]:
    g, ginv = _frame(u)
    x = apply(ginv, v)
    lad = _Ladder(contfrac.expand(x.p, x.q) if x.q else [])
    lad.extend(10**9)
    return g, lad


def distance(u: Slope, v: Slope) -> int:
    """Exact Farey-graph distance."""
    if u == v:
        return 0
    _, lad = _finite_ladder(u, v)
    return lad.dist[-1]


def geodesic(u: Slope, v: Slope) -> GeodesicPath:
    """Lexicographically least geodesic from u to v under the slope ordering."""
    if u == v:
        return GeodesicPath((u,))
    g, lad = _finite_ladder(u, v)
    last = len(lad.conv) - 1
    total = lad.dist[last]
    togo = [0] * (last + 1)
    for i in range(last - 1, -1, -1):
        best = togo[i + 1] + 1
        if i + 2 <= last:
            best = min(best, togo[i + 2] + lad.skip_cost(i))
        togo[i] = best
    path = [u]
    i = 0
    while i < last:
        options = []
        if lad.dist[i] + 1 + togo[i + 1] == total:
            options.append((_to_slope(g, lad.conv[i + 1]), i + 1, []))
        if i + 2 <= last and lad.dist[i] + lad.skip_cost(i) + togo[i + 2] == total:
            walk = [_to_slope(g, w) for w in lad.fan(i)] + [_to_slope(g, lad.conv[i + 2])]
            options.append((walk[0], i + 2, walk[1:]))
        first, i, rest = min(options, key=lambda o: o[0].key())
        path.append(first)
        path.extend(rest)
    return GeodesicPath(tuple(path))


def is_geodesic(path: Sequence[Slope]) -> bool:
    """Check the tightness distance law d(v_i, v_j) = |j - i| pairwise."""
    n = len(path)
    return all(distance(path[i], path[j]) == j - i for i in range(n) for j in range(i, n))


# --- bounded BFS oracle -------------------------------------------------------

def slopes_in_box(bound: int) -> list[Slope]:
    out = []
    for q in range(0, bound + 1):
        for p in range(-bound, bound + 1):
            if math.gcd(p, q) == 1 and (q > 0 or p == 1):
                out.append(Slope(p, q))
    return out


def _in_box(s: Slope, bound: int) -> bool:
    return abs(s.p) <= bound and s.q <= bound


def neighbors_in_box(s: Slope, bound: int) -> list[Slope]:
    """All Farey neighbours of s with |p|, q <= bound."""
    if s.q == 0:
        return [Slope(n, 1) for n in range(-bound, bound + 1)]
    p, q = s.p, s.q
    t0 = 0 if q == 1 else pow(p, -1, q)
    r0 = (p * t0 - 1) // q
    found = set()
    lo = (-bound - t0) // q - 1
    hi = (bound - t0) // q + 1
    for k in range(lo, hi + 1):
        r, t = r0 + k * p, t0 + k * q
        if r == 0 and t == 0:
            continue
        w = Slope.of(r, t)
        if _in_box(w, bound):
            found.add(w)
    return sorted(found, key=Slope.key)


@lru_cache(maxsize=8)
def _box_graph(bound: int) -> dict[Slope, tuple[Slope, ...]]:
    return {s: tuple(neighbors_in_box(s, bound)) for s in slopes_in_box(bound)}


def bfs_distances(source: Slope, bound: int) -> dict[Slope, int]:
    graph = _box_graph(bound)
    if source not in graph:
        raise BoundExceeded(f"{source} lies outside the box of size {bound}")
    dist = {source: 0}
    queue = deque([source])
    while queue:
        s = queue.popleft()
        for w in graph[s]:
            if w not in dist:
                dist[w] = dist[s] + 1
                queue.append(w)
    return dist


def distance_bfs(u: Slope, v: Slope, bound: int) -> int:
    """Breadth-first search restricted to slopes with |p|, q <= bound."""
    if not (_in_box(u, bound) and _in_box(v, bound)):
        raise BoundExceeded(f"{u} or {v} exceeds the cap {bound}")
    dist = bfs_distances(u, bound)
    if v not in dist:
        raise BoundExceeded(f"{v} unreachable from {u} within cap {bound}")
    return dist[v]


# --- pivots, rays and convergence at infinity ---------------------------------

def _lamination_terms(ginv: MappingClass, target: Irrational) -> Iterator[int]:
    (a, b), (c, d) = ginv.matrix
    return contfrac.homographic(a, b, c, d, target.terms())


def pivot_sequence(u: Slope, target: Lamination, max_terms: int = 24) -> list[Slope]:
    """Convergents from u toward target, u first; consecutive entries are adjacent.

    Rational targets give the full finite list.  Irrational targets give
    ``max_terms`` pivots after u, or raise PrecisionExhausted when a
    truncated stream cannot supply them.
    """
    g, ginv = _frame(u)
    if isinstance(target, Rational):
        if target.slope == u:
            raise ValueError("target equals the starting slope")
        x = apply(ginv, target.slope)
        terms: Iterable[int] = contfrac.expand(x.p, x.q)
        limit = None
    elif isinstance(target, Irrational):
        terms = _lamination_terms(ginv, target)
        limit = max_terms
    else:
        raise TypeError("pivot sequences need a rational or irrational target")
    out = [u]
    for k, vec in enumerate(contfrac.convergents(terms)):
        if limit is not None and k >= limit:
            break
        out.append(_to_slope(g, vec))
    return out


class GeodesicRay:
    """Infinite geodesic from a slope toward an irrational lamination.

    Built lazily on the convergent chain.  A step is taken only if it stays
    on a geodesic to the chain far ahead (``lookahead`` nodes), so every
    prefix handed out is final.  Prefixes are memoized under a lock.
    """

    def __init__(self, start: Slope, target: Irrational, lookahead: Optional[int] = None):
        if not isinstance(target, Irrational):
            raise TypeError("rays need an irrational target")
        self.start = start
        self.target = target
        self._g, ginv = _frame(start)
        self._ladder = _Ladder(_lamination_terms(ginv, target))
        if lookahead is None:
            lookahead = 4 * (len(target.head) + len(target.period)) + 16
        self.lookahead = lookahead
        self._vertices = [start]
        self._node = 0
        self._lock = threading.Lock()

    def _on_geodesic_ahead(self, i: int, cost: int) -> bool:
        lad = self._ladder
        horizon = i + self.lookahead
        if not lad.extend(horizon + 2):
            if lad.exhausted and not self.target.exact:
                raise PrecisionExhausted("stream too short to fix the next ray step")
        horizon = min(horizon, len(lad.conv) - 2)
        # shortest distances from node i with the given cost
        best = {i: cost}
        for j in range(i, horizon + 2):
            if j not in best:
                continue
            for k, w in ((j + 1, 1), (j + 2, lad.skip_cost(j) if j + 2 < len(lad.conv) else None)):
                if w is None or k >= len(lad.conv):
                    continue
                c = best[j] + w
                if c < best.get(k, 1 << 62):
                    best[k] = c
        return any(best.get(h) == lad.dist[h] for h in (horizon, horizon + 1) if h < len(lad.dist))

    def _step(self):
        lad = self._ladder
        i = self._node
        try:
            lad.extend(i + 3)
        except PrecisionExhausted:
            raise
        options = []
        if lad.dist[i] + 1 == lad.dist[i + 1] and self._on_geodesic_ahead(i + 1, lad.dist[i] + 1):
            options.append((_to_slope(self._g, lad.conv[i + 1]), i + 1, []))
        cost = lad.dist[i] + lad.skip_cost(i)
        if cost == lad.dist[i + 2] and self._on_geodesic_ahead(i + 2, cost):
            walk = [_to_slope(self._g, w) for w in lad.fan(i)] + [_to_slope(self._g, lad.conv[i + 2])]
            options.append((walk[0], i + 2, walk[1:]))
        if not options:
            raise PrecisionExhausted("no geodesic continuation found within the lookahead")
        first, self._node, rest = min(options, key=lambda o: o[0].key())
        self._vertices.append(first)
        self._vertices.extend(rest)

    def prefix(self, depth: int) -> GeodesicPath:
        """The first ``depth`` edges of the ray."""
        with self._lock:
            while len(self._vertices) <= depth:
                self._step()
            return GeodesicPath(tuple(self._vertices[: depth + 1]))


def annular_projection(core: Slope, u: Slope) -> Optional[AnnulusVertex]:
    """Twist class of u about core, or None when u does not cross core."""
    if core.p * u.q - core.q * u.p == 0:
        return None
    x = apply(normalizer(core).inverse(), u)
    return x.p // x.q


def transversal_for(core: Slope, twist_class: AnnulusVertex) -> Slope:
    """The slope meeting core once whose projection to core is twist_class."""
    return apply(normalizer(core), Slope(twist_class, 1))


def converges_at_infinity(paths: Sequence[GeodesicPath], window: int = 10) -> Optional[Irrational]:
    """Limit lamination of a family of paths with common prefixes of unbounded length."""
    if len(paths) < 3:
        raise InsufficientData("need at least three paths")
    start = paths[0].first
    if any(p.first != start for p in paths):
        raise ValueError("paths must share their first vertex")
    common = []
    for a, b in zip(paths, paths[1:]):
        k = 0
        while k < min(len(a.vertices), len(b.vertices)) and a.vertices[k] == b.vertices[k]:
            k += 1
        common.append(k)
    tail = common[-3:] if len(common) >= 3 else common
    growing = all(x <= y for x, y in zip(tail, tail[1:])) and tail[-1] > tail[0]
    if not growing:
        return None
    if tail[-1] < window:
        raise InsufficientData(f"stable prefix of {tail[-1]} steps is shorter than {window}")
    _, ginv = _frame(start)
    expansions = []
    for path in paths[-3:]:
        x = apply(ginv, path.last)
        if x.q == 0:
            return None
        expansions.append(contfrac.expand(x.p, x.q))
    head = []
    for terms in zip(*expansions):
        if len(set(terms)) != 1:
            break
        head.append(terms[0])
    head = head[:-1]
    if not head:
        return None
    found = contfrac.detect_period(head)
    if found:
        return Irrational(*found)
    return Irrational(tuple(head))
