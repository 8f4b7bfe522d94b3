"""Markings, hierarchies, slices and resolutions on the once-punctured torus.

The only proper essential domains of S(1,1) are annuli, so a hierarchy is
a main Farey geodesic together with one annular geodesic per vertex.  The
annular geodesic at v_k runs between the twist classes of its neighbours
v_{k-1} and v_{k+1} about v_k (transversals of I and T at the ends).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Union

from .curves import Irrational, Lamination, Slope, intersection_number
from .errors import NonFinite
from .farey import (
    GeodesicPath,
    GeodesicRay,
    annular_projection,
    distance,
    geodesic,
    transversal_for,
)

MAIN = "main"


@dataclass(frozen=True)
class Marking:
    base: Slope
    transversal: Optional[Slope] = None

    @property
    def complete(self) -> bool:
        return self.transversal is not None

    @property
    def clean(self) -> bool:
        return self.complete and intersection_number(self.base, self.transversal) == 1

    @classmethod
    def parse(cls, text: str) -> "Marking":
        base, _, t = text.partition(";")
        t = t.strip()
        return cls(Slope.parse(base), None if t in ("", "?") else Slope.parse(t))

    def __str__(self):
        return f"{self.base};{self.transversal if self.transversal else '?'}"


@dataclass(frozen=True)
class AnnularGeodesic:
    """Integer interval [start, end] in the annulus complex of ``core``."""

    core: Slope
    index: int
    start: int
    end: int

    @property
    def gid(self) -> str:
        return f"A{self.index}"

    @property
    def signed_length(self) -> int:
        return self.end - self.start

    def __len__(self) -> int:
        return abs(self.end - self.start)

    @property
    def vertices(self) -> tuple[int, ...]:
        step = 1 if self.end >= self.start else -1
        return tuple(range(self.start, self.end + step, step))


@dataclass(frozen=True)
class Subordinate:
    """A non-main geodesic with its backward and forward subordinacy records."""

    path: GeodesicPath
    gid: str
    back: tuple[str, int]
    forward: tuple[str, int]


@dataclass
class Hierarchy:
    main: GeodesicPath
    annular: dict[Slope, AnnularGeodesic]
    I: Union[Marking, Lamination]
    T: Union[Marking, Lamination]
    generalized: bool = False
    subordinacy: dict[str, tuple[tuple[str, int], tuple[str, int]]] = field(default_factory=dict)
    initial_simplex: tuple[Slope, ...] = ()
    subordinates: list[Subordinate] = field(default_factory=list)
    truncated: bool = False

    def __post_init__(self):
        if not self.initial_simplex:
            self.initial_simplex = (self.main.first,)

    @property
    def length(self) -> int:
        return len(self.main)

    def annular_at(self, k: int) -> Optional[AnnularGeodesic]:
        return self.annular.get(self.main.vertices[k])

    @property
    def geodesic_ids(self) -> list[str]:
        return [MAIN] + [a.gid for a in self.annular.values()] + [s.gid for s in self.subordinates]

    def total_annular_length(self) -> int:
        return sum(len(a) for a in self.annular.values())


def _resolve_transversal(base: Slope, given: Optional[Slope], neighbour: Optional[Slope]) -> int:
    if given is not None:
        proj = annular_projection(base, given)
        if proj is None:
            raise ValueError(f"transversal {given} does not cross base {base}")
        return proj
    if neighbour is not None:
        return annular_projection(base, neighbour)
    return 0


def hierarchy_along(main: GeodesicPath, I: Marking, T: Marking, generalized: bool = False) -> Hierarchy:
    """Attach annular geodesics and subordinacy to a given main geodesic."""
    vs = main.vertices
    n = len(vs)
    annular: dict[Slope, AnnularGeodesic] = {}
    sub: dict[str, tuple[tuple[str, int], tuple[str, int]]] = {}
    for k, v in enumerate(vs):
        prev = vs[k - 1] if k > 0 else None
        nxt = vs[k + 1] if k + 1 < n else None
        if k == 0:
            start = _resolve_transversal(v, I.transversal, nxt)
        else:
            start = annular_projection(v, prev)
        if k == n - 1:
            end = _resolve_transversal(v, T.transversal, prev)
        else:
            end = annular_projection(v, nxt)
        a = AnnularGeodesic(v, k, start, end)
        annular[v] = a
        sub[a.gid] = ((MAIN, k), (MAIN, k))
    return Hierarchy(main, annular, I, T, generalized=generalized, subordinacy=sub)


def build_hierarchy(I: Marking, T: Marking) -> Hierarchy:
    """Main geodesic between the bases plus an annular geodesic at every vertex.

    Equal bases give a generalized hierarchy whose main geodesic has length 0
    and whose single annular geodesic joins the two transversals.
    """
    if I.base == T.base:
        return hierarchy_along(GeodesicPath((I.base,)), I, T, generalized=True)
    return hierarchy_along(geodesic(I.base, T.base), I, T)


class RayHierarchy:
    """Hierarchy from a marking toward an irrational lamination, built lazily."""

    def __init__(self, I: Marking, lam: Irrational):
        self.I = I
        self.T = lam
        self.ray = GeodesicRay(I.base, lam)
        self._lock = threading.Lock()
        self._cache: dict[int, Hierarchy] = {}

    def prefix(self, depth: int) -> GeodesicPath:
        return self.ray.prefix(depth)

    def truncate(self, depth: int) -> Hierarchy:
        """Finite hierarchy on the first ``depth`` edges of the ray."""
        with self._lock:
            if depth not in self._cache:
                path = self.ray.prefix(depth + 1)
                head = GeodesicPath(path.vertices[: depth + 1])
                T = Marking(path.vertices[depth], path.vertices[depth + 1])
                h = hierarchy_along(head, self.I, T)
                h.truncated = True
                self._cache[depth] = h
            return self._cache[depth]


def build_hierarchy_to_lamination(I: Marking, lam: Lamination) -> RayHierarchy:
    if not isinstance(lam, Irrational):
        raise ValueError("build_hierarchy_to_lamination needs an irrational lamination; use build_hierarchy")
    return RayHierarchy(I, lam)


# --- axioms -------------------------------------------------------------------

@dataclass
class AxiomReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def _check_tight(path: GeodesicPath) -> Optional[str]:
    vs = path.vertices
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            if distance(vs[i], vs[j]) != j - i:
                return f"d({vs[i]}, {vs[j]}) != {j - i}"
    return None


def verify_axioms(h: Union[Hierarchy, RayHierarchy]) -> AxiomReport:
    """Check the main-geodesic, subordinacy and completeness conditions."""
    rep = AxiomReport()
    if isinstance(h, RayHierarchy):
        rep.violations.append("infinite hierarchy: truncate before verifying")
        return rep
    rivals = [s.gid for s in h.subordinates if s.path.support == h.main.support]
    if rivals:
        rep.violations.append(f"geodesics {rivals} share the main support {h.main.support}")
    bad = _check_tight(h.main)
    if bad:
        rep.violations.append(f"main geodesic not tight: {bad}")
    vs = h.main.vertices
    index = {v: k for k, v in enumerate(vs)}
    for core, a in h.annular.items():
        if core not in index:
            rep.violations.append(f"annular geodesic about {core} has no pivot on the main geodesic")
            continue
        rec = h.subordinacy.get(a.gid)
        if rec is None:
            rep.violations.append(f"{a.gid} about {core} lacks subordinacy records")
        elif rec != ((MAIN, index[core]), (MAIN, index[core])):
            rep.violations.append(f"{a.gid} subordinacy {rec} does not point at its pivot")
        k = index[core]
        if k > 0 and a.start != annular_projection(core, vs[k - 1]):
            rep.violations.append(f"{a.gid} does not start at the projection of its predecessor")
        if k + 1 < len(vs) and a.end != annular_projection(core, vs[k + 1]):
            rep.violations.append(f"{a.gid} does not end at the projection of its successor")
    for s in h.subordinates:
        if s.back is None or s.forward is None:
            rep.violations.append(f"{s.gid} lacks subordinacy records")
        bad = _check_tight(s.path)
        if bad:
            rep.violations.append(f"{s.gid} not tight: {bad}")
    if not h.generalized:
        missing = [str(v) for v in vs if v not in h.annular]
        if missing:
            rep.violations.append("completeness: no annular geodesic at " + ", ".join(missing))
        if len(h.initial_simplex) != 1:
            rep.violations.append("first simplex is not a vertex")
        if isinstance(h.I, Marking) and h.I.base != h.main.first:
            rep.violations.append("main geodesic does not start at base(I)")
        if isinstance(h.T, Marking) and h.T.base != h.main.last:
            rep.violations.append("main geodesic does not end at base(T)")
    elif h.main.first not in h.initial_simplex:
        rep.violations.append("first vertex is not in the initial simplex")
    return rep


# --- slices and resolutions ---------------------------------------------------

@dataclass(frozen=True)
class Slice:
    pairs: frozenset

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "Slice":
        return cls(frozenset(pairs))

    def position(self, gid: str) -> Optional[int]:
        for g, i in self.pairs:
            if g == gid:
                return i
        return None

    def __str__(self):
        return "{" + ", ".join(f"({g},{i})" for g, i in sorted(self.pairs)) + "}"


@dataclass(frozen=True)
class ElementaryMove:
    kind: str  # "twist" or "advance"
    gid: str
    src: int
    dst: int


@dataclass
class Resolution:
    hierarchy: Hierarchy
    slices: list[Slice]
    moves: list[ElementaryMove]

    def __len__(self) -> int:
        return len(self.moves)


def _pair_for(h: Hierarchy, k: int, j: int) -> Slice:
    a = h.annular_at(k)
    if a is None:
        return Slice.of((MAIN, k))
    return Slice.of((MAIN, k), (a.gid, j))


def _state(h: Hierarchy, s: Slice) -> tuple[int, int]:
    k = s.position(MAIN)
    if k is None:
        raise ValueError("slice has no main pair")
    a = h.annular_at(k)
    j = s.position(a.gid) if a else 0
    return k, (j or 0)


def initial_slice(h: Hierarchy) -> Slice:
    if isinstance(h, RayHierarchy):
        raise NonFinite("truncate the hierarchy first")
    return _pair_for(h, 0, 0)


def _next(h: Hierarchy, s: Slice) -> Optional[tuple[Slice, ElementaryMove]]:
    k, j = _state(h, s)
    a = h.annular_at(k)
    if a is not None and j < len(a):
        return _pair_for(h, k, j + 1), ElementaryMove("twist", a.gid, j, j + 1)
    if k < h.length:
        return _pair_for(h, k + 1, 0), ElementaryMove("advance", MAIN, k, k + 1)
    return None


def advance(h: Hierarchy, s: Slice) -> Optional[Slice]:
    """One elementary forward move; annular pairs move before the main pair."""
    if isinstance(h, RayHierarchy):
        raise NonFinite("truncate the hierarchy first")
    step = _next(h, s)
    return step[0] if step else None


def resolve(h: Hierarchy) -> Resolution:
    if isinstance(h, RayHierarchy):
        raise NonFinite("cannot resolve an infinite hierarchy; truncate it")
    s = initial_slice(h)
    slices, moves = [s], []
    while True:
        step = _next(h, s)
        if step is None:
            break
        s, mv = step
        slices.append(s)
        moves.append(mv)
    return Resolution(h, slices, moves)


def marking_at(h: Hierarchy, s: Slice) -> Marking:
    k, j = _state(h, s)
    base = h.main.vertices[k]
    a = h.annular_at(k)
    if a is None:
        return Marking(base, None)
    return Marking(base, transversal_for(base, a.vertices[j]))


def marking_sequence(r: Resolution) -> list[Marking]:
    """One clean marking per slice of the resolution."""
    return [marking_at(r.hierarchy, s) for s in r.slices]


def differs_by_one_move(a: Slice, b: Slice) -> bool:
    """True when b is obtained from a by one elementary forward move."""
    gone, new = a.pairs - b.pairs, b.pairs - a.pairs
    moved = {g for g, _ in gone} & {g for g, _ in new}
    if len(moved) != 1:
        return False
    g = moved.pop()
    i0 = next(i for x, i in gone if x == g)
    i1 = next(i for x, i in new if x == g)
    if i1 != i0 + 1:
        return False
    if g != MAIN:
        return len(gone) == len(new) == 1
    # the main advance drops the finished annular pair and adds the fresh one
    return len(gone) <= 2 and len(new) <= 2 and all(i == 0 for x, i in new if x != MAIN)
