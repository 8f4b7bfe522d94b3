"""Combinatorial model manifolds: blocks, tubes, bricks and wrapping diagrams.

Levels live in [0, 1] as exact fractions.  A tube union is the ordered list
of solid tori realising one geodesic; in the gap style (domains with xi = 4)
consecutive tubes are separated by strict gaps, in the contiguous style they
share a level.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .affine import Affine
from .curves import Slope
from .errors import MalformedTubeUnion, NonFinite, NoPenetratingUnion, UnknownVertex
from .farey import GeodesicPath
from .hierarchy import MAIN, Hierarchy, Marking, RayHierarchy, Subordinate, resolve

Level = Union[Fraction, float]


@dataclass(frozen=True)
class Interval:
    lo: Level
    hi: Level
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi <= 1):
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")


class Front(enum.Enum):
    REAL = "real"
    GEOMETRICALLY_FINITE = "geometrically-finite"
    SIMPLY_DEGENERATE = "simply-degenerate"
    WILD = "wild"

    @property
    def ideal(self) -> bool:
        return self is not Front.REAL


@dataclass(frozen=True)
class Brick:
    domain: str
    J: Interval
    lower_front: Front = Front.REAL
    upper_front: Front = Front.REAL

    @property
    def lo(self) -> Level:
        return self.J.lo

    @property
    def hi(self) -> Level:
        return self.J.hi

    @classmethod
    def span(cls, lo, hi, domain: str = "S", **fronts) -> "Brick":
        return cls(domain, Interval(lo, hi), **fronts)


@dataclass(frozen=True)
class TubeSimplex:
    vertex: object
    lo: Level
    hi: Level
    hat_lo: Optional[Level] = None
    hat_hi: Optional[Level] = None

    @property
    def hlo(self) -> Level:
        return self.lo if self.hat_lo is None else self.hat_lo

    @property
    def hhi(self) -> Level:
        return self.hi if self.hat_hi is None else self.hat_hi


@dataclass(frozen=True)
class TubeUnion:
    geodesic_ref: str
    simplices: tuple[TubeSimplex, ...]
    xi4: bool = True
    ray: Optional[str] = None  # None, "forward" or "backward"
    domain: str = "S"

    def __post_init__(self):
        object.__setattr__(self, "simplices", tuple(self.simplices))

    def validate(self) -> None:
        if self.ray not in (None, "forward", "backward"):
            raise MalformedTubeUnion(f"unknown ray direction {self.ray!r}")
        if not self.simplices:
            raise MalformedTubeUnion("empty tube union")
        for j, v in enumerate(self.simplices, 1):
            if not v.lo < v.hi:
                raise MalformedTubeUnion(f"tube {j}: inf {v.lo} is not below sup {v.hi}")
            if v.hlo > v.lo or v.hhi < v.hi:
                raise MalformedTubeUnion(f"tube {j}: extended tube does not contain the tube")
        for j, (a, b) in enumerate(zip(self.simplices, self.simplices[1:]), 1):
            if self.xi4 and not b.lo > a.hi:
                raise MalformedTubeUnion(f"tubes {j},{j + 1}: gap style needs inf V_(j+1) > sup V_j")
            if not self.xi4 and b.lo != a.hi:
                raise MalformedTubeUnion(f"tubes {j},{j + 1}: contiguous style needs inf V_(j+1) = sup V_j")

    def __len__(self):
        return len(self.simplices)


@dataclass(frozen=True)
class Classification:
    family: str  # Penetrates, StopsInside, TotallyContained, NoInteraction
    case: Optional[str] = None
    witness: tuple[int, ...] = ()

    def __str__(self):
        if self.case is None:
            return self.family
        return f"{self.family}({self.case}) {list(self.witness)}"


NO_INTERACTION = Classification("NoInteraction")


class _View:
    """1-based access to tube levels against a brick."""

    def __init__(self, u: TubeUnion, B: Brick):
        self.v = u.simplices
        self.k = len(u.simplices)
        self.b0, self.b1 = B.lo, B.hi

    def lo(self, j):
        return self.v[j - 1].lo

    def hi(self, j):
        return self.v[j - 1].hi

    def hlo(self, j):
        return self.v[j - 1].hlo

    def hhi(self, j):
        return self.v[j - 1].hhi

    def meets(self, j):
        return self.lo(j) <= self.b1 and self.hi(j) >= self.b0

    def meets_int(self, j):
        return self.lo(j) < self.b1 and self.hi(j) > self.b0

    def any_meets(self, a, b):
        return any(self.meets(j) for j in range(a, b + 1))


def _penetrates(u: TubeUnion, B: Brick, w: _View) -> Optional[Classification]:
    k, b0, b1 = w.k, w.b0, w.b1
    for j0 in range(2, k):
        if not (b0 <= w.lo(j0) and w.hlo(j0 - 1) < b0):
            continue
        for j1 in range(j0, k):
            if w.hi(j1) > b1:
                break  # levels increase, no later j1 can fit
            if w.hhi(j1 + 1) > b1 and any(w.meets_int(j) for j in range(j0 - 1, j1 + 2)):
                return Classification("Penetrates", "a", (j0, j1))
    for j in range(1, k):
        if (
            w.meets(j) and w.meets(j + 1)
            and w.hlo(j) < b0 <= w.hi(j)
            and w.lo(j + 1) <= b1 < w.hhi(j + 1)
        ):
            return Classification("Penetrates", "b", (j, j + 1))
    for j in range(1, k + 1):
        if w.meets(j) and w.hlo(j) < b0 and w.hhi(j) > b1:
            return Classification("Penetrates", "c", (j,))
    if B.upper_front is Front.SIMPLY_DEGENERATE and u.ray == "forward":
        for j0 in range(2, k + 1):
            if w.hlo(j0 - 1) < b0 <= w.lo(j0) and w.any_meets(j0 - 1, k):
                return Classification("Penetrates", "d", (j0,))
    if B.lower_front is Front.SIMPLY_DEGENERATE and u.ray == "backward":
        for j1 in range(1, k):
            if w.hhi(j1 + 1) > b1 and b1 >= w.hi(j1) and w.any_meets(1, j1 + 1):
                return Classification("Penetrates", "e", (j1,))
    return None


def _stops_inside(u: TubeUnion, B: Brick, w: _View) -> Optional[Classification]:
    k, b0, b1 = w.k, w.b0, w.b1
    has_last = u.ray in (None, "backward")
    has_first = u.ray in (None, "forward")
    if has_last and w.hhi(k) <= b1:
        for j0 in range(2, k + 1):
            if w.lo(j0 - 1) < b0 <= w.lo(j0) and w.any_meets(j0 - 1, k):
                if k == 2 and not (w.meets(j0) and w.meets(k)):
                    continue
                return Classification("StopsInside", "a*", (j0, k))
    if has_first and w.hlo(1) >= b0:
        for j1 in range(1, k):
            if w.hi(j1) <= b1 < w.hi(j1 + 1) and w.any_meets(1, j1 + 1):
                if k == 2 and not (w.meets(1) and w.meets(2)):
                    continue
                return Classification("StopsInside", "b*", (1, j1))
    if has_last and w.meets(k) and w.lo(k) < b0 and w.hhi(k) <= b1:
        return Classification("StopsInside", "c*", (k,))
    if has_first and w.meets(1) and w.hlo(1) >= b0 and w.hi(1) > b1:
        return Classification("StopsInside", "d*", (1,))
    return None


def _contained(u: TubeUnion, B: Brick, w: _View) -> Optional[Classification]:
    k, b0, b1 = w.k, w.b0, w.b1
    if not w.any_meets(1, k):
        return None
    if u.ray is None:
        if b0 <= w.lo(1) and w.hi(k) <= b1 and (k != 2 or (w.meets(1) and w.meets(2))):
            return Classification("TotallyContained", "a**", (1, k))
    elif all(b0 <= w.lo(j) and w.hi(j) <= b1 for j in range(1, k + 1)):
        return Classification("TotallyContained", "b**", (1, k))
    return None


def classify_tube_vs_brick(u: TubeUnion, B: Brick) -> Classification:
    """Penetration, stopping inside, total containment, or no interaction."""
    u.validate()
    w = _View(u, B)
    for test in (_penetrates, _stops_inside, _contained):
        c = test(u, B, w)
        if c is not None:
            return c
    return NO_INTERACTION


def induced_range(u: TubeUnion, c: Classification) -> tuple[int, int]:
    """1-based index range of the tubes whose cores form the induced sequence."""
    k, w = len(u), c.witness
    return {
        "a": lambda: (w[0] - 1, w[1] + 1),
        "b": lambda: (w[0], w[1]),
        "c": lambda: (w[0], w[0]),
        "d": lambda: (w[0] - 1, k),
        "e": lambda: (1, w[0] + 1),
        "a*": lambda: (w[0] - 1, k),
        "b*": lambda: (1, w[1] + 1),
        "c*": lambda: (k, k),
        "d*": lambda: (1, 1),
        "a**": lambda: (1, k),
        "b**": lambda: (1, k),
    }[c.case]()


def induced_domain(u: TubeUnion, c: Classification, B: Brick) -> str:
    if c.case in ("b", "c") or (c.family != "Penetrates" and len(u) <= 2):
        return f"{u.domain}&{B.domain}"
    return u.domain


# --- model from a hierarchy ---------------------------------------------------

@dataclass
class BlockTubeModel:
    hierarchy: Hierarchy
    tubes: dict[Slope, TubeSimplex]
    order: list[Slope]
    blocks: list[Brick]
    boundary_blocks: list[Brick]

    def tube_union(self) -> TubeUnion:
        return TubeUnion(MAIN, tuple(self.tubes[v] for v in self.order), xi4=True)

    def adjacent_blocks(self, v: Slope) -> int:
        t = self.tubes[v]
        return sum(1 for b in self.blocks if b.hi == t.lo or b.lo == t.hi)


def build_model(h: Hierarchy) -> BlockTubeModel:
    """One block per main edge and one tube per vertex, levels from the resolution."""
    if isinstance(h, RayHierarchy):
        raise NonFinite("truncate the hierarchy before building a model")
    res = resolve(h)
    n = len(res.slices)
    unit = Fraction(1, 2 * n + 2)
    first: dict[int, int] = {}
    last: dict[int, int] = {}
    for idx, s in enumerate(res.slices):
        k = s.position(MAIN)
        first.setdefault(k, idx)
        last[k] = idx
    order = list(h.main.vertices)
    tubes = {}
    for k, v in enumerate(order):
        tubes[v] = TubeSimplex(v, (2 * first[k] + 1) * unit, (2 * last[k] + 2) * unit)
    blocks = [
        Brick.span(tubes[a].hi, tubes[b].lo) for a, b in zip(order, order[1:])
    ]
    boundary = [
        Brick.span(Fraction(0), tubes[order[0]].lo, lower_front=Front.GEOMETRICALLY_FINITE),
        Brick.span(tubes[order[-1]].hi, Fraction(1), upper_front=Front.GEOMETRICALLY_FINITE),
    ]
    return BlockTubeModel(h, tubes, order, blocks, boundary)


def omega(model: BlockTubeModel, v: Slope) -> complex:
    """Signed twist at v plus (1 + adjacent blocks) times i."""
    if v not in model.tubes:
        raise UnknownVertex(f"{v} is not a tube vertex")
    a = model.hierarchy.annular.get(v)
    re_part = a.signed_length if a else 0
    return complex(re_part, 1 + model.adjacent_blocks(v))


def drilled(model: BlockTubeModel, k: float) -> set[Slope]:
    """Tubes removed in M[k]: those whose |omega| is at least k."""
    return {v for v in model.order if abs(omega(model, v)) >= k}


def check_gap_conditions(model: BlockTubeModel) -> list[str]:
    """Strict gaps between consecutive tubes and no tube boundary inside a gap."""
    problems = []
    levels = [(t.lo, t.hi) for t in model.tubes.values()]
    ts = [model.tubes[v] for v in model.order]
    for a, b in zip(ts, ts[1:]):
        if not b.lo > a.hi:
            problems.append(f"no gap between {a.vertex} and {b.vertex}")
        for lo, hi in levels:
            if a.hi < lo < b.lo or a.hi < hi < b.lo:
                problems.append(f"tube boundary inside the gap after {a.vertex}")
    return problems


# --- restriction to a brick ---------------------------------------------------

@dataclass
class Restriction:
    classifications: list[tuple[str, Classification]]
    hierarchy: Optional[Hierarchy]

    @property
    def empty(self) -> bool:
        return self.hierarchy is None


def restrict_tube_unions(unions: Sequence[TubeUnion], B: Brick) -> Restriction:
    """Induced generalized hierarchy on the interior of B."""
    labels = [(u.geodesic_ref, classify_tube_vs_brick(u, B)) for u in unions]
    interacting = [(u, c) for u, (_, c) in zip(unions, labels) if c.family != "NoInteraction"]
    if not interacting:
        return Restriction(labels, None)
    u0, c0 = interacting[0]
    if c0.family != "Penetrates":
        raise NoPenetratingUnion(f"first union meeting the brick {c0}")
    lo, hi = induced_range(u0, c0)
    main_cores = tuple(v.vertex for v in u0.simplices[lo - 1: hi])
    main = GeodesicPath(main_cores, support=induced_domain(u0, c0, B))
    main_levels = [v for v in u0.simplices[lo - 1: hi]]
    subs = []
    for u, c in interacting[1:]:
        a, b = induced_range(u, c)
        piece = u.simplices[a - 1: b]
        path = GeodesicPath(tuple(v.vertex for v in piece), support=induced_domain(u, c, B))
        back = _nearest(main_levels, piece[0].lo)
        fwd = _nearest(main_levels, piece[-1].hi)
        subs.append(Subordinate(path, u.geodesic_ref, (MAIN, back), (MAIN, fwd)))
    h = Hierarchy(
        main,
        {},
        Marking(main_cores[0]),
        Marking(main_cores[-1]),
        generalized=True,
        subordinates=subs,
    )
    return Restriction(labels, h)


def _nearest(tubes: Sequence[TubeSimplex], level) -> int:
    return min(range(len(tubes)), key=lambda i: min(abs(tubes[i].lo - level), abs(tubes[i].hi - level)))


def restrict_hierarchy_to_brick(model: BlockTubeModel, B: Brick) -> Restriction:
    return restrict_tube_unions([model.tube_union()], B)


# --- wrapping diagrams --------------------------------------------------------

class Side(enum.Enum):
    UPPER = "Upper"
    LOWER = "Lower"
    BOTH = "Both"


@dataclass(frozen=True)
class WrappedTorus:
    curve: str
    wrap: int
    parabolic_side: Side

    @property
    def locus_form(self) -> Optional[tuple[int, int]]:
        n = abs(self.wrap)
        return (2 * n - 1, 2 * n) if n else None


@dataclass
class WrappingDiagram:
    tori: list[WrappedTorus] = field(default_factory=list)
    obstructing: list[str] = field(default_factory=list)
    undetermined: list[str] = field(default_factory=list)
    algebraic_ends: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def locus_form(self) -> list[Optional[tuple[int, int]]]:
        return [t.locus_form for t in self.tori]


_ALL = "all"


def _linear_solutions(u: Fraction, w: Fraction):
    """Solutions a of a*u = w: a Fraction, _ALL, or None."""
    if u != 0:
        return w / u
    return _ALL if w == 0 else None


def solve_wrap(p: Affine, q: Affine):
    """Integer a with (a+1)*p(i) = a*q(i) for all i.

    Returns an int, None when no integer works, or "all" when every a does
    (both exponents vanish identically).
    """
    p, q = p.exact(), q.exact()
    lead = _linear_solutions(q.coeff - p.coeff, p.coeff)
    const = _linear_solutions(q.const - p.const, p.const)
    if lead is None or const is None:
        return None
    if lead == _ALL and const == _ALL:
        return _ALL
    a = const if lead == _ALL else lead
    if const != _ALL and const != a:
        return None
    return int(a) if a.denominator == 1 else None


def parabolic_side(a: int) -> Side:
    return Side.UPPER if a <= 0 else Side.LOWER


def limit_brick_diagram(fam) -> WrappingDiagram:
    """Wrapping numbers for every shared curve from its normalizing exponents.

    ``fam`` is a SequenceFamily or an iterable of (curve, p, q) triples of
    affine expressions.
    """
    triples = fam.normalizing_exponents() if hasattr(fam, "normalizing_exponents") else fam
    d = WrappingDiagram()
    for curve, p, q in triples:
        a = solve_wrap(p, q)
        if a is None:
            d.obstructing.append(str(curve))
        elif a == _ALL:
            d.undetermined.append(str(curve))
        else:
            d.tori.append(WrappedTorus(str(curve), a, parabolic_side(a)))
    return d


def _dot_id(s: str) -> str:
    return '"' + s.replace('"', r"\"") + '"'


def diagram_dot(d: WrappingDiagram) -> str:
    lines = ["digraph wrapping {", "  rankdir=BT;", '  S [shape=plaintext, label="algebraic surface"];']
    for t in d.tori:
        form = t.locus_form
        label = f"T({t.curve})\\na = {t.wrap}\\n{t.parabolic_side.value} parabolic"
        if form:
            label += f"\\n{form[0]} horizontal, {form[1]} vertical"
        lines.append(f"  {_dot_id('T_' + t.curve)} [shape=box, label=\"{label}\"];")
        direction = "S -> " if t.parabolic_side is Side.UPPER else ""
        if direction:
            lines.append(f"  S -> {_dot_id('T_' + t.curve)};")
        else:
            lines.append(f"  {_dot_id('T_' + t.curve)} -> S;")
    for c in d.obstructing:
        lines.append(f"  {_dot_id('X_' + c)} [shape=octagon, label=\"{c}: no wrap\"];")
    for dom, side, lam in d.algebraic_ends:
        lines.append(f"  {_dot_id('E_' + dom + side)} [shape=ellipse, label=\"{side} end on {dom}: {lam}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def model_dot(model: BlockTubeModel) -> str:
    lines = ["digraph model {", "  rankdir=BT;", "  node [shape=box];"]
    rows = []
    for b in model.boundary_blocks[:1] + model.blocks + model.boundary_blocks[1:]:
        rows.append((b.lo, f"brick [{b.lo}, {b.hi}]"))
    for v in model.order:
        t = model.tubes[v]
        w = omega(model, v)
        rows.append((t.lo, f"tube {v} [{t.lo}, {t.hi}] omega={w.real:g}+{w.imag:g}i"))
    rows.sort(key=lambda r: r[0])
    for i, (_, label) in enumerate(rows):
        lines.append(f'  n{i} [label="{label}"];')
    for i in range(len(rows) - 1):
        lines.append(f"  n{i} -> n{i + 1};")
    lines.append("}")
    return "\n".join(lines) + "\n"
