"""Surfaces, slopes, laminations and the integral mapping-class action.

Curves on the once-punctured torus S(1,1) and the four-punctured sphere
S(0,4) are parametrised by slopes p/q.  Mapping classes act through
2x2 integer matrices with determinant +-1.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

from . import contfrac
from .errors import PrecisionExhausted, SymbolicSurface


class SurfaceKind(enum.Enum):
    NUMERIC_S11 = "S1,1"
    NUMERIC_S04 = "S0,4"
    SYMBOLIC = "symbolic"


@dataclass(frozen=True)
class SurfaceSig:
    genus: int
    punctures: int

    def __post_init__(self):
        if self.genus < 0 or self.punctures < 0:
            raise ValueError("genus and punctures must be non-negative")

    @property
    def xi(self) -> int:
        return 3 * self.genus + self.punctures

    @property
    def kind(self) -> SurfaceKind:
        if (self.genus, self.punctures) == (1, 1):
            return SurfaceKind.NUMERIC_S11
        if (self.genus, self.punctures) == (0, 4):
            return SurfaceKind.NUMERIC_S04
        return SurfaceKind.SYMBOLIC

    @property
    def numeric(self) -> bool:
        return self.kind is not SurfaceKind.SYMBOLIC

    def __str__(self):
        return f"S{self.genus},{self.punctures}"


S11 = SurfaceSig(1, 1)
S04 = SurfaceSig(0, 4)


@dataclass(frozen=True)
class Slope:
    """Reduced fraction p/q with q >= 0; the slope infinity is stored as 1/0."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 0 or math.gcd(self.p, self.q) != 1 or (self.q == 0 and self.p != 1):
            raise ValueError(f"non-canonical slope {self.p}/{self.q}; use Slope.of")

    @classmethod
    def of(cls, p: int, q: int) -> "Slope":
        if p == 0 and q == 0:
            raise ValueError("0/0 is not a slope")
        g = math.gcd(p, q)
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        return cls(p, q)

    @classmethod
    def parse(cls, text: str) -> "Slope":
        m = re.fullmatch(r"\s*([+-]?\d+)\s*(?:/\s*([+-]?\d+))?\s*", text)
        if not m:
            raise ValueError(f"cannot parse slope {text!r}")
        return cls.of(int(m.group(1)), int(m.group(2) or 1))

    @property
    def is_infinity(self) -> bool:
        return self.q == 0

    def vector(self) -> tuple[int, int]:
        return (self.p, self.q)

    def key(self) -> tuple[int, int, int]:
        """Canonical slope ordering: height first, then denominator, then numerator."""
        return (max(abs(self.p), self.q), self.q, self.p)

    def __lt__(self, other: "Slope") -> bool:
        return self.key() < other.key()

    def value(self) -> Fraction | float:
        return math.inf if self.q == 0 else Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


INF = Slope(1, 0)
ZERO = Slope(0, 1)


def det2(u: tuple[int, int], v: tuple[int, int]) -> int:
    return u[0] * v[1] - u[1] * v[0]


# --- laminations --------------------------------------------------------------

@dataclass(frozen=True)
class Rational:
    slope: Slope
    weight: float = 1.0

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError("weight must be positive")

    def __str__(self):
        return f"{self.slope}" if self.weight == 1.0 else f"{self.weight:g}*{self.slope}"


@dataclass(frozen=True)
class Irrational:
    """Lamination of irrational slope given by its continued fraction.

    With a non-empty ``period`` the expansion is exact and eventually
    periodic (a quadratic irrational).  With an empty period ``head`` is a
    truncated stream; asking for more terms raises PrecisionExhausted.
    """

    head: tuple[int, ...] = ()
    period: tuple[int, ...] = ()

    def __post_init__(self):
        head, period = contfrac.canonical_periodic(tuple(self.head), tuple(self.period))
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "period", period)
        terms = list(head) + list(period)
        if not terms:
            raise ValueError("empty continued fraction")
        if any(t < 1 for t in terms[1:]) or (not head and terms[0] < 1):
            raise ValueError("partial quotients after the first must be positive")

    @property
    def exact(self) -> bool:
        return bool(self.period)

    def terms(self) -> Iterator[int]:
        yield from self.head
        if not self.period:
            raise PrecisionExhausted(f"stream truncated after {len(self.head)} terms")
        while True:
            yield from self.period

    def take(self, n: int) -> list[int]:
        out = []
        it = self.terms()
        while len(out) < n:
            out.append(next(it))
        return out

    def value(self) -> float:
        n = 60 if self.exact else len(self.head)
        return contfrac.approximate(contfrac.periodic_terms(self.head, self.period), n)

    def __str__(self):
        h = ",".join(map(str, self.head))
        if self.period:
            return f"[{h};({','.join(map(str, self.period))})]"
        return f"[{h}...]"


GOLDEN = Irrational((), (1,))


@dataclass(frozen=True)
class SymbolicComponent:
    id: str
    is_scc: bool
    supporting_surface: str
    weight: Optional[float] = None


@dataclass(frozen=True)
class SymbolicUnion:
    components: tuple[SymbolicComponent, ...]

    def __post_init__(self):
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise ValueError("symbolic components must have distinct ids")

    def ids(self) -> set[str]:
        return {c.id for c in self.components}

    def get(self, cid: str) -> Optional[SymbolicComponent]:
        return next((c for c in self.components if c.id == cid), None)

    def __str__(self):
        return " + ".join(c.id for c in self.components) or "0"


Lamination = Union[Rational, Irrational, SymbolicUnion]


# --- mapping classes ----------------------------------------------------------

Matrix = tuple[tuple[int, int], tuple[int, int]]


@dataclass(frozen=True)
class MappingClass:
    matrix: Matrix
    word: Optional[tuple[tuple[Slope, int], ...]] = field(default=None, compare=False)

    def __post_init__(self):
        (a, b), (c, d) = self.matrix
        if abs(a * d - b * c) != 1:
            raise ValueError("mapping class matrix must have determinant +-1")

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    def __matmul__(self, other: "MappingClass") -> "MappingClass":
        (a, b), (c, d) = self.matrix
        (e, f), (g, h) = other.matrix
        word = None
        if self.word is not None and other.word is not None:
            word = self.word + other.word
        return MappingClass(((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h)), word)

    def inverse(self) -> "MappingClass":
        (a, b), (c, d) = self.matrix
        k = self.det
        word = None
        if self.word is not None:
            word = tuple((s, -n) for s, n in reversed(self.word))
        return MappingClass(((d * k, -b * k), (-c * k, a * k)), word)

    def __pow__(self, n: int) -> "MappingClass":
        result = IDENTITY
        base = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            result = result @ base
        return result

    def __call__(self, s: Slope) -> Slope:
        return apply(self, s)

    def __str__(self):
        if self.word:
            return " ".join(f"T({s})^{n}" for s, n in self.word)
        (a, b), (c, d) = self.matrix
        return f"[[{a},{b}],[{c},{d}]]"


IDENTITY = MappingClass(((1, 0), (0, 1)), ())


def apply(g: MappingClass, s: Slope) -> Slope:
    (a, b), (c, d) = g.matrix
    return Slope.of(a * s.p + b * s.q, c * s.p + d * s.q)


def normalizer(c: Slope) -> MappingClass:
    """The fixed SL(2,Z) matrix taking 1/0 to c (its first column is c)."""
    if c.q == 0:
        return IDENTITY
    p, q = c.p, c.q
    s = 0 if q == 1 else pow(p, -1, q)
    r = (p * s - 1) // q
    return MappingClass(((p, r), (q, s)))


def twist(c: Slope, n: int = 1) -> MappingClass:
    """n-th power of the right-handed Dehn twist about c.

    The twist about 1/0 is [[1,1],[0,1]]; all others are SL(2,Z)
    conjugates, so twist(g c, n) = g twist(c, n) g^-1 for det g = 1.
    """
    h = normalizer(c)
    (p, r), (q, s) = h.matrix
    # h [[1,n],[0,1]] h^-1 = I + n * c c^perp
    m = ((1 - n * p * q, n * p * p), (-n * q * q, 1 + n * p * q))
    return MappingClass(m, ((c, n),) if n else ())


def intersection_number(a: Slope, b: Slope, sig: SurfaceSig = S11) -> int:
    k = abs(a.p * b.q - a.q * b.p)
    if sig.kind is SurfaceKind.NUMERIC_S11:
        return k
    if sig.kind is SurfaceKind.NUMERIC_S04:
        return 2 * k
    raise SymbolicSurface(f"intersection numbers on {sig} need declared data")


def parse_mapping_class(text: str) -> MappingClass:
    """Parse "[[a,b],[c,d]]" or a word such as "T(1/0)^2 T(0/1)^-1"."""
    text = text.strip()
    m = re.fullmatch(r"\[\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*,\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\]", text)
    if m:
        a, b, c, d = map(int, m.groups())
        return MappingClass(((a, b), (c, d)))
    result = IDENTITY
    pos = 0
    token = re.compile(r"\s*T\(\s*([^)]+?)\s*\)(?:\^\s*([+-]?\d+))?\s*")
    while pos < len(text):
        t = token.match(text, pos)
        if not t or t.end() == pos:
            raise ValueError(f"cannot parse mapping class {text!r} at position {pos}")
        result = result @ twist(Slope.parse(t.group(1)), int(t.group(2) or 1))
        pos = t.end()
    return result
