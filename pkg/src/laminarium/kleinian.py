"""Punctured-torus groups in PSL(2,C) through Markov trace triples.

A triple (x, y, z) lists the traces of W(1/0) = X, W(0/1) = Y and
W(1/1) = XY.  It comes from a representation with parabolic commutator
exactly when x^2 + y^2 + z^2 = xyz.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .curves import INF, ZERO, Slope
from .errors import (
    DegenerateConfiguration,
    DegenerateTrace,
    InsufficientSamples,
    ParabolicOrElliptic,
    SingularSystem,
)

BAND = 1e-9


@dataclass(frozen=True)
class TraceTriple:
    x: complex
    y: complex
    z: complex

    @classmethod
    def parse(cls, text: str) -> "TraceTriple":
        parts = [p for p in text.replace(" ", "").split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated traces, got {text!r}")
        return cls(*(parse_complex(p) for p in parts))

    @property
    def markov_residual(self) -> float:
        x, y, z = self.x, self.y, self.z
        return abs(x * x + y * y + z * z - x * y * z)

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return (self.x, self.y, self.z)


def parse_complex(text: str) -> complex:
    """Decimal complex literal such as "3", "2.5-1i", "-0.5+2.25i"."""
    t = text.strip().replace("I", "i").replace("j", "i")
    if t.endswith("i"):
        t = t[:-1] + "j"
        if t in ("j", "+j", "-j"):
            t = t.replace("j", "1j")
        elif t[-2] in "+-":
            t = t[:-1] + "1j"
    return complex(t)


def commutator_trace(A: np.ndarray, B: np.ndarray) -> complex:
    Ai, Bi = np.linalg.inv(A), np.linalg.inv(B)
    return complex(np.trace(A @ B @ Ai @ Bi))


@dataclass
class KleinianRep:
    A: np.ndarray
    B: np.ndarray

    def triple(self) -> TraceTriple:
        return TraceTriple(complex(np.trace(self.A)), complex(np.trace(self.B)), complex(np.trace(self.A @ self.B)))

    def commutator_trace(self) -> complex:
        return commutator_trace(self.A, self.B)

    def conjugate(self, g: np.ndarray) -> "KleinianRep":
        gi = np.linalg.inv(g)
        return KleinianRep(g @ self.A @ gi, g @ self.B @ gi)


def matrices_from_traces(t: TraceTriple) -> KleinianRep:
    """A = [[lam, 1], [0, 1/lam]], B with lower-left entry 1, matching the traces."""
    x, y, z = complex(t.x), complex(t.y), complex(t.z)
    if abs(x - 2) < 1e-12 or abs(x + 2) < 1e-12:
        raise DegenerateTrace("tr A = +-2 has no loxodromic normal form")
    lam = (x + cmath.sqrt(x * x - 4)) / 2
    if abs(lam) < 1:
        lam = 1 / lam
    if abs(lam - 1 / lam) < 1e-12:
        raise SingularSystem("lambda too close to +-1")
    a = (z - 1 - y / lam) / (lam - 1 / lam)
    d = y - a
    b = a * d - 1
    A = np.array([[lam, 1], [0, 1 / lam]], dtype=complex)
    B = np.array([[a, b], [1, d]], dtype=complex)
    return KleinianRep(A, B)


# --- slope words and traces ---------------------------------------------------

def descend(s: Slope):
    """Yield (L, R, mediant) Stern-Brocot states until the mediant is s."""
    if s.p >= 0:
        L, R = (0, 1), (1, 0)
    else:
        L, R = (-1, 0), (0, 1)
    while True:
        m = (L[0] + R[0], L[1] + R[1])
        yield L, R, m
        if m == (s.p, s.q):
            return
        if s.p * m[1] > m[0] * s.q:
            L = m
        else:
            R = m


def slope_word(s: Slope) -> str:
    """Word with W(L+R) = W(R) W(L) on positive slopes; y stands for Y^-1.

    Negative slopes reuse the word of |s| with Y replaced by Y^-1.
    """
    if s == INF:
        return "X"
    a = Slope.of(abs(s.p), s.q)
    if a == ZERO:
        return "Y"
    words = {(0, 1): "Y", (1, 0): "X"}
    for L, R, m in descend(a):
        words[m] = words[R] + words[L]
    w = words[(a.p, a.q)]
    return w.replace("Y", "y") if s.p < 0 else w


def word_matrix(word: str, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    lookup = {"X": A, "Y": B, "x": np.linalg.inv(A), "y": np.linalg.inv(B)}
    M = np.eye(2, dtype=A.dtype)
    for ch in word:
        M = M @ lookup[ch]
    return M


def trace_of_slope(t: TraceTriple, s: Slope) -> complex:
    """Trace of W(s) by the Farey recursion tr(a+b) = tr(a) tr(b) - tr(opposite)."""
    x, y, z = t.x, t.y, t.z
    if s == INF:
        return x
    if s == ZERO:
        return y
    if s.p > 0:
        tr = {(0, 1): y, (1, 0): x}
        opp = x * y - z  # W(-1/1)
    else:
        tr = {(-1, 0): x, (0, 1): y}
        opp = z
    for L, R, m in descend(s):
        tm = z if m == (1, 1) else tr[L] * tr[R] - opp
        if m == (s.p, s.q):
            return tm
        if s.p * m[1] > m[0] * s.q:
            opp = tr[L]
            tr = {m: tm, R: tr[R]}
        else:
            opp = tr[R]
            tr = {L: tr[L], m: tm}
    raise AssertionError("unreachable")


def trace_table(t: TraceTriple, bound: int) -> dict[Slope, complex]:
    """Traces of every slope with |p|, q <= bound, one tree walk."""
    out = {INF: t.x, ZERO: t.y}

    def walk(L, R, tL, tR, opp):
        m = (L[0] + R[0], L[1] + R[1])
        if abs(m[0]) > bound or m[1] > bound:
            return
        tm = t.z if m == (1, 1) else tL * tR - opp
        out[Slope.of(*m)] = tm
        walk(L, m, tL, tm, tR)
        walk(m, R, tm, tR, tL)

    walk((0, 1), (1, 0), t.y, t.x, t.x * t.y - t.z)
    walk((-1, 0), (0, 1), t.x, t.y, t.z)
    return out


class Pair(enum.Enum):
    XY = "xy"
    XZ = "xz"
    YZ = "yz"


def markov_flip(t: TraceTriple, fixed: Pair = Pair.XY) -> TraceTriple:
    """Vieta involution replacing the free trace."""
    x, y, z = t.x, t.y, t.z
    if fixed is Pair.XY:
        return TraceTriple(x, y, x * y - z)
    if fixed is Pair.XZ:
        return TraceTriple(x, x * z - y, z)
    return TraceTriple(y * z - x, y, z)


# --- Bowditch's BQ conditions -------------------------------------------------

def in_band(tr: complex) -> bool:
    return abs(tr.imag) < BAND and -2 - BAND <= tr.real <= 2 + BAND


@dataclass(frozen=True)
class BQResult:
    verdict: str  # Holds, Fails, Inconclusive
    witness: Optional[Slope] = None
    depth: int = 0
    nodes: int = 0
    frontier: int = 0
    small: tuple[Slope, ...] = ()

    def __str__(self):
        if self.verdict == "Fails":
            return f"Fails(witness {self.witness})"
        if self.verdict == "Holds":
            return f"Holds(depth {self.depth}, {self.nodes} nodes)"
        return f"Inconclusive({self.nodes} nodes, frontier {self.frontier})"


def bowditch_bq(t: TraceTriple, budget: int = 100_000, margin: float = 0.1) -> BQResult:
    """Search the Markov tree for traces in [-2, 2].

    Each frontier element is a Farey triangle (a, b, new).  Its two unexplored
    neighbours are pruned once both of their new traces exceed |tr(new)| and
    2 + margin in modulus.  Running out of budget is Inconclusive.
    """
    if budget <= 0:
        return BQResult("Inconclusive", nodes=0, frontier=1)
    x, y, z = complex(t.x), complex(t.y), complex(t.z)
    w = x * y - z
    roots = [(INF, x), (ZERO, y), (Slope(1, 1), z), (Slope(-1, 1), w)]
    for s, tr in roots:
        if in_band(tr):
            return BQResult("Fails", witness=s, nodes=1)
    small = [s for s, tr in roots if abs(tr) <= 2 + margin]
    # frontier entries: (a, ta, b, tb, new, tnew, depth)
    frontier = [
        ((1, 0), x, (0, 1), y, (1, 1), z, 1),
        ((-1, 0), x, (0, 1), y, (-1, 1), w, 1),
    ]
    nodes = 4
    depth = 1
    while frontier:
        a, ta, b, tb, n, tn, d = frontier.pop()
        depth = max(depth, d)
        kids = []
        for (u, tu), (v, tv) in (((a, ta), (b, tb)), ((b, tb), (a, ta))):
            m = (u[0] + n[0], u[1] + n[1])
            tm = tu * tn - tv
            nodes += 1
            s = Slope.of(*m)
            if in_band(tm):
                return BQResult("Fails", witness=s, depth=d + 1, nodes=nodes)
            if abs(tm) <= 2 + margin:
                small.append(s)
            kids.append((u, tu, n, tn, m, tm, d + 1))
        if all(abs(k[5]) > abs(tn) and abs(k[5]) > 2 + margin for k in kids):
            continue
        if nodes >= budget:
            return BQResult("Inconclusive", nodes=nodes, frontier=len(frontier) + 2, depth=depth)
        frontier.extend(kids)
    return BQResult("Holds", depth=depth, nodes=nodes, small=tuple(small))


# --- lengths, normal forms, sequences -----------------------------------------

def complex_length(trace: complex) -> complex:
    """2 arccosh(tr/2) on the principal branch."""
    trace = complex(trace)
    if in_band(trace):
        raise ParabolicOrElliptic(f"trace {trace} is parabolic or elliptic")
    return 2 * cmath.acosh(trace / 2)


def _fixed_points(M: np.ndarray) -> list[complex]:
    (a, b), (c, d) = M
    if abs(c) < 1e-14:
        return [complex("inf")] if abs(a - d) < 1e-14 else [complex("inf"), b / (d - a)]
    disc = cmath.sqrt((d - a) ** 2 + 4 * b * c)
    return [(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)]


def normalize(rep: KleinianRep) -> KleinianRep:
    """Conjugate so [A,B] = [[-1, 1], [0, -1]] and A's attracting fixed point is 0."""
    C = rep.A @ rep.B @ np.linalg.inv(rep.A) @ np.linalg.inv(rep.B)
    if np.allclose(C, np.eye(2), atol=1e-12) or np.allclose(C, -np.eye(2), atol=1e-12):
        raise DegenerateConfiguration("commutator is trivial")
    (a, b), (c, d) = C
    if abs(c) < 1e-9 * max(1.0, abs(a), abs(b), abs(d)):
        zeta = None
        g = np.eye(2, dtype=complex)
    else:
        zeta = (a - d) / (2 * c)
        g = np.array([[0, -1], [1, -zeta]], dtype=complex)
    r = rep.conjugate(g)
    C = r.A @ r.B @ np.linalg.inv(r.A) @ np.linalg.inv(r.B)
    if C[0, 0].real > 0:
        C = -C
    off = C[0, 1] / C[0, 0] * -1  # normalise against the -1 diagonal
    if abs(off) < 1e-13:
        raise DegenerateConfiguration("commutator is not parabolic")
    s = 1 / cmath.sqrt(off)
    r = r.conjugate(np.array([[s, 0], [0, 1 / s]], dtype=complex))
    (a, b), (c, d) = r.A
    if abs(c) < 1e-13:
        raise DegenerateConfiguration("A fixes the cusp")
    f = None
    for p in _fixed_points(r.A):
        if cmath.isinf(p):
            continue
        if abs(c * p + d) > 1 + 1e-12:
            f = p
    if f is None:
        raise DegenerateConfiguration("A has no attracting fixed point")
    r = r.conjugate(np.array([[1, -f], [0, 1]], dtype=complex))
    return r


@dataclass(frozen=True)
class SequenceVerdict:
    outcome: str  # Converges, Diverges, Undetermined
    limit: Optional[TraceTriple] = None
    parabolic: tuple[Slope, ...] = ()
    escaping: Optional[Slope] = None

    def __str__(self):
        if self.outcome == "Converges":
            para = ", ".join(map(str, self.parabolic)) or "none"
            return f"Converges(parabolic: {para})"
        if self.outcome == "Diverges":
            return f"Diverges(escaping {self.escaping})"
        return "Undetermined"


DEFAULT_PROBES = (INF, ZERO, Slope(1, 1), Slope(-1, 1), Slope(2, 1), Slope(1, 2))


def sequence_convergence(
    triples: Sequence[TraceTriple],
    probe_slopes: Iterable[Slope] = DEFAULT_PROBES,
    tol: float = 1e-6,
    escape: float = 1e6,
    tail: int = 3,
) -> SequenceVerdict:
    """Algebraic convergence of a triple sequence, read off probe traces."""
    if len(triples) < 5:
        raise InsufficientSamples("need at least five triples")
    probes = list(probe_slopes)
    series = {s: [trace_of_slope(t, s) for t in triples] for s in probes}
    for s, seq in series.items():
        mods = [abs(v) if cmath.isfinite(v) else math.inf for v in seq]
        last = mods[-tail - 1:]
        if mods[-1] == math.inf or (mods[-1] > escape and all(a < b for a, b in zip(last, last[1:]))):
            return SequenceVerdict("Diverges", escaping=s)
    cauchy = True
    for seq in series.values():
        last = seq[-tail - 1:]
        scale = max(1.0, abs(last[-1]))
        if max(abs(a - b) for a in last for b in last) > tol * scale:
            cauchy = False
    if not cauchy:
        return SequenceVerdict("Undetermined")
    lim = triples[-1]
    parabolic = tuple(s for s, seq in series.items() if min(abs(seq[-1] - 2), abs(seq[-1] + 2)) < 1e-3)
    return SequenceVerdict("Converges", limit=lim, parabolic=parabolic)


# --- Bers' inequality ---------------------------------------------------------

@dataclass(frozen=True)
class BersReport:
    slope: Slope
    lhs: float
    rhs: float
    ok: bool
    advisory: bool
    note: str = ""


def bers_inequality_check(rep, m, n, s: Slope, tol: float = 1e-9) -> BersReport:
    """Re(complex length) of s against 2 min(l_m(s), l_n(s)).

    Only the Fuchsian case m = n is verifiable; other inputs are checked
    but the report is flagged advisory.
    """
    from .teich import length_of_slope, traces_of

    triple = rep.triple() if isinstance(rep, KleinianRep) else rep
    lhs = complex_length(trace_of_slope(triple, s)).real
    rhs = 2 * min(length_of_slope(m, s), length_of_slope(n, s))
    advisory, note = False, ""
    if m != n:
        advisory, note = True, "HypothesisUnverifiable: not a Fuchsian realization"
    else:
        ref = traces_of(m)
        if max(abs(a - b) for a, b in zip(triple.as_tuple(), ref)) > 1e-6 * max(1.0, abs(ref[0])):
            advisory, note = True, "HypothesisUnverifiable: triple differs from the Fuchsian realization"
    return BersReport(s, lhs, rhs, lhs <= rhs + tol, advisory, note)
