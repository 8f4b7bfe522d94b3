"""Teichmuller space of the once-punctured torus in Fenchel-Nielsen coordinates.

A point is fn(l, t) pushed forward by an integral marking frame g: the
length of s at the point is the length of g^-1 s at fn(l, t).  Keeping
the frame separate keeps the trace arithmetic well conditioned under
long twist sequences.

At fn(l, t) the traces of 1/0, 0/1, 1/1 are

    x = 2 cosh(l/2),  y = K cosh((t + l/2)/2),  z = K cosh((t - l/2)/2),

with K = x / sinh(l/2); t -> t + l is the right twist about 1/0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import contfrac
from .curves import (
    IDENTITY,
    INF,
    ZERO,
    Irrational,
    MappingClass,
    Rational,
    Slope,
    apply,
    normalizer,
    twist,
)
from .errors import (
    CertificationFailed,
    InsufficientSamples,
    IrrationalLamination,
    NumericalInstability,
    OptimizationFailed,
)
from .farey import slopes_in_box
from .hierarchy import Marking, Resolution, marking_sequence
from .kleinian import TraceTriple, descend, matrices_from_traces, slope_word, trace_of_slope, word_matrix

DELTA0 = 0.1
EQUAL_LENGTH = 2 * math.asinh(1.0)


@dataclass(frozen=True)
class TeichPoint:
    fn_length: float
    fn_twist: float
    frame: MappingClass = IDENTITY

    def __post_init__(self):
        if not self.fn_length > 0:
            raise ValueError("fn_length must be positive")
        if abs(self.frame.det) != 1:
            raise ValueError("frame must be integral unimodular")

    def __str__(self):
        base = f"fn({self.fn_length:.9g}, {self.fn_twist:.9g})"
        return base if self.frame == IDENTITY else f"{self.frame} . {base}"


def fn(length: float, twist_param: float) -> TeichPoint:
    return TeichPoint(float(length), float(twist_param))


SQUARE = fn(2 * math.acosh(1.5), 0.0)


def fn_traces(length: float, t: float) -> tuple[float, float, float]:
    h = length / 2
    x = 2 * math.cosh(h)
    K = x / math.sinh(h)
    return x, K * math.cosh((t + h) / 2), K * math.cosh((t - h) / 2)


def fn_from_traces(x: float, y: float, z: float) -> tuple[float, float]:
    """Inverse of fn_traces on real triples with x > 2."""
    if not x > 2:
        raise NumericalInstability(f"trace {x} is not hyperbolic")
    length = 2 * math.acosh(x / 2)
    K = x / math.sinh(length / 2)
    t = 2 * math.asinh((y - z) / (2 * K * math.sinh(length / 4)))
    return length, t


def reduced(m: TeichPoint) -> TeichPoint:
    """Same point with |t| <= l/2, the difference absorbed into the frame."""
    n = round(m.fn_twist / m.fn_length)
    if n == 0:
        return m
    return TeichPoint(m.fn_length, m.fn_twist - n * m.fn_length, m.frame @ twist(INF, n))


def local_triple(m: TeichPoint) -> TraceTriple:
    """Traces at fn(l, t), ignoring the frame."""
    return TraceTriple(*fn_traces(m.fn_length, m.fn_twist))


def _local_slope(m: TeichPoint, s: Slope) -> Slope:
    return apply(m.frame.inverse(), s) if m.frame != IDENTITY else s


def _len_from_trace(tr: complex) -> float:
    a = abs(tr) / 2
    if a < 1:
        raise NumericalInstability(f"trace {tr} below 2 in a Fuchsian group")
    return 2 * math.acosh(a)


def length_of_slope(m: TeichPoint, s: Slope) -> float:
    """Hyperbolic length 2 arccosh(|tr W(s)|/2) in the Fuchsian realization."""
    m = reduced(m)
    A, B = _local_matrices(m.fn_length, m.fn_twist)
    with np.errstate(over="ignore", invalid="ignore"):
        tr = np.trace(word_matrix(slope_word(_local_slope(m, s)), A, B)).real
    if not math.isfinite(tr):
        return length_by_recursion(m, s)
    return _len_from_trace(tr)


def length_by_recursion(m: TeichPoint, s: Slope) -> float:
    m = reduced(m)
    t = tuple(v.real for v in local_triple(m).as_tuple())
    return _len_from_log_trace(_log_trace(t, _local_slope(m, s)))


def traces_of(m: TeichPoint) -> tuple[float, float, float]:
    """Absolute traces of 1/0, 0/1, 1/1 (through the frame)."""
    m = reduced(m)
    t = local_triple(m)
    g = m.frame.inverse()
    return tuple(trace_of_slope(t, apply(g, s)).real for s in (INF, ZERO, Slope(1, 1)))


@lru_cache(maxsize=4096)
def _local_matrices(length: float, t: float):
    rep = matrices_from_traces(TraceTriple(*fn_traces(length, t)))
    return rep.A.real.copy(), rep.B.real.copy()


@dataclass
class FuchsianRep:
    A: np.ndarray
    B: np.ndarray

    def commutator_trace(self) -> float:
        Ai, Bi = np.linalg.inv(self.A), np.linalg.inv(self.B)
        return float(np.trace(self.A @ self.B @ Ai @ Bi))

    def triple(self) -> TraceTriple:
        return TraceTriple(np.trace(self.A), np.trace(self.B), np.trace(self.A @ self.B))


def fuchsian_from_fn(m: TeichPoint) -> FuchsianRep:
    """Real matrices A, B with the point's absolute traces."""
    x, y, z = traces_of(m)
    rep = matrices_from_traces(TraceTriple(x, y, z))
    out = FuchsianRep(rep.A.real.copy(), rep.B.real.copy())
    if abs(out.commutator_trace() + 2) > 1e-6:
        raise NumericalInstability(f"commutator trace {out.commutator_trace()}")
    return out


def _log_combine(la: float, lb: float, lo: float) -> float:
    """log(e^la e^lb - e^lo) for positive traces."""
    if la + lb < 600:
        return math.log(math.exp(la + lb) - math.exp(lo))
    return la + lb + math.log1p(-math.exp(lo - la - lb))


def _log_trace(t: tuple[float, float, float], s: Slope) -> float:
    """log of the (positive) trace of W(s); the recursion of trace_of_slope in log space."""
    lx, ly, lz = (math.log(v) for v in t)
    if s == INF:
        return lx
    if s == ZERO:
        return ly
    if s.p > 0:
        tr = {(0, 1): ly, (1, 0): lx}
        opp = math.log(t[0] * t[1] - t[2])
    else:
        tr = {(-1, 0): lx, (0, 1): ly}
        opp = lz
    for L, R, m in descend(s):
        # 1/1 is known exactly; recomputing it as xy - (xy - z) cancels badly
        tm = lz if m == (1, 1) else _log_combine(tr[L], tr[R], opp)
        if m == (s.p, s.q):
            return tm
        if s.p * m[1] > m[0] * s.q:
            opp = tr[L]
            tr = {m: tm, R: tr[R]}
        else:
            opp = tr[R]
            tr = {L: tr[L], m: tm}
    raise AssertionError("unreachable")


def _len_from_log_trace(lt: float) -> float:
    """2 arccosh(e^lt / 2) without forming e^lt."""
    if lt < 20:
        return _len_from_trace(math.exp(lt))
    return 2 * (lt - math.log(2) + math.log1p(math.sqrt(1 - 4 * math.exp(-2 * lt))))


def length_spectrum(m: TeichPoint, bound: int) -> dict[Slope, float]:
    """Lengths of every slope with |p|, q <= bound; safe for very long curves."""
    m = reduced(m)
    t = tuple(v.real for v in local_triple(m).as_tuple())
    g = m.frame.inverse()
    return {s: _len_from_log_trace(_log_trace(t, apply(g, s))) for s in slopes_in_box(bound)}


# --- deformations -------------------------------------------------------------

@dataclass(frozen=True)
class Twist:
    curve: Slope
    n: int


@dataclass(frozen=True)
class Earthquake:
    curve: Union[Slope, Irrational]
    w: float


def push(m: TeichPoint, g: MappingClass) -> TeichPoint:
    """Remarking by g: lengths satisfy l_{g m}(s) = l_m(g^-1 s)."""
    return TeichPoint(m.fn_length, m.fn_twist, g @ m.frame)


def in_frame(m: TeichPoint, h: MappingClass) -> TeichPoint:
    """The same point written with frame h."""
    m = reduced(m)
    t = local_triple(m)
    g = m.frame.inverse() @ h
    x, y, z = (trace_of_slope(t, apply(g, s)).real for s in (INF, ZERO, Slope(1, 1)))
    length, tw = fn_from_traces(x, y, z)
    return reduced(TeichPoint(length, tw, h))


def deform(m: TeichPoint, move: Union[Twist, Earthquake]) -> TeichPoint:
    if isinstance(move, Twist):
        return push(m, twist(move.curve, move.n))
    if isinstance(move, Earthquake):
        if not isinstance(move.curve, Slope):
            raise IrrationalLamination("earthquakes are supported along simple closed curves only")
        if move.w == 0:
            return m
        h = normalizer(move.curve)
        if m.frame == h or (m.frame == IDENTITY and move.curve == INF):
            base = m
        else:
            base = in_frame(m, h)
        return TeichPoint(base.fn_length, base.fn_twist + move.w, base.frame)
    raise TypeError(f"unknown move {move!r}")


def same_point(a: TeichPoint, b: TeichPoint, tol: float = 1e-6, bound: int = 3) -> bool:
    la, lb = length_spectrum(a, bound), length_spectrum(b, bound)
    return all(abs(la[s] - lb[s]) <= tol * max(1.0, la[s]) for s in la)


# --- systoles -----------------------------------------------------------------

def collar_width(length: float) -> float:
    return math.asinh(1 / math.sinh(length / 2))


@dataclass(frozen=True)
class SystoleCertificate:
    slope: Slope
    length: float
    candidate: Slope
    collar: float
    max_crossings: int
    transversal: Slope
    transversal_collar: float
    checked: int


def _best_transversal(lf, h: MappingClass) -> tuple[int, float]:
    """Integer n minimising the length of h(n/1); lengths are convex in n."""
    n = 0
    cur = lf(apply(h, Slope(n, 1)))
    for step in (1, -1):
        while True:
            nxt = lf(apply(h, Slope(n + step, 1)))
            if nxt < cur:
                n, cur = n + step, nxt
            else:
                break
    return n, cur


def _certified_min(m: TeichPoint, budget: int) -> SystoleCertificate:
    m = reduced(m)
    t = local_triple(m)

    def lf(s: Slope) -> float:
        return _len_from_trace(trace_of_slope(t, s).real)

    pool = slopes_in_box(3)
    cand = min(pool, key=lambda s: (lf(s), s.key()))
    L = lf(cand)
    w = collar_width(L)
    h = normalizer(cand)
    n0, lt = _best_transversal(lf, h)
    wt = collar_width(lt)
    kmax = int(L / (2 * w))
    reach = int(L / (2 * wt)) + 1
    best, best_len = cand, L
    checked = 0
    for k in range(1, kmax + 1):
        for p in range(k * n0 - reach, k * n0 + reach + 1):
            if math.gcd(p, k) != 1:
                continue
            checked += 1
            if checked > budget:
                raise CertificationFailed(f"systole search exceeded {budget} slopes")
            s = apply(h, Slope(p, k))
            ls = lf(s)
            if ls < best_len - 1e-12 or (abs(ls - best_len) <= 1e-12 and s.key() < best.key()):
                best, best_len = s, ls
    back = m.frame
    return SystoleCertificate(
        apply(back, best), best_len, apply(back, cand), w, kmax, apply(back, apply(h, Slope(n0, 1))), wt, checked
    )


def systole(m: TeichPoint, budget: int = 200_000) -> tuple[Slope, SystoleCertificate]:
    """Shortest slope, certified by the collar lemma."""
    cert = _certified_min(m, budget)
    return cert.slope, cert


def shortest_clean_marking(m: TeichPoint, budget: int = 200_000) -> Marking:
    base, _ = systole(m, budget)
    m = reduced(m)
    t = local_triple(m)
    g = m.frame.inverse()

    def lf(s: Slope) -> float:
        return _len_from_trace(trace_of_slope(t, apply(g, s)).real)

    h = normalizer(base)
    n0, lt = _best_transversal(lf, h)
    reach = int(lt / (2 * collar_width(lt))) + 1
    choices = [(lf(apply(h, Slope(n, 1))), n) for n in range(n0 - reach, n0 + reach + 1)]
    _, n = min(choices)
    return Marking(base, apply(h, Slope(n, 1)))


# --- Thurston limits ----------------------------------------------------------

@dataclass(frozen=True)
class LimitEstimate:
    lamination: Union[Rational, Irrational]
    residual: float
    fitted: float


def _intersection_vector(slopes: Sequence[Slope], x: float) -> np.ndarray:
    if math.isinf(x):
        return np.array([float(s.q) for s in slopes])
    return np.array([abs(s.p - s.q * x) for s in slopes])


def _normalized(v: np.ndarray) -> np.ndarray:
    top = v.max()
    return v / top if top > 0 else v


def _irrational_from(x: float, precision: float) -> Irrational:
    """Continued fraction of x, kept while the convergents are resolvable."""
    terms: list[int] = []
    y = x
    while len(terms) < 40:
        a = math.floor(y)
        terms.append(a)
        q = list(contfrac.convergents(terms))[-1][1]
        frac = y - a
        if frac < 1e-12 or q * q * precision > 1:
            break
        y = 1 / frac
    found = contfrac.detect_period(terms)
    return Irrational(*found) if found else Irrational(tuple(terms))


def thurston_limit_estimate(
    points: Sequence[TeichPoint], window: int = 4, threshold: float = 0.05
) -> Optional[LimitEstimate]:
    """Projective limit of length functions, fitted against intersection vectors."""
    if len(points) < 5:
        raise InsufficientSamples("need at least five points")
    slopes = slopes_in_box(window)
    rows = []
    scales = []
    for m in points:
        spec = length_spectrum(m, window)
        v = np.array([spec[s] for s in slopes])
        if not np.all(np.isfinite(v)):
            raise NumericalInstability("length overflow; use shorter sequences")
        scales.append(v.max())
        rows.append(v / v.max())
    scales = np.array(scales)
    if not scales[-1] > 2 * scales[0] or not np.all(np.diff(scales[-3:]) > 0):
        return None
    half = max(3, len(points) // 2)
    data = np.array(rows[-half:])
    growth = (scales[-1] / scales[-half]) ** (1 / (half - 1))
    drift = 0.0
    if growth < 1.3:
        # polynomial growth (twisting): rows are linear in 1/length scale
        coeffs = np.polyfit(1 / scales[-half:], data, 1)
        limit = _normalized(np.clip(coeffs[1], 0, None))
    else:
        # exponential growth: rows are exact intersection vectors of a drifting
        # endpoint, so the drift between samples bounds the precision
        limit = _normalized(data[-1])
        xs = [_fit_irrational(slopes, _normalized(r), window)[0] for r in data[-3:]]
        drift = max(xs) - min(xs)

    def resid(x: float) -> float:
        return float(np.max(np.abs(_normalized(_intersection_vector(slopes, x)) - limit)))

    best_rat = min(slopes, key=lambda s: (resid(math.inf if s.q == 0 else s.p / s.q), s.key()))
    r_rat = resid(math.inf if best_rat.q == 0 else best_rat.p / best_rat.q)
    x_irr, r_irr = _fit_irrational(slopes, limit, window)
    if r_rat <= r_irr + 1e-3 or (best_rat.q and abs(x_irr - best_rat.p / best_rat.q) < 1e-3):
        if r_rat > threshold:
            return None
        fitted = math.inf if best_rat.q == 0 else best_rat.p / best_rat.q
        return LimitEstimate(Rational(best_rat), r_rat, fitted)
    if max(r_irr, drift) > threshold:
        return None
    return LimitEstimate(_irrational_from(x_irr, max(r_irr, drift, 1e-8)), max(r_irr, drift), x_irr)


def _fit_irrational(slopes: Sequence[Slope], limit: np.ndarray, window: int) -> tuple[float, float]:
    def resid(x: float) -> float:
        return float(np.max(np.abs(_normalized(_intersection_vector(slopes, x)) - limit)))

    grid = np.linspace(-window - 1, window + 1, 4 * 200 * (window + 1) + 1)
    x0 = float(grid[np.argmin([resid(x) for x in grid])])
    step = grid[1] - grid[0]
    opt = minimize_scalar(resid, bounds=(x0 - step, x0 + step), method="bounded", options={"xatol": 1e-10})
    return float(opt.x), float(opt.fun)


# --- the map from markings to structures --------------------------------------

def _normal_form(mu: Marking) -> tuple[MappingClass, int]:
    if mu.transversal is None:
        raise OptimizationFailed("marking has no transversal")
    h = normalizer(mu.base)
    tv = apply(h.inverse(), mu.transversal)
    if tv.q != 1:
        raise OptimizationFailed(f"marking {mu} is not clean")
    return h, tv.p


def _transversal_length(length: float, t: float) -> float:
    return 2 * math.acosh(fn_traces(length, t)[1] / 2)


def m_of_marking(mu: Marking, delta0: float = DELTA0) -> TeichPoint:
    """Canonical structure where mu is a shortest clean marking with both lengths > delta0.

    In the frame of mu the transversal is 0/1 and its length is minimised
    at t = -l/2.  Base and transversal then have equal length exactly at
    l = 2 asinh(1).  When delta0 forbids that value the base length is set
    to 1.01 delta0 and the twist is moved until the transversal matches.
    """
    h, n = _normal_form(mu)
    frame = h @ twist(INF, n)
    f = lambda L: L - _transversal_length(L, -L / 2)
    try:
        length = brentq(f, 0.1, 10.0, xtol=1e-14)
    except ValueError as exc:
        raise OptimizationFailed("equal-length bisection failed") from exc
    t = -length / 2
    if length <= delta0:
        length = 1.01 * delta0
        g = lambda s: _transversal_length(length, -length / 2 + s) - length
        if g(0) > 0:
            raise OptimizationFailed("transversal cannot be made as short as the base")
        hi = 1.0
        while g(hi) < 0:
            hi *= 2
            if hi > 1e6:
                raise OptimizationFailed("twist bracket diverged")
        t = -length / 2 + brentq(g, 0.0, hi, xtol=1e-14)
    return TeichPoint(length, t, frame)


def proxy_distance(a: TeichPoint, b: TeichPoint, bound: int = 10) -> float:
    """max |log(l_a(s)/l_b(s))| over slopes with |p|, q <= bound."""
    return _spectral_gap(length_spectrum(a, bound), length_spectrum(b, bound))


def _spectral_gap(la: dict, lb: dict) -> float:
    return max(abs(math.log(la[s] / lb[s])) for s in la)


@dataclass(frozen=True)
class StepBound:
    max_step: float
    steps: tuple[float, ...]
    min_length: float


def marking_path_step_bound(r: Resolution, delta0: float = DELTA0) -> StepBound:
    marks = marking_sequence(r)
    cache: dict[Marking, tuple[TeichPoint, dict]] = {}

    def point(mu: Marking):
        if mu not in cache:
            m = m_of_marking(mu, delta0)
            cache[mu] = (m, length_spectrum(m, 10))
        return cache[mu]

    pts = [point(mu) for mu in marks]
    lows = [min(length_by_recursion(p, mu.base), length_by_recursion(p, mu.transversal)) for (p, _), mu in zip(pts, marks)]
    steps = tuple(_spectral_gap(a[1], b[1]) for a, b in zip(pts, pts[1:]))
    return StepBound(max(steps, default=0.0), steps, min(lows))
