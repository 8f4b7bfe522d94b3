"""Convergence and divergence analysis of quasi-Fuchsian sequence families.

The checks are one-directional: a family either meets a divergence
criterion, or it passes the necessary conditions for convergence and is
reported as MayConverge.  Nothing here certifies actual convergence.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .affine import Affine, format_affine
from .curves import S11, S04, Irrational, Rational, Slope, SurfaceSig, SymbolicComponent, SymbolicUnion
from .descriptor import (
    End,
    EndInvariantRecord,
    EndKind,
    Op,
    OpKind,
    OmegaComponent,
    ParabolicLocus,
    SequenceFamily,
    SharedCurve,
    SideSpec,
    SymbolicData,
)
from .errors import EstimationFailed, HypothesisViolation, InsufficientSamples, NoConvergenceCandidate, NumericalInstability
from .model import Side, WrappedTorus, WrappingDiagram, diagram_dot, limit_brick_diagram
from .teich import LimitEstimate, TeichPoint, length_of_slope, length_spectrum, thurston_limit_estimate

RULES = {
    "R1": "Theorem main",
    "R2": "Theorem scc case",
    "R3": "same arational support (cited divergence theorem)",
    "GI": "Theorem generalised Ito",
    "GI.length": "Theorem generalised Ito, shared curve lengths tend to 0",
    "GI.wrap": "Theorem generalised Ito, (a_j+1)p_i^j = a_j q_i^j",
    "GI.normalized": "Theorem generalised Ito, normalized sequences",
    "S1": "Theorem no exotic convergence",
    "S2": "Corollary no self-bumping",
    "S3": "Corollary no self-bumping with isolated, part 1",
    "S4": "Corollary no self-bumping with isolated, part 2",
    "Unknown": "no structural theorem applies",
}

DEFAULT_SAMPLES = 40
LENGTH_CAP = 1e12
ZERO_LENGTH = 1e-3
TREND_WINDOW = 10


class Outcome(enum.Enum):
    DIVERGES = "Diverges"
    MAY_CONVERGE = "MayConverge"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    citations: tuple[str, ...]
    rule: Optional[str] = None
    wraps: tuple[WrappedTorus, ...] = ()
    nu_minus: str = ""
    nu_plus: str = ""
    reason: str = ""

    def __post_init__(self):
        if not self.citations:
            raise ValueError("every verdict cites at least one rule")
        if (self.outcome is Outcome.DIVERGES) != (self.rule is not None):
            raise ValueError("exactly the Diverges outcome names a firing rule")

    def __str__(self):
        if self.outcome is Outcome.DIVERGES:
            return f"Diverges({self.rule})"
        if self.outcome is Outcome.INCONCLUSIVE:
            return f"Inconclusive({self.reason})"
        return "MayConverge(" + ", ".join(f"{t.curve}: a={t.wrap}" for t in self.wraps) + ")"


def _diverges(rule: str, reason: str, extra=()) -> Verdict:
    return Verdict(Outcome.DIVERGES, (rule, *extra), rule=rule, reason=reason)


def _inconclusive(reason: str, cite=("GI",)) -> Verdict:
    return Verdict(Outcome.INCONCLUSIVE, tuple(cite), reason=reason)


# --- limits -------------------------------------------------------------------

Limit = Union[Rational, Irrational, SymbolicUnion, None]


@dataclass
class Limits:
    """Thurston limits of both sides; None means the side stays bounded."""

    surface: SurfaceSig
    mu_minus: Limit
    mu_plus: Limit
    shared: list[str]
    exponents: list[tuple[str, Affine, Affine]]
    symbolic: Optional[SymbolicData] = None
    estimates: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def numeric(self) -> bool:
        return self.symbolic is None


def side_samples(fam: SequenceFamily, which: str, n: int) -> list[TeichPoint]:
    """Samples i = 1..n, stopping before lengths leave double range."""
    out = []
    for i in range(1, n + 1):
        m = fam.sample(which, i)
        top = max(length_spectrum(m, 4).values())
        if not math.isfinite(top) or top > LENGTH_CAP:
            break
        out.append(m)
    return out


def _estimate(points: Sequence[TeichPoint]) -> tuple[Limit, Optional[LimitEstimate]]:
    if len(points) < 5:
        raise EstimationFailed(f"only {len(points)} samples stay in double range")
    first = max(length_spectrum(points[0], 4).values())
    last = max(length_spectrum(points[-1], 4).values())
    try:
        est = thurston_limit_estimate(points)
    except (InsufficientSamples, NumericalInstability) as exc:
        raise EstimationFailed(str(exc)) from exc
    if est is None:
        if last <= 2 * first:
            return None, None
        raise EstimationFailed("length ratios do not settle on an intersection vector")
    return est.lamination, est


def _slope_of(lam: Limit) -> Optional[Slope]:
    return lam.slope if isinstance(lam, Rational) else None


def classify_limits(fam: SequenceFamily, samples: int = DEFAULT_SAMPLES) -> Limits:
    if fam.symbolic is not None:
        sd = fam.symbolic
        lim = Limits(fam.surface, sd.mu_minus, sd.mu_plus, fam.shared_curves(), fam.normalizing_exponents(), sd)
        for which, mu in (("lower", sd.mu_minus), ("upper", sd.mu_plus)):
            spec = fam.side(which)
            if spec.base is None or not any(isinstance(o.curve, Slope) for o in spec.ops):
                continue
            lam, est = _estimate(side_samples(fam, which, samples))
            lim.estimates[which] = est
            s = _slope_of(lam)
            if s is not None and str(s) not in mu.ids():
                raise EstimationFailed(f"{which} numeric limit {s} is not a declared component")
            lim.notes.append(f"{which} numeric part cross-checked: {lam if lam is not None else 'bounded'}")
        return lim
    lim = limits_from_samples(side_samples(fam, "lower", samples), side_samples(fam, "upper", samples), fam.surface)
    lim.exponents = fam.normalizing_exponents(lim.shared)
    return lim


def limits_from_samples(lower: Sequence[TeichPoint], upper: Sequence[TeichPoint], surface: SurfaceSig = S11) -> Limits:
    """Limits of two explicit sample sequences; exponents are left empty."""
    lams, estimates = {}, {}
    for which, pts in (("lower", lower), ("upper", upper)):
        lams[which], estimates[which] = _estimate(pts)
    lo, up = _slope_of(lams["lower"]), _slope_of(lams["upper"])
    shared = [str(lo)] if lo is not None and lo == up else []
    return Limits(surface, lams["lower"], lams["upper"], shared, [], None, estimates)


# --- divergence ---------------------------------------------------------------

def _non_scc(mu: Limit) -> list[SymbolicComponent]:
    return [c for c in mu.components if not c.is_scc] if isinstance(mu, SymbolicUnion) else []


def _same_arational(lim: Limits) -> bool:
    a, b = lim.mu_minus, lim.mu_plus
    if isinstance(a, SymbolicUnion) and isinstance(b, SymbolicUnion):
        if len(a.components) != 1 or len(b.components) != 1:
            return False
        x, y = a.components[0], b.components[0]
        return not x.is_scc and not y.is_scc and x.supporting_surface == y.supporting_surface == "S" and x.id == y.id
    if isinstance(a, Irrational) and isinstance(b, Irrational):
        if a.exact and b.exact:
            return a == b
        ea, eb = lim.estimates.get("lower"), lim.estimates.get("upper")
        tol = 2 * max(ea.residual if ea else 0.0, eb.residual if eb else 0.0) + 1e-9
        return abs(a.value() - b.value()) <= tol
    return False


def apply_divergence_theorems(lim: Limits) -> Optional[Verdict]:
    sd = lim.symbolic
    if sd is not None and lim.surface != S11:
        for x in _non_scc(lim.mu_minus):
            for y in _non_scc(lim.mu_plus):
                if sd.shares_boundary(x.supporting_surface, y.supporting_surface):
                    return _diverges("R1", f"supports of {x.id} and {y.id} share a boundary component")
        for s in sd.shared:
            if s.on_boundary or sd.on_support_boundary(s.curve):
                return _diverges("R2", f"shared curve {s.curve} lies on a support boundary")
    if _same_arational(lim):
        return _diverges("R3", "both sides limit to the same arational lamination")
    return None


# --- generalised Ito ----------------------------------------------------------

def length_goes_to_zero(lengths: Sequence[float], floor: float = ZERO_LENGTH, window: int = TREND_WINDOW) -> bool:
    """Below the floor at the end, with a negative fitted trend over the window."""
    if len(lengths) < window:
        return False
    tail = np.asarray(lengths[-window:], dtype=float)
    slope = np.polyfit(np.arange(window), tail, 1)[0]
    return bool(tail[-1] < floor and slope < 0)


def _residual_text(mu: Limit, shared: list[str]) -> str:
    if mu is None:
        return "bounded"
    if isinstance(mu, SymbolicUnion):
        rest = [c.id for c in mu.components if c.id not in shared]
        return " + ".join(rest) if rest else "bounded or free of shared curves"
    if isinstance(mu, Rational) and str(mu.slope) in shared:
        return "bounded or free of shared curves"
    return str(mu)


def apply_generalised_ito(lim: Limits, fam: SequenceFamily, samples: int = DEFAULT_SAMPLES) -> Verdict:
    declared = {s.curve: s for s in lim.symbolic.shared} if lim.symbolic else {}
    for c in lim.shared:
        d = declared.get(c)
        if d is not None and (d.lower_length_to_zero or d.upper_length_to_zero):
            return _diverges("GI.length", f"length of {c} tends to 0 (declared)", ("GI",))
        if lim.numeric:
            curve = Slope.parse(c)
            for which in ("lower", "upper"):
                pts = side_samples(fam, which, samples)
                if length_goes_to_zero([length_of_slope(m, curve) for m in pts]):
                    return _diverges("GI.length", f"{which} length of {c} tends to 0", ("GI",))

    diagram = limit_brick_diagram(lim.exponents)
    if diagram.obstructing:
        return _diverges("GI.wrap", "no integer a_j for " + ", ".join(diagram.obstructing), ("GI",))
    if diagram.undetermined:
        return _inconclusive("both normalizing exponents vanish for " + ", ".join(diagram.undetermined), ("GI", "GI.wrap"))

    cites = ["GI"] + (["GI.wrap"] if lim.shared else [])
    if lim.shared and lim.numeric:
        normed = fam.normalized(lim.shared)
        for which in ("lower", "upper"):
            try:
                lam, _ = _estimate(side_samples(normed, which, samples))
            except EstimationFailed:
                continue
            s = _slope_of(lam)
            if s is not None and str(s) in lim.shared:
                return _inconclusive(f"normalized {which} sequence still limits to {s}", ("GI", "GI.normalized"))
        cites.append("GI.normalized")
    return Verdict(
        Outcome.MAY_CONVERGE, tuple(cites), wraps=tuple(diagram.tori),
        nu_minus=_residual_text(lim.mu_minus, lim.shared), nu_plus=_residual_text(lim.mu_plus, lim.shared),
    )


# --- existence ----------------------------------------------------------------

def generate_existence_family(
    a: Sequence[int],
    mu_minus: SymbolicUnion,
    mu_plus: SymbolicUnion,
    supporting_surfaces: Optional[dict] = None,
    boundary_sharing=(),
    surface: Optional[SurfaceSig] = None,
) -> SequenceFamily:
    """Twist k*a_j below and k*(a_j+1) above each shared c_j, earthquakes along the rest."""
    surfaces = {k: frozenset(v) for k, v in (supporting_surfaces or {}).items()}
    sharing = frozenset(frozenset(p) for p in boundary_sharing)
    shared = [c.id for c in mu_minus.components if c.is_scc and (d := mu_plus.get(c.id)) is not None and d.is_scc]
    if len(shared) != len(a):
        raise ValueError(f"{len(a)} wrapping numbers for {len(shared)} shared curves")
    sd = SymbolicData(mu_minus, mu_plus, surfaces, sharing, ())
    for x in _non_scc(mu_minus):
        for y in _non_scc(mu_plus):
            if sd.shares_boundary(x.supporting_surface, y.supporting_surface):
                raise HypothesisViolation("1*", f"supports of {x.id} and {y.id} share a boundary component")
    nm, npl = _non_scc(mu_minus), _non_scc(mu_plus)
    if (len(mu_minus.components) == len(mu_plus.components) == 1 and len(nm) == len(npl) == 1
            and nm[0].supporting_surface == npl[0].supporting_surface == "S" and nm[0].id == npl[0].id):
        raise HypothesisViolation("2*", f"both laminations are the same arational {nm[0].id}")
    for c in shared:
        if sd.on_support_boundary(c):
            raise HypothesisViolation("3*", f"shared curve {c} lies on a support boundary")
    if surface is None:
        only_shared = all(c.id in shared for c in mu_minus.components + mu_plus.components)
        surface = S11 if len(shared) <= 1 and only_shared and not surfaces else SurfaceSig(2, 0)
    lower, upper = [], []
    for c, aj in zip(shared, a):
        lower.append(Op(OpKind.TWIST, c, Affine(aj, 0).exact()))
        upper.append(Op(OpKind.TWIST, c, Affine(aj + 1, 0).exact()))
    for ops, mu in ((lower, mu_minus), (upper, mu_plus)):
        for comp in mu.components:
            if comp.id not in shared:
                ops.append(Op(OpKind.EARTHQUAKE, comp.id, Affine(1, 0).exact()))
    sd = SymbolicData(mu_minus, mu_plus, surfaces, sharing, tuple(SharedCurve(c) for c in shared))
    return SequenceFamily(surface, "i", SideSpec(None, tuple(lower)), SideSpec(None, tuple(upper)), sd, "existence")


def transliterate(fam: SequenceFamily, lim: Limits) -> SequenceFamily:
    """The symbolic family declaring the numerically estimated limits."""
    def union(mu: Limit) -> SymbolicUnion:
        if mu is None:
            return SymbolicUnion(())
        if isinstance(mu, Rational):
            return SymbolicUnion((SymbolicComponent(str(mu.slope), True, f"A({mu.slope})", mu.weight),))
        return SymbolicUnion((SymbolicComponent(str(mu), False, "S"),))

    sd = SymbolicData(union(lim.mu_minus), union(lim.mu_plus), {}, frozenset(), tuple(SharedCurve(c) for c in lim.shared))
    return SequenceFamily(fam.surface, fam.index_var, SideSpec(None, fam.lower.ops), SideSpec(None, fam.upper.ops), sd, fam.name)


# --- end invariants -----------------------------------------------------------

def _complement_pieces(surface: SurfaceSig, n_curves: int) -> list[bool]:
    """Thrice-punctured-sphere flags for the complement of n disjoint curves."""
    if surface == S11 and n_curves == 1:
        return [True]
    if surface == S04 and n_curves == 1:
        return [True, True]
    # unknown topology: claim nothing
    return [False]


def limit_end_invariants(lim: Limits, verdict: Verdict) -> EndInvariantRecord:
    if verdict.outcome is not Outcome.MAY_CONVERGE:
        raise NoConvergenceCandidate(f"no convergence candidate: {verdict}")
    wraps = {t.curve: t for t in verdict.wraps}
    degenerate = {"Upper": [], "Lower": []}
    parabolic = {"Upper": [], "Lower": []}
    notes = []
    for side, mu, other in (("Lower", lim.mu_minus, lim.mu_plus), ("Upper", lim.mu_plus, lim.mu_minus)):
        if isinstance(mu, SymbolicUnion):
            for c in mu.components:
                if c.id in wraps:
                    continue
                if c.is_scc:
                    parabolic[side].append((c.id, None))
                else:
                    degenerate[side].append((c.id, c.supporting_surface))
        elif isinstance(mu, Irrational):
            degenerate[side].append((str(mu), "S"))
        elif isinstance(mu, Rational) and str(mu.slope) not in wraps:
            parabolic[side].append((str(mu.slope), None))
    for curve, t in wraps.items():
        parabolic["Upper" if t.parabolic_side is Side.UPPER else "Lower"].append((curve, t.wrap))

    boundaries = lim.symbolic.supporting_surfaces if lim.symbolic else {}
    ends, loci, omega = [], [], []
    for side in ("Lower", "Upper"):
        for lam, _support in degenerate[side]:
            ends.append(End(side, EndKind.SIMPLY_DEGENERATE, lam))
        whole = any(support == "S" for _, support in degenerate[side])
        for curve, _ in parabolic[side]:
            touching = any(curve in boundaries.get(support, ()) for _, support in degenerate[side]) or whole
            loci.append(ParabolicLocus(side, not touching, curve))
        if not degenerate[side] and not parabolic[side]:
            ends.append(End(side, EndKind.GEOMETRICALLY_FINITE))
            omega.append(OmegaComponent(side, False, True))
        elif not whole:
            if not degenerate[side]:
                ends.append(End(side, EndKind.GEOMETRICALLY_FINITE))
                for flag in _complement_pieces(lim.surface, len(parabolic[side])):
                    omega.append(OmegaComponent(side, flag, False))
            else:
                omega.append(OmegaComponent(side, False, False))
    for curve, _ in parabolic["Upper"]:
        for lam, _ in degenerate["Upper"]:
            notes.append(f"upper parabolic {curve} must not cross {lam}")
    full = [c for c in omega if c.is_full_S]
    b_group = len(full) == 1 and full[0].side == "Lower"
    return EndInvariantRecord(b_group, tuple(ends), tuple(loci), tuple(omega), notes=tuple(notes)).validate()


# --- structural conclusions ---------------------------------------------------

def structural_verdicts(rec: EndInvariantRecord) -> list[tuple[str, str]]:
    rec.validate()
    isolated = any(p.isolated for p in rec.parabolic_loci)
    infinite = any(e.kind is EndKind.SIMPLY_DEGENERATE for e in rec.ends)
    pants = [c.is_thrice_punctured_sphere for c in rec.omega_components]
    out = []
    if rec.is_b_group and not isolated:
        out.append(("S1", "no sequence of quasi-Fuchsian groups converges exotically to this b-group"))
    if not isolated and infinite and all(
        c.is_thrice_punctured_sphere for c in rec.omega_components if not c.is_full_S
    ):
        out.append(("S2", "QF(S) does not bump itself here; AH(S) is locally connected here"))
    if all(pants):
        out.append(("S3", "QF(S) does not bump itself here"))
    if rec.is_b_group and all(c.is_thrice_punctured_sphere for c in rec.omega_components if c.side == "Upper"):
        out.append(("S4", "the Bers slice containing this group does not bump itself"))
    return out or [("Unknown", "no structural theorem applies; self-bumping is not excluded")]


# --- pipeline and report ------------------------------------------------------

@dataclass
class Analysis:
    family: SequenceFamily
    verdict: Verdict
    limits: Optional[Limits] = None
    diagram: Optional[WrappingDiagram] = None
    record: Optional[EndInvariantRecord] = None
    structural: list = field(default_factory=list)


def analyze(fam: SequenceFamily, samples: int = DEFAULT_SAMPLES) -> Analysis:
    try:
        lim = classify_limits(fam, samples)
    except EstimationFailed as exc:
        return Analysis(fam, _inconclusive(f"limit estimation failed: {exc}"))
    verdict = apply_divergence_theorems(lim) or apply_generalised_ito(lim, fam, samples)
    out = Analysis(fam, verdict, lim, limit_brick_diagram(lim.exponents))
    if verdict.outcome is Outcome.MAY_CONVERGE:
        out.record = limit_end_invariants(lim, verdict)
        out.structural = structural_verdicts(out.record)
    return out


def exit_code(verdict: Verdict) -> int:
    return 2 if verdict.outcome is Outcome.INCONCLUSIVE else 0


def _lam_text(mu: Limit) -> str:
    return "bounded" if mu is None else str(mu) or "empty"


def report(a: Analysis) -> str:
    v = a.verdict
    lines = [f"family: {a.family.name or 'unnamed'} on {a.family.surface}", f"verdict: {v.outcome.value}"]
    if v.rule:
        lines.append(f"rule: {v.rule} ({RULES[v.rule]})")
    if v.reason:
        lines.append(f"reason: {v.reason}")
    lines.append("citations:")
    lines += [f"  {c}: {RULES[c]}" for c in v.citations]
    if a.limits is not None:
        lines.append(f"limits: mu- = {_lam_text(a.limits.mu_minus)}, mu+ = {_lam_text(a.limits.mu_plus)}")
        lines.append("shared curves: " + (", ".join(a.limits.shared) or "none"))
        for c, p, q in a.limits.exponents:
            lines.append(f"  {c}: p_i = {format_affine(p, a.family.index_var)}, q_i = {format_affine(q, a.family.index_var)}")
        lines += [f"note: {n}" for n in a.limits.notes]
    if v.outcome is Outcome.MAY_CONVERGE:
        lines.append("wrapping numbers:")
        if not v.wraps:
            lines.append("  none")
        for j, t in enumerate(v.wraps, 1):
            side = "upper" if t.parabolic_side is Side.UPPER else "lower"
            lines.append(f"  a_{j} = {t.wrap}  curve {t.curve}  {side} parabolic")
        lines.append(f"residual laminations: nu- = {v.nu_minus}, nu+ = {v.nu_plus}")
    if a.record is not None:
        lines.append("predicted end invariants:")
        for e in a.record.ends:
            kind = "geometrically finite" if e.kind is EndKind.GEOMETRICALLY_FINITE else f"simply degenerate, ending lamination {e.lamination}"
            lines.append(f"  {e.side.lower()} end: {kind}")
        for p in a.record.parabolic_loci:
            lines.append(f"  {p.side.lower()} parabolic locus at {p.curve}" + (" (isolated)" if p.isolated else ""))
        lines.append(f"  b-group: {'yes' if a.record.is_b_group else 'no'}")
        for n in a.record.notes:
            lines.append(f"  constraint: {n}")
        lines.append("structural conclusions:")
        lines += [f"  {rid}: {text} [{RULES[rid]}]" for rid, text in a.structural]
    if v.outcome is Outcome.MAY_CONVERGE:
        lines.append("only necessary conditions were checked; convergence is not certified")
    return "\n".join(lines) + "\n"


def structural_report(rec: EndInvariantRecord) -> str:
    lines = ["structural conclusions:"]
    lines += [f"  {rid}: {text} [{RULES[rid]}]" for rid, text in structural_verdicts(rec)]
    return "\n".join(lines) + "\n"


def report_dot(a: Analysis) -> str:
    return diagram_dot(a.diagram if a.diagram is not None else WrappingDiagram())
