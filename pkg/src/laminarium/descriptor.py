"""Descriptor files for sequence families and end-invariant records.

Both formats are TOML.  A family file looks like::

    [family]
    surface = "S1,1"
    index = "i"

    [lower]
    base = "fn(1.0, 0.3)"
    ops = ["twist(0/1, i)"]

    [upper]
    base = "fn(1.0, 0.3)"
    ops = ["twist(0/1, 2*i)"]

Symbolic families use ``base = "symbolic"`` and a ``[symbolic]`` table
declaring the limit laminations.  Unknown keys are errors.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import tomli

from .affine import Affine, format_affine, parse_affine
from .curves import S11, Slope, SurfaceSig, SymbolicComponent, SymbolicUnion
from .errors import NonAffineExponents, ParseError, SemanticError
from .teich import Earthquake, TeichPoint, Twist, deform, fn

Curve = Union[Slope, str]

_SURFACE = re.compile(r"\s*S\s*(\d+)\s*,\s*(\d+)\s*")
_OP = re.compile(r"\s*(twist|earthquake)\s*\(\s*([^,]+?)\s*,\s*(.+?)\s*\)\s*")
_FN = re.compile(r"\s*fn\s*\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)\s*")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


class OpKind(enum.Enum):
    TWIST = "twist"
    EARTHQUAKE = "earthquake"


@dataclass(frozen=True)
class Op:
    kind: OpKind
    curve: Curve
    exponent: Affine

    def at(self, i: int):
        value = self.exponent(i)
        if self.kind is OpKind.TWIST:
            return Twist(self.curve, int(value))
        return Earthquake(self.curve, float(value))

    def __str__(self):
        return f"{self.kind.value}({self.curve}, {format_affine(self.exponent)})"


@dataclass(frozen=True)
class SideSpec:
    base: Optional[TeichPoint]
    ops: tuple[Op, ...] = ()

    @property
    def symbolic(self) -> bool:
        return self.base is None

    def twist_exponent(self, curve: str) -> Affine:
        total = Affine(0, 0).exact()
        for op in self.ops:
            if op.kind is OpKind.TWIST and str(op.curve) == curve:
                total = total + op.exponent.exact()
        return total

    def twisted_curves(self) -> list[str]:
        out: list[str] = []
        for op in self.ops:
            if op.kind is OpKind.TWIST and str(op.curve) not in out:
                out.append(str(op.curve))
        return out


@dataclass(frozen=True)
class SharedCurve:
    curve: str
    on_boundary: bool = False
    w: float = 1.0
    v: float = 1.0
    p: Optional[Affine] = None
    q: Optional[Affine] = None
    lower_length_to_zero: bool = False
    upper_length_to_zero: bool = False


@dataclass(frozen=True)
class SymbolicData:
    mu_minus: SymbolicUnion
    mu_plus: SymbolicUnion
    supporting_surfaces: dict = field(default_factory=dict)
    boundary_sharing: frozenset = frozenset()
    shared: tuple[SharedCurve, ...] = ()

    def shares_boundary(self, a: str, b: str) -> bool:
        if frozenset((a, b)) in self.boundary_sharing:
            return True
        ba, bb = self.supporting_surfaces.get(a), self.supporting_surfaces.get(b)
        return bool(ba and bb and ba & bb)

    def on_support_boundary(self, curve: str) -> bool:
        supports = {c.supporting_surface for c in self.mu_minus.components + self.mu_plus.components if not c.is_scc}
        return any(curve in self.supporting_surfaces.get(s, ()) for s in supports)


@dataclass(frozen=True)
class SequenceFamily:
    surface: SurfaceSig
    index_var: str
    lower: SideSpec
    upper: SideSpec
    symbolic: Optional[SymbolicData] = None
    name: str = ""

    @property
    def numeric(self) -> bool:
        return not (self.lower.symbolic or self.upper.symbolic)

    def side(self, which: str) -> SideSpec:
        return self.lower if which == "lower" else self.upper

    def sample(self, which: str, i: int) -> TeichPoint:
        """The structure at index i; ops on undeclared-numeric curves are skipped."""
        spec = self.side(which)
        if spec.base is None:
            raise SemanticError(f"{which} side is symbolic and cannot be sampled")
        m = spec.base
        for op in spec.ops:
            if isinstance(op.curve, Slope):
                m = deform(m, op.at(i))
        return m

    def has_symbolic_ops(self) -> bool:
        return any(not isinstance(op.curve, Slope) for op in self.lower.ops + self.upper.ops)

    def shared_curves(self) -> list[str]:
        if self.symbolic is not None:
            return [s.curve for s in self.symbolic.shared]
        up = self.upper.twisted_curves()
        return [c for c in self.lower.twisted_curves() if c in up]

    def normalizing_exponents(self, curves=None) -> list[tuple[str, Affine, Affine]]:
        """(curve, p, q): declared values, else the negated twist exponents."""
        declared = {s.curve: s for s in self.symbolic.shared} if self.symbolic else {}
        out = []
        for c in self.shared_curves() if curves is None else [str(c) for c in curves]:
            d = declared.get(c)
            p = d.p if d is not None and d.p is not None else -self.lower.twist_exponent(c)
            q = d.q if d is not None and d.q is not None else -self.upper.twist_exponent(c)
            out.append((c, p, q))
        return out

    def normalized(self, curves=None) -> "SequenceFamily":
        """Compose the normalizing twists after each side's ops."""
        lo, up = list(self.lower.ops), list(self.upper.ops)
        for c, p, q in self.normalizing_exponents(curves):
            curve = _curve_of(c)
            lo.append(Op(OpKind.TWIST, curve, p))
            up.append(Op(OpKind.TWIST, curve, q))
        return replace(self, lower=replace(self.lower, ops=tuple(lo)), upper=replace(self.upper, ops=tuple(up)))


def _curve_of(text: str) -> Curve:
    try:
        return Slope.parse(text)
    except ValueError:
        return text


# --- parsing ------------------------------------------------------------------

def _locate(text: str, key: str) -> tuple[int, int]:
    pat = re.compile(r"^\s*(\[*)\s*" + re.escape(key) + r"\b", re.M)
    m = pat.search(text)
    if not m:
        return 1, 1
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return line, col


def _load(text: str) -> dict:
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(getattr(exc, "lineno", 0), getattr(exc, "colno", 0), exc.msg if hasattr(exc, "msg") else str(exc)) from exc


def _check_keys(text: str, table: dict, allowed: set[str], where: str):
    for key in table:
        if key not in allowed:
            line, col = _locate(text, key)
            raise ParseError(line, col, f"one of {sorted(allowed)} in {where}, got {key!r}")


def _require(text: str, table: dict, key: str, where: str, kind=str):
    if key not in table:
        raise ParseError(*_locate(text, where.strip("[]")), f"key {key!r} in {where}")
    value = table[key]
    if not isinstance(value, kind):
        raise ParseError(*_locate(text, key), f"{kind.__name__} for {where}.{key}")
    return value


def parse_surface(text: str) -> SurfaceSig:
    m = _SURFACE.fullmatch(text)
    if not m:
        raise SemanticError(f"surface must look like S1,1, got {text!r}")
    return SurfaceSig(int(m.group(1)), int(m.group(2)))


def _affine(expr: str, var: str, integral: bool) -> Affine:
    try:
        a = parse_affine(expr, var)
    except NonAffineExponents as exc:
        raise SemanticError(f"exponent {expr!r}: {exc}") from exc
    if integral and not a.is_integral:
        raise SemanticError(f"twist exponent {expr!r} needs integer coefficients")
    return a


def parse_op(text: str, var: str = "i") -> Op:
    m = _OP.fullmatch(text)
    if not m:
        raise SemanticError(f"cannot read op {text!r}")
    kind = OpKind(m.group(1))
    curve = _curve_of(m.group(2))
    if isinstance(curve, str) and not _IDENT.fullmatch(curve):
        raise SemanticError(f"bad curve {curve!r} in {text!r}")
    return Op(kind, curve, _affine(m.group(3), var, kind is OpKind.TWIST))


def parse_base(text: str) -> Optional[TeichPoint]:
    if text.strip() == "symbolic":
        return None
    m = _FN.fullmatch(text)
    if not m:
        raise SemanticError(f"base must be fn(L, T) or symbolic, got {text!r}")
    try:
        return fn(float(m.group(1)), float(m.group(2)))
    except ValueError as exc:
        raise SemanticError(str(exc)) from exc


_FAMILY_KEYS = {"surface", "index", "name"}
_SIDE_KEYS = {"base", "ops"}
_SYMBOLIC_KEYS = {"mu_minus", "mu_plus", "supporting_surfaces", "boundary_sharing", "shared"}
_COMPONENT_KEYS = {"id", "scc", "support", "weight"}
_SURFACE_KEYS = {"id", "boundary"}
_SHARED_KEYS = {"curve", "on_boundary", "w", "v", "p", "q", "lower_length_to_zero", "upper_length_to_zero"}


def _components(text, items, where) -> SymbolicUnion:
    comps = []
    for item in items:
        if not isinstance(item, dict):
            raise ParseError(*_locate(text, where), f"inline tables in {where}")
        _check_keys(text, item, _COMPONENT_KEYS, where)
        cid = _require(text, item, "id", where)
        scc = bool(item.get("scc", False))
        support = item.get("support", f"A({cid})" if scc else "S")
        comps.append(SymbolicComponent(cid, scc, support, item.get("weight")))
    try:
        return SymbolicUnion(tuple(comps))
    except ValueError as exc:
        raise SemanticError(f"{where}: {exc}") from exc


def _symbolic(text: str, table: dict, var: str) -> SymbolicData:
    _check_keys(text, table, _SYMBOLIC_KEYS, "[symbolic]")
    mu_minus = _components(text, table.get("mu_minus", []), "mu_minus")
    mu_plus = _components(text, table.get("mu_plus", []), "mu_plus")
    surfaces = {}
    for item in table.get("supporting_surfaces", []):
        _check_keys(text, item, _SURFACE_KEYS, "supporting_surfaces")
        surfaces[_require(text, item, "id", "supporting_surfaces")] = frozenset(item.get("boundary", []))
    sharing = set()
    for pair in table.get("boundary_sharing", []):
        if len(pair) != 2:
            raise SemanticError(f"boundary_sharing entries are pairs, got {pair!r}")
        a, b = pair
        if a == b:
            raise SemanticError(f"boundary sharing must be irreflexive: {a!r}")
        sharing.add(frozenset((a, b)))
    shared = []
    for item in table.get("shared", []):
        _check_keys(text, item, _SHARED_KEYS, "shared")
        cid = _require(text, item, "curve", "shared")
        for side, mu in (("mu_minus", mu_minus), ("mu_plus", mu_plus)):
            comp = mu.get(cid)
            if comp is None or not comp.is_scc:
                raise SemanticError(f"shared curve {cid!r} must be a simple closed curve of {side}")
        p = _affine(item["p"], var, True) if "p" in item else None
        q = _affine(item["q"], var, True) if "q" in item else None
        shared.append(SharedCurve(
            cid, bool(item.get("on_boundary", False)), float(item.get("w", 1.0)), float(item.get("v", 1.0)),
            p, q, bool(item.get("lower_length_to_zero", False)), bool(item.get("upper_length_to_zero", False)),
        ))
    return SymbolicData(mu_minus, mu_plus, surfaces, frozenset(sharing), tuple(shared))


def parse_family(text: str) -> SequenceFamily:
    data = _load(text)
    _check_keys(text, data, {"family", "lower", "upper", "symbolic"}, "top level")
    fam = data.get("family")
    if not isinstance(fam, dict):
        raise ParseError(1, 1, "a [family] table")
    _check_keys(text, fam, _FAMILY_KEYS, "[family]")
    surface = parse_surface(_require(text, fam, "surface", "[family]"))
    var = fam.get("index", "i")
    if not _IDENT.fullmatch(var):
        raise SemanticError(f"index variable {var!r} is not an identifier")
    sides = {}
    for which in ("lower", "upper"):
        table = data.get(which)
        if not isinstance(table, dict):
            raise ParseError(*_locate(text, "family"), f"a [{which}] table")
        _check_keys(text, table, _SIDE_KEYS, f"[{which}]")
        base = parse_base(_require(text, table, "base", f"[{which}]"))
        ops = tuple(parse_op(o, var) for o in table.get("ops", []))
        if base is not None and surface != S11:
            raise SemanticError(f"numeric structures exist only on S1,1, not {surface}")
        for op in ops:
            if isinstance(op.curve, Slope) and not surface.numeric:
                raise SemanticError(f"slope {op.curve} on the symbolic surface {surface}")
        sides[which] = SideSpec(base, ops)
    symbolic = _symbolic(text, data["symbolic"], var) if "symbolic" in data else None
    out = SequenceFamily(surface, var, sides["lower"], sides["upper"], symbolic, fam.get("name", ""))
    _validate(out)
    return out


def _validate(f: SequenceFamily):
    needs = not f.numeric or f.has_symbolic_ops()
    if f.symbolic is None and needs:
        raise SemanticError("symbolic bases or symbolic curves need a [symbolic] table")
    if f.symbolic is not None and not needs:
        raise SemanticError("a [symbolic] table is only allowed when some data is symbolic")
    if f.symbolic is not None and f.surface == S11:
        if f.symbolic.boundary_sharing or any(c.on_boundary for c in f.symbolic.shared):
            raise SemanticError("S1,1 has no proper non-annular subsurfaces to share boundaries")
    if f.symbolic is not None:
        declared = f.symbolic.mu_minus.ids() | f.symbolic.mu_plus.ids()
        for op in f.lower.ops + f.upper.ops:
            if isinstance(op.curve, str) and op.curve not in declared:
                raise SemanticError(f"curve {op.curve!r} is not declared in [symbolic]")


def load_family(path) -> SequenceFamily:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(1, exc.start + 1, "UTF-8 text") from exc
    return parse_family(text)


# --- writing ------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _base_text(m: Optional[TeichPoint]) -> str:
    if m is None:
        return "symbolic"
    return f"fn({m.fn_length!r}, {m.fn_twist!r})"


def _comp_text(c: SymbolicComponent) -> str:
    parts = [f"id = {_q(c.id)}", f"scc = {'true' if c.is_scc else 'false'}", f"support = {_q(c.supporting_surface)}"]
    if c.weight is not None:
        parts.append(f"weight = {c.weight!r}")
    return "{ " + ", ".join(parts) + " }"


def dump_family(f: SequenceFamily) -> str:
    """Inverse of parse_family for families whose bases have no extra frame."""
    lines = ["[family]", f"surface = {_q(str(f.surface))}", f"index = {_q(f.index_var)}"]
    if f.name:
        lines.append(f"name = {_q(f.name)}")
    for which in ("lower", "upper"):
        s = f.side(which)
        lines += ["", f"[{which}]", f"base = {_q(_base_text(s.base))}"]
        ops = ", ".join(_q(f"{o.kind.value}({o.curve}, {format_affine(o.exponent, f.index_var)})") for o in s.ops)
        lines.append(f"ops = [{ops}]")
    if f.symbolic is not None:
        sd = f.symbolic
        lines += ["", "[symbolic]"]
        for key, mu in (("mu_minus", sd.mu_minus), ("mu_plus", sd.mu_plus)):
            lines.append(f"{key} = [" + ", ".join(_comp_text(c) for c in mu.components) + "]")
        surf = ", ".join(
            "{ id = " + _q(k) + ", boundary = [" + ", ".join(_q(b) for b in sorted(v)) + "] }"
            for k, v in sorted(sd.supporting_surfaces.items())
        )
        lines.append(f"supporting_surfaces = [{surf}]")
        pairs = ", ".join("[" + ", ".join(_q(x) for x in sorted(p)) + "]" for p in sorted(sd.boundary_sharing, key=sorted))
        lines.append(f"boundary_sharing = [{pairs}]")
        shared = []
        for s in sd.shared:
            parts = [f"curve = {_q(s.curve)}", f"on_boundary = {str(s.on_boundary).lower()}", f"w = {s.w!r}", f"v = {s.v!r}"]
            if s.p is not None:
                parts.append(f"p = {_q(format_affine(s.p, f.index_var))}")
            if s.q is not None:
                parts.append(f"q = {_q(format_affine(s.q, f.index_var))}")
            if s.lower_length_to_zero:
                parts.append("lower_length_to_zero = true")
            if s.upper_length_to_zero:
                parts.append("upper_length_to_zero = true")
            shared.append("{ " + ", ".join(parts) + " }")
        lines.append("shared = [" + ", ".join(shared) + "]")
    return "\n".join(lines) + "\n"


# --- end-invariant records ----------------------------------------------------

class EndKind(enum.Enum):
    GEOMETRICALLY_FINITE = "GeometricallyFinite"
    SIMPLY_DEGENERATE = "SimplyDegenerate"


@dataclass(frozen=True)
class End:
    side: str
    kind: EndKind
    lamination: Optional[str] = None


@dataclass(frozen=True)
class ParabolicLocus:
    side: str
    isolated: bool
    curve: Optional[str] = None


@dataclass(frozen=True)
class OmegaComponent:
    side: str
    is_thrice_punctured_sphere: bool
    is_full_S: bool = False


@dataclass(frozen=True)
class EndInvariantRecord:
    is_b_group: bool
    ends: tuple[End, ...] = ()
    parabolic_loci: tuple[ParabolicLocus, ...] = ()
    omega_components: tuple[OmegaComponent, ...] = ()
    generalized_pants: Optional[dict] = None
    notes: tuple[str, ...] = ()

    def validate(self) -> "EndInvariantRecord":
        for item in self.ends + self.parabolic_loci + self.omega_components:
            if item.side not in ("Upper", "Lower"):
                raise SemanticError(f"side must be Upper or Lower, got {item.side!r}")
        full = [c for c in self.omega_components if c.is_full_S]
        if self.is_b_group and (len(full) != 1 or full[0].side != "Lower"):
            raise SemanticError("a b-group has exactly one full-S component, on the Lower side")
        for c in self.omega_components:
            if c.is_full_S and c.is_thrice_punctured_sphere:
                raise SemanticError("a full-S component is not a thrice-punctured sphere")
        return self


_RECORD_KEYS = {"b_group", "ends", "parabolic", "omega", "generalized_pants"}


def parse_record(text: str) -> EndInvariantRecord:
    data = _load(text)
    _check_keys(text, data, _RECORD_KEYS, "record")
    ends, loci, omega = [], [], []
    for item in data.get("ends", []):
        _check_keys(text, item, {"side", "kind", "lamination"}, "[[ends]]")
        try:
            kind = EndKind(_require(text, item, "kind", "[[ends]]"))
        except ValueError as exc:
            raise SemanticError(str(exc)) from exc
        if kind is EndKind.SIMPLY_DEGENERATE and "lamination" not in item:
            raise SemanticError("simply degenerate ends name their ending lamination")
        ends.append(End(_require(text, item, "side", "[[ends]]"), kind, item.get("lamination")))
    for item in data.get("parabolic", []):
        _check_keys(text, item, {"side", "isolated", "curve"}, "[[parabolic]]")
        loci.append(ParabolicLocus(
            _require(text, item, "side", "[[parabolic]]"), _require(text, item, "isolated", "[[parabolic]]", bool),
            item.get("curve"),
        ))
    for item in data.get("omega", []):
        _check_keys(text, item, {"side", "thrice_punctured_sphere", "full_S"}, "[[omega]]")
        omega.append(OmegaComponent(
            _require(text, item, "side", "[[omega]]"),
            bool(item.get("thrice_punctured_sphere", False)),
            bool(item.get("full_S", False)),
        ))
    rec = EndInvariantRecord(
        bool(data.get("b_group", False)), tuple(ends), tuple(loci), tuple(omega), data.get("generalized_pants")
    )
    return rec.validate()


def load_record(path) -> EndInvariantRecord:
    with open(path, encoding="utf-8") as fh:
        return parse_record(fh.read())


def dump_record(rec: EndInvariantRecord) -> str:
    lines = [f"b_group = {str(rec.is_b_group).lower()}"]
    for e in rec.ends:
        lines += ["", "[[ends]]", f"side = {_q(e.side)}", f"kind = {_q(e.kind.value)}"]
        if e.lamination is not None:
            lines.append(f"lamination = {_q(e.lamination)}")
    for p in rec.parabolic_loci:
        lines += ["", "[[parabolic]]", f"side = {_q(p.side)}", f"isolated = {str(p.isolated).lower()}"]
        if p.curve is not None:
            lines.append(f"curve = {_q(p.curve)}")
    for c in rec.omega_components:
        lines += [
            "", "[[omega]]", f"side = {_q(c.side)}",
            f"thrice_punctured_sphere = {str(c.is_thrice_punctured_sphere).lower()}",
            f"full_S = {str(c.is_full_S).lower()}",
        ]
    return "\n".join(lines) + "\n"

