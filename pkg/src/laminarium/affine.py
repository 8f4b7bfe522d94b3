"""Affine expressions a*i + b in a single index variable."""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import NonAffineExponents

Number = Union[int, Fraction, float]


@dataclass(frozen=True)
class Affine:
    coeff: Number
    const: Number = 0

    def __call__(self, i):
        return self.coeff * i + self.const

    def __neg__(self):
        return Affine(-self.coeff, -self.const)

    def __add__(self, other: "Affine"):
        return Affine(self.coeff + other.coeff, self.const + other.const)

    def scale(self, k: Number) -> "Affine":
        return Affine(self.coeff * k, self.const * k)

    @property
    def is_integral(self) -> bool:
        return all(Fraction(x).denominator == 1 for x in (self.coeff, self.const))

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0 and self.const == 0

    def exact(self) -> "Affine":
        return Affine(Fraction(self.coeff), Fraction(self.const))

    def __str__(self):
        return format_affine(self)


def _fmt_num(x: Number) -> str:
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)


def format_affine(a: Affine, var: str = "i") -> str:
    parts = []
    if a.coeff:
        c = _fmt_num(a.coeff)
        parts.append(var if c == "1" else f"-{var}" if c == "-1" else f"{c}*{var}")
    if a.const or not parts:
        c = _fmt_num(a.const)
        if parts and not c.startswith("-"):
            parts.append("+" + c)
        else:
            parts.append(c)
    return "".join(parts)


class _Poly:
    """Polynomial in the index variable as {degree: coefficient}."""

    def __init__(self, terms):
        self.terms = {d: c for d, c in terms.items() if c != 0}

    def __add__(self, o):
        t = dict(self.terms)
        for d, c in o.terms.items():
            t[d] = t.get(d, 0) + c
        return _Poly(t)

    def __neg__(self):
        return _Poly({d: -c for d, c in self.terms.items()})

    def __mul__(self, o):
        t = {}
        for d1, c1 in self.terms.items():
            for d2, c2 in o.terms.items():
                t[d1 + d2] = t.get(d1 + d2, 0) + c1 * c2
        return _Poly(t)

    def constant(self):
        if any(d != 0 for d in self.terms):
            return None
        return self.terms.get(0, 0)


def _walk(node, var):
    if isinstance(node, ast.Expression):
        return _walk(node.body, var)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        v = node.value if isinstance(node.value, float) else Fraction(node.value)
        return _Poly({0: v})
    if isinstance(node, ast.Name) and node.id == var:
        return _Poly({1: Fraction(1)})
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _walk(node.operand, var)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        left, right = _walk(node.left, var), _walk(node.right, var)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left + (-right)
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            d = right.constant()
            if not d:
                raise NonAffineExponents("division by a non-constant or zero")
            inv = 1 / d if isinstance(d, float) else Fraction(1) / d
            return left * _Poly({0: inv})
        if isinstance(node.op, (ast.Pow, ast.BitXor)):
            e = right.constant()
            if e is None or e != int(e) or e < 0:
                raise NonAffineExponents("exponent must be a non-negative integer constant")
            out = _Poly({0: Fraction(1)})
            for _ in range(int(e)):
                out = out * left
            return out
    raise NonAffineExponents(f"unsupported expression element {ast.dump(node)}")


def parse_affine(text: str, var: str = "i") -> Affine:
    """Parse expressions such as "i", "-2i+1", "0.5*i", "3*(i-1)"."""
    src = re.sub(r"(\d)\s*(" + re.escape(var) + r")\b", r"\1*\2", text.strip())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise NonAffineExponents(f"cannot parse {text!r}") from exc
    poly = _walk(tree, var)
    if any(d > 1 for d in poly.terms):
        raise NonAffineExponents(f"{text!r} is not affine in {var}")
    return Affine(poly.terms.get(1, Fraction(0)), poly.terms.get(0, Fraction(0)))
