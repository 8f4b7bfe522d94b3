"""Continued fractions: expansions, convergents and Gosper's homographic action."""
from __future__ import annotations

from fractions import Fraction
from itertools import islice
from typing import Iterable, Iterator


def expand(p: int, q: int) -> list[int]:
    """Regular continued fraction of p/q (q > 0); the last term is >= 2 unless p/q is an integer."""
    if q <= 0:
        raise ValueError("denominator must be positive")
    terms = []
    while q:
        a, r = divmod(p, q)
        terms.append(a)
        p, q = q, r
    return terms


def convergents(terms: Iterable[int]) -> Iterator[tuple[int, int]]:
    p0, q0, p1, q1 = 0, 1, 1, 0
    for a in terms:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        yield p1, q1


def evaluate(terms: Iterable[int]) -> Fraction:
    terms = list(terms)
    value = Fraction(terms[-1])
    for a in reversed(terms[:-1]):
        value = a + 1 / value
    return value


def homographic(a: int, b: int, c: int, d: int, terms: Iterable[int]) -> Iterator[int]:
    """Partial quotients of (a*x + b)/(c*x + d), x given by its partial quotients.

    Gosper's algorithm with exact integer state.  For infinite input the
    output is infinite; for finite input the output is the (finite) expansion
    of the exact rational value.
    """
    it = iter(terms)
    ingested = False
    while True:
        if ingested and c != 0 and c + d != 0 and (c > 0) == (c + d > 0):
            r = a // c
            if r == (a + b) // (c + d):
                yield r
                a, b, c, d = c, d, a - r * c, b - r * d
                continue
        t = next(it, None)
        if t is None:
            # x exhausted: the value is exactly a/c
            if c == 0:
                return
            yield from expand(a, c) if c > 0 else expand(-a, -c)
            return
        a, b, c, d = a * t + b, a, c * t + d, c
        ingested = True


def periodic_terms(head: tuple[int, ...], period: tuple[int, ...]) -> Iterator[int]:
    yield from head
    if period:
        while True:
            yield from period


def approximate(terms: Iterable[int], n: int = 40) -> float:
    last = None
    for p, q in islice(convergents(terms), n):
        last = p / q
    if last is None:
        raise ValueError("empty expansion")
    return last


def canonical_periodic(head: tuple[int, ...], period: tuple[int, ...]):
    """Shortest (head, period) pair describing the same eventually periodic expansion."""
    if not period:
        return tuple(head), ()
    period = tuple(period)
    n = len(period)
    for k in range(1, n + 1):
        if n % k == 0 and period[:k] * (n // k) == period:
            period = period[:k]
            break
    head = list(head)
    # head ending with the period's last term: rotate it into the period
    while len(head) > 1 and head[-1] == period[-1]:
        head.pop()
        period = (period[-1],) + period[:-1]
    if len(head) == 1 and head[0] == period[-1] and head[0] >= 1:
        head.pop()
        period = (period[-1],) + period[:-1]
    return tuple(head), period


def detect_period(terms: list[int], max_period: int = 6, repeats: int = 3):
    """Find an eventually periodic tail repeated at least `repeats` times, or None."""
    n = len(terms)
    best = None
    for start in range(n):
        for k in range(1, max_period + 1):
            tail = terms[start:]
            if len(tail) < k * repeats:
                continue
            block = tail[:k]
            if all(tail[i] == block[i % k] for i in range(len(tail))):
                best = (tuple(terms[:start]), tuple(block))
                break
        if best:
            return best
    return None
