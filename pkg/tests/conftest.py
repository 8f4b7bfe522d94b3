from __future__ import annotations

import math
import random
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from laminarium.curves import MappingClass, Slope, apply, normalizer  # noqa: E402
from laminarium.hierarchy import Marking  # noqa: E402
from laminarium.model import Brick, Front, TubeSimplex, TubeUnion  # noqa: E402

GOLDEN_DIR = Path(__file__).parent / "golden"


def fixture_path(name: str) -> Path:
    if not name.endswith(".toml"):
        name += ".toml"
    return Path(str(resources.files("laminarium") / "fixtures" / name))


@pytest.fixture
def fixtures():
    return fixture_path


# --- random objects -----------------------------------------------------------

def random_slope(rng: random.Random, h: int) -> Slope:
    while True:
        p, q = rng.randint(-h, h), rng.randint(0, h)
        if math.gcd(p, q) == 1 and (q > 0 or p == 1):
            return Slope(p, q)


def random_marking(rng: random.Random, h: int, twist_range: int | None = None) -> Marking:
    """Clean marking with base of height <= h and a transversal n/1 in the base's frame."""
    base = random_slope(rng, h)
    n = rng.randint(-(twist_range or h), twist_range or h)
    return Marking(base, apply(normalizer(base), Slope.of(n, 1)))


def random_tube_config(rng: random.Random, grid: int = 24):
    """A valid tube union and a brick with levels on a 1/grid lattice."""
    while True:
        k = rng.randint(1, 6)
        gap = rng.random() < 0.6
        need = 2 * k if gap else k + 1
        if need > grid + 1:
            continue
        cuts = sorted(rng.sample(range(grid + 1), need))
        spans = [(cuts[2 * j], cuts[2 * j + 1]) for j in range(k)] if gap else list(zip(cuts, cuts[1:]))
        sims = []
        for j, (lo, hi) in enumerate(spans, 1):
            hlo = rng.randint(0, lo) if rng.random() < 0.4 else None
            hhi = rng.randint(hi, grid) if rng.random() < 0.4 else None
            sims.append(TubeSimplex(
                j, Fraction(lo, grid), Fraction(hi, grid),
                None if hlo is None else Fraction(hlo, grid),
                None if hhi is None else Fraction(hhi, grid),
            ))
        ray = rng.choice([None, None, "forward", "backward"])
        b0, b1 = sorted(rng.sample(range(grid + 1), 2))
        B = Brick.span(
            Fraction(b0, grid), Fraction(b1, grid),
            lower_front=rng.choice(list(Front)), upper_front=rng.choice(list(Front)),
        )
        return TubeUnion("g", tuple(sims), gap, ray), B


def oracle_view(u: TubeUnion, B: Brick):
    tubes = [dict(lo=s.lo, hi=s.hi, hlo=s.hlo, hhi=s.hhi) for s in u.simplices]
    kw = dict(
        ray=u.ray,
        upper_sd=B.upper_front is Front.SIMPLY_DEGENERATE,
        lower_sd=B.lower_front is Front.SIMPLY_DEGENERATE,
    )
    return tubes, B.lo, B.hi, kw


# --- hypothesis strategies ----------------------------------------------------

@st.composite
def slopes(draw, h: int = 40):
    q = draw(st.integers(0, h))
    if q == 0:
        return Slope(1, 0)
    p = draw(st.integers(-h, h).filter(lambda p: math.gcd(p, q) == 1))
    return Slope(p, q)


@st.composite
def sl2z(draw, bound: int = 6):
    """Products of a few standard generators; always determinant 1."""
    T = MappingClass(((1, 1), (0, 1)))
    S = MappingClass(((0, -1), (1, 0)))
    g = MappingClass(((1, 0), (0, 1)))
    for gen, n in draw(st.lists(st.tuples(st.sampled_from([T, S]), st.integers(-bound, bound)), max_size=5)):
        for _ in range(abs(n)):
            g = g @ (gen if n > 0 else gen.inverse())
    return g


@st.composite
def markings(draw, h: int = 12):
    base = draw(slopes(h))
    n = draw(st.integers(-h, h))
    return Marking(base, apply(normalizer(base), Slope.of(n, 1)))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
