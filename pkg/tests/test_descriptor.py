import pytest
from hypothesis import given, strategies as st

from conftest import fixture_path, slopes
from laminarium.affine import Affine
from laminarium.curves import S11, Slope
from laminarium.descriptor import (
    EndKind,
    Op,
    OpKind,
    SequenceFamily,
    SideSpec,
    dump_family,
    dump_record,
    load_family,
    load_record,
    parse_family,
    parse_record,
)
from laminarium.errors import ParseError, SemanticError
from laminarium.teich import Twist, fn

FAMILIES = ["anderson_canary", "anderson_canary_symbolic", "mixed", "no_integer_wrap", "one_sided",
            "r1_main", "r2_scc", "r3_same_support"]
RECORDS = ["s1_b_group", "s2_degenerate", "s3_isolated", "s4_bers", "unknown_regular"]

AC = """
[family]
surface = "S1,1"
index = "i"

[lower]
base = "fn(1.0, 0.3)"
ops = ["twist(0/1, i)"]

[upper]
base = "fn(1.0, 0.3)"
ops = ["twist(0/1, 2*i)"]
"""

small = st.integers(-6, 6)
twist_ops = st.builds(lambda c, a, b: Op(OpKind.TWIST, c, Affine(a, b)), slopes(9), small, small)
quake_ops = st.builds(
    lambda c, a, b: Op(OpKind.EARTHQUAKE, c, Affine(a, b)),
    slopes(9), small, st.integers(-20, 20).map(lambda k: k / 4),
)
sides = st.builds(
    SideSpec,
    st.builds(fn, st.integers(1, 400).map(lambda k: k / 100), st.integers(-300, 300).map(lambda k: k / 100)),
    st.lists(st.one_of(twist_ops, quake_ops), max_size=4).map(tuple),
)
families = st.builds(SequenceFamily, st.just(S11), st.sampled_from(["i", "n", "k"]), sides, sides,
                     st.none(), st.sampled_from(["", "demo", "x-1"]))


@pytest.mark.parametrize("name", FAMILIES)
def test_bundled_families_round_trip(name):
    f = load_family(fixture_path(name))
    assert parse_family(dump_family(f)) == f


@pytest.mark.parametrize("name", RECORDS)
def test_bundled_records_round_trip(name):
    r = load_record(fixture_path(name))
    assert parse_record(dump_record(r)) == r


@given(families)
def test_numeric_family_round_trip(f):
    assert parse_family(dump_family(f)) == f


def test_anderson_canary_parses():
    f = parse_family(AC)
    assert f.numeric and f.surface == S11
    assert f.lower.ops == (Op(OpKind.TWIST, Slope(0, 1), Affine(1, 0)),)
    assert f.upper.twist_exponent("0/1") == Affine(2, 0)
    assert f.shared_curves() == ["0/1"]
    assert f.lower.ops[0].at(3) == Twist(Slope(0, 1), 3)
    m = f.sample("upper", 2)
    assert m.frame.matrix == ((1, 0), (-4, 1))


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as exc:
        parse_family(AC.replace('surface = "S1,1"', 'surface = "S1,1'))
    assert exc.value.line == 3
    with pytest.raises(ParseError) as exc:
        parse_family(AC + "\n[extra]\nx = 1\n")
    assert exc.value.line > 1 and "extra" in str(exc.value)
    with pytest.raises(ParseError):
        parse_family(AC.replace("[lower]", "[lowr]"))
    with pytest.raises(ParseError):
        parse_family("")


@pytest.mark.parametrize("old,new", [
    ('"S1,1"', '"T1,1"'),
    ('"S1,1"', '"S2,0"'),
    ('"twist(0/1, i)"', '"twist(0/1, i*i)"'),
    ('"twist(0/1, i)"', '"twist(0/1, i/2)"'),
    ('"twist(0/1, i)"', '"shear(0/1, i)"'),
    ('"twist(0/1, i)"', '"twist(c, i)"'),
    ('"fn(1.0, 0.3)"\nops = ["twist(0/1, i)"]', '"fn(-1.0, 0.3)"\nops = ["twist(0/1, i)"]'),
    ('index = "i"', 'index = "2x"'),
])
def test_semantic_errors(old, new):
    assert old in AC
    with pytest.raises(SemanticError):
        parse_family(AC.replace(old, new, 1))


def test_symbolic_table_rules():
    with pytest.raises(SemanticError):
        parse_family(AC + '\n[symbolic]\nmu_minus = []\nmu_plus = []\n')
    sym = load_family(fixture_path("anderson_canary_symbolic"))
    assert not sym.numeric
    with pytest.raises(SemanticError):
        sym.sample("lower", 1)
    text = dump_family(load_family(fixture_path("r1_main")))
    with pytest.raises(SemanticError):
        parse_family(text.replace('[["Sigma1", "Sigma2"]]', '[["Sigma1", "Sigma1"]]'))


def test_records():
    r = load_record(fixture_path("s1_b_group"))
    assert r.is_b_group
    assert [e.kind for e in r.ends] == [EndKind.GEOMETRICALLY_FINITE, EndKind.SIMPLY_DEGENERATE]
    assert r.parabolic_loci[0].curve == "c" and not r.parabolic_loci[0].isolated
    with pytest.raises(SemanticError):
        parse_record('b_group = true\n\n[[omega]]\nside = "Upper"\nfull_S = true\n')
    with pytest.raises(SemanticError):
        parse_record('[[ends]]\nside = "Upper"\nkind = "SimplyDegenerate"\n')
    with pytest.raises(SemanticError):
        parse_record('[[ends]]\nside = "Middle"\nkind = "GeometricallyFinite"\n')
    with pytest.raises(ParseError):
        parse_record('colour = "blue"\n')
