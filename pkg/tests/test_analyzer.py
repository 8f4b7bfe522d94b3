from dataclasses import replace
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from conftest import GOLDEN_DIR, fixture_path
from laminarium.affine import Affine
from laminarium.analyzer import (
    RULES,
    Outcome,
    Verdict,
    analyze,
    apply_divergence_theorems,
    apply_generalised_ito,
    classify_limits,
    exit_code,
    generate_existence_family,
    length_goes_to_zero,
    limit_end_invariants,
    limits_from_samples,
    report,
    structural_verdicts,
    transliterate,
)
from laminarium.curves import SymbolicComponent, SymbolicUnion, ZERO
from laminarium.descriptor import (
    OmegaComponent,
    ParabolicLocus,
    SharedCurve,
    load_family,
    load_record,
    parse_family,
)
from laminarium.errors import HypothesisViolation, NoConvergenceCandidate
from laminarium.model import Side
from laminarium.teich import Twist, deform, fn


def _scc(*ids):
    return SymbolicUnion(tuple(SymbolicComponent(c, True, f"A({c})") for c in ids))


def _family(name):
    return load_family(fixture_path(name))


def test_anderson_canary_may_converge_with_lower_parabolic():
    a = analyze(_family("anderson_canary"))
    v = a.verdict
    assert v.outcome is Outcome.MAY_CONVERGE and exit_code(v) == 0
    assert [(t.curve, t.wrap, t.parabolic_side) for t in v.wraps] == [("0/1", 1, Side.LOWER)]
    assert "GI.wrap" in v.citations
    assert a.record.parabolic_loci[0].side == "Lower"


def test_anderson_canary_report_matches_golden_file():
    text = report(analyze(_family("anderson_canary")))
    assert text == (GOLDEN_DIR / "anderson_canary.txt").read_text(encoding="utf-8")
    assert report(analyze(_family("anderson_canary"))) == text


def test_numeric_and_symbolic_canaries_agree():
    num, sym = analyze(_family("anderson_canary")), analyze(_family("anderson_canary_symbolic"))
    assert num.verdict.wraps == sym.verdict.wraps
    assert num.record == sym.record


@pytest.mark.parametrize("name,rule", [("r1_main", "R1"), ("r2_scc", "R2"), ("r3_same_support", "R3"),
                                       ("no_integer_wrap", "GI.wrap")])
def test_divergence_fixtures_fire_exactly_one_rule(name, rule):
    v = analyze(_family(name)).verdict
    assert v.outcome is Outcome.DIVERGES and v.rule == rule
    assert [c for c in v.citations if c in ("R1", "R2", "R3")] == ([rule] if rule.startswith("R") else [])


@pytest.mark.parametrize("name,rid", [("s1_b_group", "S1"), ("s2_degenerate", "S2"), ("s3_isolated", "S3"),
                                      ("s4_bers", "S4"), ("unknown_regular", "Unknown")])
def test_structural_fixtures(name, rid):
    assert [r for r, _ in structural_verdicts(load_record(fixture_path(name)))] == [rid]


def test_one_sided_family_is_a_b_group():
    a = analyze(_family("one_sided"))
    assert a.verdict.outcome is Outcome.MAY_CONVERGE
    assert a.record.is_b_group
    assert [r for r, _ in a.structural] == ["S4"]


def test_verdict_invariants():
    with pytest.raises(ValueError):
        Verdict(Outcome.MAY_CONVERGE, ())
    with pytest.raises(ValueError):
        Verdict(Outcome.DIVERGES, ("R1",))
    with pytest.raises(ValueError):
        Verdict(Outcome.MAY_CONVERGE, ("GI",), rule="R1")
    assert set(RULES) >= {"R1", "R2", "R3", "GI", "S1", "S2", "S3", "S4", "Unknown"}


def test_undetermined_wrap_is_inconclusive():
    text = (fixture_path("anderson_canary").read_text()
            .replace('"twist(0/1, i)"', '"twist(1/0, i)"').replace('"twist(0/1, 2*i)"', '"twist(1/0, i)"'))
    fam = parse_family(text)
    lim = classify_limits(fam)
    lim = replace(lim, exponents=[("1/0", Affine(0, 0), Affine(0, 0))])
    v = apply_generalised_ito(lim, fam)
    assert v.outcome is Outcome.INCONCLUSIVE and exit_code(v) == 2


def test_transliteration_gives_the_same_verdict():
    for name in ("anderson_canary", "no_integer_wrap", "one_sided"):
        fam = _family(name)
        lim = classify_limits(fam)
        sym = transliterate(fam, lim)
        a, b = analyze(fam).verdict, analyze(sym).verdict
        assert (a.outcome, a.rule, a.wraps) == (b.outcome, b.rule, b.wraps)


def test_adding_an_obstructing_shared_curve_only_refines_to_divergence():
    fam = _family("anderson_canary_symbolic")
    before = analyze(fam).verdict
    assert before.outcome is Outcome.MAY_CONVERGE
    sd = fam.symbolic
    extra = SymbolicComponent("d", True, "A(d)")
    sd2 = replace(
        sd,
        mu_minus=SymbolicUnion(sd.mu_minus.components + (extra,)),
        mu_plus=SymbolicUnion(sd.mu_plus.components + (extra,)),
        shared=sd.shared + (SharedCurve("d", p=Affine(-1, 0), q=Affine(-3, 1)),),
    )
    after = analyze(replace(fam, symbolic=sd2)).verdict
    assert after.outcome is Outcome.DIVERGES and after.rule == "GI.wrap"


def test_removing_isolation_only_adds_structural_conclusions():
    rec = load_record(fixture_path("s4_bers"))
    before = {r for r, _ in structural_verdicts(rec)}
    relaxed = replace(rec, parabolic_loci=tuple(replace(p, isolated=False) for p in rec.parabolic_loci))
    after = {r for r, _ in structural_verdicts(relaxed)}
    assert before - {"Unknown"} <= after


@settings(max_examples=60, deadline=None)
@given(st.booleans(), st.booleans(), st.booleans(), st.booleans(), st.sampled_from(["Upper", "Lower"]))
def test_structural_rules_follow_their_preconditions(b_group, isolated, pants, degenerate, side):
    from laminarium.descriptor import End, EndInvariantRecord, EndKind
    omega = (OmegaComponent("Lower", False, True),) if b_group else ()
    omega += (OmegaComponent("Upper", pants, False),)
    ends = (End(side, EndKind.SIMPLY_DEGENERATE, "lam"),) if degenerate else ()
    rec = EndInvariantRecord(b_group, ends, (ParabolicLocus("Upper", isolated, "c"),), omega)
    got = {r for r, _ in structural_verdicts(rec)}
    assert ("S1" in got) == (b_group and not isolated)
    assert ("S2" in got) == (not isolated and degenerate and pants)
    assert ("S3" in got) == (pants and not b_group)
    assert ("S4" in got) == (b_group and pants)
    assert ("Unknown" in got) == (not got - {"Unknown"})


def test_existence_round_trip_small():
    for a in ([-2], [3, 0], [1, -1, 4]):
        ids = [f"c{j}" for j in range(len(a))]
        fam = generate_existence_family(a, _scc(*ids), _scc(*ids))
        v = apply_generalised_ito(classify_limits(fam), fam)
        assert v.outcome is Outcome.MAY_CONVERGE
        assert [t.wrap for t in v.wraps] == a


def test_existence_exhaustive_r1():
    for a in product(range(-5, 6), repeat=1):
        fam = generate_existence_family(a, _scc("c"), _scc("c"))
        assert [t.wrap for t in apply_generalised_ito(classify_limits(fam), fam).wraps] == list(a)


def test_existence_hypotheses_are_checked():
    lam = SymbolicUnion((SymbolicComponent("lam", False, "S"),))
    with pytest.raises(HypothesisViolation):
        generate_existence_family([], lam, lam)
    x = SymbolicUnion((SymbolicComponent("x", False, "A"),))
    y = SymbolicUnion((SymbolicComponent("y", False, "B"),))
    with pytest.raises(HypothesisViolation):
        generate_existence_family([], x, y, {"A": ["d"], "B": ["d"]})
    with pytest.raises(ValueError):
        generate_existence_family([1, 2], _scc("c"), _scc("c"))


def test_end_invariants_need_a_candidate():
    fam = _family("no_integer_wrap")
    lim = classify_limits(fam)
    with pytest.raises(NoConvergenceCandidate):
        limit_end_invariants(lim, apply_generalised_ito(lim, fam))


def test_numeric_limits_from_samples():
    m0 = fn(1.0, 0.3)
    lower = [deform(m0, Twist(ZERO, i)) for i in range(1, 31)]
    upper = [m0] * 30
    lim = limits_from_samples(lower, upper)
    assert str(lim.mu_minus) == "0/1" and lim.mu_plus is None
    assert apply_divergence_theorems(lim) is None


def test_length_trend():
    assert length_goes_to_zero([1 / k for k in range(1, 2000, 100)] + [1e-4 / k for k in range(1, 11)])
    assert not length_goes_to_zero([1.0] * 20)
    assert not length_goes_to_zero([1e-4] * 5)
