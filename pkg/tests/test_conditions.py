import math

import pytest

from qsa_lab.errors import MissingParameter
from qsa_lab.sa import BoundSpec, ConditionExtras, check_conditions
from qsa_lab.sa.conditions import check_n0


ONES = {k: 1.0 for k in ("c1", "c2", "c5", "c7", "c8", "c9", "c10")}


def test_generic_zero_exponents_pass():
    report = check_conditions(BoundSpec(beta=2.0), "genericSA")
    assert report.ok
    assert report.by_id("sa.a=0:beta>=2(1-2k1)").satisfied


def test_generic_small_beta_fails():
    report = check_conditions(BoundSpec(beta=1.0), "genericSA")
    assert report.failing == ["sa.a=0:beta>=2(1-2k1)"]


def test_exponent_out_of_unit_interval():
    report = check_conditions(BoundSpec(kappa2=1.5, beta=2.0), "genericSA")
    assert "sa:kappa2 in [0,1]" in report.failing


def test_uncovered_stepsize_band():
    report = check_conditions(BoundSpec(a=0.05, kappa1=0.1, beta=10.0), "genericSA")
    assert not report.by_id("sa:0<a<k1").satisfied
    assert report.by_id("sa:0<a<k1").note


def test_equal_exponents_need_c3():
    with pytest.raises(MissingParameter):
        check_conditions(BoundSpec(a=0.1, kappa1=0.1, beta=10.0), "genericSA")


def _seg_optimal():
    spec = BoundSpec(a=0.1, kappa1=0.1, beta=10.0, constants={"c3": 0.25})
    extras = ConditionExtras(d=0.1, e=0.0, gamma=0.5, mu_min_s=0.5, num_actions=2)
    return spec, extras


def test_seg_optimal_setting_passes():
    spec, extras = _seg_optimal()
    report = check_conditions(spec, "seg", extras)
    assert report.ok, report.failing
    beta_floor = report.by_id("seg.a=d:beta>=|A|/(2(1-gamma)mu)*max(...)")
    assert beta_floor.rhs == pytest.approx(4.8)


def test_seg_regret_zero_e_is_advisory():
    spec, extras = _seg_optimal()
    report = check_conditions(spec, "seg", extras, purpose="regret")
    assert report.ok
    assert report.advisories == ["seg.regret:e>0"]


def test_seg_needs_d_and_e():
    with pytest.raises(MissingParameter):
        check_conditions(BoundSpec(beta=2.0), "seg", ConditionExtras())


def test_boltzmann_temperature_coefficient():
    extras = ConditionExtras(b=0.01, rmax=1.0, gamma=0.5, mu_min_s=0.5, num_actions=2)
    report = check_conditions(BoundSpec(kappa1=0.02, beta=2.0), "boltzmann", extras)
    # k1 = b Rmax / (1 - gamma)
    assert report.by_id("boltzmann:2a+6k1<1").lhs == pytest.approx(0.12)
    assert report.ok


def test_boltzmann_regret_requires_small_temperature():
    extras = ConditionExtras(b=0.01, rmax=1.0, gamma=0.5, mu_min_s=0.5, num_actions=2)
    report = check_conditions(BoundSpec(kappa1=0.02, beta=2.0), "boltzmann", extras, purpose="regret")
    assert report.failing == ["boltzmann.regret:b*rmax/(1-gamma)<=a"]


def test_log_term_fails_at_start():
    spec = BoundSpec(a=0.1, kappa1=0.05, beta=1.0, n0=1, constants=ONES)
    result = check_n0(spec, "genericSA").by_id("n0-II.log-term-dominates")
    assert not result.satisfied
    assert result.witness == 0
    assert result.tail_holds is True


def test_log_term_not_applicable_at_zero_exponents():
    spec = BoundSpec(beta=2.0, constants=ONES)
    result = check_n0(spec, "genericSA").by_id("n0-II.log-term-dominates")
    assert result.satisfied
    assert not result.required
    assert result.note.startswith("not applicable")


def test_n0_needs_base_constants():
    with pytest.raises(MissingParameter):
        check_n0(BoundSpec(), "genericSA")


def test_stepsize_dominance_tail():
    spec = BoundSpec(a=0.1, kappa1=0.05, beta=1.0, n0=1, constants=ONES)
    result = check_n0(spec, "genericSA").by_id("n0-IV.stepsize-dominance")
    # the left side decays as n^{-(1-2a-k1)}, slower than the right side
    assert result.lhs_decays_faster is False
    assert result.tail_holds is True
    assert math.isfinite(result.lhs)


def _numerals(report):
    return [r.id.split(".")[0] for r in report.results]


def test_n0_ids_carry_condition_numbers():
    spec = BoundSpec(a=0.1, kappa1=0.05, beta=1.0, n0=100, constants={**ONES, "c3": 1.0})
    generic = ["n0-I", "n0-II", "n0-III", "n0-IV", "n0-V"]
    assert _numerals(check_n0(spec, "genericSA")) == generic
    boltzmann = check_n0(spec, "boltzmann", ConditionExtras(gap=0.5))
    assert _numerals(boltzmann) == generic + ["n0-VI", "n0-VII"]
    assert not boltzmann.by_id("n0-VII.boltzmann.gap-margin").required
    extras = ConditionExtras(d=0.1, e=0.05, gap=0.5, num_actions=2, q_l1_min=1.0)
    seg = check_n0(spec, "seg", extras)
    assert _numerals(seg) == generic + ["n0-VIII", "n0-IX", "n0-IX", "n0-X", "n0-XI", "n0-XII"]
    assert seg.by_id("n0-XII.seg.probability-floor").required
