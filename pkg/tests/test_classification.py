from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from impactirr.classification import (
    DeadweightPolicy,
    Thresholds,
    blended_class,
    blended_wacc,
    catalytic_flag,
    check_tier,
    classify,
    classify_capital,
    deadweight_adjust,
)
from impactirr.core import (
    AnnualSeries,
    CapitalClass,
    CapitalKind,
    CapitalType,
    EquityExit,
    InterestOnlyBalloon,
    LevelAmortizing,
    Money,
    Tier,
)
from impactirr.errors import ValidationError

from strategies import make_spec

FLOOR = Thresholds(0.06)


def test_classify_examples():
    assert classify_capital(0.02, FLOOR, True).kind is CapitalKind.BELOW_MARKET_IMPACT
    assert classify_capital(-1.0, FLOOR, True).kind is CapitalKind.GRANT
    assert classify_capital(0.06, FLOOR, True).kind is CapitalKind.MARKET_RATE_IMPACT
    assert classify_capital(0.08, FLOOR, False).kind is CapitalKind.TRADITIONAL
    assert classify_capital(0.02, FLOOR, False).kind is CapitalKind.NON_INVESTABLE


def test_rounded_coupon_counts_as_market_rate():
    # cent-rounded payments leave the IRR a hair under the coupon
    assert classify_capital(0.0425 - 1e-9, Thresholds(0.0425), True).kind is CapitalKind.MARKET_RATE_IMPACT


def test_zero_return_is_below_market_not_grant():
    assert classify_capital(0.0, FLOOR, True).kind is CapitalKind.BELOW_MARKET_IMPACT


@given(st.floats(-1, 1), st.floats(0, 0.5), st.booleans())
def test_classification_is_total_and_consistent(r, floor, meets):
    kind = classify_capital(r, Thresholds(floor), meets).kind
    assert kind in {
        CapitalKind.MARKET_RATE_IMPACT,
        CapitalKind.BELOW_MARKET_IMPACT,
        CapitalKind.GRANT,
        CapitalKind.TRADITIONAL,
        CapitalKind.NON_INVESTABLE,
    }
    assert kind.is_impact == (meets and r >= -1e-6)
    if meets and r >= floor:
        assert kind is CapitalKind.MARKET_RATE_IMPACT


def test_catalytic_flag():
    assert classify(0.02, FLOOR, True).catalytic
    assert not classify(0.06, FLOOR, True, mic_first_mover=False).catalytic
    assert classify(0.06, FLOOR, True, mic_first_mover=True).catalytic
    assert not catalytic_flag(CapitalClass(CapitalKind.TRADITIONAL), True)


def test_impact_floor_checks():
    s = AnnualSeries.of([100, 300])
    assert Thresholds(0.06).impact_met(s, 0.1)
    assert not Thresholds(0.06).impact_met(AnnualSeries.zeros(2), 0.1)
    assert Thresholds(0.06, impact_floor_annual=Money.of(200)).impact_met(s, None)
    assert not Thresholds(0.06, impact_floor_annual=Money.of(201)).impact_met(s, None)
    assert not Thresholds(0.06, impact_irr_floor=0.2).impact_met(s, 0.1)
    assert not Thresholds(0.06, meets_impact_floor=False).impact_met(s, 0.5)


def test_blended_class():
    bic = CapitalClass(CapitalKind.BELOW_MARKET_IMPACT, True)
    mic = CapitalClass(CapitalKind.MARKET_RATE_IMPACT, False)
    assert blended_class([bic, mic]) == CapitalClass(CapitalKind.BLENDED, True)
    assert blended_class([mic, mic]) == mic
    with pytest.raises(ValidationError):
        blended_class([])


def test_deadweight_examples():
    assert deadweight_adjust([("a", Money.of(1_600_000))], Money.of(1_600_000)) == {"a": 1}
    assert deadweight_adjust([("a", Money.of(5)), ("b", Money.of(5))], Money.of(10)) == {"a": Fraction(1, 2), "b": Fraction(1, 2)}
    got = deadweight_adjust([("a", Money.of(60)), ("b", Money.of(60))], Money.of(100), DeadweightPolicy.REDUCE_SURPLUS)
    assert got == {"a": Fraction(1, 2) * Fraction(100, 120), "b": Fraction(1, 2) * Fraction(100, 120)}


amounts = st.lists(st.integers(1, 10**9).map(Money), min_size=1, max_size=8)


@given(amounts, st.integers(0, 10**10).map(Money))
def test_deadweight_sums(investments, required):
    named = [(f"i{k}", m) for k, m in enumerate(investments)]
    total = sum(m.cents for m in investments)
    assert sum(deadweight_adjust(named, required).values()) == 1
    reduced = sum(deadweight_adjust(named, required, DeadweightPolicy.REDUCE_SURPLUS).values())
    assert reduced == min(Fraction(1), Fraction(required.cents, total))


def test_blended_wacc_examples():
    assert blended_wacc([(Money.of(1_600_000), 0.02), (Money.of(2_600_000), 0.06)]) == pytest.approx(0.04476, abs=1e-4)
    assert blended_wacc([(Money.of(7), 0.09)]) == pytest.approx(0.09)
    assert blended_wacc([(Money.of(1), 0.0), (Money.of(1), 0.1)]) == pytest.approx(0.05)


@given(st.lists(st.tuples(st.integers(1, 10**9).map(Money), st.floats(-0.5, 1)), min_size=1, max_size=8))
def test_blended_wacc_within_range(tranches):
    w = blended_wacc(tranches)
    rates = [r for _, r in tranches]
    assert min(rates) - 1e-12 <= w <= max(rates) + 1e-12


def test_check_tier_warns_but_keeps_declared_tier():
    assert check_tier(make_spec(1, 2, InterestOnlyBalloon(0.02))) == []
    mic = make_spec(1, 2, LevelAmortizing(0.07), capital_type=CapitalType.MIC)
    assert len(check_tier(mic)) == 1
    assert mic.tier is Tier.TIER1
    equity = make_spec(1, 2, EquityExit(Money.of(3), 2), capital_type=CapitalType.MIC, tier=Tier.TIER2)
    assert check_tier(equity) == []
