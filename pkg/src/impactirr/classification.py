"""Capital classification, catalytic flag, deadweight and blended cost of capital."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from impactirr.core import (
    AnnualSeries,
    CapitalClass,
    CapitalKind,
    CapitalType,
    EquityExit,
    InvestmentSpec,
    Money,
    Rate,
    Tier,
)
from impactirr.errors import ValidationError

log = logging.getLogger(__name__)

# cent-rounded payments put a debt IRR within ~1e-9 of its coupon
RATE_TOL = 1e-6


@dataclass(frozen=True)
class Thresholds:
    """Classification floors.

    There is no published numeric impact threshold, so the impact floor is
    scenario-supplied: either asserted outright (``meets_impact_floor``) or as
    a minimum annual attributed impact and/or a minimum impact IRR. With none
    given, any positive nominal impact counts as meeting the floor.
    """

    market_rate_floor: Rate
    impact_floor_annual: Money | None = None
    impact_irr_floor: Rate | None = None
    meets_impact_floor: bool | None = None

    def __post_init__(self):
        if not self.market_rate_floor >= 0:
            raise ValidationError("market rate floor must be >= 0", "thresholds.market_rate_floor")

    def impact_met(self, annual_impact: AnnualSeries, impact_irr: Rate | None) -> bool:
        if self.meets_impact_floor is not None:
            return self.meets_impact_floor
        checks = []
        if self.impact_floor_annual is not None:
            avg = annual_impact.total().cents / max(len(annual_impact), 1)
            checks.append(avg >= self.impact_floor_annual.cents)
        if self.impact_irr_floor is not None:
            checks.append(impact_irr is not None and impact_irr >= self.impact_irr_floor)
        if checks:
            return all(checks)
        return annual_impact.total().cents > 0


def classify_capital(projected_financial_return: Rate, thresholds: Thresholds, meets_impact_floor: bool) -> CapitalClass:
    """Place a single instrument on the impact/financial threshold map.

    The market-rate boundary is inclusive: a return equal to the floor, to
    within ``RATE_TOL``, is market rate.
    """
    r = projected_financial_return
    floor = thresholds.market_rate_floor - RATE_TOL
    if not meets_impact_floor:
        kind = CapitalKind.TRADITIONAL if r >= floor else CapitalKind.NON_INVESTABLE
    elif r >= floor:
        kind = CapitalKind.MARKET_RATE_IMPACT
    elif r >= -RATE_TOL:
        kind = CapitalKind.BELOW_MARKET_IMPACT
    else:
        kind = CapitalKind.GRANT
    return CapitalClass(kind, catalytic=False)


def catalytic_flag(capital: CapitalClass, mic_first_mover: bool) -> bool:
    if capital.kind is CapitalKind.BELOW_MARKET_IMPACT:
        return True
    if capital.kind is CapitalKind.MARKET_RATE_IMPACT:
        return mic_first_mover
    return False


def classify(projected_financial_return: Rate, thresholds: Thresholds, meets_impact_floor: bool, mic_first_mover: bool = False) -> CapitalClass:
    base = classify_capital(projected_financial_return, thresholds, meets_impact_floor)
    return CapitalClass(base.kind, catalytic_flag(base, mic_first_mover))


def blended_class(tranches: Sequence[CapitalClass]) -> CapitalClass:
    """Aggregate class of a multi-tranche structure; BIC plus MIC is blended."""
    if not tranches:
        raise ValidationError("no tranches")
    kinds = {t.kind for t in tranches}
    catalytic = any(t.catalytic for t in tranches)
    if {CapitalKind.BELOW_MARKET_IMPACT, CapitalKind.MARKET_RATE_IMPACT} <= kinds:
        return CapitalClass(CapitalKind.BLENDED, catalytic)
    if len(kinds) == 1:
        return CapitalClass(kinds.pop(), catalytic)
    return CapitalClass(CapitalKind.BLENDED, catalytic)


class DeadweightPolicy(enum.Enum):
    PRO_RATA = "pro_rata"
    REDUCE_SURPLUS = "reduce_surplus"


def deadweight_adjust(
    tier_investments: Sequence[tuple[str, Money]],
    required_tier_capital: Money,
    policy: DeadweightPolicy = DeadweightPolicy.PRO_RATA,
) -> dict[str, Fraction]:
    """Attribution fraction per investor in one tier.

    ``PRO_RATA`` gives each investor amount / tier total. ``REDUCE_SURPLUS``
    caps the attributable pool at ``required_tier_capital``; capital beyond
    that is deadweight and earns no impact.
    """
    if required_tier_capital.cents < 0:
        raise ValidationError("required tier capital must be >= 0", "required_tier_capital")
    if not tier_investments:
        raise ValidationError("no investments in tier")
    for name, amount in tier_investments:
        if amount.cents <= 0:
            raise ValidationError("investment amounts must be positive", name)
    total = sum(a.cents for _, a in tier_investments)
    share = Fraction(1)
    if policy is DeadweightPolicy.REDUCE_SURPLUS and total > required_tier_capital.cents:
        share = Fraction(required_tier_capital.cents, total)
    out: dict[str, Fraction] = {}
    for name, amount in tier_investments:
        out[name] = out.get(name, Fraction(0)) + Fraction(amount.cents, total) * share
    return out


def blended_wacc(tranches: Sequence[tuple[Money, Rate]]) -> Rate:
    """Amount-weighted average rate across tranches."""
    if not tranches:
        raise ValidationError("empty tranche list")
    total = sum(m.cents for m, _ in tranches)
    if total <= 0:
        raise ValidationError("tranche amounts must sum to a positive value")
    return sum(m.cents * r for m, r in tranches) / total


def check_tier(spec: InvestmentSpec) -> list[str]:
    """Warnings where the declared tier disagrees with the instrument-to-tier table.

    The declared tier is always kept.
    """
    warnings = []
    if spec.capital_type is CapitalType.BIC and spec.tier is not Tier.TIER1:
        warnings.append(f"BIC capital declared in {spec.tier.value}; tier 1 holds BIC debt and equity")
    elif spec.capital_type is CapitalType.MIC:
        expected = Tier.TIER2 if isinstance(spec.instrument, EquityExit) else Tier.TIER3
        if spec.tier is not expected:
            warnings.append(
                f"MIC {'equity' if expected is Tier.TIER2 else 'debt'} declared in {spec.tier.value}; "
                f"table suggests {expected.value}"
            )
    for w in warnings:
        log.warning(w)
    return warnings
