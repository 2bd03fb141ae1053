"""Projected financial return series from instrument terms.

All payments fall at year end; the initial outflow sits at ``t = 0`` and is
not part of the returned series.
"""

from __future__ import annotations

import math
from decimal import Decimal

from impactirr.core import (
    AnnualSeries,
    EquityExit,
    InterestOnlyBalloon,
    InterestOnlyThenAmortizing,
    InvestmentSpec,
    LevelAmortizing,
    Money,
    Rate,
)
from impactirr.errors import ValidationError


def level_payment(principal: Money, rate: Rate, n_years: int) -> Money:
    """Constant end-of-year payment that retires ``principal`` over ``n_years``.

    Annual annuity formula ``P * r / (1 - (1 + r) ** -n)``; a zero rate splits
    the principal evenly. The result is rounded half-up to the cent.
    """
    if n_years < 1:
        raise ValidationError(f"n_years must be >= 1, got {n_years}")
    if not rate > -1:
        raise ValidationError(f"rate must exceed -1, got {rate}")
    if principal.cents <= 0:
        raise ValidationError("principal must be positive")
    if rate == 0:
        return Money.of(principal.to_decimal() / Decimal(n_years))
    # -expm1(-n*log1p(r)) == 1 - (1+r)^-n without cancellation for small r
    denom = -math.expm1(-n_years * math.log1p(rate))
    return Money.of(principal.dollars * rate / denom)


def _interest(principal: Money, rate: Rate) -> Money:
    return principal.scale(rate)


def build_financial_series(spec: InvestmentSpec) -> AnnualSeries:
    """Financial returns C_t for t = 1..T, principal repayment included."""
    years = spec.term.years
    c0 = spec.c0
    inst = spec.instrument

    if isinstance(inst, InterestOnlyBalloon):
        coupon = _interest(c0, inst.rate)
        values = [coupon] * years
        values[-1] = coupon + c0
    elif isinstance(inst, LevelAmortizing):
        values = [level_payment(c0, inst.rate, years)] * years
    elif isinstance(inst, InterestOnlyThenAmortizing):
        if inst.io_years >= years:
            raise ValidationError("io_years must be less than the term", "instrument.io_years")
        coupon = _interest(c0, inst.rate)
        payment = level_payment(c0, inst.rate, years - inst.io_years)
        values = [coupon] * inst.io_years + [payment] * (years - inst.io_years)
    elif isinstance(inst, EquityExit):
        if inst.exit_year > years:
            raise ValidationError("exit_year is after the term", "instrument.exit_year")
        values = [Money(0)] * years
        values[inst.exit_year - 1] = inst.exit_proceeds
    else:
        raise TypeError(f"unsupported instrument {type(inst).__name__}")

    series = AnnualSeries(tuple(values))
    if spec.recovery_multiplier != 1.0:
        series = series.scaled(spec.recovery_multiplier)
    return series


def instrument_rate(spec: InvestmentSpec) -> Rate | None:
    """Contractual rate of a debt instrument, or None for equity."""
    inst = spec.instrument
    if isinstance(inst, EquityExit):
        return None
    return inst.rate
