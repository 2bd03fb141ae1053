"""Impact NPV and impact IRR.

    INPV(r) = sum_{t=1..T} (C_t + I_t * a_t) / (1 + r) ** t - C0

where ``a_t`` is the investor's attribution share (C0 / D, possibly varying by
year). The impact IRR is every ``r`` in the search domain where INPV(r) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import NamedTuple, Sequence, Union

import numpy as np

from impactirr.cashflows import build_financial_series, instrument_rate
from impactirr.core import (
    AnnualSeries,
    BICOpportunityCost,
    ExplicitRate,
    InvestmentSpec,
    MICOwnRate,
    Money,
    Rate,
)
from impactirr.errors import NoSignChangeError, SolveError, ValidationError

SEARCH_LO = -0.9999
SEARCH_HI = 10.0
SCAN_STEP = 0.01
# r is resolved to ~1e-16 in double precision; 1e-13 keeps |NPV| < 1 cent
# for flows up to ~1e10 dollars
X_TOL = 1e-13

Attribution = Union[Real, Fraction, Sequence[Union[Real, Fraction]]]
Amounts = Union[AnnualSeries, Sequence[float]]


def attribution_factor(c0: Money, tier_total: Money) -> Fraction:
    """Investor share of its tier, ``c0 / tier_total``, as an exact ratio."""
    if tier_total.cents <= 0:
        raise ValidationError("tier total must be positive", "tier_total")
    if c0.cents <= 0:
        raise ValidationError("investment must be positive", "c0")
    if c0 > tier_total:
        raise ValidationError(f"c0 {c0} exceeds tier total {tier_total}; tier mis-specified", "c0")
    return Fraction(c0.cents, tier_total.cents)


def _dollars(values: Amounts) -> list[float]:
    if isinstance(values, AnnualSeries):
        return values.dollars()
    return [float(v) for v in values]


def _per_year(attribution: Attribution, years: int) -> list[float]:
    if isinstance(attribution, (Real, Fraction)):
        return [float(attribution)] * years
    out = [float(a) for a in attribution]
    if len(out) != years:
        raise ValidationError(f"{len(out)} attribution fractions for a {years}-year term")
    return out


def combined_flows(fin: Amounts, imp: Amounts, attribution: Attribution, c0: Money | float) -> list[float]:
    """Cash flow vector ``[-C0, C_1 + a_1 I_1, ..., C_T + a_T I_T]`` in dollars."""
    f = _dollars(fin)
    i = _dollars(imp)
    if len(f) != len(i):
        raise ValidationError(f"financial series has {len(f)} years, impact series {len(i)}")
    a = _per_year(attribution, len(f))
    start = float(c0)
    return [-start] + [ft + it * at for ft, it, at in zip(f, i, a)]


def npv(flows: Sequence[float], rate: Rate) -> float:
    """NPV of ``flows[t]`` received at the end of year t (``flows[0]`` undiscounted)."""
    if not rate > -1:
        raise ValidationError(f"discount rate must exceed -1, got {rate}")
    v = 1.0 + rate
    return math.fsum(cf / v**t for t, cf in enumerate(flows))


def inpv_value(fin: Amounts, imp: Amounts, attribution: Attribution, r: Rate, c0: Money | float) -> float:
    """Impact NPV in dollars at full float precision."""
    return npv(combined_flows(fin, imp, attribution, c0), r)


def inpv(fin: Amounts, imp: Amounts, attribution: Attribution, r: Rate, c0: Money) -> Money:
    return Money.of(inpv_value(fin, imp, attribution, r, c0))


# -- root finding ------------------------------------------------------------


class IrrSolution(NamedTuple):
    rate: Rate
    roots: tuple[Rate, ...]

    @property
    def multiple(self) -> bool:
        return len(self.roots) > 1


class _Poly:
    """NPV scaled by (1 + r) ** T: a polynomial in y = 1 + r with the same real roots.

    The scaled form stays finite near r = -1 where plain discounting overflows.
    """

    def __init__(self, flows: Sequence[float]):
        self.flows = list(flows)
        self.coef = np.asarray(self.flows, dtype=float)
        self.dcoef = np.polyder(self.coef) if len(self.coef) > 1 else np.zeros(1)

    def g(self, r):
        return np.polyval(self.coef, 1.0 + np.asarray(r, dtype=float))

    def dg(self, r):
        return np.polyval(self.dcoef, 1.0 + np.asarray(r, dtype=float))

    def noise(self, r: float) -> float:
        # rounding scale of g(r): the same sum with every term made positive
        return float(np.polyval(np.abs(self.coef), 1.0 + r))

    def is_zero(self, r: float) -> bool:
        return abs(float(self.g(r))) <= 1e-12 * self.noise(r)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def _refine(p: _Poly, a: float, b: float) -> float:
    """Safeguarded Newton on a sign-change bracket [a, b].

    Iterates until a Newton step or the bracket is narrower than ``X_TOL``
    (scaled by 1 + r when that is below 1);
    a plain NPV tolerance would stop early on small-dollar flows.
    """
    ga = float(p.g(a))
    if ga == 0:
        return a
    # tolerance relative to y = 1 + r: near r = -1 the NPV slope is huge
    tol = max(X_TOL * min(1.0, 1.0 + a), 1e-15)
    x = 0.5 * (a + b)
    for _ in range(400):
        gx = float(p.g(x))
        if gx == 0:
            return x
        if _sign(gx) == _sign(ga):
            a, ga = x, gx
        else:
            b = x
        if b - a < tol:
            break
        d = float(p.dg(x))
        if d != 0 and math.isfinite(d):
            nx = x - gx / d
            if a < nx < b:
                if abs(nx - x) < tol:
                    return nx
                x = nx
                continue
        x = 0.5 * (a + b)
    return 0.5 * (a + b)


def _extremum(p: _Poly, a: float, b: float) -> float:
    """Bisection on g' for the interior extremum of g in [a, b]."""
    da = _sign(float(p.dg(a)))
    for _ in range(100):
        m = 0.5 * (a + b)
        dm = _sign(float(p.dg(m)))
        if dm == 0:
            return m
        if dm == da:
            a = m
        else:
            b = m
        if b - a < X_TOL:
            break
    return 0.5 * (a + b)


def solve_rates(
    flows: Sequence[float],
    lo: float = SEARCH_LO,
    hi: float = SEARCH_HI,
    step: float = SCAN_STEP,
) -> IrrSolution:
    """All discount rates in ``[lo, hi]`` that zero the NPV of ``flows``.

    A grid scan at ``step`` finds sign changes, which are refined by
    safeguarded Newton steps until the step or the bracket is narrower than
    1e-13. Cells where g has an interior extremum but no sign
    change are split at the extremum so close root pairs are not skipped.
    The headline rate is the only root, or the smallest one when several
    exist (``IrrSolution.multiple``).
    """
    if not lo > -1:
        raise ValidationError("search domain must lie above -1")
    if step <= 0 or hi <= lo:
        raise ValidationError("invalid search grid")
    nonzero = [cf for cf in flows if cf != 0]
    if not nonzero or all(cf > 0 for cf in nonzero) or all(cf < 0 for cf in nonzero):
        raise NoSignChangeError("cash flows do not change sign; no rate zeroes the NPV")

    p = _Poly(flows)
    n = int(math.ceil((hi - lo) / step - 1e-9))
    grid = lo + step * np.arange(n + 1, dtype=float)
    grid[-1] = hi
    gv = p.g(grid)
    dv = p.dg(grid)

    sg, sd = np.sign(gv), np.sign(dv)
    # only cells with a zero, a sign change or an interior extremum need work
    busy = (sg[:-1] == 0) | (sg[:-1] * sg[1:] < 0) | (sd[:-1] * sd[1:] < 0)
    roots: list[float] = []
    for i in np.flatnonzero(busy):
        a, b = float(grid[i]), float(grid[i + 1])
        ga, gb = float(gv[i]), float(gv[i + 1])
        sa, sb = _sign(ga), _sign(gb)
        if sa == 0:
            roots.append(a)
            continue
        if sa * sb < 0:
            roots.append(_refine(p, a, b))
            continue
        if sb == 0:
            continue
        if _sign(float(dv[i])) * _sign(float(dv[i + 1])) < 0:
            m = _extremum(p, a, b)
            gm = float(p.g(m))
            if _sign(gm) != sa:
                if p.is_zero(m):
                    roots.append(m)
                else:
                    roots.append(_refine(p, a, m))
                    roots.append(_refine(p, m, b))
            elif p.is_zero(m):
                # tangent double root
                roots.append(m)
    if _sign(float(gv[-1])) == 0:
        roots.append(float(grid[-1]))

    roots.sort()
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-9:
            merged.append(r)
    if not merged:
        raise SolveError(f"no root in [{lo}, {hi}] at scan step {step}")
    return IrrSolution(merged[0], tuple(merged))


def impact_irr(
    fin: Amounts,
    imp: Amounts,
    attribution: Attribution,
    c0: Money | float,
    **grid,
) -> IrrSolution:
    """Discount rate(s) at which the impact NPV is zero."""
    return solve_rates(combined_flows(fin, imp, attribution, c0), **grid)


def financial_irr(fin: Amounts, c0: Money | float, **grid) -> Rate:
    f = _dollars(fin)
    return impact_irr(f, [0.0] * len(f), 1, c0, **grid).rate


def resolve_hurdle_rate(spec: InvestmentSpec) -> Rate:
    """Hurdle rate implied by the investment's policy."""
    policy = spec.hurdle_policy
    if isinstance(policy, ExplicitRate):
        return policy.rate
    if isinstance(policy, BICOpportunityCost):
        if policy.market_rate is None:
            raise ValidationError("BIC opportunity-cost hurdle needs a market rate", "investment.hurdle.market_rate")
        return policy.market_rate
    if isinstance(policy, MICOwnRate):
        own = instrument_rate(spec)
        if own is not None:
            return own
        return financial_irr(build_financial_series(spec), spec.c0)
    raise TypeError(f"unknown hurdle policy {type(policy).__name__}")


# -- full valuation ----------------------------------------------------------


@dataclass(frozen=True)
class TimelineRow:
    year: int
    financial: Money
    impact: Money  # attributed
    total: Money
    discounted: Money


@dataclass(frozen=True)
class ValuationResult:
    inpv_at_hurdle: Money
    hurdle_rate: Rate
    impact_irr: Rate
    all_irr_roots: tuple[Rate, ...]
    financial_irr: Rate | None
    attribution_factor: Fraction
    timeline: tuple[TimelineRow, ...]
    initial_investment: Money

    def __post_init__(self):
        if not 0 < self.attribution_factor <= 1:
            raise ValidationError("attribution factor must lie in (0, 1]")

    @property
    def multiple_roots(self) -> bool:
        return len(self.all_irr_roots) > 1


def value_investment(
    c0: Money,
    fin: AnnualSeries,
    imp: AnnualSeries,
    attribution: Attribution,
    hurdle: Rate,
    attribution_factor_reported: Fraction | None = None,
    **grid,
) -> ValuationResult:
    """INPV at the hurdle, impact IRR root set, financial IRR and timeline."""
    flows = combined_flows(fin, imp, attribution, c0)
    sol = solve_rates(flows, **grid)
    try:
        fin_irr: Rate | None = financial_irr(fin, c0, **grid)
    except SolveError:
        fin_irr = None

    per_year = _per_year(attribution, len(fin))
    exact = attribution if not isinstance(attribution, (Real, Fraction)) else [attribution] * len(fin)
    rows = []
    for t, (c, i, a) in enumerate(zip(fin, imp, exact), start=1):
        att = i.scale(a if isinstance(a, float) else Fraction(a))
        total = c + att
        disc = Money.of(flows[t] / (1.0 + hurdle) ** t)
        rows.append(TimelineRow(t, c, att, total, disc))
    if attribution_factor_reported is None:
        attribution_factor_reported = Fraction(per_year[0]).limit_denominator(10**12)
    return ValuationResult(
        inpv_at_hurdle=Money.of(npv(flows, hurdle)),
        hurdle_rate=hurdle,
        impact_irr=sol.rate,
        all_irr_roots=sol.roots,
        financial_irr=fin_irr,
        attribution_factor=attribution_factor_reported,
        timeline=tuple(rows),
        initial_investment=c0,
    )
