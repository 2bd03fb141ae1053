"""Monetized impact return generators.

Each generator turns sector inputs into an :class:`AnnualSeries` of projected
impact returns before attribution. Arithmetic runs in :mod:`decimal` and each
year is rounded half-up to the cent only once, at the end.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal
from typing import Sequence, Union

from impactirr.core import AnnualSeries, Money, Rate, TermSpec, _to_decimal
from impactirr.errors import ValidationError

_MONTHS = Decimal(12)
_HUNDRED_K = Decimal(100_000)


class IncomeBand(enum.Enum):
    AMI30 = "AMI30"
    AMI50 = "AMI50"
    AMI60 = "AMI60"
    AMI80 = "AMI80"
    MARKET_RATE = "MarketRate"


def _d(x) -> Decimal:
    return x.to_decimal() if isinstance(x, Money) else _to_decimal(x)


def _growth_factors(years: int, growth: Rate, first_year: bool = False) -> list[Decimal]:
    g = 1 + _d(growth)
    offset = 1 if first_year else 0
    return [g ** (t - 1 + offset) for t in range(1, years + 1)]


def _to_series(amounts: Sequence[Decimal]) -> AnnualSeries:
    return AnnualSeries(tuple(Money.of(a) for a in amounts))


def _check_count(value, path: str) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValidationError("must be a non-negative integer", path)


# -- housing -----------------------------------------------------------------


@dataclass(frozen=True)
class RentRollEntry:
    income_band: IncomeBand
    bedrooms: int
    affordable_rent: Money
    market_rent: Money
    units: int

    def __post_init__(self):
        _check_count(self.units, "units")
        _check_count(self.bedrooms, "bedrooms")
        if self.income_band is not IncomeBand.MARKET_RATE and self.market_rent < self.affordable_rent:
            raise ValidationError(
                f"market rent {self.market_rent} is below affordable rent {self.affordable_rent}",
                "market_rent",
            )

    @property
    def monthly_gap(self) -> Money:
        return (self.market_rent - self.affordable_rent) * self.units


@dataclass(frozen=True)
class SubsidyEntry:
    income_band: IncomeBand
    bedrooms: int
    monthly_subsidy: Money
    units: int

    def __post_init__(self):
        _check_count(self.units, "units")
        _check_count(self.bedrooms, "bedrooms")
        if self.monthly_subsidy.cents < 0:
            raise ValidationError("monthly subsidy must be >= 0", "monthly_subsidy")


@dataclass(frozen=True)
class HousingParams:
    """Vacancy and escalation applied to a monthly housing benefit.

    Growth compounds from year 2 by default. ``escalate_first_year`` applies
    one year of growth already in year 1, for base figures quoted in
    pre-investment dollars.
    """

    vacancy_rate: Rate
    annual_growth: Rate = 0.0
    escalate_first_year: bool = False

    def __post_init__(self):
        if not 0 <= self.vacancy_rate < 1:
            raise ValidationError("vacancy rate must lie in [0, 1)", "vacancy_rate")
        if not self.annual_growth > -1:
            raise ValidationError("annual growth must exceed -1", "annual_growth")


def gross_monthly_gap(roll: Sequence[RentRollEntry]) -> Money:
    return Money(sum(e.monthly_gap.cents for e in roll if e.income_band is not IncomeBand.MARKET_RATE))


def total_monthly_subsidy(subsidies: Sequence[SubsidyEntry]) -> Money:
    return Money(sum((e.monthly_subsidy * e.units).cents for e in subsidies))


def _housing_series(gross_monthly: Money, params: HousingParams, term: TermSpec) -> AnnualSeries:
    # monthly gross -> vacancy -> x12 -> growth, rounded once per year
    net_annual = gross_monthly.to_decimal() * (1 - _d(params.vacancy_rate)) * _MONTHS
    factors = _growth_factors(term.years, params.annual_growth, params.escalate_first_year)
    return _to_series([net_annual * f for f in factors])


def rent_gap_series(roll: Sequence[RentRollEntry], params: HousingParams, term: TermSpec) -> AnnualSeries:
    """Affordability savings: units x (market rent - affordable rent), net of vacancy, annualized."""
    if not roll:
        raise ValidationError("rent roll is empty")
    for i, e in enumerate(roll):
        if e.market_rent < e.affordable_rent and e.income_band is not IncomeBand.MARKET_RATE:
            raise ValidationError("negative rent gap", f"roll[{i}]")
    return _housing_series(gross_monthly_gap(roll), params, term)


def subsidy_series(subsidies: Sequence[SubsidyEntry], params: HousingParams, term: TermSpec) -> AnnualSeries:
    """Preserved subsidy: total gross monthly subsidy x 12, net of vacancy."""
    if not subsidies:
        raise ValidationError("subsidy table is empty")
    return _housing_series(total_monthly_subsidy(subsidies), params, term)


# -- jobs --------------------------------------------------------------------


@dataclass(frozen=True)
class JobArchetype:
    name: str
    loans_per_year: int
    avg_loan: Money
    value_per_100k: Money
    # overrides loans_per_year year by year when given
    loans_schedule: tuple[int, ...] | None = None

    def __post_init__(self):
        _check_count(self.loans_per_year, f"{self.name}.loans_per_year")
        if self.avg_loan.cents < 0 or self.value_per_100k.cents < 0:
            raise ValidationError("loan size and value per 100k must be >= 0", self.name)
        if self.loans_schedule is not None:
            object.__setattr__(self, "loans_schedule", tuple(self.loans_schedule))
            for i, n in enumerate(self.loans_schedule):
                _check_count(n, f"{self.name}.loans_schedule[{i}]")

    def loans_in_year(self, t: int) -> int:
        if self.loans_schedule is None:
            return self.loans_per_year
        if t > len(self.loans_schedule):
            raise ValidationError(f"loans_schedule of {self.name} does not cover year {t}")
        return self.loans_schedule[t - 1]


@dataclass(frozen=True)
class JobsParams:
    archetypes: tuple[JobArchetype, ...]
    avg_compensation: Money
    comp_growth: Rate = 0.03
    loan_growth: Rate = 0.0

    def __post_init__(self):
        object.__setattr__(self, "archetypes", tuple(self.archetypes))
        if self.avg_compensation.cents < 0:
            raise ValidationError("average compensation must be >= 0", "avg_compensation")
        if self.comp_growth < 0 or self.loan_growth < 0:
            raise ValidationError("growth rates must be >= 0")


def _deployed(params: JobsParams, term: TermSpec) -> list[list[Decimal]]:
    loan_f = _growth_factors(term.years, params.loan_growth)
    out = []
    for a in params.archetypes:
        out.append([a.loans_in_year(t) * _d(a.avg_loan) * loan_f[t - 1] for t in range(1, term.years + 1)])
    return out


def jobs_series(params: JobsParams, term: TermSpec) -> AnnualSeries:
    """Monetized job value of capital deployed each year.

    Year t value is, summed over archetypes, deployed capital / 100k times the
    value per 100k, escalated by compensation growth from year 2.
    """
    if not params.archetypes:
        raise ValidationError("at least one archetype is required", "archetypes")
    comp_f = _growth_factors(term.years, params.comp_growth)
    deployed = _deployed(params, term)
    totals = []
    for t in range(term.years):
        year = sum(
            (dep[t] / _HUNDRED_K * _d(a.value_per_100k) for a, dep in zip(params.archetypes, deployed)),
            Decimal(0),
        )
        totals.append(year * comp_f[t])
    return _to_series(totals)


def jobs_count(params: JobsParams, term: TermSpec) -> list[float]:
    """Implied jobs per year: monetized value over escalated average compensation."""
    if params.avg_compensation.cents == 0:
        raise ValidationError("average compensation is zero", "avg_compensation")
    values = jobs_series(params, term)
    comp_f = _growth_factors(term.years, params.comp_growth)
    comp = params.avg_compensation.to_decimal()
    return [float(v.to_decimal() / (comp * f)) for v, f in zip(values, comp_f)]


# -- income uplift -----------------------------------------------------------


@dataclass(frozen=True)
class IncomeUpliftParams:
    """Education cohort model.

    ``graduates[k-1]`` graduate in year k and earn their first post-graduation
    salary that same year. Graduate salary relative to the base salary is
    ``1 + graduate_uplift[j-1]`` in post-graduation year j, then grows by
    ``later_growth`` per year once the schedule is exhausted. Nongraduates
    earn ``base * (1 + nongraduate_growth) ** j``. Scholarship and
    employer-paid graduates bear no program cost.
    """

    students: tuple[int, ...]
    graduates: tuple[int, ...]
    base_monthly_salary: Money
    graduate_uplift: tuple[float, ...] = (0.30, 0.55)
    later_growth: Rate = 0.05
    nongraduate_growth: Rate = 0.05
    self_financed: Money = Money(0)
    financed_annual_debt_service: Money = Money(0)
    financing_years: int = 0
    resignation_rate: Rate = 0.0
    resignation_repayment: Money = Money(0)
    scholarship_share: Rate = 0.0
    cost_growth: Rate = 0.0

    def __post_init__(self):
        object.__setattr__(self, "students", tuple(self.students))
        object.__setattr__(self, "graduates", tuple(self.graduates))
        object.__setattr__(self, "graduate_uplift", tuple(self.graduate_uplift))
        if len(self.students) != len(self.graduates):
            raise ValidationError(
                f"students ({len(self.students)}) and graduates ({len(self.graduates)}) cover different years",
                "graduates",
            )
        for i, (s, g) in enumerate(zip(self.students, self.graduates)):
            _check_count(s, f"students[{i}]")
            _check_count(g, f"graduates[{i}]")
        if not self.graduate_uplift:
            raise ValidationError("graduate uplift schedule is empty", "graduate_uplift")
        for name in ("resignation_rate", "scholarship_share"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValidationError("share must lie in [0, 1]", name)
        for name in ("base_monthly_salary", "self_financed", "financed_annual_debt_service", "resignation_repayment"):
            if getattr(self, name).cents < 0:
                raise ValidationError("amount must be >= 0", name)
        _check_count(self.financing_years, "financing_years")

    def graduate_multiple(self, j: int) -> Decimal:
        sched = self.graduate_uplift
        if j <= len(sched):
            return 1 + _d(sched[j - 1])
        return (1 + _d(sched[-1])) * (1 + _d(self.later_growth)) ** (j - len(sched))


def income_uplift_series(params: IncomeUpliftParams, term: TermSpec) -> AnnualSeries:
    """Change in graduates' net income, before attribution.

    Per year: income gain of every active cohort over the nongraduate
    counterfactual, less self-financed cost in the completion year, less debt
    service while financing is outstanding, less resigners' repayments.
    Early years can be negative.
    """
    years = term.years
    if len(params.graduates) < years:
        raise ValidationError(
            f"cohort sequence covers {len(params.graduates)} years, term is {years}", "graduates"
        )
    annual_base = params.base_monthly_salary.to_decimal() * _MONTHS
    paying = 1 - _d(params.scholarship_share)
    ng = 1 + _d(params.nongraduate_growth)
    cost_f = _growth_factors(years, params.cost_growth)
    self_fin = params.self_financed.to_decimal()
    debt = params.financed_annual_debt_service.to_decimal()

    totals = [Decimal(0)] * years
    for k in range(1, years + 1):
        n = params.graduates[k - 1]
        if n == 0:
            continue
        cohort_cost = cost_f[k - 1]
        for t in range(k, years + 1):
            j = t - k + 1
            gain = annual_base * (params.graduate_multiple(j) - ng**j)
            amount = n * gain
            if j == 1:
                amount -= n * paying * self_fin * cohort_cost
            if j <= params.financing_years:
                amount -= n * paying * debt * cohort_cost
            totals[t - 1] += amount
    for t in range(1, years + 1):
        resigners = params.students[t - 1] * _d(params.resignation_rate)
        totals[t - 1] -= resigners * params.resignation_repayment.to_decimal() * cost_f[t - 1]
    return _to_series(totals)


# -- explicit schedule & variability ----------------------------------------


@dataclass(frozen=True)
class ExplicitSchedule:
    """Impact returns supplied directly, e.g. published projection rows.

    ``pre_attribution`` tells the valuation whether C0/D must still be applied.
    """

    values: AnnualSeries
    pre_attribution: bool = True


def apply_variability(series: AnnualSeries, haircut: Rate) -> AnnualSeries:
    """Element-wise ``value_t * haircut ** t``."""
    if not 0 <= haircut <= 1:
        raise ValidationError(f"haircut must lie in [0, 1], got {haircut}")
    if haircut == 1:
        return series
    h = _d(haircut)
    return _to_series([v.to_decimal() * h**t for t, v in enumerate(series, start=1)])


DEFAULT_EVIDENCE_HAIRCUTS = {1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0}


# -- model dispatch ----------------------------------------------------------


@dataclass(frozen=True)
class RentGapModel:
    roll: tuple[RentRollEntry, ...]
    params: HousingParams

    def __post_init__(self):
        object.__setattr__(self, "roll", tuple(self.roll))


@dataclass(frozen=True)
class SubsidyModel:
    subsidies: tuple[SubsidyEntry, ...]
    params: HousingParams

    def __post_init__(self):
        object.__setattr__(self, "subsidies", tuple(self.subsidies))


@dataclass(frozen=True)
class JobsModel:
    params: JobsParams


@dataclass(frozen=True)
class IncomeUpliftModel:
    params: IncomeUpliftParams


ImpactModel = Union[RentGapModel, SubsidyModel, JobsModel, IncomeUpliftModel, ExplicitSchedule]


def project_impact(model: ImpactModel, term: TermSpec) -> AnnualSeries:
    if isinstance(model, RentGapModel):
        return rent_gap_series(model.roll, model.params, term)
    if isinstance(model, SubsidyModel):
        return subsidy_series(model.subsidies, model.params, term)
    if isinstance(model, JobsModel):
        return jobs_series(model.params, term)
    if isinstance(model, IncomeUpliftModel):
        return income_uplift_series(model.params, term)
    if isinstance(model, ExplicitSchedule):
        if len(model.values) != term.years:
            raise ValidationError(
                f"explicit schedule has {len(model.values)} values, term is {term.years}",
                "impact_model.values",
            )
        return model.values
    raise TypeError(f"unknown impact model {type(model).__name__}")


def unit_count(model: ImpactModel) -> int | None:
    """Beneficiary units the model exposes (housing units), if any."""
    if isinstance(model, RentGapModel):
        return sum(e.units for e in model.roll if e.income_band is not IncomeBand.MARKET_RATE)
    if isinstance(model, SubsidyModel):
        return sum(e.units for e in model.subsidies)
    return None
