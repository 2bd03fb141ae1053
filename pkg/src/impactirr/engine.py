"""Scenario evaluation pipeline: series -> valuation -> classification."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction

from impactirr.cashflows import build_financial_series
from impactirr.classification import check_tier, classify
from impactirr.core import AnnualSeries, CapitalClass, Money, Rate
from impactirr.errors import ValidationError
from impactirr.impact import (
    DEFAULT_EVIDENCE_HAIRCUTS,
    ExplicitSchedule,
    JobsModel,
    RentGapModel,
    SubsidyModel,
    apply_variability,
    jobs_count,
    project_impact,
    unit_count,
)
from impactirr.ingest import ReferenceFigure, ScenarioFile
from impactirr.valuation import ValuationResult, resolve_hurdle_rate, value_investment


@dataclass(frozen=True)
class OutcomeStats:
    beneficiaries: int | None
    beneficiary_label: str
    aggregate_annual: Money
    nominal_total: Money
    per_beneficiary_annual: Money | None
    per_beneficiary_term: Money | None


@dataclass(frozen=True)
class Evaluation:
    scenario: ScenarioFile
    financial: AnnualSeries
    impact: AnnualSeries
    attribution: tuple[Fraction, ...]
    result: ValuationResult
    capital: CapitalClass
    tier_warnings: tuple[str, ...] = ()

    @property
    def attributed_impact(self) -> AnnualSeries:
        return AnnualSeries(tuple(row.impact for row in self.result.timeline))


def effective_haircut(sf: ScenarioFile) -> float:
    spec = sf.investment
    if spec.variability_haircut is not None:
        return spec.variability_haircut
    table = dict(DEFAULT_EVIDENCE_HAIRCUTS)
    if sf.evidence_haircuts:
        table.update(dict(sf.evidence_haircuts))
    return table[int(spec.evidence)]


def applied_attribution(sf: ScenarioFile) -> tuple[Fraction, ...]:
    model = sf.impact_model
    if isinstance(model, ExplicitSchedule) and not model.pre_attribution:
        return (Fraction(1),) * sf.investment.term.years
    return sf.investment.attribution_by_year()


def prepare(
    sf: ScenarioFile,
    hurdle: Rate | None = None,
    attribution_override: float | None = None,
):
    """Series, per-year attribution and hurdle rate for a scenario."""
    spec = sf.investment
    fin = build_financial_series(spec)
    imp = apply_variability(project_impact(sf.impact_model, spec.term), effective_haircut(sf))
    if attribution_override is not None:
        if not 0 <= attribution_override <= 1:
            raise ValidationError("attribution override must lie in [0, 1]", "attribution")
        attribution = (Fraction(attribution_override).limit_denominator(10**9),) * spec.term.years
    else:
        attribution = applied_attribution(sf)
    r = resolve_hurdle_rate(spec) if hurdle is None else hurdle
    if not r > -1:
        raise ValidationError(f"hurdle rate must exceed -1, got {r}", "hurdle")
    return spec, fin, imp, attribution, r


def evaluate(
    sf: ScenarioFile,
    hurdle: Rate | None = None,
    attribution_override: float | None = None,
    **grid,
) -> Evaluation:
    """Value a scenario.

    ``hurdle`` replaces the policy-derived hurdle rate. ``attribution_override``
    replaces the per-year attribution applied to the impact series.
    """
    spec, fin, imp, attribution, r = prepare(sf, hurdle, attribution_override)
    result = value_investment(spec.c0, fin, imp, list(attribution), r, spec.attribution, **grid)

    attributed = AnnualSeries(tuple(row.impact for row in result.timeline))
    projected = result.financial_irr if result.financial_irr is not None else -1.0
    meets = sf.thresholds.impact_met(attributed, result.impact_irr)
    capital = classify(projected, sf.thresholds, meets, sf.mic_first_mover)
    return Evaluation(sf, fin, imp, attribution, result, capital, tuple(check_tier(spec)))


def outcome_stats(ev: Evaluation) -> OutcomeStats:
    sf = ev.scenario
    attributed = ev.attributed_impact
    years = len(attributed)
    label = sf.report.beneficiary_label
    count = sf.report.beneficiaries
    if count is None:
        count = unit_count(sf.impact_model)
    # job counts change year to year: count year-1 jobs, the base of the annual figure
    per_job_year = count is None and isinstance(sf.impact_model, JobsModel)
    if per_job_year:
        jobs = jobs_count(sf.impact_model.params, sf.investment.term)
        count = round(jobs[0]) or None
        label = "job"
    aggregate = attributed[0] if years else Money(0)
    total = attributed.total()
    per_year = per_term = None
    if count:
        per_year = Money.of(aggregate.to_decimal() / count)
        if not per_job_year:
            per_term = Money.of(total.to_decimal() / count)
    return OutcomeStats(count, label, aggregate, total, per_year, per_term)


def with_housing_param(sf: ScenarioFile, name: str, value: float) -> ScenarioFile:
    """Copy of a housing scenario with ``vacancy_rate`` or ``annual_growth`` replaced."""
    model = sf.impact_model
    if not isinstance(model, (RentGapModel, SubsidyModel)):
        raise ValidationError(f"{name} applies only to rent_gap and subsidy models", "impact_model.type")
    params = dataclasses.replace(model.params, **{name: value})
    return dataclasses.replace(sf, impact_model=dataclasses.replace(model, params=params))


def reference_value(ev: Evaluation, metric: str) -> float | None:
    res = ev.result
    stats = outcome_stats(ev)
    if metric == "impact_irr":
        return res.impact_irr
    if metric == "financial_irr":
        return res.financial_irr
    if metric == "inpv_at_hurdle":
        return res.inpv_at_hurdle.dollars
    if metric == "first_year_impact":
        return res.timeline[0].impact.dollars
    if metric == "first_year_financial":
        return res.timeline[0].financial.dollars
    if metric == "nominal_impact_total":
        return stats.nominal_total.dollars
    if metric == "per_beneficiary_annual":
        return None if stats.per_beneficiary_annual is None else stats.per_beneficiary_annual.dollars
    raise KeyError(metric)


@dataclass(frozen=True)
class ReferenceCheck:
    figure: ReferenceFigure
    actual: float | None

    @property
    def passed(self) -> bool:
        return self.actual is not None and self.figure.check(self.actual)


def check_references(ev: Evaluation) -> list[ReferenceCheck]:
    return [ReferenceCheck(f, reference_value(ev, f.metric)) for f in ev.scenario.reference]
