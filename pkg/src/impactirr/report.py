"""Due-diligence record and its text, JSON and CSV renderings.

Display rounding happens once: dollars to the nearest unit (half-up) and rates
to one decimal percent. JSON keeps full precision (cents, float rates) so it
parses back to an equal record.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from impactirr.core import CapitalClass, CapitalKind, EvidenceLevel, InvestmentSpec, Money, Rate
from impactirr.valuation import TimelineRow, ValuationResult

JSON_SCHEMA_VERSION = 1
TIMELINE_COLUMNS = ("year", "financial", "impact", "total", "discounted")


class Recommendation(enum.Enum):
    CONSIDER_FOR_INVESTMENT = "consider_for_investment"
    DECLINE = "decline"
    INSUFFICIENT_DATA = "insufficient_data"

    @property
    def label(self) -> str:
        return {
            Recommendation.CONSIDER_FOR_INVESTMENT: "Consider for possible investment",
            Recommendation.DECLINE: "Decline",
            Recommendation.INSUFFICIENT_DATA: "Insufficient data for a recommendation",
        }[self]


@dataclass(frozen=True)
class DueDiligenceRecord:
    name: str
    description: str
    asset_class: str
    initial_investment: Money
    term_years: int
    evidence_level: EvidenceLevel
    tier: str
    attribution_factor: Fraction
    capital_class: CapitalKind
    catalytic: bool
    beneficiaries: int | None
    beneficiary_label: str
    aggregate_annual_outcome: Money
    per_beneficiary_annual: Money | None
    per_beneficiary_term: Money | None
    nominal_total_outcome: Money
    hurdle_rate: Rate
    financial_irr: Rate | None
    impact_irr: Rate
    all_irr_roots: tuple[Rate, ...]
    inpv_at_hurdle: Money
    recommendation: Recommendation
    timeline: tuple[TimelineRow, ...]
    notes: tuple[str, ...] = field(default=())

    @property
    def multiple_roots(self) -> bool:
        return len(self.all_irr_roots) > 1

    @property
    def attribution_statement(self) -> str:
        tier = self.tier.replace("tier", "Tier ")
        if self.catalytic:
            return f"{tier}. Potential catalytic opportunity."
        return f"{tier}. No catalytic opportunity identified."


def recommend(result: ValuationResult, capital: CapitalClass) -> Recommendation:
    """Advisory flag only; never an automatic decline."""
    if capital.kind.is_impact and result.impact_irr >= result.hurdle_rate:
        return Recommendation.CONSIDER_FOR_INVESTMENT
    return Recommendation.INSUFFICIENT_DATA


def build_report(
    spec: InvestmentSpec,
    result: ValuationResult,
    stats,
    capital: CapitalClass,
    *,
    name: str = "",
    description: str = "",
    asset_class: str = "",
    notes: tuple[str, ...] = (),
) -> DueDiligenceRecord:
    if result is None:
        raise ValueError("a completed valuation is required")
    return DueDiligenceRecord(
        name=name,
        description=description,
        asset_class=asset_class,
        initial_investment=spec.c0,
        term_years=spec.term.years,
        evidence_level=spec.evidence,
        tier=spec.tier.value,
        attribution_factor=result.attribution_factor,
        capital_class=capital.kind,
        catalytic=capital.catalytic,
        beneficiaries=stats.beneficiaries,
        beneficiary_label=stats.beneficiary_label,
        aggregate_annual_outcome=stats.aggregate_annual,
        per_beneficiary_annual=stats.per_beneficiary_annual,
        per_beneficiary_term=stats.per_beneficiary_term,
        nominal_total_outcome=stats.nominal_total,
        hurdle_rate=result.hurdle_rate,
        financial_irr=result.financial_irr,
        impact_irr=result.impact_irr,
        all_irr_roots=tuple(result.all_irr_roots),
        inpv_at_hurdle=result.inpv_at_hurdle,
        recommendation=recommend(result, capital),
        timeline=tuple(result.timeline),
        notes=tuple(notes),
    )


def report_for(ev) -> DueDiligenceRecord:
    """Record for an :class:`impactirr.engine.Evaluation`."""
    from impactirr.engine import outcome_stats

    sf = ev.scenario
    return build_report(
        sf.investment,
        ev.result,
        outcome_stats(ev),
        ev.capital,
        name=sf.name,
        description=sf.report.description,
        asset_class=sf.report.asset_class,
        notes=sf.report.notes + ev.tier_warnings,
    )


# -- display helpers ---------------------------------------------------------


def whole_dollars(m: Money) -> int:
    return int(m.to_decimal().quantize(Decimal(1), rounding=ROUND_HALF_UP))


def fmt_dollars(m: Money | None) -> str:
    if m is None:
        return "n/a"
    v = whole_dollars(m)
    return f"-${-v:,}" if v < 0 else f"${v:,}"


def fmt_rate(r: Rate | None) -> str:
    if r is None:
        return "n/a"
    pct = (Decimal(repr(r)) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{pct}%"


# -- renderers ---------------------------------------------------------------


def render_text(rec: DueDiligenceRecord) -> str:
    irr_line = fmt_rate(rec.impact_irr)
    if rec.multiple_roots:
        roots = ", ".join(fmt_rate(r) for r in rec.all_irr_roots)
        irr_line += f" (multiple roots: {roots}; smallest shown)"
    outcome = f"Aggregate annual net benefit {fmt_dollars(rec.aggregate_annual_outcome)}"
    if rec.per_beneficiary_annual is not None:
        outcome += f"; {fmt_dollars(rec.per_beneficiary_annual)} per {rec.beneficiary_label} per year"
        if rec.per_beneficiary_term is not None:
            outcome += f", {fmt_dollars(rec.per_beneficiary_term)} per {rec.beneficiary_label} over the {rec.term_years}-year term"
    rows = [
        ("Investment", rec.description or rec.name or "n/a"),
        ("Initial investment", fmt_dollars(rec.initial_investment)),
        ("Term", f"{rec.term_years} years"),
        ("Asset class", rec.asset_class or "n/a"),
        ("Level of evidence", f"{int(rec.evidence_level)}, {rec.evidence_level.label}"),
        ("Attribution and catalytic opportunity", rec.attribution_statement),
        ("Attribution factor (C0/D)", f"{rec.attribution_factor.numerator}/{rec.attribution_factor.denominator}"),
        ("Capital class", rec.capital_class.value.replace("_", " ")),
        ("Beneficiaries", "n/a" if rec.beneficiaries is None else f"{rec.beneficiaries} {rec.beneficiary_label}s"),
        ("Notable outcomes", outcome),
        ("Nominal total outcome", fmt_dollars(rec.nominal_total_outcome)),
        ("Hurdle rate", fmt_rate(rec.hurdle_rate)),
        ("Projected financial IRR", fmt_rate(rec.financial_irr)),
        ("Projected impact IRR", irr_line),
        ("Impact NPV at hurdle", fmt_dollars(rec.inpv_at_hurdle)),
        ("Recommendation", rec.recommendation.label),
    ]
    width = max(len(k) for k, _ in rows)
    out = ["Due Diligence" + (f": {rec.name}" if rec.name else ""), "=" * (width + 40)]
    out += [f"{k.ljust(width)}  {v}" for k, v in rows]
    out += ["", "Projected returns"]
    header = ("Year", "Financial", "Impact", "Total", "Discounted")
    table = [header, ("0", fmt_dollars(-rec.initial_investment), "-", fmt_dollars(-rec.initial_investment), fmt_dollars(-rec.initial_investment))]
    for row in rec.timeline:
        table.append((str(row.year), fmt_dollars(row.financial), fmt_dollars(row.impact), fmt_dollars(row.total), fmt_dollars(row.discounted)))
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    for r in table:
        out.append("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    if rec.notes:
        out += ["", "Notes"]
        out += [f"- {n}" for n in rec.notes]
    return "\n".join(out) + "\n"


def render_csv_timeline(rec: DueDiligenceRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TIMELINE_COLUMNS)
    for row in rec.timeline:
        w.writerow(
            [row.year, whole_dollars(row.financial), whole_dollars(row.impact), whole_dollars(row.total), whole_dollars(row.discounted)]
        )
    return buf.getvalue()


def _m(m: Money | None):
    return None if m is None else str(m)


def _pm(s) -> Money | None:
    return None if s is None else Money.of(s)


def record_to_dict(rec: DueDiligenceRecord) -> dict:
    return {
        "schema_version": JSON_SCHEMA_VERSION,
        "name": rec.name,
        "description": rec.description,
        "asset_class": rec.asset_class,
        "initial_investment": _m(rec.initial_investment),
        "term_years": rec.term_years,
        "evidence_level": int(rec.evidence_level),
        "tier": rec.tier,
        "attribution_factor": f"{rec.attribution_factor.numerator}/{rec.attribution_factor.denominator}",
        "capital_class": rec.capital_class.value,
        "catalytic": rec.catalytic,
        "beneficiaries": rec.beneficiaries,
        "beneficiary_label": rec.beneficiary_label,
        "aggregate_annual_outcome": _m(rec.aggregate_annual_outcome),
        "per_beneficiary_annual": _m(rec.per_beneficiary_annual),
        "per_beneficiary_term": _m(rec.per_beneficiary_term),
        "nominal_total_outcome": _m(rec.nominal_total_outcome),
        "hurdle_rate": rec.hurdle_rate,
        "financial_irr": rec.financial_irr,
        "impact_irr": rec.impact_irr,
        "all_irr_roots": list(rec.all_irr_roots),
        "multiple_roots": rec.multiple_roots,
        "inpv_at_hurdle": _m(rec.inpv_at_hurdle),
        "recommendation": rec.recommendation.value,
        "timeline": [
            {
                "year": r.year,
                "financial": _m(r.financial),
                "impact": _m(r.impact),
                "total": _m(r.total),
                "discounted": _m(r.discounted),
            }
            for r in rec.timeline
        ],
        "notes": list(rec.notes),
    }


def render_json(rec: DueDiligenceRecord) -> str:
    return json.dumps(record_to_dict(rec), indent=2) + "\n"


def record_from_json(text: str) -> DueDiligenceRecord:
    d = json.loads(text)
    if d.get("schema_version") != JSON_SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema_version {d.get('schema_version')!r}")
    return DueDiligenceRecord(
        name=d["name"],
        description=d["description"],
        asset_class=d["asset_class"],
        initial_investment=Money.of(d["initial_investment"]),
        term_years=d["term_years"],
        evidence_level=EvidenceLevel(d["evidence_level"]),
        tier=d["tier"],
        attribution_factor=Fraction(d["attribution_factor"]),
        capital_class=CapitalKind(d["capital_class"]),
        catalytic=d["catalytic"],
        beneficiaries=d["beneficiaries"],
        beneficiary_label=d["beneficiary_label"],
        aggregate_annual_outcome=Money.of(d["aggregate_annual_outcome"]),
        per_beneficiary_annual=_pm(d["per_beneficiary_annual"]),
        per_beneficiary_term=_pm(d["per_beneficiary_term"]),
        nominal_total_outcome=Money.of(d["nominal_total_outcome"]),
        hurdle_rate=d["hurdle_rate"],
        financial_irr=d["financial_irr"],
        impact_irr=d["impact_irr"],
        all_irr_roots=tuple(d["all_irr_roots"]),
        inpv_at_hurdle=Money.of(d["inpv_at_hurdle"]),
        recommendation=Recommendation(d["recommendation"]),
        timeline=tuple(
            TimelineRow(r["year"], Money.of(r["financial"]), Money.of(r["impact"]), Money.of(r["total"]), Money.of(r["discounted"]))
            for r in d["timeline"]
        ),
        notes=tuple(d["notes"]),
    )


def render(rec: DueDiligenceRecord, fmt: str = "text") -> bytes:
    if fmt == "text":
        out = render_text(rec)
    elif fmt == "json":
        out = render_json(rec)
    elif fmt in ("csv", "csv-timeline"):
        out = render_csv_timeline(rec)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return out.encode("utf-8")
