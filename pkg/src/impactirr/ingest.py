"""Scenario documents and tabular inputs.

A scenario is a YAML document with an explicit ``schema_version``. Money
fields take integer dollars (``1600000``) or decimal strings (``"157314.60"``);
rates take decimal fractions only (``0.0425``). Percent strings are rejected
rather than guessed at. See ``docs/scenario-format.md`` for the full schema.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from impactirr.classification import Thresholds
from impactirr.core import (
    AnnualSeries,
    BICOpportunityCost,
    CapitalType,
    EquityExit,
    EvidenceLevel,
    ExplicitRate,
    InterestOnlyBalloon,
    InterestOnlyThenAmortizing,
    InvestmentSpec,
    LevelAmortizing,
    MICOwnRate,
    Money,
    TermSpec,
    Tier,
)
from impactirr.errors import ScenarioSyntaxError, UnknownFieldError, ValidationError
from impactirr.impact import (
    ExplicitSchedule,
    HousingParams,
    ImpactModel,
    IncomeBand,
    IncomeUpliftModel,
    IncomeUpliftParams,
    JobArchetype,
    JobsModel,
    JobsParams,
    RentGapModel,
    RentRollEntry,
    SubsidyEntry,
    SubsidyModel,
)

SCHEMA_VERSION = 1
BUNDLED_CASES = ("ff", "lisc", "ffcp-dt1", "ffcp-dt2", "learn")

RENT_ROLL_COLUMNS = ("income_band", "bedrooms", "affordable_rent", "market_rent", "units")
SUBSIDY_COLUMNS = ("income_band", "bedrooms", "monthly_subsidy", "units")


@dataclass(frozen=True)
class ReportOptions:
    description: str = ""
    asset_class: str = ""
    beneficiaries: int | None = None
    beneficiary_label: str = "household"
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ReferenceFigure:
    """A published headline figure and the tolerance it is checked at."""

    metric: str
    value: float
    tolerance: float
    relative: bool = False
    source: str = ""

    def check(self, actual: float) -> bool:
        allowed = self.tolerance * abs(self.value) if self.relative else self.tolerance
        return abs(actual - self.value) <= allowed + 1e-12


@dataclass(frozen=True)
class ScenarioFile:
    name: str
    investment: InvestmentSpec
    impact_model: ImpactModel
    thresholds: Thresholds
    mic_first_mover: bool = False
    evidence_haircuts: tuple[tuple[int, float], ...] | None = None
    report: ReportOptions = field(default_factory=ReportOptions)
    reference: tuple[ReferenceFigure, ...] = ()
    schema_version: int = SCHEMA_VERSION


# -- scalar readers ----------------------------------------------------------


def _keys(block: Any, path: str, allowed: set[str], required: set[str] = frozenset()) -> Mapping:
    if not isinstance(block, Mapping):
        raise ValidationError("expected a mapping", path)
    for k in block:
        if k not in allowed:
            raise UnknownFieldError(f"unknown field {k!r}", f"{path}.{k}" if path else str(k))
    for k in required:
        if k not in block:
            raise ValidationError("required field is missing", f"{path}.{k}" if path else k)
    return block


def parse_money(value: Any, path: str) -> Money:
    if isinstance(value, bool):
        raise ValidationError("expected an amount, got a boolean", path)
    if isinstance(value, int):
        return Money.of(value)
    if isinstance(value, str):
        text = value.strip()
        if not text or any(c in text for c in "$,%_ "):
            raise ValidationError(f"malformed amount {value!r}; use digits with '.' decimals", path)
        if "e" in text.lower():
            raise ValidationError(f"exponent notation is not accepted: {value!r}", path)
        try:
            m = Money.of(text)
        except ValueError:
            raise ValidationError(f"malformed amount {value!r}", path) from None
        if "." in text and len(text.split(".", 1)[1]) > 2:
            raise ValidationError(f"amount {value!r} has sub-cent precision", path)
        return m
    if isinstance(value, float):
        raise ValidationError(f"decimal amounts must be quoted strings, got {value!r}", path)
    raise ValidationError(f"expected an amount, got {type(value).__name__}", path)


def parse_rate(value: Any, path: str) -> float:
    if isinstance(value, bool):
        raise ValidationError("expected a rate, got a boolean", path)
    if isinstance(value, (int, float)):
        v = float(value)
        if v != v or v in (float("inf"), float("-inf")):
            raise ValidationError("rate must be finite", path)
        return v
    if isinstance(value, str) and "%" in value:
        raise ValidationError(f"percent strings are not accepted ({value!r}); write a fraction such as 0.0425", path)
    raise ValidationError(f"expected a decimal fraction, got {value!r}", path)


def _int(value: Any, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"expected an integer, got {value!r}", path)
    if minimum is not None and value < minimum:
        raise ValidationError(f"must be >= {minimum}", path)
    return value


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ValidationError(f"expected true/false, got {value!r}", path)
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"expected text, got {value!r}", path)
    return value


def _enum(enum_cls, value: Any, path: str):
    try:
        return enum_cls(value)
    except ValueError:
        choices = ", ".join(str(e.value) for e in enum_cls)
        raise ValidationError(f"unknown value {value!r}; expected one of {choices}", path) from None


def parse_evidence(value: Any, path: str) -> EvidenceLevel:
    if isinstance(value, int) and not isinstance(value, bool):
        try:
            return EvidenceLevel(value)
        except ValueError:
            raise ValidationError(f"evidence level must be 1-4, got {value}", path) from None
    if isinstance(value, str):
        key = value.strip().upper().replace(" ", "_").replace("-", "_")
        if key in EvidenceLevel.__members__:
            return EvidenceLevel[key]
    raise ValidationError(f"unknown evidence level {value!r}", path)


def parse_band(value: Any, path: str) -> IncomeBand:
    if isinstance(value, str):
        key = value.strip().replace("_", "").replace(" ", "").lower()
        for band in IncomeBand:
            if band.value.lower() == key:
                return band
    choices = ", ".join(b.value for b in IncomeBand)
    raise ValidationError(f"unknown income band {value!r}; expected one of {choices}", path)


def _money_list(values: Any, path: str) -> tuple[Money, ...]:
    if not isinstance(values, list):
        raise ValidationError("expected a list of amounts", path)
    return tuple(parse_money(v, f"{path}[{i}]") for i, v in enumerate(values))


def _int_list(values: Any, path: str) -> tuple[int, ...]:
    if not isinstance(values, list):
        raise ValidationError("expected a list of integers", path)
    return tuple(_int(v, f"{path}[{i}]", 0) for i, v in enumerate(values))


def _bare(exc: ValidationError) -> str:
    msg = str(exc)
    if exc.path and msg.startswith(exc.path + ": "):
        return msg[len(exc.path) + 2 :]
    return msg


def _wrap(path: str, fn, *args, **kwargs):
    """Run a constructor, prefixing any validation error with the document path."""
    try:
        return fn(*args, **kwargs)
    except ValidationError as exc:
        inner = exc.path
        if inner and (inner.startswith(path) or path.endswith(inner)):
            full = inner if inner.startswith(path) else path
        else:
            full = f"{path}.{inner}" if inner else path
        raise ValidationError(_bare(exc), full) from None


# -- CSV tables --------------------------------------------------------------


def _read_table(text: str, columns: tuple[str, ...]) -> list[tuple[int, dict]]:
    if text.startswith("﻿"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValidationError("missing header row", "row 1") from None
    if sorted(header) != sorted(columns):
        raise ValidationError(f"header must contain exactly {', '.join(columns)}; got {', '.join(header)}", "row 1")
    rows = []
    for lineno, raw in enumerate(reader, start=2):
        if not raw or all(not c.strip() for c in raw):
            continue
        if len(raw) != len(header):
            raise ValidationError(f"expected {len(header)} fields, got {len(raw)}", f"row {lineno}")
        rows.append((lineno, {h: c.strip() for h, c in zip(header, raw)}))
    return rows


def _csv_int(text: str, path: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"expected an integer, got {text!r}", path) from None


def parse_rent_roll(text: str) -> list[RentRollEntry]:
    """Parse ``income_band,bedrooms,affordable_rent,market_rent,units`` rows."""
    entries = []
    for lineno, row in _read_table(text, RENT_ROLL_COLUMNS):
        where = f"row {lineno}"
        units = _csv_int(row["units"], f"{where}.units")
        if units < 0:
            raise ValidationError(f"negative unit count {units}", f"{where}.units")
        entry = _wrap(
            where,
            RentRollEntry,
            income_band=parse_band(row["income_band"], f"{where}.income_band"),
            bedrooms=_csv_int(row["bedrooms"], f"{where}.bedrooms"),
            affordable_rent=parse_money(row["affordable_rent"], f"{where}.affordable_rent"),
            market_rent=parse_money(row["market_rent"], f"{where}.market_rent"),
            units=units,
        )
        entries.append(entry)
    return entries


def parse_subsidy_table(text: str) -> list[SubsidyEntry]:
    """Parse ``income_band,bedrooms,monthly_subsidy,units`` rows."""
    entries = []
    for lineno, row in _read_table(text, SUBSIDY_COLUMNS):
        where = f"row {lineno}"
        units = _csv_int(row["units"], f"{where}.units")
        if units < 0:
            raise ValidationError(f"negative unit count {units}", f"{where}.units")
        entries.append(
            _wrap(
                where,
                SubsidyEntry,
                income_band=parse_band(row["income_band"], f"{where}.income_band"),
                bedrooms=_csv_int(row["bedrooms"], f"{where}.bedrooms"),
                monthly_subsidy=parse_money(row["monthly_subsidy"], f"{where}.monthly_subsidy"),
                units=units,
            )
        )
    return entries


# -- scenario blocks ---------------------------------------------------------


def _parse_instrument(block: Any, path: str):
    block = _keys(block, path, {"type", "rate", "io_years", "exit_proceeds", "exit_year"}, {"type"})
    kind = block["type"]
    allowed = {
        "interest_only_balloon": {"type", "rate"},
        "level_amortizing": {"type", "rate"},
        "interest_only_then_amortizing": {"type", "rate", "io_years"},
        "equity_exit": {"type", "exit_proceeds", "exit_year"},
    }
    if kind not in allowed:
        raise ValidationError(f"unknown instrument type {kind!r}", f"{path}.type")
    _keys(block, path, allowed[kind], allowed[kind])
    if kind == "interest_only_balloon":
        return _wrap(path, InterestOnlyBalloon, parse_rate(block["rate"], f"{path}.rate"))
    if kind == "level_amortizing":
        return _wrap(path, LevelAmortizing, parse_rate(block["rate"], f"{path}.rate"))
    if kind == "interest_only_then_amortizing":
        return _wrap(
            path,
            InterestOnlyThenAmortizing,
            parse_rate(block["rate"], f"{path}.rate"),
            _int(block["io_years"], f"{path}.io_years", 0),
        )
    return _wrap(
        path,
        EquityExit,
        parse_money(block["exit_proceeds"], f"{path}.exit_proceeds"),
        _int(block["exit_year"], f"{path}.exit_year", 1),
    )


def _parse_hurdle(block: Any, path: str):
    block = _keys(block, path, {"policy", "rate", "market_rate"}, {"policy"})
    policy = block["policy"]
    if policy == "explicit":
        _keys(block, path, {"policy", "rate"}, {"rate"})
        rate = parse_rate(block["rate"], f"{path}.rate")
        if not rate > -1:
            raise ValidationError("hurdle rate must exceed -1", f"{path}.rate")
        return ExplicitRate(rate)
    if policy == "bic_opportunity_cost":
        _keys(block, path, {"policy", "market_rate"}, {"market_rate"})
        return BICOpportunityCost(parse_rate(block["market_rate"], f"{path}.market_rate"))
    if policy == "mic_own_rate":
        _keys(block, path, {"policy"})
        return MICOwnRate()
    raise ValidationError(f"unknown hurdle policy {policy!r}", f"{path}.policy")


_INVESTMENT_FIELDS = {
    "c0", "term_years", "instrument", "tier", "tier_total", "tier_total_by_year", "capital_type",
    "hurdle", "evidence", "variability_haircut", "recovery_multiplier",
}


def _parse_investment(block: Any, path: str = "investment") -> InvestmentSpec:
    block = _keys(
        block, path, _INVESTMENT_FIELDS,
        {"c0", "term_years", "instrument", "tier", "tier_total", "capital_type", "hurdle", "evidence"},
    )
    term = _wrap(f"{path}.term_years", TermSpec, _int(block["term_years"], f"{path}.term_years"))
    c0 = parse_money(block["c0"], f"{path}.c0")
    tier_total = parse_money(block["tier_total"], f"{path}.tier_total")
    if c0.cents <= 0:
        raise ValidationError("initial investment must be positive", f"{path}.c0")
    if c0 > tier_total:
        raise ValidationError(
            f"c0 ({c0}) exceeds tier_total ({tier_total}); C0/D must lie in (0, 1]",
            f"{path}.c0 / {path}.tier_total",
        )
    by_year = None
    if block.get("tier_total_by_year") is not None:
        by_year = _money_list(block["tier_total_by_year"], f"{path}.tier_total_by_year")
    haircut = block.get("variability_haircut")
    kwargs = dict(
        c0=c0,
        term=term,
        instrument=_parse_instrument(block["instrument"], f"{path}.instrument"),
        tier=_enum(Tier, block["tier"], f"{path}.tier"),
        tier_total=tier_total,
        hurdle_policy=_parse_hurdle(block["hurdle"], f"{path}.hurdle"),
        evidence=parse_evidence(block["evidence"], f"{path}.evidence"),
        capital_type=_enum(CapitalType, block["capital_type"], f"{path}.capital_type"),
        variability_haircut=None if haircut is None else parse_rate(haircut, f"{path}.variability_haircut"),
        recovery_multiplier=parse_rate(block.get("recovery_multiplier", 1.0), f"{path}.recovery_multiplier"),
        tier_total_by_year=by_year,
    )
    try:
        return InvestmentSpec(**kwargs)
    except ValidationError as exc:
        loc = exc.path or path
        if not loc.startswith(path):
            loc = f"{path}.{loc}"
        raise ValidationError(_bare(exc), loc) from None


def _load_csv(ref: Any, path: str, base_dir: Path | None) -> str:
    name = _str(ref, path)
    candidates = []
    if base_dir is not None:
        candidates.append(Path(base_dir) / name)
    candidates.append(Path(name))
    for c in candidates:
        if c.is_file():
            return c.read_text(encoding="utf-8")
    bundled = resources.files("impactirr.data").joinpath(name)
    if bundled.is_file():
        return bundled.read_text(encoding="utf-8")
    raise ValidationError(f"table file {name!r} not found", path)


def _table_entries(block: Mapping, path: str, key: str, parser, base_dir, row_parser):
    inline, ref = block.get(key), block.get(f"{key}_csv")
    if (inline is None) == (ref is None):
        raise ValidationError(f"give exactly one of {key!r} or {key + '_csv'!r}", f"{path}.{key}")
    if ref is not None:
        try:
            return tuple(parser(_load_csv(ref, f"{path}.{key}_csv", base_dir)))
        except ValidationError as exc:
            raise ValidationError(str(exc), f"{path}.{key}_csv") from None
    if not isinstance(inline, list):
        raise ValidationError("expected a list of rows", f"{path}.{key}")
    return tuple(row_parser(r, f"{path}.{key}[{i}]") for i, r in enumerate(inline))


def _roll_row(row: Any, path: str) -> RentRollEntry:
    row = _keys(row, path, set(RENT_ROLL_COLUMNS), set(RENT_ROLL_COLUMNS))
    return _wrap(
        path,
        RentRollEntry,
        income_band=parse_band(row["income_band"], f"{path}.income_band"),
        bedrooms=_int(row["bedrooms"], f"{path}.bedrooms", 0),
        affordable_rent=parse_money(row["affordable_rent"], f"{path}.affordable_rent"),
        market_rent=parse_money(row["market_rent"], f"{path}.market_rent"),
        units=_int(row["units"], f"{path}.units", 0),
    )


def _subsidy_row(row: Any, path: str) -> SubsidyEntry:
    row = _keys(row, path, set(SUBSIDY_COLUMNS), set(SUBSIDY_COLUMNS))
    return _wrap(
        path,
        SubsidyEntry,
        income_band=parse_band(row["income_band"], f"{path}.income_band"),
        bedrooms=_int(row["bedrooms"], f"{path}.bedrooms", 0),
        monthly_subsidy=parse_money(row["monthly_subsidy"], f"{path}.monthly_subsidy"),
        units=_int(row["units"], f"{path}.units", 0),
    )


def _housing(block: Mapping, path: str) -> HousingParams:
    return _wrap(
        path,
        HousingParams,
        vacancy_rate=parse_rate(block["vacancy_rate"], f"{path}.vacancy_rate"),
        annual_growth=parse_rate(block.get("annual_growth", 0.0), f"{path}.annual_growth"),
        escalate_first_year=_bool(block.get("escalate_first_year", False), f"{path}.escalate_first_year"),
    )


_UPLIFT_MONEY = ("base_monthly_salary", "self_financed", "financed_annual_debt_service", "resignation_repayment")
_UPLIFT_RATES = ("later_growth", "nongraduate_growth", "resignation_rate", "scholarship_share", "cost_growth")


def _parse_impact(block: Any, path: str, base_dir: Path | None) -> ImpactModel:
    if not isinstance(block, Mapping) or "type" not in block:
        raise ValidationError("impact model needs a 'type'", f"{path}.type")
    kind = block["type"]
    housing = {"type", "vacancy_rate", "annual_growth", "escalate_first_year"}
    if kind == "rent_gap":
        _keys(block, path, housing | {"roll", "roll_csv"}, {"vacancy_rate"})
        roll = _table_entries(block, path, "roll", parse_rent_roll, base_dir, _roll_row)
        if not roll:
            raise ValidationError("rent roll is empty", f"{path}.roll")
        return RentGapModel(roll, _housing(block, path))
    if kind == "subsidy":
        _keys(block, path, housing | {"subsidies", "subsidies_csv"}, {"vacancy_rate"})
        subs = _table_entries(block, path, "subsidies", parse_subsidy_table, base_dir, _subsidy_row)
        if not subs:
            raise ValidationError("subsidy table is empty", f"{path}.subsidies")
        return SubsidyModel(subs, _housing(block, path))
    if kind == "jobs":
        _keys(block, path, {"type", "archetypes", "avg_compensation", "comp_growth", "loan_growth"},
              {"archetypes", "avg_compensation"})
        if not isinstance(block["archetypes"], list) or not block["archetypes"]:
            raise ValidationError("expected a non-empty list", f"{path}.archetypes")
        archetypes = []
        for i, a in enumerate(block["archetypes"]):
            ap = f"{path}.archetypes[{i}]"
            a = _keys(a, ap, {"name", "loans_per_year", "avg_loan", "value_per_100k", "loans_schedule"},
                      {"name", "loans_per_year", "avg_loan", "value_per_100k"})
            sched = a.get("loans_schedule")
            archetypes.append(
                _wrap(
                    ap,
                    JobArchetype,
                    name=_str(a["name"], f"{ap}.name"),
                    loans_per_year=_int(a["loans_per_year"], f"{ap}.loans_per_year", 0),
                    avg_loan=parse_money(a["avg_loan"], f"{ap}.avg_loan"),
                    value_per_100k=parse_money(a["value_per_100k"], f"{ap}.value_per_100k"),
                    loans_schedule=None if sched is None else _int_list(sched, f"{ap}.loans_schedule"),
                )
            )
        params = _wrap(
            path,
            JobsParams,
            archetypes=tuple(archetypes),
            avg_compensation=parse_money(block["avg_compensation"], f"{path}.avg_compensation"),
            comp_growth=parse_rate(block.get("comp_growth", 0.03), f"{path}.comp_growth"),
            loan_growth=parse_rate(block.get("loan_growth", 0.0), f"{path}.loan_growth"),
        )
        return JobsModel(params)
    if kind == "income_uplift":
        allowed = {"type", "students", "graduates", "graduate_uplift", "financing_years", *_UPLIFT_MONEY, *_UPLIFT_RATES}
        _keys(block, path, allowed, {"students", "graduates", "base_monthly_salary"})
        kwargs: dict[str, Any] = {
            "students": _int_list(block["students"], f"{path}.students"),
            "graduates": _int_list(block["graduates"], f"{path}.graduates"),
        }
        for k in _UPLIFT_MONEY:
            if k in block:
                kwargs[k] = parse_money(block[k], f"{path}.{k}")
        for k in _UPLIFT_RATES:
            if k in block:
                kwargs[k] = parse_rate(block[k], f"{path}.{k}")
        if "graduate_uplift" in block:
            up = block["graduate_uplift"]
            if not isinstance(up, list):
                raise ValidationError("expected a list of rates", f"{path}.graduate_uplift")
            kwargs["graduate_uplift"] = tuple(parse_rate(u, f"{path}.graduate_uplift[{i}]") for i, u in enumerate(up))
        if "financing_years" in block:
            kwargs["financing_years"] = _int(block["financing_years"], f"{path}.financing_years", 0)
        return IncomeUpliftModel(_wrap(path, IncomeUpliftParams, **kwargs))
    if kind == "explicit":
        _keys(block, path, {"type", "values", "pre_attribution"}, {"values", "pre_attribution"})
        return ExplicitSchedule(
            AnnualSeries(_money_list(block["values"], f"{path}.values")),
            _bool(block["pre_attribution"], f"{path}.pre_attribution"),
        )
    raise ValidationError(
        f"unknown impact model {kind!r}; expected rent_gap, subsidy, jobs, income_uplift or explicit", f"{path}.type"
    )


def _parse_thresholds(block: Any, path: str = "thresholds") -> Thresholds:
    block = _keys(block, path, {"market_rate_floor", "impact_floor_annual", "impact_irr_floor", "meets_impact_floor"},
                  {"market_rate_floor"})
    floor_annual = block.get("impact_floor_annual")
    irr_floor = block.get("impact_irr_floor")
    meets = block.get("meets_impact_floor")
    return _wrap(
        path,
        Thresholds,
        market_rate_floor=parse_rate(block["market_rate_floor"], f"{path}.market_rate_floor"),
        impact_floor_annual=None if floor_annual is None else parse_money(floor_annual, f"{path}.impact_floor_annual"),
        impact_irr_floor=None if irr_floor is None else parse_rate(irr_floor, f"{path}.impact_irr_floor"),
        meets_impact_floor=None if meets is None else _bool(meets, f"{path}.meets_impact_floor"),
    )


def _parse_report(block: Any, path: str = "report") -> ReportOptions:
    block = _keys(block, path, {"description", "asset_class", "beneficiaries", "beneficiary_label", "notes"})
    notes = block.get("notes", [])
    if not isinstance(notes, list):
        raise ValidationError("expected a list of strings", f"{path}.notes")
    ben = block.get("beneficiaries")
    return ReportOptions(
        description=_str(block.get("description", ""), f"{path}.description"),
        asset_class=_str(block.get("asset_class", ""), f"{path}.asset_class"),
        beneficiaries=None if ben is None else _int(ben, f"{path}.beneficiaries", 1),
        beneficiary_label=_str(block.get("beneficiary_label", "household"), f"{path}.beneficiary_label"),
        notes=tuple(_str(n, f"{path}.notes[{i}]") for i, n in enumerate(notes)),
    )


REFERENCE_METRICS = (
    "impact_irr",
    "financial_irr",
    "inpv_at_hurdle",
    "first_year_impact",
    "first_year_financial",
    "nominal_impact_total",
    "per_beneficiary_annual",
)


def _parse_reference(items: Any, path: str = "reference") -> tuple[ReferenceFigure, ...]:
    if not isinstance(items, list):
        raise ValidationError("expected a list", path)
    out = []
    for i, item in enumerate(items):
        p = f"{path}[{i}]"
        item = _keys(item, p, {"metric", "value", "tolerance", "relative", "source"}, {"metric", "value", "tolerance"})
        metric = _str(item["metric"], f"{p}.metric")
        if metric not in REFERENCE_METRICS:
            raise ValidationError(f"unknown metric {metric!r}", f"{p}.metric")
        value = item["value"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError("expected a number", f"{p}.value")
        out.append(
            ReferenceFigure(
                metric=metric,
                value=float(value),
                tolerance=parse_rate(item["tolerance"], f"{p}.tolerance"),
                relative=_bool(item.get("relative", False), f"{p}.relative"),
                source=_str(item.get("source", ""), f"{p}.source"),
            )
        )
    return tuple(out)


_TOP_FIELDS = {
    "schema_version", "name", "investment", "impact_model", "thresholds", "mic_first_mover",
    "evidence_haircuts", "report", "reference",
}


def scenario_from_mapping(doc: Any, base_dir: Path | None = None) -> ScenarioFile:
    doc = _keys(doc, "", _TOP_FIELDS, {"schema_version", "investment", "impact_model", "thresholds"})
    version = doc["schema_version"]
    if version != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {version!r}; this build reads {SCHEMA_VERSION}", "schema_version")
    investment = _parse_investment(doc["investment"])
    model = _parse_impact(doc["impact_model"], "impact_model", base_dir)
    if isinstance(model, ExplicitSchedule) and len(model.values) != investment.term.years:
        raise ValidationError(
            f"{len(model.values)} values for a {investment.term.years}-year term", "impact_model.values"
        )
    haircuts = None
    if doc.get("evidence_haircuts") is not None:
        table = doc["evidence_haircuts"]
        if not isinstance(table, Mapping):
            raise ValidationError("expected a mapping of evidence level to haircut", "evidence_haircuts")
        pairs = {}
        for k, v in table.items():
            level = parse_evidence(k, f"evidence_haircuts.{k}")
            h = parse_rate(v, f"evidence_haircuts.{k}")
            if not 0 <= h <= 1:
                raise ValidationError("haircut must lie in [0, 1]", f"evidence_haircuts.{k}")
            pairs[int(level)] = h
        haircuts = tuple(sorted(pairs.items()))
    return ScenarioFile(
        name=_str(doc.get("name", ""), "name"),
        investment=investment,
        impact_model=model,
        thresholds=_parse_thresholds(doc["thresholds"]),
        mic_first_mover=_bool(doc.get("mic_first_mover", False), "mic_first_mover"),
        evidence_haircuts=haircuts,
        report=_parse_report(doc.get("report", {})),
        reference=_parse_reference(doc.get("reference", [])),
        schema_version=version,
    )


def parse_scenario(text: str, base_dir: Path | str | None = None) -> ScenarioFile:
    """Parse and fully validate a scenario document.

    ``*_csv`` table references resolve against ``base_dir``, then the working
    directory, then the bundled data directory.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ScenarioSyntaxError(f"malformed scenario document{where}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(doc, Mapping):
        raise ScenarioSyntaxError("scenario document must be a mapping at the top level")
    return scenario_from_mapping(doc, None if base_dir is None else Path(base_dir))


def load_scenario(path: Path | str) -> ScenarioFile:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), base_dir=path.parent)


def bundled_scenario_text(case: str) -> str:
    if case not in BUNDLED_CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {', '.join(BUNDLED_CASES)}")
    return resources.files("impactirr.data").joinpath(f"{case}.scenario").read_text(encoding="utf-8")


def load_bundled(case: str) -> ScenarioFile:
    return parse_scenario(bundled_scenario_text(case))


# -- serialization -----------------------------------------------------------


def money_out(m: Money) -> int | str:
    if m.cents % 100 == 0:
        return m.cents // 100
    return str(m)


def _instrument_out(inst) -> dict:
    if isinstance(inst, InterestOnlyBalloon):
        return {"type": "interest_only_balloon", "rate": inst.rate}
    if isinstance(inst, LevelAmortizing):
        return {"type": "level_amortizing", "rate": inst.rate}
    if isinstance(inst, InterestOnlyThenAmortizing):
        return {"type": "interest_only_then_amortizing", "rate": inst.rate, "io_years": inst.io_years}
    return {"type": "equity_exit", "exit_proceeds": money_out(inst.exit_proceeds), "exit_year": inst.exit_year}


def _hurdle_out(policy) -> dict:
    if isinstance(policy, ExplicitRate):
        return {"policy": "explicit", "rate": policy.rate}
    if isinstance(policy, BICOpportunityCost):
        return {"policy": "bic_opportunity_cost", "market_rate": policy.market_rate}
    return {"policy": "mic_own_rate"}


def _investment_out(spec: InvestmentSpec) -> dict:
    out: dict[str, Any] = {
        "c0": money_out(spec.c0),
        "term_years": spec.term.years,
        "instrument": _instrument_out(spec.instrument),
        "tier": spec.tier.value,
        "tier_total": money_out(spec.tier_total),
    }
    if spec.tier_total_by_year is not None:
        out["tier_total_by_year"] = [money_out(m) for m in spec.tier_total_by_year]
    out["capital_type"] = spec.capital_type.value
    out["hurdle"] = _hurdle_out(spec.hurdle_policy)
    out["evidence"] = spec.evidence.name.lower()
    if spec.variability_haircut is not None:
        out["variability_haircut"] = spec.variability_haircut
    if spec.recovery_multiplier != 1.0:
        out["recovery_multiplier"] = spec.recovery_multiplier
    return out


def _housing_out(p: HousingParams) -> dict:
    out: dict[str, Any] = {"vacancy_rate": p.vacancy_rate, "annual_growth": p.annual_growth}
    if p.escalate_first_year:
        out["escalate_first_year"] = True
    return out


def _impact_out(model: ImpactModel) -> dict:
    if isinstance(model, RentGapModel):
        return {
            "type": "rent_gap",
            **_housing_out(model.params),
            "roll": [
                {
                    "income_band": e.income_band.value,
                    "bedrooms": e.bedrooms,
                    "affordable_rent": money_out(e.affordable_rent),
                    "market_rent": money_out(e.market_rent),
                    "units": e.units,
                }
                for e in model.roll
            ],
        }
    if isinstance(model, SubsidyModel):
        return {
            "type": "subsidy",
            **_housing_out(model.params),
            "subsidies": [
                {
                    "income_band": e.income_band.value,
                    "bedrooms": e.bedrooms,
                    "monthly_subsidy": money_out(e.monthly_subsidy),
                    "units": e.units,
                }
                for e in model.subsidies
            ],
        }
    if isinstance(model, JobsModel):
        p = model.params
        archetypes = []
        for a in p.archetypes:
            d: dict[str, Any] = {
                "name": a.name,
                "loans_per_year": a.loans_per_year,
                "avg_loan": money_out(a.avg_loan),
                "value_per_100k": money_out(a.value_per_100k),
            }
            if a.loans_schedule is not None:
                d["loans_schedule"] = list(a.loans_schedule)
            archetypes.append(d)
        return {
            "type": "jobs",
            "avg_compensation": money_out(p.avg_compensation),
            "comp_growth": p.comp_growth,
            "loan_growth": p.loan_growth,
            "archetypes": archetypes,
        }
    if isinstance(model, IncomeUpliftModel):
        p = model.params
        out = {
            "type": "income_uplift",
            "students": list(p.students),
            "graduates": list(p.graduates),
            "graduate_uplift": list(p.graduate_uplift),
            "financing_years": p.financing_years,
        }
        for k in _UPLIFT_MONEY:
            out[k] = money_out(getattr(p, k))
        for k in _UPLIFT_RATES:
            out[k] = getattr(p, k)
        return out
    return {
        "type": "explicit",
        "pre_attribution": model.pre_attribution,
        "values": [money_out(v) for v in model.values],
    }


def scenario_to_mapping(sf: ScenarioFile) -> dict:
    th = sf.thresholds
    thresholds: dict[str, Any] = {"market_rate_floor": th.market_rate_floor}
    if th.impact_floor_annual is not None:
        thresholds["impact_floor_annual"] = money_out(th.impact_floor_annual)
    if th.impact_irr_floor is not None:
        thresholds["impact_irr_floor"] = th.impact_irr_floor
    if th.meets_impact_floor is not None:
        thresholds["meets_impact_floor"] = th.meets_impact_floor
    doc: dict[str, Any] = {
        "schema_version": sf.schema_version,
        "name": sf.name,
        "investment": _investment_out(sf.investment),
        "impact_model": _impact_out(sf.impact_model),
        "thresholds": thresholds,
        "mic_first_mover": sf.mic_first_mover,
    }
    if sf.evidence_haircuts is not None:
        doc["evidence_haircuts"] = {EvidenceLevel(k).name.lower(): v for k, v in sf.evidence_haircuts}
    r = sf.report
    report: dict[str, Any] = {"description": r.description, "asset_class": r.asset_class}
    if r.beneficiaries is not None:
        report["beneficiaries"] = r.beneficiaries
    report["beneficiary_label"] = r.beneficiary_label
    report["notes"] = list(r.notes)
    doc["report"] = report
    if sf.reference:
        doc["reference"] = [
            {"metric": f.metric, "value": f.value, "tolerance": f.tolerance, "relative": f.relative, "source": f.source}
            for f in sf.reference
        ]
    return doc


def serialize_scenario(sf: ScenarioFile) -> str:
    return yaml.safe_dump(scenario_to_mapping(sf), sort_keys=False, allow_unicode=True, width=100)
