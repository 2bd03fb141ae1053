"""Domain types for impact NPV / impact IRR valuation.

Cash and monetized impact are carried as exact integer cents (:class:`Money`).
Discounting and root finding happen in binary floating point on dollar
values; results are re-quantized to cents only for display or storage.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

from impactirr.errors import ValidationError

Rate = float
"""Per-year fraction, e.g. ``0.06`` for 6%/yr."""

MAX_TERM_YEARS = 100


def _to_decimal(value) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not monetary amounts")
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, float):
        # repr gives the shortest string that round-trips the float
        return Decimal(repr(value))
    if isinstance(value, str):
        try:
            return Decimal(value.strip())
        except InvalidOperation:
            raise ValueError(f"not a decimal amount: {value!r}") from None
    raise TypeError(f"cannot convert {type(value).__name__} to money")


@dataclass(frozen=True, order=True)
class Money:
    """Exact currency amount stored as integer cents."""

    cents: int

    def __post_init__(self):
        if isinstance(self.cents, bool) or not isinstance(self.cents, int):
            raise TypeError("Money.cents must be an int")

    @classmethod
    def of(cls, amount) -> "Money":
        """Build from dollars (int, decimal string, Decimal or float), rounding half-up to the cent."""
        dec = _to_decimal(amount)
        if not dec.is_finite():
            raise ValueError(f"non-finite amount: {amount!r}")
        return cls(int((dec * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP)))

    @classmethod
    def zero(cls) -> "Money":
        return cls(0)

    def to_decimal(self) -> Decimal:
        return Decimal(self.cents) / 100

    @property
    def dollars(self) -> float:
        return self.cents / 100

    def __float__(self) -> float:
        return self.cents / 100

    def __add__(self, other: "Money") -> "Money":
        if not isinstance(other, Money):
            return NotImplemented
        return Money(self.cents + other.cents)

    def __radd__(self, other):
        # lets sum() start from the int 0
        if other == 0:
            return self
        return NotImplemented

    def __sub__(self, other: "Money") -> "Money":
        if not isinstance(other, Money):
            return NotImplemented
        return Money(self.cents - other.cents)

    def __neg__(self) -> "Money":
        return Money(-self.cents)

    def __abs__(self) -> "Money":
        return Money(abs(self.cents))

    def __mul__(self, k) -> "Money":
        if isinstance(k, bool) or not isinstance(k, int):
            return NotImplemented
        return Money(self.cents * k)

    __rmul__ = __mul__

    def scale(self, factor) -> "Money":
        """Multiply by a non-integer factor, rounding half-up to the cent."""
        if isinstance(factor, Fraction):
            dec = Decimal(factor.numerator) / Decimal(factor.denominator)
        else:
            dec = _to_decimal(factor)
        return Money.of(self.to_decimal() * dec)

    def __bool__(self) -> bool:
        return self.cents != 0

    def __str__(self) -> str:
        return f"{self.to_decimal():.2f}"

    def __repr__(self) -> str:
        return f"Money('{self}')"


def money_sum(values: Iterable[Money]) -> Money:
    return Money(sum(v.cents for v in values))


@dataclass(frozen=True)
class TermSpec:
    years: int

    def __post_init__(self):
        if isinstance(self.years, bool) or not isinstance(self.years, int):
            raise ValidationError("term must be an integer number of years", "term_years")
        if not 1 <= self.years <= MAX_TERM_YEARS:
            raise ValidationError(
                f"term must be between 1 and {MAX_TERM_YEARS} years, got {self.years}", "term_years"
            )


class EvidenceLevel(enum.IntEnum):
    SCIENTIFIC_CONSENSUS = 1
    EMPIRICAL_EVIDENCE = 2
    MODEL_BASED = 3
    NARRATIVE = 4

    @property
    def label(self) -> str:
        return self.name.replace("_", " ").capitalize()


class Tier(enum.Enum):
    TIER1 = "tier1"
    TIER2 = "tier2"
    TIER3 = "tier3"


TIER_INSTRUMENTS = {
    Tier.TIER1: "BIC debt and equity",
    Tier.TIER2: "equity and equity-like investments, preferred stock",
    Tier.TIER3: "debt and debt-like investments, common stock",
}


class CapitalType(enum.Enum):
    BIC = "bic"
    MIC = "mic"


class CapitalKind(enum.Enum):
    MARKET_RATE_IMPACT = "market_rate_impact"
    BELOW_MARKET_IMPACT = "below_market_impact"
    BLENDED = "blended"
    TRADITIONAL = "traditional"
    GRANT = "grant"
    NON_INVESTABLE = "non_investable"

    @property
    def is_impact(self) -> bool:
        return self in (
            CapitalKind.MARKET_RATE_IMPACT,
            CapitalKind.BELOW_MARKET_IMPACT,
            CapitalKind.BLENDED,
        )


@dataclass(frozen=True)
class CapitalClass:
    kind: CapitalKind
    catalytic: bool = False


# -- instrument terms --------------------------------------------------------


def _check_rate(rate, path: str) -> None:
    if isinstance(rate, bool) or not isinstance(rate, (int, float)):
        raise ValidationError("rate must be a number", path)
    if not rate >= 0:
        raise ValidationError(f"rate must be >= 0, got {rate}", path)


@dataclass(frozen=True)
class InterestOnlyBalloon:
    """Interest paid every year, principal returned with the last coupon."""

    rate: Rate

    def __post_init__(self):
        _check_rate(self.rate, "instrument.rate")


@dataclass(frozen=True)
class LevelAmortizing:
    rate: Rate

    def __post_init__(self):
        _check_rate(self.rate, "instrument.rate")


@dataclass(frozen=True)
class InterestOnlyThenAmortizing:
    rate: Rate
    io_years: int

    def __post_init__(self):
        _check_rate(self.rate, "instrument.rate")
        if isinstance(self.io_years, bool) or not isinstance(self.io_years, int) or self.io_years < 0:
            raise ValidationError("io_years must be a non-negative integer", "instrument.io_years")


@dataclass(frozen=True)
class EquityExit:
    """No distributions until a single exit payment."""

    exit_proceeds: Money
    exit_year: int

    def __post_init__(self):
        if self.exit_proceeds.cents < 0:
            raise ValidationError("exit proceeds must be >= 0", "instrument.exit_proceeds")
        if isinstance(self.exit_year, bool) or not isinstance(self.exit_year, int) or self.exit_year < 1:
            raise ValidationError("exit_year must be a positive integer", "instrument.exit_year")


InstrumentTerms = Union[InterestOnlyBalloon, LevelAmortizing, InterestOnlyThenAmortizing, EquityExit]


# -- hurdle policies ---------------------------------------------------------


@dataclass(frozen=True)
class ExplicitRate:
    rate: Rate


@dataclass(frozen=True)
class BICOpportunityCost:
    """Hurdle equals the return the capital would earn in a comparable market deal."""

    market_rate: Rate | None = None


@dataclass(frozen=True)
class MICOwnRate:
    """Hurdle equals the instrument's own projected return."""


HurdlePolicy = Union[ExplicitRate, BICOpportunityCost, MICOwnRate]


# -- series and investment ---------------------------------------------------


@dataclass(frozen=True)
class AnnualSeries:
    """Amounts for years ``t = 1..T``; the ``t = 0`` outflow is kept separately."""

    values: tuple[Money, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        for v in self.values:
            if not isinstance(v, Money):
                raise TypeError("AnnualSeries values must be Money")

    @classmethod
    def of(cls, amounts: Iterable) -> "AnnualSeries":
        return cls(tuple(a if isinstance(a, Money) else Money.of(a) for a in amounts))

    @classmethod
    def zeros(cls, years: int) -> "AnnualSeries":
        return cls((Money(0),) * years)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[Money]:
        return iter(self.values)

    def __getitem__(self, idx):
        return self.values[idx]

    def dollars(self) -> list[float]:
        return [v.cents / 100 for v in self.values]

    def total(self) -> Money:
        return money_sum(self.values)

    def scaled(self, factor) -> "AnnualSeries":
        return AnnualSeries(tuple(v.scale(factor) for v in self.values))

    def __add__(self, other: "AnnualSeries") -> "AnnualSeries":
        if len(other) != len(self):
            raise ValidationError("series lengths differ")
        return AnnualSeries(tuple(a + b for a, b in zip(self.values, other.values)))


@dataclass(frozen=True)
class InvestmentSpec:
    c0: Money
    term: TermSpec
    instrument: InstrumentTerms
    tier: Tier
    tier_total: Money
    hurdle_policy: HurdlePolicy
    evidence: EvidenceLevel
    capital_type: CapitalType
    variability_haircut: Rate | None = None
    recovery_multiplier: float = 1.0
    # per-year tier totals when the tier grows during the term
    tier_total_by_year: tuple[Money, ...] | None = None

    def __post_init__(self):
        if self.c0.cents <= 0:
            raise ValidationError("initial investment must be positive", "investment.c0")
        if self.tier_total.cents <= 0:
            raise ValidationError("tier total must be positive", "investment.tier_total")
        if self.c0 > self.tier_total:
            raise ValidationError(
                f"c0 ({self.c0}) exceeds tier_total ({self.tier_total})",
                "investment.c0, investment.tier_total",
            )
        years = self.term.years
        inst = self.instrument
        if isinstance(inst, InterestOnlyThenAmortizing) and inst.io_years >= years:
            raise ValidationError(
                f"io_years ({inst.io_years}) must be less than the term ({years})", "instrument.io_years"
            )
        if isinstance(inst, EquityExit) and inst.exit_year > years:
            raise ValidationError(
                f"exit_year ({inst.exit_year}) is after the term ({years})", "instrument.exit_year"
            )
        if self.variability_haircut is not None and not 0 <= self.variability_haircut <= 1:
            raise ValidationError("variability haircut must lie in [0, 1]", "investment.variability_haircut")
        if not self.recovery_multiplier >= 0:
            raise ValidationError("recovery multiplier must be >= 0", "investment.recovery_multiplier")
        if self.tier_total_by_year is not None:
            object.__setattr__(self, "tier_total_by_year", tuple(self.tier_total_by_year))
            if len(self.tier_total_by_year) != years:
                raise ValidationError(
                    f"expected {years} per-year tier totals, got {len(self.tier_total_by_year)}",
                    "investment.tier_total_by_year",
                )
            for i, d in enumerate(self.tier_total_by_year):
                if d.cents <= 0 or self.c0 > d:
                    raise ValidationError(
                        "each per-year tier total must be positive and at least c0",
                        f"investment.tier_total_by_year[{i}]",
                    )

    @property
    def attribution(self) -> Fraction:
        """Investor share of the tier, C0 / D."""
        return Fraction(self.c0.cents, self.tier_total.cents)

    def attribution_by_year(self) -> tuple[Fraction, ...]:
        if self.tier_total_by_year is None:
            return (self.attribution,) * self.term.years
        return tuple(Fraction(self.c0.cents, d.cents) for d in self.tier_total_by_year)


def as_series(values: Sequence, years: int | None = None) -> AnnualSeries:
    s = values if isinstance(values, AnnualSeries) else AnnualSeries.of(values)
    if years is not None and len(s) != years:
        raise ValidationError(f"series has {len(s)} values, term is {years} years")
    return s


__all__ = [
    "AnnualSeries",
    "BICOpportunityCost",
    "CapitalClass",
    "CapitalKind",
    "CapitalType",
    "EquityExit",
    "EvidenceLevel",
    "ExplicitRate",
    "HurdlePolicy",
    "InstrumentTerms",
    "InterestOnlyBalloon",
    "InterestOnlyThenAmortizing",
    "InvestmentSpec",
    "LevelAmortizing",
    "MICOwnRate",
    "Money",
    "Rate",
    "TermSpec",
    "Tier",
    "TIER_INSTRUMENTS",
    "money_sum",
]
