from decimal import Decimal
from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from impactirr.core import AnnualSeries, Money, TermSpec
from impactirr.errors import ValidationError
from impactirr.impact import (
    ExplicitSchedule,
    HousingParams,
    IncomeBand,
    IncomeUpliftParams,
    JobArchetype,
    JobsModel,
    JobsParams,
    RentGapModel,
    RentRollEntry,
    SubsidyEntry,
    apply_variability,
    gross_monthly_gap,
    income_uplift_series,
    jobs_count,
    jobs_series,
    project_impact,
    rent_gap_series,
    subsidy_series,
    total_monthly_subsidy,
    unit_count,
)
from impactirr.ingest import parse_rent_roll, parse_subsidy_table

from strategies import housing_params, roll_entries


def _data(name):
    return resources.files("impactirr.data").joinpath(name).read_text(encoding="utf-8")


@pytest.fixture(scope="module")
def ff_roll():
    return parse_rent_roll(_data("ff_rent_roll.csv"))


@pytest.fixture(scope="module")
def lisc_table():
    return parse_subsidy_table(_data("lisc_subsidies.csv"))


# -- housing -----------------------------------------------------------------


def test_ff_rent_gap(ff_roll):
    assert gross_monthly_gap(ff_roll) == Money.of(13_515)
    s = rent_gap_series(ff_roll, HousingParams(0.03), TermSpec(10))
    assert s[0] == Money.of("157314.60")
    assert abs(s[0].dollars - 157_315) <= 1
    assert len(set(s)) == 1
    assert unit_count(RentGapModel(tuple(ff_roll), HousingParams(0.03))) == 42


def test_lisc_subsidy_year_one(lisc_table):
    assert total_monthly_subsidy(lisc_table) == Money.of(74_744)
    s = subsidy_series(lisc_table, HousingParams(0.07, 0.03), TermSpec(14))
    assert abs(s[0].dollars - 834_143) <= 1
    # direct multiplication oracle for year 2
    oracle = Decimal(74_744) * 12 * Decimal("0.93") * Decimal("1.03")
    assert s[1] == Money.of(oracle)
    assert s[1] == Money.of("859167.33")


def test_escalate_first_year(lisc_table):
    s = subsidy_series(lisc_table, HousingParams(0.07, 0.03, escalate_first_year=True), TermSpec(2))
    assert s[0] == Money.of("859167.33")


def test_housing_trivial_cases():
    flat = [RentRollEntry(IncomeBand.AMI50, 1, Money.of(900), Money.of(900), 5)]
    assert rent_gap_series(flat, HousingParams(0.05, 0.02), TermSpec(3)).total() == Money(0)
    one = [RentRollEntry(IncomeBand.AMI30, 1, Money.of(400), Money.of(500), 10)]
    assert rent_gap_series(one, HousingParams(0), TermSpec(2)).dollars() == [12_000.0, 12_000.0]
    zero = [SubsidyEntry(IncomeBand.AMI30, 1, Money(0), 10)]
    assert subsidy_series(zero, HousingParams(0.07, 0.03), TermSpec(4)).total() == Money(0)


def test_market_rate_rows_add_nothing():
    roll = [
        RentRollEntry(IncomeBand.AMI30, 1, Money.of(400), Money.of(500), 10),
        RentRollEntry(IncomeBand.MARKET_RATE, 1, Money.of(500), Money.of(500), 30),
    ]
    assert gross_monthly_gap(roll) == Money.of(1000)


def test_negative_gap_rejected():
    with pytest.raises(ValidationError):
        RentRollEntry(IncomeBand.AMI30, 1, Money.of(600), Money.of(500), 1)


@given(st.lists(roll_entries(), min_size=1, max_size=6), housing_params, st.integers(1, 15), st.integers(2, 50))
def test_housing_homogeneous_in_money(roll, params, years, k):
    term = TermSpec(years)
    base = rent_gap_series(roll, params, term)
    scaled_roll = [
        RentRollEntry(e.income_band, e.bedrooms, e.affordable_rent * k, e.market_rent * k, e.units) for e in roll
    ]
    scaled = rent_gap_series(scaled_roll, params, term)
    # exact before the single per-year cent rounding
    for a, b in zip(base, scaled):
        assert abs(b.cents - k * a.cents) <= (k + 1) / 2


@given(st.lists(roll_entries(), min_size=1, max_size=6), st.integers(1, 20))
def test_no_vacancy_no_growth_is_constant(roll, years):
    s = rent_gap_series(roll, HousingParams(0, 0), TermSpec(years))
    assert len(set(s)) == 1
    assert s[0] == gross_monthly_gap(roll) * 12


@given(st.lists(roll_entries(), min_size=1, max_size=6), housing_params, st.integers(1, 15))
def test_rent_gap_matches_equivalent_subsidy(roll, params, years):
    subs = [SubsidyEntry(e.income_band, e.bedrooms, e.market_rent - e.affordable_rent, e.units) for e in roll]
    term = TermSpec(years)
    assert rent_gap_series(roll, params, term) == subsidy_series(subs, params, term)
    assert all(v.cents >= 0 for v in rent_gap_series(roll, params, term))


# -- jobs --------------------------------------------------------------------


def _one_archetype(comp_growth):
    return JobsParams((JobArchetype("contractor", 1, Money.of(100_000), Money.of(150_000)),), Money.of(50_000), comp_growth)


def test_jobs_unit_rate():
    assert jobs_series(_one_archetype(0), TermSpec(3)).dollars() == [150_000.0] * 3


def test_jobs_comp_growth():
    assert jobs_series(_one_archetype(0.03), TermSpec(3)).dollars() == [150_000.0, 154_500.0, 159_135.0]
    assert jobs_count(_one_archetype(0.03), TermSpec(3)) == pytest.approx([3.0, 3.0, 3.0])


def test_jobs_zero_loans():
    p = JobsParams((JobArchetype("x", 0, Money.of(100_000), Money.of(150_000)),), Money.of(1))
    assert jobs_series(p, TermSpec(4)).total() == Money(0)


def test_jobs_loan_schedule_and_growth():
    a = JobArchetype("x", 0, Money.of(100_000), Money.of(100_000), loans_schedule=(1, 2, 2))
    p = JobsParams((a,), Money.of(1), comp_growth=0, loan_growth=0.1)
    assert jobs_series(p, TermSpec(3)).dollars() == [100_000.0, 220_000.0, 242_000.0]
    assert isinstance(project_impact(JobsModel(p), TermSpec(3)), AnnualSeries)


def test_jobs_short_schedule_rejected():
    a = JobArchetype("x", 0, Money.of(100_000), Money.of(100_000), loans_schedule=(1, 2))
    with pytest.raises(ValidationError):
        jobs_series(JobsParams((a,), Money.of(1)), TermSpec(3))


# -- income uplift -----------------------------------------------------------


def test_income_uplift_single_graduate():
    p = IncomeUpliftParams(
        students=(1,), graduates=(1,), base_monthly_salary=Money.of(1_900), graduate_uplift=(0.30,), nongraduate_growth=0
    )
    assert income_uplift_series(p, TermSpec(1)).dollars() == [6_840.0]


def test_income_uplift_zero_graduates():
    p = IncomeUpliftParams(students=(0, 0, 0), graduates=(0, 0, 0), base_monthly_salary=Money.of(1_900))
    assert income_uplift_series(p, TermSpec(3)).total() == Money(0)


def test_income_uplift_costs_can_make_early_years_negative():
    p = IncomeUpliftParams(
        students=(10, 10),
        graduates=(1, 1),
        base_monthly_salary=Money.of(100),
        graduate_uplift=(0.30,),
        nongraduate_growth=0,
        later_growth=0,
        self_financed=Money.of(2_000),
    )
    s = income_uplift_series(p, TermSpec(2))
    # year 1: 360 gain - 2000 cost; year 2: two cohorts gaining 360, one paying 2000
    assert s.dollars() == [-1_640.0, -1_280.0]


# -- variability -------------------------------------------------------------


def test_variability():
    s = AnnualSeries.of([100, 100])
    assert apply_variability(s, 0.9).dollars() == [90.0, 81.0]
    assert apply_variability(s, 1.0) == s
    assert apply_variability(s, 0).total() == Money(0)
    with pytest.raises(ValidationError):
        apply_variability(s, 1.5)


def test_explicit_schedule_length_checked():
    with pytest.raises(ValidationError):
        project_impact(ExplicitSchedule(AnnualSeries.of([1, 2])), TermSpec(3))
