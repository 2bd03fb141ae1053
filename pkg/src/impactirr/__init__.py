"""Impact NPV and impact IRR valuation.

Typical use::

    from impactirr import load_scenario, evaluate
    ev = evaluate(load_scenario("case.scenario"))
    ev.result.impact_irr
"""

from impactirr.core import AnnualSeries, InvestmentSpec, Money, TermSpec
from impactirr.engine import Evaluation, evaluate
from impactirr.errors import ImpactIRRError, NoSignChangeError, SolveError, ValidationError
from impactirr.ingest import load_bundled, load_scenario, parse_scenario, serialize_scenario
from impactirr.valuation import ValuationResult, impact_irr, inpv, solve_rates, value_investment

__version__ = "0.1.0"

__all__ = [
    "AnnualSeries",
    "Evaluation",
    "ImpactIRRError",
    "InvestmentSpec",
    "Money",
    "NoSignChangeError",
    "SolveError",
    "TermSpec",
    "ValidationError",
    "ValuationResult",
    "evaluate",
    "impact_irr",
    "inpv",
    "load_bundled",
    "load_scenario",
    "parse_scenario",
    "serialize_scenario",
    "solve_rates",
    "value_investment",
]
