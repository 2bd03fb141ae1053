"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ImpactIRRError(Exception):
    """Base class for every error raised by impactirr."""


class ValidationError(ImpactIRRError, ValueError):
    """A value violates a domain invariant.

    ``path`` names the offending field (dotted, e.g. ``investment.c0``) when
    the error originates from a scenario document.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ScenarioSyntaxError(ImpactIRRError):
    """The scenario document is not well-formed structured text."""


class UnknownFieldError(ValidationError):
    """The scenario document contains a key the schema does not define."""


class SolveError(ImpactIRRError):
    """The rate solver could not produce a root."""


class NoSignChangeError(SolveError):
    """All cash flows share one sign, so no discount rate zeroes the NPV."""
