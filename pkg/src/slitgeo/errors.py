"""Exceptions shared across the package.

Every exception carries enough context to be reported by the CLI, which maps
them onto fixed exit codes (see `slitgeo.cli`).
"""

from __future__ import annotations


class SlitgeoError(Exception):
    """Base class for all package errors."""


class PrecisionExhausted(SlitgeoError, ArithmeticError):
    """A comparison or rounding stayed indeterminate at the maximum precision.

    Raised instead of silently guessing a branch: every strict inequality in
    the constructions must be certified before it is acted on.
    """

    def __init__(self, what: str, max_prec: int):
        super().__init__(f"{what}: indeterminate at {max_prec} bits")
        self.what = what
        self.max_prec = max_prec


class BudgetExceeded(SlitgeoError, RuntimeError):
    """An enumeration would produce more candidates than the configured budget."""

    def __init__(self, what: str, estimate: float, budget: int):
        super().__init__(f"{what}: ~{estimate:.3g} candidates exceeds budget {budget}")
        self.what = what
        self.estimate = estimate
        self.budget = budget


class ConstructionStalled(SlitgeoError, RuntimeError):
    """A builder step found no admissible continuation; diagnostics attached."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class HypothesisViolated(SlitgeoError, ValueError):
    """Input fails the documented hypotheses of an operation.

    `clauses` lists the failing clause names, e.g. ["(iii)"] for the
    piecewise-linear model or ["valley hypotheses violated"].
    """

    def __init__(self, message: str, clauses: list[str] | None = None):
        super().__init__(message)
        self.clauses = clauses or []


class VerificationFailure(SlitgeoError, RuntimeError):
    """A certificate replay found inequalities that no longer hold."""

    def __init__(self, message: str, clauses: list[str]):
        super().__init__(message)
        self.clauses = clauses
