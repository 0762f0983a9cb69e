"""Exception hierarchy shared by all analysis modules.

Every exception carries a short machine-readable ``code`` (for example
``"UNSTABLE"`` or ``"EPS_OUT_OF_RANGE"``) that the command line front end
forwards in its JSON error payload.
"""

from __future__ import annotations


class AnalysisError(Exception):
    """Base class; ``code`` identifies the failure kind."""

    code = "ERROR"

    def __init__(self, message: str, code: str | None = None, **details):
        super().__init__(message)
        if code is not None:
            self.code = code
        self.details = details

    def to_dict(self) -> dict:
        payload = {"error": self.code, "message": str(self)}
        payload.update({k: v for k, v in self.details.items() if v is not None})
        return payload


class ValidationError(AnalysisError, ValueError):
    """Inputs violate a documented precondition."""

    code = "INVALID"


class InstabilityError(AnalysisError):
    """The requested parameters give a non-convergent iteration."""

    code = "UNSTABLE"


class NumericalError(AnalysisError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""

    code = "NUMERICAL_FAILURE"


class InfeasibleError(AnalysisError):
    """A matrix inequality admits no (strictly) feasible point."""

    code = "INFEASIBLE"
