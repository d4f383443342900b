from typing import Optional


class EplabError(Exception):
    """Base error; `exit_code` is what the CLI exits with."""

    exit_code = 2

    def __init__(self, detail: str, residuals: Optional[dict[str, float]] = None):
        super().__init__(detail)
        self.detail = detail
        self.residuals = dict(residuals or {})


class InvalidInputError(EplabError):
    exit_code = 2


class ShapeError(InvalidInputError):
    exit_code = 2


class RouteDisagreementError(EplabError):
    """Two characterizations of the same class returned different booleans."""

    exit_code = 3


class ConsistencyError(EplabError):
    """An OperatorProfile invariant is violated beyond tolerance."""

    exit_code = 3


class GenerationError(EplabError):
    exit_code = 3
