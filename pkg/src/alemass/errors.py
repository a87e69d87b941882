from __future__ import annotations

from typing import Optional


class AlemassError(Exception):
    """Base class for errors raised by alemass."""


class DomainError(AlemassError, ValueError):
    """A point, parameter or matrix lies outside the region where an operation is defined."""


class ConvergenceError(AlemassError, RuntimeError):
    """A fit, tail closure or flow failed to reach a trustworthy result."""


class ScenarioError(AlemassError, ValueError):
    """Scenario text could not be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ScenarioRunError(AlemassError, RuntimeError):
    """A module error raised while running a named scenario."""

    def __init__(self, scenario: str, cause: Exception):
        self.scenario = scenario
        self.cause = cause
        super().__init__(f"scenario '{scenario}': {type(cause).__name__}: {cause}")
