"""
Exception hierarchy for the BGP monitor poisoning simulator.

Every error raised by the packages derives from PoisonSimError. The three
direct families map onto the CLI exit codes.
"""

from typing import Optional, Tuple


class PoisonSimError(Exception):
    """Base class for all simulator errors."""

    exit_code = 4


class ConfigError(PoisonSimError, ValueError):
    """Invalid or unknown configuration."""

    exit_code = 2


class DataError(PoisonSimError):
    """Input data or scenario that cannot be processed."""

    exit_code = 3


class InvariantViolation(PoisonSimError, AssertionError):
    """An internal invariant did not hold."""

    exit_code = 4


class ParseError(DataError, ValueError):
    """Malformed input line or document."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class RelationshipConflictError(DataError, ValueError):
    """Two different relationships declared for the same AS pair."""

    def __init__(self, pair: Tuple[int, int], line_number: Optional[int] = None):
        self.pair = pair
        self.line_number = line_number
        where = f" (line {line_number})" if line_number is not None else ""
        super().__init__(f"conflicting relationship for pair ({pair[0]},{pair[1]}){where}")


class NotFoundError(DataError, KeyError):
    """Unknown ASN or record."""

    def __str__(self):
        return str(self.args[0]) if self.args else "not found"


class GenerationError(DataError, ValueError):
    """Synthetic topology parameters cannot be satisfied."""


class InvalidPathError(DataError, ValueError):
    """AS path with a non-adjacent consecutive pair."""


class UnknownOriginError(DataError, ValueError):
    """Announcement origin is not part of the graph."""


class InvalidScenarioError(DataError, ValueError):
    """Hijack or attack scenario that makes no sense (e.g. attacker == victim)."""


class NoSubprefixError(DataError, ValueError):
    """Prefix has no sub-prefix available (/32)."""


class InsufficientDataError(DataError):
    """Link endpoints unknown to every feature source."""


class TrainingError(DataError):
    """Classifier or embedding cannot be trained on the given inputs."""


class InvalidChangeError(DataError, ValueError):
    """Route change with an empty path."""


class ThresholdNotInitializedError(DataError):
    """Dynamic threshold used before its warm-up window completed."""


class EstimationError(DataError):
    """Not enough public events to estimate the dynamic threshold."""


class InfeasiblePollutionError(DataError):
    """No forged origin produces a score below the current threshold."""


class NoPlanError(DataError):
    """Poisoning planner found no usable candidate; carries the empty plan."""

    def __init__(self, message: str, plan=None):
        self.plan = plan
        super().__init__(message)


class UndefinedRateError(DataError, ValueError):
    """Detection rate requested over an empty link list."""


class DependencyError(DataError):
    """A required upstream artifact (e.g. poison traces) is missing."""
