"""Core event types shared by every stage of the pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class PriorityClass(IntEnum):
    """Urgency classes; numeric codes are part of the wire contract."""

    CRITICAL = 0
    WARNING = 1
    INFORMATIONAL = 2


class EventValidationError(ValueError):
    """Raised when an event violates a field-range invariant."""


@dataclass(slots=True)
class TelemetryEvent:
    """One security event as it enters the pipeline.

    ``ts`` is milliseconds on a clock that is monotonic within a run.
    ``reputation`` is in [0, 1] with 1 meaning worst reputation.
    Out-of-order arrival across sources is allowed.
    """

    event_id: str
    ts: float
    severity: int
    source_id: str
    actor_id: str
    kind: str
    reputation: float
    message: str = ""

    def validate(self) -> "TelemetryEvent":
        if not isinstance(self.severity, int) or isinstance(self.severity, bool):
            raise EventValidationError(f"severity must be an integer, got {self.severity!r}")
        if not 0 <= self.severity <= 10:
            raise EventValidationError(f"severity out of range [0, 10]: {self.severity}")
        if not 0.0 <= self.reputation <= 1.0:
            raise EventValidationError(f"reputation out of range [0, 1]: {self.reputation}")
        return self


@dataclass(slots=True)
class ScoredEvent:
    """An event annotated with its score and priority class.

    This is the unit the planner, compactor and sinks exchange once
    scoring has happened.
    """

    event: TelemetryEvent
    cls: PriorityClass
    score: float = 0.0
    ttl_deadline: float | None = None
