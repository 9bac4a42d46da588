"""Deterministic logistic scoring of events.

Four features in [0, 1] — severity, source reputation, actor recurrence,
investigation-context match — go through a fixed linear-logistic model.
Scoring is pure: identical inputs produce bit-identical scores, and no
online learning happens during a run.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .config import ScorerConfig
from .events import PriorityClass, TelemetryEvent


@dataclass(slots=True, frozen=True)
class FeatureVector:
    severity_level: float
    source_reputation_score: float
    actor_frequency_count: float
    user_interaction_context_match: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (
            self.severity_level,
            self.source_reputation_score,
            self.actor_frequency_count,
            self.user_interaction_context_match,
        )


@dataclass(frozen=True)
class InvestigationContext:
    """What the analyst is currently watching; empty sets mean no lock."""

    watched_sources: frozenset[str] = frozenset()
    watched_actors: frozenset[str] = frozenset()
    watched_kinds: frozenset[str] = frozenset()

    def is_empty(self) -> bool:
        return not (self.watched_sources or self.watched_actors or self.watched_kinds)

    def matches_event(self, ev: TelemetryEvent) -> bool:
        return (
            ev.source_id in self.watched_sources
            or ev.actor_id in self.watched_actors
            or ev.kind in self.watched_kinds
        )


EMPTY_CONTEXT = InvestigationContext()


class ActorFrequencyTracker:
    """Sliding-window recurrence counter per actor.

    ``count(actor, now)`` is the number of recorded timestamps inside
    ``(now - window_ms, now]``.  Old entries are evicted lazily; record
    timestamps must be non-decreasing (simulation clock contract).
    """

    def __init__(self, window_ms: float = 60_000.0):
        if window_ms <= 0:
            raise ValueError("window_ms must be > 0")
        self.window_ms = window_ms
        self._stamps: dict[str, deque[float]] = {}

    def record(self, actor_id: str, ts: float) -> None:
        dq = self._stamps.get(actor_id)
        if dq is None:
            dq = deque()
            self._stamps[actor_id] = dq
        dq.append(ts)
        self._trim(dq, ts)

    def count(self, actor_id: str, now: float) -> int:
        dq = self._stamps.get(actor_id)
        if dq is None:
            return 0
        self._trim(dq, now)
        return len(dq)

    def _trim(self, dq: deque[float], now: float) -> None:
        cutoff = now - self.window_ms
        while dq and dq[0] <= cutoff:
            dq.popleft()


@dataclass(frozen=True)
class ScorerModel:
    """Immutable per-run model: weights, bias and class thresholds."""

    weights: tuple[float, float, float, float] = (2.5, 1.5, 1.0, 2.0)
    bias: float = -2.0
    critical_min: float = 0.8
    warning_min: float = 0.4
    freq_norm: float = 100.0

    def __post_init__(self) -> None:
        if not 0.0 < self.warning_min < self.critical_min < 1.0:
            raise ValueError("thresholds must satisfy 0 < warning_min < critical_min < 1")

    @classmethod
    def from_config(cls, cfg: ScorerConfig) -> "ScorerModel":
        return cls(
            weights=tuple(cfg.weights),  # type: ignore[arg-type]
            bias=cfg.bias,
            critical_min=cfg.critical_min,
            warning_min=cfg.warning_min,
            freq_norm=cfg.freq_norm,
        )


def sigmoid(z: float) -> float:
    # Branch keeps exp() argument non-positive for numerical stability.
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def extract_features(
    ev: TelemetryEvent,
    tracker: ActorFrequencyTracker,
    ctx: InvestigationContext,
    now: float,
    freq_norm: float = 100.0,
) -> FeatureVector:
    freq = tracker.count(ev.actor_id, now)
    return FeatureVector(
        severity_level=ev.severity / 10.0,
        source_reputation_score=ev.reputation,
        actor_frequency_count=min(freq / freq_norm, 1.0),
        user_interaction_context_match=1.0 if ctx.matches_event(ev) else 0.0,
    )


def score_event(model: ScorerModel, x: FeatureVector) -> float:
    w = model.weights
    z = (
        w[0] * x.severity_level
        + w[1] * x.source_reputation_score
        + w[2] * x.actor_frequency_count
        + w[3] * x.user_interaction_context_match
        + model.bias
    )
    return sigmoid(z)


def classify(model: ScorerModel, score: float) -> PriorityClass:
    if score >= model.critical_min:
        return PriorityClass.CRITICAL
    if score >= model.warning_min:
        return PriorityClass.WARNING
    return PriorityClass.INFORMATIONAL
