"""Render policy controller: the traffic cop of the pipeline.

Each cycle it derives the analyst's state from interaction signals, picks a
render interval and flags (pause, lane lock, aggregation), and plans which
pending renderables fit under the per-cycle budget.  Everything here is a
pure function of its inputs so the same signals always produce the same
plan.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .compactor import ClusterNode
from .config import PolicyConfig
from .events import PriorityClass, ScoredEvent
from .scoring import InvestigationContext


@dataclass(slots=True)
class SystemSignals:
    cpu_load: float = 0.0
    scroll_velocity: float = 0.0
    selection_active: bool = False
    selection_context: InvestigationContext | None = None
    queue_fill_ratio: float = 0.0
    last_interaction_age_ms: float = 0.0

    def validate(self) -> "SystemSignals":
        if not 0.0 <= self.cpu_load <= 1.0:
            raise ValueError(f"cpu_load out of [0, 1]: {self.cpu_load}")
        if self.scroll_velocity < 0.0:
            raise ValueError("scroll_velocity must be >= 0")
        if not 0.0 <= self.queue_fill_ratio <= 1.0:
            raise ValueError(f"queue_fill_ratio out of [0, 1]: {self.queue_fill_ratio}")
        if self.last_interaction_age_ms < 0:
            raise ValueError("last_interaction_age_ms must be >= 0")
        return self


class AnalystState(Enum):
    IDLE = "idle"
    INTERACTING = "interacting"
    INVESTIGATING = "investigating"
    DETACHED = "detached"


@dataclass(slots=True)
class RenderPolicy:
    interval_ms: float
    budget: int
    aggregation_mode: bool = False
    lane_filter: InvestigationContext | None = None
    background_paused: bool = False


@dataclass(slots=True)
class PendingItem:
    """One renderable waiting for budget: a scored event or a cluster node."""

    cls: PriorityClass
    ts: float
    arrival: int
    item: ScoredEvent | ClusterNode
    dead: bool = False  # tombstone for the engine's lazy-deletion queues

    @property
    def is_cluster(self) -> bool:
        return isinstance(self.item, ClusterNode)

    def matches(self, ctx: InvestigationContext) -> bool:
        if isinstance(self.item, ClusterNode):
            rep = self.item.representative
            return ctx.matches_event(rep)
        return ctx.matches_event(self.item.event)


@dataclass(slots=True)
class CyclePlan:
    emit: list[PendingItem]
    deferred: list[PendingItem]
    cycle_deadline: float


def derive_analyst_state(sig: SystemSignals, cfg: PolicyConfig) -> AnalystState:
    sig.validate()
    if sig.selection_active:
        return AnalystState.INVESTIGATING
    if sig.scroll_velocity > cfg.scroll_threshold:
        return AnalystState.INTERACTING
    if sig.last_interaction_age_ms > cfg.detach_ms:
        return AnalystState.DETACHED
    return AnalystState.IDLE


def select_policy(state: AnalystState, sig: SystemSignals, cfg: PolicyConfig) -> RenderPolicy:
    if state is AnalystState.INTERACTING:
        policy = RenderPolicy(
            interval_ms=cfg.interval_interacting_ms,
            budget=cfg.budget,
            background_paused=True,
        )
    elif state is AnalystState.INVESTIGATING:
        policy = RenderPolicy(
            interval_ms=cfg.interval_idle_ms,
            budget=cfg.budget,
            lane_filter=sig.selection_context,
        )
    elif state is AnalystState.DETACHED:
        policy = RenderPolicy(interval_ms=cfg.interval_detached_ms, budget=cfg.budget)
    else:
        policy = RenderPolicy(interval_ms=cfg.interval_idle_ms, budget=cfg.budget)

    if sig.cpu_load >= cfg.cpu_strain_threshold:
        policy.interval_ms *= cfg.strain_multiplier
    if sig.queue_fill_ratio >= cfg.burst_threshold:
        policy.aggregation_mode = True
    return policy


def eligible(item: PendingItem, policy: RenderPolicy) -> bool:
    """Budget eligibility for this cycle.  Critical items always qualify."""
    if item.cls == PriorityClass.CRITICAL:
        return True
    if policy.background_paused:
        return False
    if policy.lane_filter is not None and not policy.lane_filter.is_empty():
        return item.matches(policy.lane_filter)
    return True


def plan_cycle(policy: RenderPolicy, pending: Sequence[PendingItem], now: float) -> CyclePlan:
    """Pick up to ``budget`` eligible items ordered by (class, ts, arrival).

    Everything else — over-budget eligible items and filtered-out ones —
    is deferred and stays pending with its original timestamp, so nothing
    can be starved behind newer same-class items.
    """
    candidates = sorted(
        (item for item in pending if eligible(item, policy)),
        key=lambda it: (it.cls, it.ts, it.arrival),
    )
    emit = candidates[: policy.budget]
    chosen = {id(it) for it in emit}
    deferred = [it for it in pending if id(it) not in chosen]
    return CyclePlan(emit=emit, deferred=deferred, cycle_deadline=now + policy.interval_ms)


@dataclass
class Orchestrator:
    """Per-run wrapper that re-evaluates signals -> state -> policy each tick."""

    cfg: PolicyConfig
    state: AnalystState = AnalystState.IDLE
    policy: RenderPolicy = field(default_factory=lambda: RenderPolicy(interval_ms=16.0, budget=50))

    def __post_init__(self) -> None:
        self.policy = RenderPolicy(interval_ms=self.cfg.interval_idle_ms, budget=self.cfg.budget)

    def tick(self, sig: SystemSignals, now: float) -> float:
        """Refresh state and policy; returns when the next cycle is due."""
        self.state = derive_analyst_state(sig, self.cfg)
        self.policy = select_policy(self.state, sig, self.cfg)
        return now + self.policy.interval_ms
