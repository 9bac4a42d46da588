"""UI-neutral render commands and the sinks that carry them.

Planned renderables become styled commands here: inserts for events and
cluster nodes, count updates for live clusters, and highlight expirations
once a critical pulse has run its course.  Sequence numbers are strictly
increasing across a run so any consumer can de-duplicate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Protocol

from .compactor import ClusterNode
from .config import SinkConfig
from .events import PriorityClass, ScoredEvent, TelemetryEvent


@dataclass(slots=True, frozen=True)
class VisualStyle:
    opacity: float
    pulse_highlight: bool = False
    pulse_duration_ms: float = 3_000.0


def style_for(cls: PriorityClass, cfg: SinkConfig | None = None) -> VisualStyle:
    cfg = cfg or SinkConfig()
    if cls == PriorityClass.CRITICAL:
        return VisualStyle(opacity=1.0, pulse_highlight=True, pulse_duration_ms=cfg.pulse_ms)
    if cls == PriorityClass.WARNING:
        return VisualStyle(opacity=1.0)
    return VisualStyle(opacity=cfg.info_opacity)


INSERT_EVENT = "insert_event"
INSERT_CLUSTER = "insert_cluster"
UPDATE_CLUSTER = "update_cluster_count"
EXPIRE_HIGHLIGHT = "expire_highlight"


@dataclass(slots=True)
class RenderCommand:
    seq: int
    cycle_id: int
    kind: str
    payload: dict[str, Any]
    style: VisualStyle


def event_summary(ev: TelemetryEvent, truncate_chars: int = 512) -> dict[str, Any]:
    msg = ev.message
    if len(msg) > truncate_chars:
        msg = msg[: truncate_chars - 1] + "…"
    return {
        "event_id": ev.event_id,
        "ts": ev.ts,
        "severity": ev.severity,
        "source": ev.source_id,
        "actor": ev.actor_id,
        "kind": ev.kind,
        "reputation": ev.reputation,
        "msg": msg,
    }


def cluster_summary(node: ClusterNode, truncate_chars: int = 512) -> dict[str, Any]:
    return {
        "node_id": node.node_id,
        "key": list(node.key),
        "count": node.count,
        "window_start": node.window_start,
        "window_end": node.window_end,
        "representative": event_summary(node.representative, truncate_chars),
    }


class Sink(Protocol):
    def emit(self, commands: list[RenderCommand]) -> None: ...


class RecordingSink:
    """Captures every command in order; the test and simulator surface."""

    def __init__(self) -> None:
        self.commands: list[RenderCommand] = []

    def emit(self, commands: list[RenderCommand]) -> None:
        self.commands.extend(commands)

    def by_cycle(self) -> dict[int, list[RenderCommand]]:
        cycles: dict[int, list[RenderCommand]] = {}
        for cmd in self.commands:
            cycles.setdefault(cmd.cycle_id, []).append(cmd)
        return cycles


class DiscardSink:
    def __init__(self) -> None:
        self.count = 0

    def emit(self, commands: list[RenderCommand]) -> None:
        self.count += len(commands)


@dataclass
class CommandFactory:
    """Builds commands with run-global seq numbers and per-cycle ids."""

    cfg: SinkConfig = field(default_factory=SinkConfig)
    seq: int = 0
    cycle_id: int = 0

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def insert_event(self, item: ScoredEvent) -> RenderCommand:
        return RenderCommand(
            seq=self.next_seq(),
            cycle_id=self.cycle_id,
            kind=INSERT_EVENT,
            payload=event_summary(item.event, self.cfg.truncate_chars)
            | {"class": int(item.cls), "score": item.score},
            style=style_for(item.cls, self.cfg),
        )

    def insert_cluster(self, node: ClusterNode) -> RenderCommand:
        return RenderCommand(
            seq=self.next_seq(),
            cycle_id=self.cycle_id,
            kind=INSERT_CLUSTER,
            payload=cluster_summary(node, self.cfg.truncate_chars) | {"class": int(node.max_class)},
            style=style_for(node.max_class, self.cfg),
        )

    def update_cluster(self, node: ClusterNode) -> RenderCommand:
        return RenderCommand(
            seq=self.next_seq(),
            cycle_id=self.cycle_id,
            kind=UPDATE_CLUSTER,
            payload={"node_id": node.node_id, "count": node.count, "class": int(node.max_class)},
            style=style_for(node.max_class, self.cfg),
        )

    def expire_highlight(self, ref_seq: int, event_id: str) -> RenderCommand:
        return RenderCommand(
            seq=self.next_seq(),
            cycle_id=self.cycle_id,
            kind=EXPIRE_HIGHLIGHT,
            payload={"ref_seq": ref_seq, "event_id": event_id},
            style=VisualStyle(opacity=1.0),
        )
