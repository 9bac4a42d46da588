"""Burst compaction: collapse runs of similar events into counted nodes.

Non-critical events that share a cluster key (source and kind by default)
and fall inside the same tumbling window accumulate; once a key reaches the
cluster threshold the pending singles become one counted node and further
same-key events inside the window only bump its count.  Critical events are
never absorbed.

Windows are keyed on event timestamps, so replaying a trace clusters
identically regardless of when cycles happen to run.  Absorbed raw events
are discarded after counting unless ``retain_members`` is set, in which
case up to ``member_cap`` of them are kept for expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .config import CompactorConfig
from .events import PriorityClass, ScoredEvent, TelemetryEvent

ClusterKey = tuple[str, ...]


@dataclass(slots=True)
class ClusterNode:
    node_id: int
    key: ClusterKey
    count: int
    window_start: float
    window_end: float
    representative: TelemetryEvent
    max_class: PriorityClass
    members: list[TelemetryEvent] | None = None
    closed: bool = False


@dataclass(slots=True)
class AbsorbOutcome:
    kind: str  # "pass_through" | "absorbed" | "cluster_formed"
    event: TelemetryEvent | None = None
    node: ClusterNode | None = None


@dataclass(slots=True)
class ClusterSummary:
    key: ClusterKey
    count: int
    window_start: float
    window_end: float
    representative: TelemetryEvent


def expand(node: ClusterNode) -> ClusterSummary:
    """Pure summary view of a node for UI expansion."""
    return ClusterSummary(
        key=node.key,
        count=node.count,
        window_start=node.window_start,
        window_end=node.window_end,
        representative=node.representative,
    )


@dataclass(slots=True)
class _PendingKey:
    window_start: float
    singles: list[ScoredEvent] = field(default_factory=list)


class BurstCompactor:
    def __init__(
        self,
        threshold: int = 3,
        window_ms: float = 10_000.0,
        key_fields: tuple[str, ...] = ("source_id", "kind"),
        retain_members: bool = False,
        member_cap: int = 256,
    ):
        self.threshold = threshold
        self.window_ms = window_ms
        self.key_fields = key_fields
        self.retain_members = retain_members
        self.member_cap = member_cap
        self._pending: dict[ClusterKey, _PendingKey] = {}
        self._active: dict[ClusterKey, ClusterNode] = {}
        self._done: list[ClusterNode | ScoredEvent] = []
        self._dirty: set[int] = set()
        self._nodes_by_id: dict[int, ClusterNode] = {}
        self._next_node_id = 1

    @classmethod
    def from_config(cls, cfg: CompactorConfig) -> "BurstCompactor":
        return cls(threshold=cfg.threshold, window_ms=cfg.window_ms, key_fields=tuple(cfg.key_fields))

    def key_of(self, ev: TelemetryEvent) -> ClusterKey:
        return tuple(getattr(ev, f) for f in self.key_fields)

    def absorb(
        self,
        ev: TelemetryEvent,
        cls: PriorityClass,
        now: float,
        ttl_deadline: float | None = None,
    ) -> AbsorbOutcome:
        """Route one scored event through the compactor.

        ``now`` is accepted for interface symmetry with the rest of the
        pipeline; window membership is decided on event timestamps.
        ``ttl_deadline`` rides along so sub-threshold singles keep their
        TTL when flushed back to the individual path.
        """
        if cls == PriorityClass.CRITICAL:
            return AbsorbOutcome("pass_through", event=ev)

        key = self.key_of(ev)

        node = self._active.get(key)
        if node is not None:
            if ev.ts < node.window_start + self.window_ms:
                node.count += 1
                if cls < node.max_class:
                    node.max_class = cls
                if node.members is not None and len(node.members) < self.member_cap:
                    node.members.append(ev)
                self._dirty.add(node.node_id)
                return AbsorbOutcome("absorbed", event=ev)
            self._close_node(key, node)

        pend = self._pending.get(key)
        if pend is not None and ev.ts >= pend.window_start + self.window_ms:
            self._done.extend(pend.singles)
            del self._pending[key]
            pend = None

        if pend is None:
            pend = _PendingKey(window_start=ev.ts)
            self._pending[key] = pend
        pend.singles.append(ScoredEvent(event=ev, cls=cls, ttl_deadline=ttl_deadline))

        if len(pend.singles) >= self.threshold:
            node = self._form_node(key, pend)
            del self._pending[key]
            self._active[key] = node
            return AbsorbOutcome("cluster_formed", node=node)
        return AbsorbOutcome("absorbed", event=ev)

    def flush_window(self, now: float) -> list[ClusterNode | ScoredEvent]:
        """Emit everything whose window has elapsed by ``now``.

        Clusters come out as nodes (marked closed), sub-threshold singles as
        individual scored events.  Emitted state is cleared.
        """
        out: list[ClusterNode | ScoredEvent] = list(self._done)
        self._done.clear()

        for key in [k for k, n in self._active.items() if now >= n.window_start + self.window_ms]:
            self._close_node(key, self._active[key])
        # _close_node stashes into _done; collect what it just added.
        if self._done:
            out.extend(self._done)
            self._done.clear()

        for key in [k for k, p in self._pending.items() if now >= p.window_start + self.window_ms]:
            out.extend(self._pending.pop(key).singles)
        return out

    def take_dirty_nodes(self) -> list[ClusterNode]:
        """Open nodes whose count changed since the last call (for re-render)."""
        if not self._dirty:
            return []
        nodes = [self._nodes_by_id[i] for i in sorted(self._dirty)]
        self._dirty.clear()
        return [n for n in nodes if not n.closed]

    def pending_member_count(self) -> int:
        """Events currently held inside the compactor (standalone view)."""
        total = sum(len(p.singles) for p in self._pending.values())
        total += sum(n.count for n in self._active.values())
        for item in self._done:
            total += item.count if isinstance(item, ClusterNode) else 1
        return total

    def pending_single_count(self) -> int:
        """Singles not yet flushed, excluding members of formed nodes.

        Formed nodes are handed to the caller at formation time, so their
        members are the caller's to account for.
        """
        total = sum(len(p.singles) for p in self._pending.values())
        total += sum(1 for item in self._done if not isinstance(item, ClusterNode))
        return total

    def _form_node(self, key: ClusterKey, pend: _PendingKey) -> ClusterNode:
        node_id = self._next_node_id
        self._next_node_id += 1
        first = pend.singles[0]
        node = ClusterNode(
            node_id=node_id,
            key=key,
            count=len(pend.singles),
            window_start=pend.window_start,
            window_end=pend.window_start + self.window_ms,
            representative=first.event,
            max_class=min(s.cls for s in pend.singles),
            members=[s.event for s in pend.singles] if self.retain_members else None,
        )
        self._nodes_by_id[node_id] = node
        return node

    def _close_node(self, key: ClusterKey, node: ClusterNode) -> None:
        node.closed = True
        self._done.append(node)
        self._dirty.discard(node.node_id)
        self._nodes_by_id.pop(node.node_id, None)
        del self._active[key]
