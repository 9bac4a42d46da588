"""The full pipeline engine: ingest -> score -> compact -> plan -> emit.

One engine owns all mutable pipeline state and is driven from a single
context (the simulator's virtual clock or the gateway's pipeline task).
Drivers feed it arrivals via :meth:`ingest` and call :meth:`run_cycle` at
each cycle boundary with an interaction-signal snapshot; the engine returns
the cycle's commands plus the numbers a cost model needs.

Every event is accounted for exactly once: rendered individually, rendered
inside a cluster, TTL-pruned, dropped (critical overflow), or still pending
somewhere.  :meth:`ledger` exposes the running tally and the conservation
check.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

from .buffer import RingBuffer
from .compactor import BurstCompactor, ClusterNode
from .config import AppConfig
from .events import PriorityClass, ScoredEvent, TelemetryEvent
from .policy import (
    AnalystState,
    Orchestrator,
    PendingItem,
    RenderPolicy,
    SystemSignals,
    eligible,
)
from .scoring import (
    EMPTY_CONTEXT,
    ActorFrequencyTracker,
    InvestigationContext,
    ScorerModel,
    classify,
    extract_features,
    score_event,
)
from .sink import CommandFactory, RenderCommand, Sink


@dataclass(slots=True)
class ExternalSignals:
    """Interaction state supplied by the driver; queue fill comes from the buffer."""

    cpu_load: float = 0.0
    scroll_velocity: float = 0.0
    selection_active: bool = False
    selection_context: InvestigationContext | None = None
    last_interaction_age_ms: float = 0.0


@dataclass(slots=True)
class CycleResult:
    now: float
    next_cycle_at: float
    interval_ms: float
    commands: list[RenderCommand]
    scored: int
    inserted_events: list[tuple[str, float]]  # (event_id, ttl_deadline)
    state: AnalystState
    policy: RenderPolicy


@dataclass
class Ledger:
    ingested: int = 0
    rendered_individually: int = 0
    rendered_cluster_members: int = 0
    clusters_inserted: int = 0
    pruned_ttl: int = 0
    downgraded: int = 0
    dropped_critical: int = 0
    scored: int = 0
    commands_total: int = 0
    rejected_invalid: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


class _ClassQueue:
    """Pending renderables of one priority class.

    A heap keyed by (ts, arrival) gives emission order; an arrival-order
    deque gives O(1) TTL pruning while deadlines arrive monotonically (the
    common case).  Late re-insertions with old deadlines are caught by the
    emission-time backstop instead.  Items removed through one structure
    are tombstoned for the other.
    """

    __slots__ = ("heap", "ttl_fifo", "live")

    def __init__(self) -> None:
        self.heap: list[tuple[float, int, PendingItem]] = []
        self.ttl_fifo: deque[PendingItem] = deque()
        self.live = 0

    def push(self, item: PendingItem) -> None:
        heapq.heappush(self.heap, (item.ts, item.arrival, item))
        if not item.is_cluster:
            self.ttl_fifo.append(item)
        self.live += 1

    def prune(self, now: float) -> int:
        pruned = 0
        fifo = self.ttl_fifo
        while fifo:
            head = fifo[0]
            if head.dead:
                fifo.popleft()
                continue
            deadline = head.item.ttl_deadline  # type: ignore[union-attr]
            if deadline is not None and deadline < now:
                fifo.popleft()
                head.dead = True
                self.live -= 1
                pruned += 1
                continue
            break
        return pruned

    def pop_min(self) -> PendingItem | None:
        heap = self.heap
        while heap:
            _, _, item = heapq.heappop(heap)
            if item.dead:
                continue
            item.dead = True
            self.live -= 1
            return item
        return None


class PipelineEngine:
    def __init__(self, config: AppConfig, sink: Sink):
        config.validate()
        self.config = config
        self.sink = sink
        self.model = ScorerModel.from_config(config.scorer)
        self.tracker = ActorFrequencyTracker(config.scorer.actor_window_ms)
        self.buffer = RingBuffer(config.buffer.capacity, config.buffer.ttl_ms)
        self.compactor = BurstCompactor.from_config(config.compactor)
        self.orchestrator = Orchestrator(config.policy)
        self.factory = CommandFactory(cfg=config.sink)
        self.ledger = Ledger()
        self.watch_ctx: InvestigationContext = EMPTY_CONTEXT

        self._queues = {cls: _ClassQueue() for cls in PriorityClass}
        self._arrival = 0
        self._pending_node_ids: set[int] = set()
        self._node_items: dict[int, PendingItem] = {}
        self._emitted_nodes: dict[int, int] = {}  # node_id -> count already on screen
        self._nodes_seen: dict[int, ClusterNode] = {}
        self._pulse_queue: deque[tuple[float, int, str]] = deque()
        self._cycle_no = 0

    # ------------------------------------------------------------- ingest

    def ingest(self, ev: TelemetryEvent, now: float) -> bool:
        """Enqueue one arrival; evictions flow to the aggregation path.

        Returns False (and counts the rejection) for events that fail
        validation — a data error never stops the pipeline.
        """
        try:
            outcome = self.buffer.enqueue(ev, now)
        except ValueError:
            self.ledger.rejected_invalid += 1
            return False
        self.ledger.ingested += 1
        if outcome.kind == "stored_with_eviction":
            assert outcome.evicted is not None
            self.ledger.downgraded += 1
            # Downgraded entries skip scoring: backpressure means the scorer
            # is the bottleneck, so they aggregate at informational priority.
            self._absorb(
                outcome.evicted.event,
                PriorityClass.INFORMATIONAL,
                now,
                outcome.evicted.ttl_deadline,
            )
        elif outcome.kind == "dropped_critical":
            self.ledger.dropped_critical += 1
        return True

    # -------------------------------------------------------------- cycle

    def run_cycle(self, now: float, ext: ExternalSignals) -> CycleResult:
        self._cycle_no += 1
        self.factory.cycle_id = self._cycle_no

        for entry in self.buffer.prune_expired(now):
            self.ledger.pruned_ttl += 1

        fill = self.buffer.occupancy().fill_ratio
        sig = SystemSignals(
            cpu_load=ext.cpu_load,
            scroll_velocity=ext.scroll_velocity,
            selection_active=ext.selection_active,
            selection_context=ext.selection_context,
            queue_fill_ratio=fill,
            last_interaction_age_ms=ext.last_interaction_age_ms,
        )
        next_cycle_at = self.orchestrator.tick(sig, now)
        policy = self.orchestrator.policy
        self.watch_ctx = (
            ext.selection_context
            if (ext.selection_active and ext.selection_context is not None)
            else EMPTY_CONTEXT
        )

        for q in self._queues.values():
            self.ledger.pruned_ttl += q.prune(now)

        scored_n = self._drain_and_score(now, policy)
        self._collect_flushed(now)
        self._repend_dirty_nodes()

        commands, inserted = self._emit(policy, now)
        self._append_expiries(commands, now)

        self.ledger.commands_total += len(commands)
        self.sink.emit(commands)
        return CycleResult(
            now=now,
            next_cycle_at=next_cycle_at,
            interval_ms=policy.interval_ms,
            commands=commands,
            scored=scored_n,
            inserted_events=inserted,
            state=self.orchestrator.state,
            policy=policy,
        )

    # ------------------------------------------------------------ helpers

    def _drain_and_score(self, now: float, policy: RenderPolicy) -> int:
        drained = self.buffer.drain_batch(self.config.scorer.max_per_cycle)
        scored_n = 0
        for entry in drained:
            ev = entry.event
            fv = extract_features(
                ev, self.tracker, self.watch_ctx, now, self.config.scorer.freq_norm
            )
            score = score_event(self.model, fv)
            cls = classify(self.model, score)
            self.tracker.record(ev.actor_id, ev.ts)
            entry.current_class = cls
            scored_n += 1
            if policy.aggregation_mode:
                self._absorb(ev, cls, now, entry.ttl_deadline, score)
            else:
                self._push_event(ScoredEvent(ev, cls, score, entry.ttl_deadline))
        self.ledger.scored += scored_n
        return scored_n

    def _absorb(
        self,
        ev: TelemetryEvent,
        cls: PriorityClass,
        now: float,
        ttl_deadline: float | None,
        score: float = 0.0,
    ) -> None:
        outcome = self.compactor.absorb(ev, cls, now, ttl_deadline=ttl_deadline)
        if outcome.kind == "pass_through":
            self._push_event(ScoredEvent(ev, cls, score, ttl_deadline))
        elif outcome.kind == "cluster_formed":
            assert outcome.node is not None
            self._adopt_node(outcome.node)

    def _adopt_node(self, node: ClusterNode) -> None:
        self._nodes_seen[node.node_id] = node
        self._push_node(node)

    def _push_event(self, scored: ScoredEvent) -> None:
        self._arrival += 1
        item = PendingItem(cls=scored.cls, ts=scored.event.ts, arrival=self._arrival, item=scored)
        self._queues[scored.cls].push(item)

    def _push_node(self, node: ClusterNode) -> None:
        if node.node_id in self._pending_node_ids:
            return
        self._arrival += 1
        item = PendingItem(cls=node.max_class, ts=node.window_start, arrival=self._arrival, item=node)
        self._pending_node_ids.add(node.node_id)
        self._node_items[node.node_id] = item
        self._queues[node.max_class].push(item)

    def _collect_flushed(self, now: float) -> None:
        for flushed in self.compactor.flush_window(now):
            if isinstance(flushed, ClusterNode):
                if flushed.node_id not in self._nodes_seen:
                    self._adopt_node(flushed)
                continue
            # Sub-threshold single: back to the individual path, TTL intact.
            if flushed.ttl_deadline is not None and flushed.ttl_deadline < now:
                self.ledger.pruned_ttl += 1
                continue
            self._push_event(flushed)

    def _repend_dirty_nodes(self) -> None:
        for node in self.compactor.take_dirty_nodes():
            pending_item = self._node_items.get(node.node_id)
            if pending_item is not None and not pending_item.dead:
                # Still queued for insert/update; class may have escalated.
                if pending_item.cls != node.max_class:
                    pending_item.dead = True
                    self._queues[pending_item.cls].live -= 1
                    self._pending_node_ids.discard(node.node_id)
                    self._push_node(node)
                continue
            if node.node_id in self._emitted_nodes:
                self._pending_node_ids.discard(node.node_id)
                self._push_node(node)

    def _emit(
        self, policy: RenderPolicy, now: float
    ) -> tuple[list[RenderCommand], list[tuple[str, float]]]:
        selected: list[PendingItem] = []
        budget = policy.budget

        if policy.background_paused:
            classes: tuple[PriorityClass, ...] = (PriorityClass.CRITICAL,)
        else:
            classes = (PriorityClass.CRITICAL, PriorityClass.WARNING, PriorityClass.INFORMATIONAL)

        for cls in classes:
            if len(selected) >= budget:
                break
            q = self._queues[cls]
            skipped: list[PendingItem] = []
            while len(selected) < budget:
                item = q.pop_min()
                if item is None:
                    break
                if not item.is_cluster:
                    deadline = item.item.ttl_deadline  # type: ignore[union-attr]
                    if deadline is not None and deadline < now:
                        # Backstop: an expired deferral never renders.
                        self.ledger.pruned_ttl += 1
                        continue
                if eligible(item, policy):
                    selected.append(item)
                else:
                    skipped.append(item)
            for item in skipped:
                # The original ttl_fifo entry is still in place and valid;
                # only the heap membership needs restoring.
                item.dead = False
                heapq.heappush(q.heap, (item.ts, item.arrival, item))
                q.live += 1

        commands: list[RenderCommand] = []
        inserted: list[tuple[str, float]] = []
        for item in selected:
            if item.is_cluster:
                node = item.item
                assert isinstance(node, ClusterNode)
                self._pending_node_ids.discard(node.node_id)
                self._node_items.pop(node.node_id, None)
                prev = self._emitted_nodes.get(node.node_id)
                if prev is None:
                    commands.append(self.factory.insert_cluster(node))
                    self.ledger.clusters_inserted += 1
                    self.ledger.rendered_cluster_members += node.count
                else:
                    commands.append(self.factory.update_cluster(node))
                    self.ledger.rendered_cluster_members += node.count - prev
                self._emitted_nodes[node.node_id] = node.count
            else:
                scored = item.item
                assert isinstance(scored, ScoredEvent)
                cmd = self.factory.insert_event(scored)
                commands.append(cmd)
                self.ledger.rendered_individually += 1
                deadline = scored.ttl_deadline if scored.ttl_deadline is not None else float("inf")
                inserted.append((scored.event.event_id, deadline))
                if scored.cls == PriorityClass.CRITICAL:
                    self._pulse_queue.append(
                        (now + self.config.sink.pulse_ms, cmd.seq, scored.event.event_id)
                    )
        return commands, inserted

    def _append_expiries(self, commands: list[RenderCommand], now: float) -> None:
        while self._pulse_queue and self._pulse_queue[0][0] <= now:
            _, ref_seq, event_id = self._pulse_queue.popleft()
            commands.append(self.factory.expire_highlight(ref_seq, event_id))

    def has_scheduled_pulses(self) -> bool:
        return bool(self._pulse_queue)

    # ---------------------------------------------------------- accounting

    def pending_total(self) -> int:
        in_buffer = len(self.buffer)
        in_queues = sum(
            1
            for q in self._queues.values()
            for _, _, item in q.heap
            if not item.dead and not item.is_cluster
        )
        in_compactor = self.compactor.pending_single_count()
        node_backlog = sum(
            node.count - self._emitted_nodes.get(node_id, 0)
            for node_id, node in self._nodes_seen.items()
        )
        return in_buffer + in_queues + in_compactor + node_backlog

    def conservation(self) -> dict[str, int]:
        led = self.ledger
        pending = self.pending_total()
        balance = (
            led.rendered_individually
            + led.rendered_cluster_members
            + led.pruned_ttl
            + led.dropped_critical
            + pending
        )
        return {
            **led.as_dict(),
            "pending_end": pending,
            "balance": balance,
            "conserved": int(balance == led.ingested),
        }
