"""Bounded ring buffer between stream ingestion and scoring.

The buffer absorbs raw arrival spikes so they never reach the render path
directly.  Three rules govern it:

* entries expire after a TTL and are pruned if never drained,
* on overflow the oldest entry of the lowest-priority class present is
  evicted and handed back to the caller for the aggregation path
  ("downgraded"),
* if every live entry is a scored Critical, the oldest Critical is dropped
  and the loss is counted — that corner is never silent.

Entries that have not been scored yet rank as Informational for eviction
purposes, so a scored Critical is never evicted ahead of an unscored entry.

Eviction and pruning are O(1) amortised: a global FIFO deque carries
arrival order while per-class deques index eviction victims; removals
tombstone the entry wherever it is not popped from directly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .events import PriorityClass, TelemetryEvent


@dataclass(slots=True)
class BufferedEvent:
    event: TelemetryEvent
    enqueued_at: float
    ttl_deadline: float
    current_class: PriorityClass | None = None
    seq: int = 0
    live: bool = True

    @property
    def eviction_rank(self) -> int:
        # Unscored entries rank with Informational.
        return int(self.current_class) if self.current_class is not None else 2


@dataclass(slots=True)
class EnqueueOutcome:
    kind: str  # "stored" | "stored_with_eviction" | "dropped_critical"
    entry: BufferedEvent
    evicted: BufferedEvent | None = None


@dataclass
class BufferCounters:
    enqueued: int = 0
    drained: int = 0
    pruned_ttl: int = 0
    downgraded: int = 0
    dropped_critical: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "enqueued": self.enqueued,
            "drained": self.drained,
            "pruned_ttl": self.pruned_ttl,
            "downgraded": self.downgraded,
            "dropped_critical": self.dropped_critical,
        }


@dataclass(slots=True)
class Occupancy:
    length: int
    fill_ratio: float
    counters: dict[str, int]


class RingBuffer:
    def __init__(self, capacity: int = 50_000, ttl_ms: float = 5_000.0):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        if ttl_ms <= 0:
            raise ValueError("ttl_ms must be > 0")
        self.capacity = capacity
        self.ttl_ms = ttl_ms
        self.counters = BufferCounters()
        self._fifo: deque[BufferedEvent] = deque()
        self._by_rank: tuple[deque[BufferedEvent], ...] = (deque(), deque(), deque())
        self._live = 0
        self._seq = 0

    def __len__(self) -> int:
        return self._live

    def enqueue(
        self,
        ev: TelemetryEvent,
        now: float,
        cls: PriorityClass | None = None,
    ) -> EnqueueOutcome:
        """Store ``ev``; on overflow evict per the class policy.

        Returns the outcome carrying the stored entry and, when an eviction
        happened, the victim for routing to the aggregation path.
        Raises EventValidationError without storing anything if the event
        violates its field invariants.
        """
        ev.validate()
        evicted: BufferedEvent | None = None
        dropped_critical = False
        if self._live >= self.capacity:
            evicted = self._evict_lowest()
            dropped_critical = evicted.eviction_rank == 0
            if dropped_critical:
                self.counters.dropped_critical += 1
            else:
                self.counters.downgraded += 1
                evicted.current_class = PriorityClass.INFORMATIONAL

        self._seq += 1
        entry = BufferedEvent(
            event=ev,
            enqueued_at=now,
            ttl_deadline=now + self.ttl_ms,
            current_class=cls,
            seq=self._seq,
        )
        self._fifo.append(entry)
        self._by_rank[entry.eviction_rank].append(entry)
        self._live += 1
        self.counters.enqueued += 1

        if len(self._fifo) > 2 * self.capacity + 16:
            self._compact()

        if dropped_critical:
            return EnqueueOutcome("dropped_critical", entry, evicted)
        if evicted is not None:
            return EnqueueOutcome("stored_with_eviction", entry, evicted)
        return EnqueueOutcome("stored", entry)

    def prune_expired(self, now: float) -> list[BufferedEvent]:
        """Remove and return every live entry whose TTL deadline passed.

        Deadlines are monotone in arrival order (single TTL), so expired
        entries always sit at the FIFO head.  Idempotent for a fixed ``now``.
        """
        pruned: list[BufferedEvent] = []
        fifo = self._fifo
        while fifo:
            head = fifo[0]
            if not head.live:
                fifo.popleft()
                continue
            if head.ttl_deadline < now:
                fifo.popleft()
                head.live = False
                self._live -= 1
                self.counters.pruned_ttl += 1
                pruned.append(head)
                continue
            break
        return pruned

    def drain_batch(self, max_n: int) -> list[BufferedEvent]:
        """Remove and return up to ``max_n`` entries in FIFO order."""
        if max_n < 1:
            raise ValueError("max_n must be >= 1")
        out: list[BufferedEvent] = []
        fifo = self._fifo
        while fifo and len(out) < max_n:
            head = fifo.popleft()
            if not head.live:
                continue
            head.live = False
            self._live -= 1
            self.counters.drained += 1
            out.append(head)
        return out

    def occupancy(self) -> Occupancy:
        return Occupancy(
            length=self._live,
            fill_ratio=self._live / self.capacity,
            counters=self.counters.as_dict(),
        )

    def iter_live(self) -> Iterator[BufferedEvent]:
        return (e for e in self._fifo if e.live)

    def _evict_lowest(self) -> BufferedEvent:
        # Informational (incl. unscored) first, then Warning, then Critical.
        for rank in (2, 1, 0):
            dq = self._by_rank[rank]
            while dq:
                head = dq.popleft()
                if head.live:
                    head.live = False
                    self._live -= 1
                    return head
        raise RuntimeError("eviction requested on an empty buffer")

    def _compact(self) -> None:
        self._fifo = deque(e for e in self._fifo if e.live)
        for rank in (0, 1, 2):
            kept = deque(e for e in self._by_rank[rank] if e.live)
            self._by_rank[rank].clear()
            self._by_rank[rank].extend(kept)
