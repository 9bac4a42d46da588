"""Ring buffer: eviction policy, TTL pruning, FIFO drain, counters."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feedgate.buffer import RingBuffer
from feedgate.events import EventValidationError, PriorityClass, TelemetryEvent

CRIT = PriorityClass.CRITICAL
WARN = PriorityClass.WARNING
INFO = PriorityClass.INFORMATIONAL


def ev(i, ts=0.0, severity=5, reputation=0.5):
    return TelemetryEvent(
        event_id=f"e{i}",
        ts=ts,
        severity=severity,
        source_id="s",
        actor_id="a",
        kind="k",
        reputation=reputation,
    )


def test_store_under_capacity():
    buf = RingBuffer(capacity=50_000)
    out = buf.enqueue(ev(1), now=0.0)
    assert out.kind == "stored"
    assert len(buf) == 1


def test_eviction_takes_oldest_of_lowest_class():
    # capacity 3 holding [Info@t1, Warn@t2, Crit@t3]; enqueue Crit@t4
    buf = RingBuffer(capacity=3)
    buf.enqueue(ev(1, ts=1), now=1.0, cls=INFO)
    buf.enqueue(ev(2, ts=2), now=2.0, cls=WARN)
    buf.enqueue(ev(3, ts=3), now=3.0, cls=CRIT)
    out = buf.enqueue(ev(4, ts=4), now=4.0, cls=CRIT)
    assert out.kind == "stored_with_eviction"
    assert out.evicted is not None and out.evicted.event.event_id == "e1"
    assert buf.counters.downgraded == 1
    remaining = [e.event.event_id for e in buf.iter_live()]
    assert remaining == ["e2", "e3", "e4"]


def test_eviction_downgrades_victim_class():
    buf = RingBuffer(capacity=1)
    buf.enqueue(ev(1), now=0.0, cls=WARN)
    out = buf.enqueue(ev(2), now=1.0, cls=WARN)
    assert out.evicted.current_class == INFO


def test_all_critical_overflow_drops_oldest_critical():
    buf = RingBuffer(capacity=2)
    buf.enqueue(ev(1, ts=1), now=1.0, cls=CRIT)
    buf.enqueue(ev(2, ts=2), now=2.0, cls=CRIT)
    out = buf.enqueue(ev(3, ts=3), now=3.0, cls=CRIT)
    assert out.kind == "dropped_critical"
    assert buf.counters.dropped_critical == 1
    assert [e.event.event_id for e in buf.iter_live()] == ["e2", "e3"]


def test_unscored_ranks_as_informational_for_eviction():
    buf = RingBuffer(capacity=2)
    buf.enqueue(ev(1, ts=1), now=1.0, cls=CRIT)
    buf.enqueue(ev(2, ts=2), now=2.0)  # unscored
    out = buf.enqueue(ev(3, ts=3), now=3.0, cls=CRIT)
    assert out.kind == "stored_with_eviction"
    assert out.evicted.event.event_id == "e2"


def test_invalid_event_rejected_nothing_stored():
    buf = RingBuffer(capacity=10)
    with pytest.raises(EventValidationError):
        buf.enqueue(ev(1, severity=11), now=0.0)
    with pytest.raises(EventValidationError):
        buf.enqueue(ev(2, reputation=1.5), now=0.0)
    assert len(buf) == 0
    assert buf.counters.enqueued == 0


def test_ttl_prune_boundaries():
    buf = RingBuffer(capacity=10, ttl_ms=5000.0)
    buf.enqueue(ev(1), now=0.0)
    assert buf.prune_expired(4999.0) == []
    assert buf.prune_expired(5000.0) == []  # deadline not yet passed
    pruned = buf.prune_expired(5001.0)
    assert [p.event.event_id for p in pruned] == ["e1"]
    assert buf.counters.pruned_ttl == 1


def test_ttl_deadline_is_exactly_enqueue_plus_ttl():
    buf = RingBuffer(capacity=10, ttl_ms=1234.0)
    out = buf.enqueue(ev(1), now=77.0)
    assert out.entry.ttl_deadline - out.entry.enqueued_at == 1234.0


def test_prune_matches_brute_force_filter():
    rng = random.Random(5)
    buf = RingBuffer(capacity=200, ttl_ms=1000.0)
    entries = []
    now = 0.0
    for i in range(100):
        now += rng.uniform(0, 30)
        entries.append(buf.enqueue(ev(i, ts=now), now=now).entry)
    cut = now - rng.uniform(0, 500)
    expected = {e.event.event_id for e in entries if e.ttl_deadline < cut}
    pruned = {p.event.event_id for p in buf.prune_expired(cut)}
    assert pruned == expected
    assert buf.prune_expired(cut) == []  # idempotent at fixed now


def test_drain_fifo_clamp_and_empty():
    buf = RingBuffer(capacity=100)
    for i in range(10):
        buf.enqueue(ev(i, ts=i), now=float(i))
    got = buf.drain_batch(4)
    assert [g.event.event_id for g in got] == ["e0", "e1", "e2", "e3"]
    assert [g.event.event_id for g in buf.drain_batch(50)] == [f"e{i}" for i in range(4, 10)]
    assert buf.drain_batch(5) == []


def test_occupancy_fill_ratio():
    buf = RingBuffer(capacity=50_000)
    assert buf.occupancy().fill_ratio == 0.0
    for i in range(25_000):
        buf.enqueue(ev(i), now=0.0)
    assert buf.occupancy().fill_ratio == 0.5


def test_counters_replay_ledger():
    rng = random.Random(11)
    buf = RingBuffer(capacity=20, ttl_ms=200.0)
    tally = {"enqueued": 0, "drained": 0, "pruned_ttl": 0, "downgraded": 0, "dropped_critical": 0}
    now = 0.0
    for i in range(2000):
        now += rng.uniform(0, 10)
        op = rng.random()
        if op < 0.7:
            cls = rng.choice([None, CRIT, WARN, INFO])
            out = buf.enqueue(ev(i, ts=now), now=now, cls=cls)
            tally["enqueued"] += 1
            if out.kind == "stored_with_eviction":
                tally["downgraded"] += 1
            elif out.kind == "dropped_critical":
                tally["dropped_critical"] += 1
        elif op < 0.85:
            tally["drained"] += len(buf.drain_batch(rng.randint(1, 8)))
        else:
            tally["pruned_ttl"] += len(buf.prune_expired(now))
    assert buf.counters.as_dict() == tally
    c = buf.counters
    assert c.enqueued == len(buf) + c.drained + c.pruned_ttl + c.downgraded + c.dropped_critical


# ---------------------------------------------------------------- properties

_op = st.tuples(
    st.sampled_from(["enqueue", "drain", "prune"]),
    st.integers(min_value=0, max_value=3),
)


@settings(max_examples=150, deadline=None)
@given(
    capacity=st.integers(min_value=1, max_value=30),
    ops=st.lists(_op, min_size=1, max_size=120),
)
def test_random_op_sequences_hold_invariants(capacity, ops):
    buf = RingBuffer(capacity=capacity, ttl_ms=50.0)
    now = 0.0
    i = 0
    for name, arg in ops:
        now += arg * 7.0
        if name == "enqueue":
            cls = [None, CRIT, WARN, INFO][arg]
            buf.enqueue(ev(i, ts=now), now=now, cls=cls)
            i += 1
        elif name == "drain":
            buf.drain_batch(arg + 1)
        else:
            buf.prune_expired(now)
        assert len(buf) <= capacity
        c = buf.counters
        assert c.enqueued == len(buf) + c.drained + c.pruned_ttl + c.downgraded + c.dropped_critical


@settings(max_examples=150, deadline=None)
@given(
    classes=st.lists(st.sampled_from([None, CRIT, WARN, INFO]), min_size=2, max_size=40),
)
def test_eviction_victim_matches_naive_scan(classes):
    """The victim is always the oldest entry of the lowest class present."""
    capacity = len(classes)
    buf = RingBuffer(capacity=capacity)
    for i, cls in enumerate(classes):
        buf.enqueue(ev(i, ts=i), now=float(i), cls=cls)
    # Naive oracle over the live entries, oldest first.
    live = [(i, cls if cls is not None else INFO) for i, cls in enumerate(classes)]
    worst = max(rank for _, rank in live)
    expected_id = next(f"e{i}" for i, rank in live if rank == worst)
    out = buf.enqueue(ev(len(classes), ts=len(classes)), now=float(len(classes)), cls=CRIT)
    assert out.evicted is not None
    assert out.evicted.event.event_id == expected_id
