"""Seeded synthetic telemetry and scripted analyst behaviour.

Arrivals follow a Poisson process.  Each event is drawn from one of three
source populations whose severity/reputation ranges are disjoint, so the
population an event came from can always be recovered from its fields:

* critical-like: severity 8-10, reputation 0.8-1.0
* warning-like:  severity 4-7,  reputation 0.3-0.8
* info-like:     severity 0-3,  reputation 0.0-0.3

An optional burst injects extra same-key events (the repeated-login-failure
scenario) during a window inside the run.  Everything is a pure function of
the spec, including its seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .events import TelemetryEvent
from .scoring import InvestigationContext

_POP_CRITICAL = 0
_POP_WARNING = 1
_POP_INFO = 2

_SEVERITY_RANGES = {_POP_CRITICAL: (8, 10), _POP_WARNING: (4, 7), _POP_INFO: (0, 3)}
_REPUTATION_RANGES = {_POP_CRITICAL: (0.8, 1.0), _POP_WARNING: (0.3, 0.8), _POP_INFO: (0.0, 0.3)}

_SOURCES = {
    _POP_CRITICAL: [f"10.21.55.{120 + i}" for i in range(5)],
    _POP_WARNING: [f"172.16.4.{10 + i}" for i in range(20)],
    _POP_INFO: [f"192.168.1.{10 + i}" for i in range(50)],
}
_KINDS = {
    _POP_CRITICAL: ["ioc_match", "malware_detected", "exfil_attempt"],
    _POP_WARNING: ["login_failure", "policy_change", "port_scan"],
    _POP_INFO: ["heartbeat", "conn_open", "dns_query", "auth_ok"],
}
_ACTOR_POOL = 100


@dataclass(slots=True)
class BurstSpec:
    rate_multiplier: float = 10.0
    duration_s: float = 10.0
    key: tuple[str, str] = ("10.21.55.120", "login_failure")
    start_s: float | None = None  # defaults to one third into the run


@dataclass(slots=True)
class WorkloadSpec:
    rate_eps: float
    duration_s: float
    class_mix: tuple[float, float, float] = (0.01, 0.09, 0.90)
    burst: BurstSpec | None = None
    seed: int = 0

    def validate(self) -> "WorkloadSpec":
        if self.rate_eps <= 0 or self.duration_s <= 0:
            raise ValueError("rate_eps and duration_s must be > 0")
        if abs(sum(self.class_mix) - 1.0) > 1e-9:
            raise ValueError(f"class_mix must sum to 1, got {self.class_mix}")
        if any(p < 0 for p in self.class_mix):
            raise ValueError("class_mix proportions must be >= 0")
        return self


def is_critical_truth(ev: TelemetryEvent) -> bool:
    """Ground-truth population test (populations are severity-disjoint)."""
    return ev.severity >= 8


def _poisson_arrivals(rng: np.random.Generator, rate_eps: float, duration_ms: float) -> np.ndarray:
    mean_gap_ms = 1000.0 / rate_eps
    expected = int(duration_ms / mean_gap_ms) + 1
    chunks: list[np.ndarray] = []
    total = 0.0
    while total < duration_ms:
        gaps = rng.exponential(mean_gap_ms, size=max(expected, 64))
        ts = total + np.cumsum(gaps)
        chunks.append(ts)
        total = float(ts[-1])
        expected = max(expected // 4, 64)
    arrivals = np.concatenate(chunks)
    return arrivals[arrivals <= duration_ms]


def generate_stream(spec: WorkloadSpec) -> list[TelemetryEvent]:
    """Materialise the full, time-ordered arrival list for a run."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    duration_ms = spec.duration_s * 1000.0

    ts = _poisson_arrivals(rng, spec.rate_eps, duration_ms)
    n = len(ts)
    pops = rng.choice(3, size=n, p=np.asarray(spec.class_mix, dtype=float))

    severities = np.empty(n, dtype=np.int64)
    reputations = np.empty(n, dtype=np.float64)
    src_idx = np.empty(n, dtype=np.int64)
    kind_idx = np.empty(n, dtype=np.int64)
    for pop in (0, 1, 2):
        mask = pops == pop
        count = int(mask.sum())
        if count == 0:
            continue
        lo, hi = _SEVERITY_RANGES[pop]
        severities[mask] = rng.integers(lo, hi + 1, size=count)
        rlo, rhi = _REPUTATION_RANGES[pop]
        reputations[mask] = rng.uniform(rlo, rhi, size=count)
        src_idx[mask] = rng.integers(0, len(_SOURCES[pop]), size=count)
        kind_idx[mask] = rng.integers(0, len(_KINDS[pop]), size=count)
    actor_idx = rng.integers(0, _ACTOR_POOL, size=n)

    events: list[TelemetryEvent] = []
    for i in range(n):
        pop = int(pops[i])
        source = _SOURCES[pop][int(src_idx[i])]
        kind = _KINDS[pop][int(kind_idx[i])]
        events.append(
            TelemetryEvent(
                event_id=f"e{i:08d}",
                ts=float(ts[i]),
                severity=int(severities[i]),
                source_id=source,
                actor_id=f"actor-{int(actor_idx[i]):03d}",
                kind=kind,
                reputation=float(reputations[i]),
                message=f"{kind} from {source}",
            )
        )

    if spec.burst is not None:
        events = _merge_burst(events, spec, rng, duration_ms)
    return events


def _merge_burst(
    events: list[TelemetryEvent],
    spec: WorkloadSpec,
    rng: np.random.Generator,
    duration_ms: float,
) -> list[TelemetryEvent]:
    burst = spec.burst
    assert burst is not None
    start_ms = (burst.start_s if burst.start_s is not None else spec.duration_s / 3.0) * 1000.0
    end_ms = min(start_ms + burst.duration_s * 1000.0, duration_ms)
    extra_rate = spec.rate_eps * max(burst.rate_multiplier - 1.0, 0.0)
    if extra_rate <= 0 or end_ms <= start_ms:
        return events

    ts = start_ms + _poisson_arrivals(rng, extra_rate, end_ms - start_ms)
    source, kind = burst.key
    lo, hi = _SEVERITY_RANGES[_POP_WARNING]
    rlo, rhi = _REPUTATION_RANGES[_POP_WARNING]
    burst_events = [
        TelemetryEvent(
            event_id=f"b{i:08d}",
            ts=float(t),
            severity=int(rng.integers(lo, hi + 1)),
            source_id=source,
            actor_id=f"actor-{int(rng.integers(0, _ACTOR_POOL)):03d}",
            kind=kind,
            reputation=float(rng.uniform(rlo, rhi)),
            message=f"{kind} from {source}",
        )
        for i, t in enumerate(ts)
    ]
    merged = events + burst_events
    merged.sort(key=lambda e: (e.ts, e.event_id))
    return merged


# --------------------------------------------------------------- analyst


@dataclass(slots=True)
class ScriptSegment:
    t_ms: float
    scroll_velocity: float = 0.0
    selection_active: bool = False
    sources: tuple[str, ...] = ()
    actors: tuple[str, ...] = ()
    kinds: tuple[str, ...] = ()

    @property
    def is_active(self) -> bool:
        return self.scroll_velocity > 0 or self.selection_active

    def context(self) -> InvestigationContext | None:
        if not self.selection_active:
            return None
        return InvestigationContext(
            watched_sources=frozenset(self.sources),
            watched_actors=frozenset(self.actors),
            watched_kinds=frozenset(self.kinds),
        )


@dataclass
class AnalystScript:
    """Timed interaction behaviour covering a whole run."""

    segments: list[ScriptSegment]
    end_ms: float
    name: str = "custom"

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("script needs at least one segment")
        self.segments.sort(key=lambda s: s.t_ms)
        if self.segments[0].t_ms > 0:
            raise ValueError("script must start at t=0")

    def covers(self, duration_ms: float) -> bool:
        return self.end_ms >= duration_ms

    def at(self, now: float) -> tuple[ScriptSegment, float]:
        """Segment in effect at ``now`` plus the age of the last interaction.

        The run start counts as the initial interaction, so the age only
        exceeds the detach threshold after a genuinely quiet stretch.
        """
        current = self.segments[0]
        last_active_end = 0.0
        for i, seg in enumerate(self.segments):
            if seg.t_ms > now:
                break
            current = seg
            if seg.is_active:
                seg_end = self.segments[i + 1].t_ms if i + 1 < len(self.segments) else self.end_ms
                last_active_end = min(seg_end, now)
        age = 0.0 if current.is_active else now - last_active_end
        return current, age


def idle_script(duration_ms: float) -> AnalystScript:
    return AnalystScript([ScriptSegment(t_ms=0.0)], end_ms=duration_ms, name="idle")


def scrolling_script(duration_ms: float, burst_every_ms: float = 4_000.0) -> AnalystScript:
    """Scroll hard for 2 s out of every ``burst_every_ms``."""
    segments = [ScriptSegment(t_ms=0.0)]
    t = 2_000.0
    while t < duration_ms:
        segments.append(ScriptSegment(t_ms=t, scroll_velocity=400.0))
        segments.append(ScriptSegment(t_ms=min(t + 2_000.0, duration_ms)))
        t += burst_every_ms
    return AnalystScript(segments, end_ms=duration_ms, name="scrolling")


def investigating_script(
    duration_ms: float,
    source: str = "10.21.55.120",
    from_ms: float = 5_000.0,
) -> AnalystScript:
    segments = [
        ScriptSegment(t_ms=0.0),
        ScriptSegment(t_ms=min(from_ms, duration_ms), selection_active=True, sources=(source,)),
    ]
    return AnalystScript(segments, end_ms=duration_ms, name="investigating")


_BUILTIN_SCRIPTS = {
    "idle": idle_script,
    "scrolling": scrolling_script,
    "investigating": investigating_script,
}


def load_script(name_or_path: str, duration_ms: float) -> AnalystScript:
    builder = _BUILTIN_SCRIPTS.get(name_or_path)
    if builder is not None:
        return builder(duration_ms)
    raw = json.loads(Path(name_or_path).read_text(encoding="utf-8"))
    segments = [
        ScriptSegment(
            t_ms=float(seg["t_ms"]),
            scroll_velocity=float(seg.get("scroll_velocity", 0.0)),
            selection_active=bool(seg.get("selection_active", False)),
            sources=tuple(seg.get("sources", ())),
            actors=tuple(seg.get("actors", ())),
            kinds=tuple(seg.get("kinds", ())),
        )
        for seg in raw["segments"]
    ]
    return AnalystScript(segments, end_ms=float(raw["end_ms"]), name=str(raw.get("name", "file")))
