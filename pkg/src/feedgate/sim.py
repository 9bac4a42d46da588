"""Headless comparison harness on a virtual clock.

Three strategies run against identical seeded traces:

* ``baseline``  — render every arrival at the next 16 ms cycle, no scoring,
  no budget (the harshest render-everything interpretation),
* ``fixed``     — batch all arrivals every 1000 ms, no scoring,
* ``ai-ar``     — the full adaptive pipeline.

Simulated cost is charged per render command and per scored event; a cycle
whose work exceeds its interval is janky and pushes the next cycle later,
so an overloaded strategy falls behind and renders stale events.  The
recall proxy counts ground-truth critical events whose individual render
completed before their TTL deadline.  All absolute numbers are relative to
the declared cost model, never to any particular hardware.
"""

from __future__ import annotations

import dataclasses
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .config import AppConfig
from .engine import ExternalSignals, PipelineEngine
from .events import TelemetryEvent
from .sink import DiscardSink
from .workload import AnalystScript, WorkloadSpec, generate_stream, idle_script, is_critical_truth


class SimulationError(ValueError):
    pass


class Strategy(Enum):
    BASELINE = "baseline"
    FIXED = "fixed"
    ADAPTIVE = "ai-ar"

    @classmethod
    def from_token(cls, token: str) -> "Strategy":
        for member in cls:
            if member.value == token:
                return member
        raise SimulationError(f"unknown strategy: {token!r}")


@dataclass(slots=True)
class CostModel:
    per_command_us: float = 100.0
    per_score_us: float = 5.0
    cores_equivalent: float = 1.0
    cpu_capacity_us_per_s: float = 1_000_000.0

    def validate(self) -> "CostModel":
        if min(self.per_command_us, self.per_score_us, self.cores_equivalent) < 0:
            raise SimulationError("cost model values must be >= 0")
        if self.capacity_us_per_s() <= 0:
            raise SimulationError("cpu capacity must be > 0")
        return self

    def capacity_us_per_s(self) -> float:
        return self.cpu_capacity_us_per_s * self.cores_equivalent

    @classmethod
    def from_file(cls, path: str | Path) -> "CostModel":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in dataclasses.fields(cls)}
        bad = set(raw) - known
        if bad:
            raise SimulationError(f"unknown cost model keys: {sorted(bad)}")
        return cls(**raw).validate()


@dataclass
class MetricsReport:
    strategy: str
    rate_eps: float
    duration_s: float
    seed: int
    cycles: int
    janky_cycles: int
    jank_pct: float
    avg_cpu_load: float
    work_p95_ratio: float
    render_work_total_us: float
    recall_proxy: float
    counters: dict[str, int]
    max_sustainable_eps: float | None = None
    rendered_event_ids: list[str] | None = None

    def conserved(self) -> bool:
        return bool(self.counters.get("conserved", 0))

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out.pop("rendered_event_ids", None)
        return out


class _CpuWindow:
    """Sliding 1 s window of charged work, fed back as cpu_load."""

    __slots__ = ("entries", "total")

    def __init__(self) -> None:
        self.entries: deque[tuple[float, float]] = deque()
        self.total = 0.0

    def push(self, t: float, work_us: float) -> None:
        self.entries.append((t, work_us))
        self.total += work_us

    def load(self, now: float, capacity_us_per_s: float) -> float:
        while self.entries and self.entries[0][0] <= now - 1000.0:
            _, w = self.entries.popleft()
            self.total -= w
        return min(self.total / capacity_us_per_s, 1.0)


class _BatchAdapter:
    """Baseline and fixed-throttle strategies: render everything, no scoring."""

    def __init__(self, interval_ms: float, ttl_ms: float, cost: CostModel, capture: bool):
        self.interval_ms = interval_ms
        self.ttl_ms = ttl_ms
        self.cost = cost
        self.capture = capture
        self.pending: list[TelemetryEvent] = []
        self.rendered = 0
        self.commands = 0
        self.recall_hits = 0
        self.rendered_ids: list[str] = []

    def ingest(self, ev: TelemetryEvent) -> None:
        self.pending.append(ev)

    def cycle(self, now: float, cpu_load: float) -> tuple[float, float]:
        n = len(self.pending)
        work_us = n * self.cost.per_command_us
        completion = now + work_us / 1000.0
        for ev in self.pending:
            if is_critical_truth(ev) and completion <= ev.ts + self.ttl_ms:
                self.recall_hits += 1
        if self.capture:
            self.rendered_ids.extend(ev.event_id for ev in self.pending)
        self.rendered += n
        self.commands += n
        self.pending.clear()
        return work_us, self.interval_ms

    def counters(self, not_ingested: int) -> dict[str, int]:
        pending_end = len(self.pending) + not_ingested
        return {
            "ingested": self.rendered + len(self.pending),
            "rendered_individually": self.rendered,
            "rendered_cluster_members": 0,
            "clusters_inserted": 0,
            "pruned_ttl": 0,
            "downgraded": 0,
            "dropped_critical": 0,
            "scored": 0,
            "commands_total": self.commands,
            "rejected_invalid": 0,
            "pending_end": pending_end,
        }


class _AdaptiveAdapter:
    def __init__(self, config: AppConfig, script: AnalystScript, cost: CostModel, capture: bool):
        self.engine = PipelineEngine(config, DiscardSink())
        self.script = script
        self.cost = cost
        self.capture = capture
        self.ttl_ms = config.buffer.ttl_ms
        self.recall_hits = 0
        self.truth: set[str] = set()
        self.rendered_ids: list[str] = []
        self.interval_ms = config.policy.interval_idle_ms

    def ingest(self, ev: TelemetryEvent) -> None:
        self.engine.ingest(ev, ev.ts)

    def cycle(self, now: float, cpu_load: float) -> tuple[float, float]:
        seg, age = self.script.at(now)
        ext = ExternalSignals(
            cpu_load=cpu_load,
            scroll_velocity=seg.scroll_velocity,
            selection_active=seg.selection_active,
            selection_context=seg.context(),
            last_interaction_age_ms=age,
        )
        result = self.engine.run_cycle(now, ext)
        work_us = (
            result.scored * self.cost.per_score_us
            + len(result.commands) * self.cost.per_command_us
        )
        completion = now + work_us / 1000.0
        for event_id, deadline in result.inserted_events:
            if event_id in self.truth and completion <= deadline:
                self.recall_hits += 1
        if self.capture:
            self.rendered_ids.extend(eid for eid, _ in result.inserted_events)
        self.interval_ms = result.interval_ms
        return work_us, result.interval_ms

    def counters(self, not_ingested: int) -> dict[str, int]:
        snap = self.engine.conservation()
        snap["pending_end"] = snap["pending_end"] + not_ingested
        return snap


def run_simulation(
    spec: WorkloadSpec,
    strategy: Strategy,
    cost: CostModel | None = None,
    script: AnalystScript | None = None,
    config: AppConfig | None = None,
    capture_rendered: bool = False,
) -> MetricsReport:
    """Drive one strategy over one seeded trace and measure it.

    Deterministic: identical arguments produce an identical report.
    """
    spec.validate()
    cost = (cost or CostModel()).validate()
    config = config or AppConfig()
    duration_ms = spec.duration_s * 1000.0
    script = script or idle_script(duration_ms)
    if not script.covers(duration_ms):
        raise SimulationError(
            f"analyst script ends at {script.end_ms} ms but the run lasts {duration_ms} ms"
        )

    events = generate_stream(spec)
    truth = {ev.event_id for ev in events if is_critical_truth(ev)}

    if strategy is Strategy.BASELINE:
        adapter: _BatchAdapter | _AdaptiveAdapter = _BatchAdapter(
            16.0, config.buffer.ttl_ms, cost, capture_rendered
        )
    elif strategy is Strategy.FIXED:
        adapter = _BatchAdapter(1000.0, config.buffer.ttl_ms, cost, capture_rendered)
    else:
        adapter = _AdaptiveAdapter(config, script, cost, capture_rendered)
        adapter.truth = truth

    cpu_window = _CpuWindow()
    capacity = cost.capacity_us_per_s()
    now = adapter.interval_ms
    ev_i = 0
    n_events = len(events)
    cycles = 0
    janky = 0
    total_work = 0.0
    ratios: list[float] = []

    while now <= duration_ms:
        while ev_i < n_events and events[ev_i].ts <= now:
            adapter.ingest(events[ev_i])
            ev_i += 1
        cpu_load = cpu_window.load(now, capacity)
        # The interval selected during the cycle defines its deadline: the
        # next cycle starts one interval later unless the work overran it.
        work_us, interval_ms = adapter.cycle(now, cpu_load)
        cycles += 1
        total_work += work_us
        budget_us = interval_ms * 1000.0
        ratios.append(work_us / budget_us if budget_us > 0 else 0.0)
        if work_us > budget_us:
            janky += 1
        cpu_window.push(now, work_us)
        completion = now + work_us / 1000.0
        now = max(now + interval_ms, completion)

    counters = adapter.counters(not_ingested=n_events - ev_i)
    counters["generated"] = n_events
    balance = (
        counters["rendered_individually"]
        + counters["rendered_cluster_members"]
        + counters["pruned_ttl"]
        + counters["dropped_critical"]
        + counters["pending_end"]
    )
    counters["balance"] = balance
    counters["conserved"] = int(balance == n_events)

    recall = adapter.recall_hits / len(truth) if truth else 1.0
    return MetricsReport(
        strategy=strategy.value,
        rate_eps=spec.rate_eps,
        duration_s=spec.duration_s,
        seed=spec.seed,
        cycles=cycles,
        janky_cycles=janky,
        jank_pct=janky / cycles if cycles else 0.0,
        avg_cpu_load=min(total_work / (spec.duration_s * capacity), 1.0),
        work_p95_ratio=float(np.percentile(ratios, 95)) if ratios else 0.0,
        render_work_total_us=total_work,
        recall_proxy=recall,
        counters=counters,
        rendered_event_ids=adapter.rendered_ids if capture_rendered else None,
    )


# ----------------------------------------------------------- sustainability


@dataclass(slots=True)
class SustainCriteria:
    jank_max: float = 0.12
    p95_ratio_max: float = 1.0
    max_dropped_critical: int = 0

    def passed(self, report: MetricsReport) -> bool:
        return (
            report.jank_pct <= self.jank_max
            and report.work_p95_ratio <= self.p95_ratio_max
            and report.counters["dropped_critical"] <= self.max_dropped_critical
        )


@dataclass
class SustainResult:
    eps: float
    capped: bool = False
    unsustainable: bool = False
    probes: list[tuple[float, bool]] = field(default_factory=list)
    last_passing: MetricsReport | None = None


def find_max_sustainable(
    strategy: Strategy,
    cost: CostModel | None = None,
    spec_template: WorkloadSpec | None = None,
    criteria: SustainCriteria | None = None,
    config: AppConfig | None = None,
    rate_min: float = 500.0,
    rate_cap: float = 200_000.0,
    rel_width: float = 0.05,
) -> SustainResult:
    """Largest arrival rate the strategy sustains under the criteria.

    Bracket-doubling from ``rate_min`` followed by bisection until the
    bracket is within ``rel_width`` relative width; the search is capped at
    ``rate_cap`` and a strategy that is fine at the cap reports ``capped``
    (its true limit is >= cap).
    """
    cost = (cost or CostModel()).validate()
    template = spec_template or WorkloadSpec(rate_eps=1.0, duration_s=3.0, seed=1)
    criteria = criteria or SustainCriteria()
    result = SustainResult(eps=0.0)
    reports: dict[float, MetricsReport] = {}

    def probe(rate: float) -> bool:
        if rate not in reports:
            spec = dataclasses.replace(template, rate_eps=rate)
            reports[rate] = run_simulation(spec, strategy, cost, config=config)
            result.probes.append((rate, criteria.passed(reports[rate])))
        return criteria.passed(reports[rate])

    if not probe(rate_min):
        result.eps = rate_min
        result.unsustainable = True
        return result

    lo = rate_min
    hi: float | None = None
    r = rate_min * 2
    while r < rate_cap:
        if probe(r):
            lo = r
            r *= 2
        else:
            hi = r
            break
    if hi is None:
        if probe(rate_cap):
            result.eps = rate_cap
            result.capped = True
            result.last_passing = reports[rate_cap]
            return result
        hi = rate_cap

    while (hi - lo) / lo > rel_width:
        mid = (lo + hi) / 2.0
        if probe(mid):
            lo = mid
        else:
            hi = mid

    result.eps = lo
    result.last_passing = reports[lo]
    return result


# ----------------------------------------------------------------- compare


STRATEGY_ORDER = (Strategy.BASELINE, Strategy.FIXED, Strategy.ADAPTIVE)

_TABLE_COLUMNS = (
    ("strategy", "{}"),
    ("rate_eps", "{:.0f}"),
    ("max_sustainable_eps", "{:.0f}"),
    ("avg_cpu_load", "{:.2f}"),
    ("jank_pct", "{:.3f}"),
    ("recall_proxy", "{:.3f}"),
    ("render_work_total_us", "{:.0f}"),
    ("cycles", "{}"),
)


def compare_strategies(
    spec: WorkloadSpec,
    cost: CostModel | None = None,
    script: AnalystScript | None = None,
    config: AppConfig | None = None,
) -> dict[str, MetricsReport]:
    """All three strategies over the identical trace and analyst script."""
    return {
        strategy.value: run_simulation(spec, strategy, cost, script, config)
        for strategy in STRATEGY_ORDER
    }


def format_table(reports: dict[str, MetricsReport]) -> str:
    headers = [name for name, _ in _TABLE_COLUMNS]
    rows = [headers]
    for report in reports.values():
        row = []
        for name, fmt in _TABLE_COLUMNS:
            value = getattr(report, name)
            row.append("-" if value is None else fmt.format(value))
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def write_report(report: MetricsReport, out_dir: str | Path, name: str | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / (name or f"report-{report.strategy.replace('/', '_')}.json")
    path.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
