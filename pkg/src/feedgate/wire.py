"""Line-delimited JSON wire formats.

One self-describing record per line, for both directions: telemetry events
in, render commands out, interaction signals back in.  Line formats are
locale-independent and greppable; a malformed line is reported (with the
offending key and line number) and never stops a stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .events import TelemetryEvent
from .scoring import InvestigationContext
from .sink import RenderCommand, VisualStyle


class ParseError(ValueError):
    def __init__(self, message: str, line_no: int | None = None, key: str | None = None):
        prefix = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line_no = line_no
        self.key = key


_EVENT_KEYS = ("id", "ts", "severity", "source", "actor", "kind", "reputation", "msg")


def parse_event_line(line: str, line_no: int = 0) -> TelemetryEvent | None:
    """Parse one telemetry record; blank lines are skipped (returns None)."""
    stripped = line.strip()
    if not stripped:
        return None
    try:
        raw = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc.msg}", line_no) from None
    if not isinstance(raw, dict):
        raise ParseError("record must be a JSON object", line_no)

    for key in _EVENT_KEYS:
        if key not in raw:
            raise ParseError(f"missing required key {key!r}", line_no, key)

    def text(key: str) -> str:
        value = raw[key]
        if not isinstance(value, str):
            raise ParseError(f"key {key!r} must be a string", line_no, key)
        return value

    ts = raw["ts"]
    if isinstance(ts, bool) or not isinstance(ts, (int, float)):
        raise ParseError("key 'ts' must be a number", line_no, "ts")
    severity = raw["severity"]
    if isinstance(severity, bool) or not isinstance(severity, int):
        raise ParseError("key 'severity' must be an integer", line_no, "severity")
    if not 0 <= severity <= 10:
        raise ParseError(f"key 'severity' out of range [0, 10]: {severity}", line_no, "severity")
    reputation = raw["reputation"]
    if isinstance(reputation, bool) or not isinstance(reputation, (int, float)):
        raise ParseError("key 'reputation' must be a number", line_no, "reputation")
    if not 0.0 <= float(reputation) <= 1.0:
        raise ParseError(
            f"key 'reputation' out of range [0, 1]: {reputation}", line_no, "reputation"
        )

    return TelemetryEvent(
        event_id=text("id"),
        ts=float(ts),
        severity=severity,
        source_id=text("source"),
        actor_id=text("actor"),
        kind=text("kind"),
        reputation=float(reputation),
        message=text("msg"),
    )


def event_to_line(ev: TelemetryEvent) -> str:
    return json.dumps(
        {
            "id": ev.event_id,
            "ts": ev.ts,
            "severity": ev.severity,
            "source": ev.source_id,
            "actor": ev.actor_id,
            "kind": ev.kind,
            "reputation": ev.reputation,
            "msg": ev.message,
        },
        sort_keys=True,
    )


@dataclass(slots=True)
class WireSignal:
    scroll_velocity: float = 0.0
    selection_active: bool = False
    sources: tuple[str, ...] = ()
    actors: tuple[str, ...] = ()
    kinds: tuple[str, ...] = ()
    client_ts: float = 0.0

    def context(self) -> InvestigationContext | None:
        if not self.selection_active:
            return None
        return InvestigationContext(
            watched_sources=frozenset(self.sources),
            watched_actors=frozenset(self.actors),
            watched_kinds=frozenset(self.kinds),
        )


def parse_signal_line(line: str) -> WireSignal | None:
    """Parse one interaction-signal record; None for anything malformed.

    Unknown keys are ignored so dashboard versions can evolve freely.
    """
    try:
        raw = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(raw, dict):
        return None
    try:
        selection = raw.get("selection") or {}
        if not isinstance(selection, dict):
            return None
        scroll = float(raw.get("scroll_velocity", 0.0))
        if scroll < 0:
            return None
        return WireSignal(
            scroll_velocity=scroll,
            selection_active=bool(raw.get("selection_active", False)),
            sources=tuple(str(s) for s in selection.get("sources", ())),
            actors=tuple(str(a) for a in selection.get("actors", ())),
            kinds=tuple(str(k) for k in selection.get("kinds", ())),
            client_ts=float(raw.get("client_ts", 0.0)),
        )
    except (TypeError, ValueError):
        return None


def signal_to_line(sig: WireSignal) -> str:
    return json.dumps(
        {
            "scroll_velocity": sig.scroll_velocity,
            "selection_active": sig.selection_active,
            "selection": {
                "sources": list(sig.sources),
                "actors": list(sig.actors),
                "kinds": list(sig.kinds),
            },
            "client_ts": sig.client_ts,
        },
        sort_keys=True,
    )


def command_to_line(cmd: RenderCommand) -> str:
    return json.dumps(
        {
            "seq": cmd.seq,
            "cycle": cmd.cycle_id,
            "kind": cmd.kind,
            "payload": cmd.payload,
            "style": {
                "opacity": cmd.style.opacity,
                "pulse": cmd.style.pulse_highlight,
                "pulse_ms": cmd.style.pulse_duration_ms,
            },
        },
        sort_keys=True,
    )


def command_from_line(line: str) -> RenderCommand:
    raw = json.loads(line)
    style = raw.get("style") or {}
    return RenderCommand(
        seq=int(raw["seq"]),
        cycle_id=int(raw["cycle"]),
        kind=str(raw["kind"]),
        payload=dict(raw["payload"]),
        style=VisualStyle(
            opacity=float(style.get("opacity", 1.0)),
            pulse_highlight=bool(style.get("pulse", False)),
            pulse_duration_ms=float(style.get("pulse_ms", 3000.0)),
        ),
    )
