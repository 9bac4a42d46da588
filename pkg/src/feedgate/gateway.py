"""Wire the pipeline to the world.

Two modes share one engine:

* ``replay``: synchronously drive the pipeline from line-delimited event
  records (file or stdin) on a virtual clock derived from event
  timestamps.  Data errors are reported per line and never stop the run.
* ``serve``: an asyncio WebSocket service that pushes render commands to
  any number of dashboard clients and folds their interaction signals back
  into the next cycle's policy.  Slow or broken clients are isolated by
  bounded queues; the pipeline never blocks on a client.

Three contexts — ingestion, pipeline, transport — talk only through
bounded queues; the pipeline task is the sole owner of engine state.
"""

from __future__ import annotations

import asyncio
import json
import sys
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .config import AppConfig
from .engine import ExternalSignals, PipelineEngine
from .sink import DiscardSink, RecordingSink, RenderCommand
from .wire import ParseError, WireSignal, command_to_line, parse_event_line, parse_signal_line


@dataclass
class ReplayResult:
    exit_code: int
    counters: dict[str, int]
    parse_errors: int
    sink: RecordingSink | DiscardSink


def _iter_lines(source: str | Path | TextIO) -> Iterable[str]:
    if hasattr(source, "readline"):
        yield from source  # type: ignore[misc]
        return
    with open(source, "r", encoding="utf-8") as fh:
        yield from fh


def run_replay(
    source: str | Path | TextIO,
    config: AppConfig | None = None,
    sink_kind: str = "record",
    speed: float = 0.0,
    error_stream: TextIO | None = None,
) -> ReplayResult:
    """Feed recorded events through the pipeline in input order.

    The virtual clock follows event timestamps; ``speed`` > 0 additionally
    paces wall time at that multiple of real time (0 = as fast as possible).
    """
    config = (config or AppConfig()).validate()
    sink: RecordingSink | DiscardSink = RecordingSink() if sink_kind == "record" else DiscardSink()
    engine = PipelineEngine(config, sink)
    errors = error_stream if error_stream is not None else sys.stderr

    parse_errors = 0
    now = 0.0
    next_cycle = config.policy.interval_idle_ms
    last_ts = 0.0
    idle = ExternalSignals()

    for line_no, line in enumerate(_iter_lines(source), start=1):
        try:
            ev = parse_event_line(line, line_no)
        except ParseError as exc:
            parse_errors += 1
            print(f"parse error: {exc}", file=errors)
            continue
        if ev is None:
            continue
        if speed > 0 and ev.ts > last_ts:
            time.sleep((ev.ts - last_ts) / 1000.0 / speed)
        while next_cycle <= ev.ts:
            now = next_cycle
            result = engine.run_cycle(now, idle)
            next_cycle = result.next_cycle_at
        # Enqueue times must be monotone even if event timestamps are not.
        now = max(now, ev.ts)
        engine.ingest(ev, now)
        last_ts = max(last_ts, ev.ts)

    # Drain: run cycles until nothing is pending anywhere (TTL and windows
    # guarantee termination) and all pulse expirations have been emitted.
    horizon = last_ts + config.buffer.ttl_ms + config.compactor.window_ms + config.sink.pulse_ms
    while engine.pending_total() > 0 or engine.has_scheduled_pulses():
        now = next_cycle
        result = engine.run_cycle(now, idle)
        next_cycle = result.next_cycle_at
        if now > horizon + 10 * config.policy.interval_idle_ms:
            break

    counters = engine.conservation()
    counters["parse_errors"] = parse_errors
    return ReplayResult(exit_code=0, counters=counters, parse_errors=parse_errors, sink=sink)


def run_pipeline(
    source: str | Path | TextIO,
    config: AppConfig | None = None,
    sink: str = "record",
    speed: float = 0.0,
    port: int = 8765,
) -> ReplayResult | None:
    """One-call pipeline runner: replay sources synchronously, live ones async.

    File paths, file objects and "stdin" replay through :func:`run_replay`
    and return its result; "socket:ADDR" sources and the "serve" sink run
    the WebSocket service until interrupted (returns None on shutdown).
    """
    cfg = config or AppConfig()
    if sink == "serve" or (isinstance(source, str) and source.startswith("socket:")):
        src = source if isinstance(source, str) else "stdin"
        if isinstance(source, (str, Path)) and not str(source).startswith(("socket:", "stdin")):
            src = f"file:{source}"
        server = GatewayServer(cfg, port=port, source=src, speed=speed if speed > 0 else 1.0)
        asyncio.run(server.run_forever())
        return None
    actual = sys.stdin if source == "stdin" else source
    return run_replay(actual, cfg, sink_kind=sink, speed=speed)


# ----------------------------------------------------------------- serving


@dataclass(eq=False)
class _Client:
    queue: asyncio.Queue
    dropped: int = 0


class BroadcastHub:
    """Fan-out of command lines to clients plus the latest analyst signal.

    Keeps a bounded history so a reconnecting client can resume from the
    last seq it saw; delivery is at-least-once and seq-deduplicated on the
    client side.
    """

    def __init__(self, history_size: int = 8192, client_queue_size: int = 2048):
        self.clients: set[_Client] = set()
        self.history: deque[tuple[int, str]] = deque(maxlen=history_size)
        self.client_queue_size = client_queue_size
        self.dropped_no_client = 0
        self.latest_signal: WireSignal | None = None
        self.last_signal_wall_ms = 0.0
        self.last_activity_wall_ms = 0.0
        self.malformed_signals = 0

    def publish(self, commands: list[RenderCommand]) -> None:
        for cmd in commands:
            line = command_to_line(cmd)
            self.history.append((cmd.seq, line))
            if not self.clients:
                self.dropped_no_client += 1
                continue
            for client in self.clients:
                try:
                    client.queue.put_nowait(line)
                except asyncio.QueueFull:
                    client.dropped += 1

    def attach(self, resume_from: int | None = None) -> _Client:
        client = _Client(queue=asyncio.Queue(maxsize=self.client_queue_size))
        if resume_from is not None:
            for seq, line in self.history:
                if seq > resume_from:
                    try:
                        client.queue.put_nowait(line)
                    except asyncio.QueueFull:
                        client.dropped += 1
        self.clients.add(client)
        return client

    def detach(self, client: _Client) -> None:
        self.clients.discard(client)

    def record_signal(self, sig: WireSignal, wall_ms: float) -> None:
        self.latest_signal = sig
        self.last_signal_wall_ms = wall_ms
        if sig.scroll_velocity > 0 or sig.selection_active:
            self.last_activity_wall_ms = wall_ms

    def signals_for(self, now_ms: float, cpu_load: float) -> ExternalSignals:
        sig = self.latest_signal
        if sig is None:
            return ExternalSignals(cpu_load=cpu_load, last_interaction_age_ms=now_ms)
        stale = now_ms - self.last_signal_wall_ms > 600.0
        scroll = 0.0 if stale else sig.scroll_velocity
        age = 0.0 if (scroll > 0 or sig.selection_active) else now_ms - self.last_activity_wall_ms
        return ExternalSignals(
            cpu_load=cpu_load,
            scroll_velocity=scroll,
            selection_active=sig.selection_active,
            selection_context=sig.context(),
            last_interaction_age_ms=age,
        )


class _WorkWindow:
    """Sliding 1 s estimate of pipeline work as a stand-in cpu_load signal."""

    __slots__ = ("entries", "total")

    def __init__(self) -> None:
        self.entries: deque[tuple[float, float]] = deque()
        self.total = 0.0

    def push(self, t_ms: float, work_us: float) -> None:
        self.entries.append((t_ms, work_us))
        self.total += work_us

    def load(self, now_ms: float) -> float:
        while self.entries and self.entries[0][0] <= now_ms - 1000.0:
            self.total -= self.entries.popleft()[1]
        return min(self.total / 1_000_000.0, 1.0)


class GatewayServer:
    """WebSocket service: commands out, signals in, static dashboard files."""

    def __init__(
        self,
        config: AppConfig,
        port: int = 0,
        host: str = "127.0.0.1",
        source: str = "none",
        speed: float = 1.0,
        static_dir: str | Path | None = None,
    ):
        self.config = config.validate()
        self.host = host
        self.port = port
        self.source = source
        self.speed = speed
        self.static_dir = Path(static_dir) if static_dir else None
        self.hub = BroadcastHub()
        self.engine = PipelineEngine(config, DiscardSink())
        self.ingest_queue: asyncio.Queue[str] = asyncio.Queue(maxsize=100_000)
        self.parse_errors = 0
        self._server = None
        self._tasks: list[asyncio.Task] = []
        self._stop = asyncio.Event()
        self._t0 = time.perf_counter()

    def wall_ms(self) -> float:
        return (time.perf_counter() - self._t0) * 1000.0

    # -- transport ---------------------------------------------------------

    async def _handle_client(self, websocket) -> None:
        client = self.hub.attach()
        sender = asyncio.create_task(self._send_loop(websocket, client))
        try:
            async for message in websocket:
                if not isinstance(message, str):
                    raise ValueError("binary frames violate the protocol")
                sig = parse_signal_line(message)
                if sig is None:
                    resumed = self._maybe_resume(message, client)
                    if not resumed:
                        self.hub.malformed_signals += 1
                    continue
                self.hub.record_signal(sig, self.wall_ms())
        except Exception:
            pass  # drop this client only; the pipeline keeps running
        finally:
            sender.cancel()
            self.hub.detach(client)

    def _maybe_resume(self, message: str, client: _Client) -> bool:
        try:
            raw = json.loads(message)
        except (ValueError, TypeError):
            return False
        if not isinstance(raw, dict) or "resume_from" not in raw:
            return False
        resume_from = int(raw["resume_from"])
        for seq, line in self.hub.history:
            if seq > resume_from:
                try:
                    client.queue.put_nowait(line)
                except asyncio.QueueFull:
                    client.dropped += 1
        return True

    async def _send_loop(self, websocket, client: _Client) -> None:
        while True:
            line = await client.queue.get()
            await websocket.send(line)

    async def _process_request(self, connection, request):
        if request.path == "/ws":
            return None  # proceed with the WebSocket handshake
        body, content_type = self._static_body(request.path)
        if body is None:
            return connection.respond(404, "not found\n")
        response = connection.respond(200, "")
        response.headers["Content-Type"] = content_type
        response.headers["Content-Length"] = str(len(body))
        response.body = body
        return response

    def _static_body(self, path: str) -> tuple[bytes | None, str]:
        if self.static_dir is None:
            if path == "/":
                return (
                    b"feedgate gateway: connect a dashboard to ws://<host>:<port>/ws\n",
                    "text/plain; charset=utf-8",
                )
            return None, ""
        name = "index.html" if path == "/" else path.lstrip("/")
        target = (self.static_dir / name).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            return None, ""
        suffix = target.suffix
        content_type = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
        }.get(suffix, "application/octet-stream")
        return target.read_bytes(), content_type

    # -- ingestion ---------------------------------------------------------

    async def _ingest_from_file(self, path: str) -> None:
        last_ts: float | None = None
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                stripped = line.strip()
                if not stripped:
                    continue
                if self.speed > 0:
                    try:
                        ts = float(json.loads(stripped).get("ts", 0.0))
                    except (ValueError, TypeError, AttributeError):
                        ts = last_ts or 0.0
                    if last_ts is not None and ts > last_ts:
                        await asyncio.sleep((ts - last_ts) / 1000.0 / self.speed)
                    last_ts = ts
                await self.ingest_queue.put(stripped)

    async def _ingest_from_socket(self, addr: str) -> None:
        host, _, port_s = addr.rpartition(":")
        host = host or "127.0.0.1"

        async def on_conn(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
            try:
                while True:
                    raw = await reader.readline()
                    if not raw:
                        break
                    await self.ingest_queue.put(raw.decode("utf-8", "replace"))
            finally:
                writer.close()

        server = await asyncio.start_server(on_conn, host, int(port_s))
        self.ingest_bound_port = server.sockets[0].getsockname()[1]
        async with server:
            await self._stop.wait()

    async def _ingest_from_stdin(self) -> None:
        loop = asyncio.get_running_loop()

        def reader() -> None:
            for line in sys.stdin:
                while True:
                    if self.ingest_queue.qsize() < self.ingest_queue.maxsize - 1:
                        loop.call_soon_threadsafe(self.ingest_queue.put_nowait, line)
                        break
                    time.sleep(0.005)

        await loop.run_in_executor(None, reader)

    # -- pipeline ----------------------------------------------------------

    async def _pipeline_loop(self) -> None:
        work_window = _WorkWindow()
        interval = self.config.policy.interval_idle_ms
        enqueue_clock = 0.0
        while not self._stop.is_set():
            await asyncio.sleep(interval / 1000.0)
            now = self.wall_ms()
            while True:
                try:
                    line = self.ingest_queue.get_nowait()
                except asyncio.QueueEmpty:
                    break
                try:
                    ev = parse_event_line(line)
                except ParseError:
                    self.parse_errors += 1
                    continue
                if ev is None:
                    continue
                enqueue_clock = max(enqueue_clock, now)
                self.engine.ingest(ev, enqueue_clock)
            ext = self.hub.signals_for(now, work_window.load(now))
            result = self.engine.run_cycle(now, ext)
            # Same cost weights as the simulator's defaults, as a process
            # load estimate; real OS sampling is out of scope.
            work_window.push(now, result.scored * 5.0 + len(result.commands) * 100.0)
            self.hub.publish(result.commands)
            interval = result.interval_ms

    # -- lifecycle ---------------------------------------------------------

    async def start(self) -> None:
        import logging

        import websockets.asyncio.server

        # Plain HTTP clients (static-file fetches) often drop the socket
        # without a close frame; websockets logs each as a handshake error.
        logging.getLogger("websockets.server").setLevel(logging.CRITICAL)
        self._server = await websockets.asyncio.server.serve(
            self._handle_client,
            self.host,
            self.port,
            process_request=self._process_request,
            close_timeout=0.5,
        )
        self.port = self._server.sockets[0].getsockname()[1]  # type: ignore[union-attr]
        self._tasks.append(asyncio.create_task(self._pipeline_loop()))
        if self.source.startswith("file:"):
            self._tasks.append(asyncio.create_task(self._ingest_from_file(self.source[5:])))
        elif self.source.startswith("socket:"):
            self._tasks.append(asyncio.create_task(self._ingest_from_socket(self.source[7:])))
        elif self.source == "stdin":
            self._tasks.append(asyncio.create_task(self._ingest_from_stdin()))

    async def stop(self) -> None:
        self._stop.set()
        for task in self._tasks:
            task.cancel()
        await asyncio.gather(*self._tasks, return_exceptions=True)
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def run_forever(self) -> None:
        await self.start()
        try:
            await self._stop.wait()
        finally:
            await self.stop()
