"""Command line entry point.

Subcommands:

* ``simulate``  one strategy over a synthetic workload, metrics out
* ``compare``   all three strategies over the identical trace
* ``replay``    feed a recorded event file (or stdin) through the pipeline
* ``serve``     live WebSocket gateway for the dashboard
* ``find-max``  largest sustainable arrival rate for a strategy

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import asyncio
import dataclasses
import json
import sys
from pathlib import Path

from .config import AppConfig, ConfigError, load_config, load_model_file
from .gateway import GatewayServer, run_replay
from .sim import (
    CostModel,
    SimulationError,
    Strategy,
    SustainCriteria,
    compare_strategies,
    find_max_sustainable,
    format_table,
    run_simulation,
    write_report,
)
from .workload import WorkloadSpec, load_script

_STRATEGY_TOKENS = [s.value for s in Strategy]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="feedgate")
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )
    parser.add_argument("--model", help="scorer model file (flat JSON)")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one strategy over a synthetic workload")
    sim.add_argument("--strategy", choices=_STRATEGY_TOKENS, required=True)
    sim.add_argument("--rate", type=float, required=True, metavar="EPS")
    sim.add_argument("--duration", type=float, required=True, metavar="S")
    sim.add_argument("--seed", type=int, required=True, metavar="N")
    sim.add_argument("--cost-file", metavar="F")
    sim.add_argument("--script", default="idle", metavar="{idle|scrolling|investigating|FILE}")
    sim.add_argument("--out", metavar="DIR")

    cmp_ = sub.add_parser("compare", help="run all three strategies on the identical trace")
    cmp_.add_argument("--rate", type=float, required=True, metavar="EPS")
    cmp_.add_argument("--duration", type=float, required=True, metavar="S")
    cmp_.add_argument("--seed", type=int, required=True, metavar="N")
    cmp_.add_argument("--cost-file", metavar="F")
    cmp_.add_argument("--script", default="idle")
    cmp_.add_argument("--out", metavar="DIR")

    rep = sub.add_parser("replay", help="drive the pipeline from recorded events")
    rep.add_argument("--file", required=True, metavar="PATH", help="event file, '-' for stdin")
    rep.add_argument("--speed", type=float, default=0.0, metavar="X")
    rep.add_argument("--sink", choices=["record", "serve", "discard"], default="record")
    rep.add_argument("--port", type=int, default=8765, help="port when --sink serve")

    srv = sub.add_parser("serve", help="serve the dashboard endpoint")
    srv.add_argument("--port", type=int, required=True, metavar="P")
    srv.add_argument("--source", default="stdin", metavar="{stdin|socket:ADDR|file:PATH}")
    srv.add_argument("--speed", type=float, default=1.0)
    srv.add_argument("--static", metavar="DIR", help="static dashboard files to serve at /")

    fm = sub.add_parser("find-max", help="largest sustainable rate for a strategy")
    fm.add_argument("--strategy", choices=_STRATEGY_TOKENS, required=True)
    fm.add_argument("--jank-max", type=float, default=0.12)
    fm.add_argument("--seed", type=int, required=True, metavar="N")
    fm.add_argument("--duration", type=float, default=3.0, help="probe length in seconds")
    fm.add_argument("--rate-cap", type=float, default=200_000.0)
    fm.add_argument("--cost-file", metavar="F")
    return parser


def _load_app_config(args: argparse.Namespace) -> AppConfig:
    cfg = load_config(args.config, args.overrides)
    if args.model:
        cfg.scorer = load_model_file(args.model, cfg.scorer)
    return cfg


def _cost(args: argparse.Namespace) -> CostModel:
    if getattr(args, "cost_file", None):
        return CostModel.from_file(args.cost_file)
    return CostModel()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_app_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "simulate":
            return _cmd_simulate(args, config)
        if args.command == "compare":
            return _cmd_compare(args, config)
        if args.command == "replay":
            return _cmd_replay(args, config)
        if args.command == "serve":
            return _cmd_serve(args, config)
        if args.command == "find-max":
            return _cmd_find_max(args, config)
    except (ConfigError, SimulationError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


def _cmd_simulate(args: argparse.Namespace, config: AppConfig) -> int:
    spec = WorkloadSpec(rate_eps=args.rate, duration_s=args.duration, seed=args.seed)
    script = load_script(args.script, spec.duration_s * 1000.0)
    report = run_simulation(
        spec, Strategy.from_token(args.strategy), _cost(args), script, config
    )
    print(format_table({report.strategy: report}))
    if args.out:
        path = write_report(report, args.out)
        print(f"report written to {path}")
    return 0


def _cmd_compare(args: argparse.Namespace, config: AppConfig) -> int:
    spec = WorkloadSpec(rate_eps=args.rate, duration_s=args.duration, seed=args.seed)
    script = load_script(args.script, spec.duration_s * 1000.0)
    reports = compare_strategies(spec, _cost(args), script, config)
    print(format_table(reports))
    if args.out:
        for name, report in reports.items():
            write_report(report, args.out, f"report-{name}.json")
        print(f"reports written to {args.out}")
    return 0


def _cmd_replay(args: argparse.Namespace, config: AppConfig) -> int:
    if args.sink == "serve":
        server = GatewayServer(
            config,
            port=args.port,
            source=f"file:{args.file}",
            speed=args.speed if args.speed > 0 else 1.0,
        )
        asyncio.run(server.run_forever())
        return 0
    source = sys.stdin if args.file == "-" else args.file
    if isinstance(source, str) and not Path(source).is_file():
        print(f"i/o error: no such file: {source}", file=sys.stderr)
        return 2
    result = run_replay(source, config, sink_kind=args.sink, speed=args.speed)
    print(json.dumps(result.counters, indent=2, sort_keys=True))
    return result.exit_code


def _cmd_serve(args: argparse.Namespace, config: AppConfig) -> int:
    if args.source.startswith("file:") and not Path(args.source[5:]).is_file():
        print(f"i/o error: no such file: {args.source[5:]}", file=sys.stderr)
        return 2
    static = args.static or _default_static_dir()
    server = GatewayServer(
        config,
        port=args.port,
        host="0.0.0.0",
        source=args.source,
        speed=args.speed,
        static_dir=static,
    )
    try:
        asyncio.run(server.run_forever())
    except OSError as exc:
        print(f"i/o error: cannot bind port {args.port}: {exc}", file=sys.stderr)
        return 2
    return 0


def _default_static_dir() -> str | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


def _cmd_find_max(args: argparse.Namespace, config: AppConfig) -> int:
    template = WorkloadSpec(rate_eps=1.0, duration_s=args.duration, seed=args.seed)
    result = find_max_sustainable(
        Strategy.from_token(args.strategy),
        _cost(args),
        template,
        SustainCriteria(jank_max=args.jank_max),
        config=config,
        rate_cap=args.rate_cap,
    )
    out = {
        "strategy": args.strategy,
        "max_sustainable_eps": result.eps,
        "capped": result.capped,
        "unsustainable": result.unsustainable,
        "probes": [{"rate_eps": r, "passed": ok} for r, ok in result.probes],
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
