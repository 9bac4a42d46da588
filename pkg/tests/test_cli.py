"""CLI contract: subcommands, config plumbing, exit codes."""

import json

import pytest

from feedgate.cli import main
from feedgate.config import AppConfig, ConfigError, load_config, load_model_file


def test_unknown_config_key_rejected():
    with pytest.raises(ConfigError):
        load_config(None, ["buffer.capasity=10"])


def test_overrides_apply_and_coerce():
    cfg = load_config(None, ["buffer.capacity=123", "policy.budget=7", "scorer.weights=[1,2,3,4]"])
    assert cfg.buffer.capacity == 123
    assert cfg.policy.budget == 7
    assert cfg.scorer.weights == (1.0, 2.0, 3.0, 4.0)


def test_config_file_plus_override(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"buffer.ttl_ms": 2_500, "compactor.threshold": 4}))
    cfg = load_config(path, ["buffer.ttl_ms=3000"])
    assert cfg.buffer.ttl_ms == 3_000.0
    assert cfg.compactor.threshold == 4


def test_invalid_threshold_order_rejected():
    with pytest.raises(ConfigError):
        load_config(None, ["scorer.warning_min=0.9"])  # above critical_min


def test_flat_round_trip():
    cfg = AppConfig()
    flat = cfg.to_flat()
    assert flat["buffer.capacity"] == 50_000
    assert flat["policy.budget"] == 50
    assert flat["compactor.window_ms"] == 10_000.0
    cfg2 = AppConfig()
    for key, value in flat.items():
        cfg2.apply(key, value)
    assert cfg2.to_flat() == flat


def test_model_file_loading(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(
        json.dumps(
            {"weights": [1, 1, 1, 1], "bias": -1.0, "critical_min": 0.9, "warning_min": 0.3}
        )
    )
    scorer = load_model_file(path)
    assert scorer.weights == (1.0, 1.0, 1.0, 1.0)
    assert scorer.critical_min == 0.9
    with pytest.raises(ConfigError):
        load_model_file(tmp_path / "missing.json")


def test_cli_bad_config_key_exit_1(capsys):
    code = main(["--set", "nope.nope=1", "simulate", "--strategy", "baseline",
                 "--rate", "10", "--duration", "1", "--seed", "1"])
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_cli_simulate_and_report(tmp_path, capsys):
    code = main([
        "simulate", "--strategy", "ai-ar", "--rate", "100", "--duration", "2",
        "--seed", "3", "--out", str(tmp_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "ai-ar" in out
    report = json.loads((tmp_path / "report-ai-ar.json").read_text())
    assert report["counters"]["conserved"] == 1


def test_cli_compare_writes_three_reports(tmp_path, capsys):
    code = main([
        "compare", "--rate", "200", "--duration", "2", "--seed", "5", "--out", str(tmp_path),
    ])
    assert code == 0
    for name in ("baseline", "fixed", "ai-ar"):
        assert (tmp_path / f"report-{name}.json").is_file()
    table = capsys.readouterr().out
    assert len([l for l in table.splitlines() if l and not l.startswith(("-", "report"))]) >= 4


def test_cli_find_max_json(capsys):
    code = main([
        "find-max", "--strategy", "baseline", "--seed", "2",
        "--duration", "1", "--rate-cap", "4000",
    ])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert out["strategy"] == "baseline"
    assert out["probes"]


def test_cli_replay_counters(tmp_path, capsys):
    from feedgate.wire import event_to_line
    from feedgate.workload import WorkloadSpec, generate_stream

    stream = tmp_path / "ev.jsonl"
    events = generate_stream(WorkloadSpec(rate_eps=100, duration_s=2, seed=6))
    stream.write_text("\n".join(event_to_line(e) for e in events) + "\n")
    code = main(["replay", "--file", str(stream), "--sink", "discard"])
    assert code == 0
    counters = json.loads(capsys.readouterr().out)
    assert counters["conserved"] == 1
    assert counters["ingested"] == len(events)


def test_cli_cost_file(tmp_path, capsys):
    cost = tmp_path / "cost.json"
    cost.write_text(json.dumps({"per_command_us": 50.0}))
    code = main([
        "simulate", "--strategy", "baseline", "--rate", "50", "--duration", "1",
        "--seed", "1", "--cost-file", str(cost),
    ])
    assert code == 0
    bad = tmp_path / "bad_cost.json"
    bad.write_text(json.dumps({"per_frame": 1}))
    code = main([
        "simulate", "--strategy", "baseline", "--rate", "50", "--duration", "1",
        "--seed", "1", "--cost-file", str(bad),
    ])
    assert code == 1
