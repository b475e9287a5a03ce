"""Config parsing, the experiment driver, and the CLI surface."""

import numpy as np
import pytest

from voltesched import cli, experiment
from voltesched.config import BANDWIDTH_TO_PRB, ConfigError, ExperimentConfig, parse_config
from voltesched.experiment import SizeCapError, check_size_caps, run_seed


# ---------------------------------------------------------------------------
# Config


def test_bandwidth_prb_mapping():
    assert BANDWIDTH_TO_PRB == {1.4: 7, 3.0: 15, 10.0: 50}
    assert ExperimentConfig(bandwidth_mhz=10.0).num_prb == 50


def test_parse_config_file(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text(
        "# comment\n"
        "bandwidth_mhz = 10\n"
        "num_data=7   # trailing comment\n"
        "volte_sweep = 0, 5, 10\n"
        "policies = heuristic, baseline\n"
        "strict_pseudocode = yes\n"
        "gamma = 0.8\n"
    )
    cfg = parse_config(str(p))
    assert cfg.num_prb == 50
    assert cfg.num_data == 7
    assert cfg.volte_sweep == (0, 5, 10)
    assert cfg.policies == ("heuristic", "baseline")
    assert cfg.strict_pseudocode is True
    assert cfg.gamma == 0.8


def test_overrides_beat_file(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text("runs = 5\nseed = 9\n")
    cfg = parse_config(str(p), {"runs": 2, "seed": None})  # None = not given
    assert cfg.runs == 2
    assert cfg.seed == 9


@pytest.mark.parametrize(
    "line",
    [
        "bandwidth_mhz = 5",  # unsupported bandwidth
        "gamma = 1.0",  # open interval
        "gamma = 0",
        "runs = 0",
        "frames = 0",
        "num_data = -1",
        "volte_sweep = ",
        "policies = nosuch",
        "mystery_key = 1",
        "runs == 3",  # int() fails on '= 3'
        "just a line",
        "strict_pseudocode = maybe",
        "noise_power = 0",
        "time_limit = 0",
    ],
)
def test_parse_config_rejects(tmp_path, line):
    p = tmp_path / "bad.cfg"
    p.write_text(line + "\n")
    with pytest.raises(ConfigError):
        parse_config(str(p))


# ---------------------------------------------------------------------------
# Seed mixing and size caps


def test_run_seed_mixing():
    a = run_seed(1, 5, 0)
    b = run_seed(1, 5, 0)
    c = run_seed(1, 5, 1)
    d = run_seed(1, 6, 0)
    assert a.entropy == b.entropy == [1, 5, 0]
    state = {tuple(s.generate_state(2)) for s in (a, c, d)}
    assert len(state) == 3  # distinct streams


def test_size_caps():
    cfg = ExperimentConfig(bandwidth_mhz=3.0, num_data=5)
    check_size_caps(cfg, "heuristic", 1000)  # heuristics are never capped
    check_size_caps(cfg, "frame_optimal", 4)  # 15*9*4 + 16 = 556 <= 2000
    with pytest.raises(SizeCapError):
        check_size_caps(cfg, "frame_optimal", 12)
    check_size_caps(cfg, "tti_optimal", 10)
    with pytest.raises(SizeCapError):
        check_size_caps(cfg, "tti_optimal", 50)


def test_size_cap_override():
    cfg = ExperimentConfig(frame_var_cap=10**6, tti_var_cap=10**6)
    check_size_caps(cfg, "frame_optimal", 12)
    check_size_caps(cfg, "tti_optimal", 50)


# ---------------------------------------------------------------------------
# Experiment driver


def _tiny_cfg(**kw):
    base = dict(
        bandwidth_mhz=1.4,
        num_data=2,
        volte_sweep=(0, 2),
        policies=("heuristic", "baseline"),
        runs=2,
        seed=5,
    )
    base.update(kw)
    return ExperimentConfig(**base).validate()


def test_run_experiment_rows_and_columns():
    rows = experiment.run_experiment(_tiny_cfg())
    assert len(rows) == 2 * 2 * 2  # policies x sweep x runs
    assert list(rows[0]) == experiment.CSV_COLUMNS
    for row in rows:
        if int(row["U"]) == 0:
            assert row["outage"] == ""
            assert float(row["volte_kbps"]) == 0.0
        assert row["jain"] != ""  # K = 2 data users
        assert 0.0 <= float(row["infeasible"]) <= 1.0


def test_experiment_determinism():
    a = experiment.rows_to_csv(experiment.run_experiment(_tiny_cfg()))
    b = experiment.rows_to_csv(experiment.run_experiment(_tiny_cfg()))
    assert a == b


def test_paired_channels_across_policies():
    # Same (U, run) sees the same channel under every policy: with no voice
    # users the heuristic and baseline rows must be identical.
    rows = experiment.run_experiment(_tiny_cfg(volte_sweep=(0,)))
    by_policy = {}
    for r in rows:
        by_policy.setdefault(r["policy"], []).append((r["seed"], r["data_kbps"]))
    assert by_policy["heuristic"] == by_policy["baseline"]


def test_per_tti_fading_mode():
    rows = experiment.run_experiment(_tiny_cfg(per_tti_fading=True, runs=1))
    assert all(float(r["total_kbps"]) >= 0 for r in rows)


def test_emit_plotdata_families():
    master = experiment.rows_to_csv(experiment.run_experiment(_tiny_cfg(runs=2)))
    for family in experiment.PLOT_FAMILIES:
        out = experiment.emit_plotdata(master, family)
        lines = out.strip().splitlines()
        assert lines[0].startswith("policy,bandwidth_mhz,U")
        assert len(lines) == 1 + 2 * 2  # one row per (policy, U)
    with pytest.raises(ValueError):
        experiment.emit_plotdata(master, "nosuch_family")


def test_plotdata_mean_matches_hand_average():
    master = experiment.rows_to_csv(experiment.run_experiment(_tiny_cfg(runs=3)))
    rows = [r for r in master.splitlines()[1:] if r.startswith("heuristic,")]
    vals = [float(r.split(",")[7]) for r in rows if r.split(",")[3] == "2"]
    out = experiment.emit_plotdata(master, "throughput_vs_u")
    line = next(l for l in out.splitlines() if l.startswith("heuristic,") and ",2," in l)
    assert float(line.split(",")[4]) == pytest.approx(np.mean(vals), rel=1e-9)


# ---------------------------------------------------------------------------
# CLI


def _cli(argv):
    return cli.main(argv)


def test_cli_run_and_plotdata_roundtrip(tmp_path):
    out = tmp_path / "master.csv"
    rc = _cli(
        [
            "run",
            "--bandwidth", "1.4",
            "--num-data", "2",
            "--volte-sweep", "0,2",
            "--policy", "heuristic",
            "--runs", "2",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert rc == cli.EXIT_OK
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(experiment.CSV_COLUMNS)

    plot = tmp_path / "plot.csv"
    rc = _cli(["plotdata", str(out), "throughput_vs_u", "--out", str(plot)])
    assert rc == cli.EXIT_OK
    assert plot.read_text().startswith("policy,bandwidth_mhz,U,mean_volte_kbps")


def test_cli_run_determinism(tmp_path):
    args = [
        "run",
        "--bandwidth", "1.4",
        "--num-data", "2",
        "--volte-sweep", "2",
        "--policy", "heuristic_pf",
        "--runs", "2",
        "--seed", "11",
    ]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _cli(args + ["--out", str(a)]) == cli.EXIT_OK
    assert _cli(args + ["--out", str(b)]) == cli.EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_cli_config_error_exit_code(capsys):
    rc = _cli(["run", "--bandwidth", "5"])
    assert rc == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_cli_missing_config_file():
    assert _cli(["run", "--config", "/nonexistent.cfg"]) == cli.EXIT_CONFIG


def test_cli_size_cap_exit_code(capsys):
    rc = _cli(
        [
            "run",
            "--bandwidth", "10",
            "--num-data", "50",
            "--volte-sweep", "4",
            "--policy", "frame_optimal",
            "--runs", "1",
        ]
    )
    assert rc == cli.EXIT_SIZE_CAP
    assert "refused" in capsys.readouterr().err


def test_cli_plotdata_bad_family(tmp_path, capsys):
    master = tmp_path / "m.csv"
    master.write_text(",".join(experiment.CSV_COLUMNS) + "\n")
    assert _cli(["plotdata", str(master), "nope"]) == cli.EXIT_CONFIG


def test_cli_plotdata_missing_file():
    assert _cli(["plotdata", "/nonexistent.csv", "outage_vs_u"]) == cli.EXIT_CONFIG


def test_cli_ratemap_csv(tmp_path):
    out = tmp_path / "table.csv"
    assert _cli(["ratemap-csv", str(out)]) == cli.EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 17  # header + CQI 0..15
    assert lines[-1].split(",")[0] == "15"


def test_cli_run_stdout(capsys):
    rc = _cli(
        [
            "run",
            "--bandwidth", "1.4",
            "--num-data", "1",
            "--volte-sweep", "0",
            "--policy", "baseline",
            "--runs", "1",
        ]
    )
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("policy,")
