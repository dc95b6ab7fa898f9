import pytest

from vzor.cli import main
from vzor.scenario import ScenarioConfig, canonical_text, parse_config

SMALL = "seed = 7\nepochs = 10\n"
FRAUD = SMALL + "adversary_behavior = wrong_median_packet\nfraud_period = 5\n"


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.fixture()
def run_dir(tmp_path):
    config = _write(tmp_path, "scenario.txt", FRAUD)
    out = tmp_path / "out"
    assert main(["run", "--config", config, "--out", str(out)]) == 0
    return out


def test_run_writes_outputs(run_dir, capsys):
    for name in ("config.txt", "trace.txt", "epochs.csv", "metrics.txt"):
        assert (run_dir / name).exists(), name
    config = parse_config((run_dir / "config.txt").read_text())
    assert config.epochs == 10
    csv_lines = (run_dir / "epochs.csv").read_text().rstrip("\n").split("\n")
    assert len(csv_lines) == 11
    assert "slash_count = 2" in (run_dir / "metrics.txt").read_text()


def test_run_defaults_without_config(tmp_path, capsys):
    out = tmp_path / "out"
    # no --config runs the default scenario; trim it with a seeded override
    config = _write(tmp_path, "tiny.txt", "epochs = 3\n")
    assert main(["run", "--config", config, "--out", str(out), "--seed", "5"]) == 0
    echoed = parse_config((out / "config.txt").read_text())
    assert echoed.seed == 5
    assert "ran 3 epochs" in capsys.readouterr().out


def test_run_is_deterministic(tmp_path):
    config = _write(tmp_path, "scenario.txt", SMALL)
    assert main(["run", "--config", config, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", config, "--out", str(tmp_path / "b")]) == 0
    for name in ("trace.txt", "epochs.csv", "config.txt", "metrics.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_exit_2_on_config_errors(tmp_path, capsys):
    out = str(tmp_path / "out")
    bad = _write(tmp_path, "bad.txt", "no_such_key = 1\n")
    assert main(["run", "--config", bad, "--out", out]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.txt"), "--out", out]) == 2
    assert "config error" in capsys.readouterr().err


def test_run_exit_3_on_invalid_scenario(tmp_path, capsys):
    out = str(tmp_path / "out")
    invalid = _write(tmp_path, "invalid.txt", "quorum = 20\n")  # above committee size
    assert main(["run", "--config", invalid, "--out", out]) == 3
    assert "invalid scenario" in capsys.readouterr().err


def test_verify_trace_accepts_run_output(run_dir, capsys):
    assert main(["verify-trace", str(run_dir / "trace.txt")]) == 0
    assert "trace verified" in capsys.readouterr().out


def test_verify_trace_exit_4_on_tampering(run_dir, tmp_path, capsys):
    text = (run_dir / "trace.txt").read_text()
    tampered = _write(tmp_path, "tampered.txt", text.replace("accepted=1", "accepted=0", 1))
    assert main(["verify-trace", tampered]) == 4
    assert "epoch 0" in capsys.readouterr().err


def test_verify_trace_exit_2_on_corruption(run_dir, tmp_path, capsys):
    text = (run_dir / "trace.txt").read_text()
    corrupt = _write(tmp_path, "corrupt.txt", text.replace("vzor-trace v1", "vzor-trace v9", 1))
    assert main(["verify-trace", corrupt]) == 2
    assert main(["verify-trace", str(tmp_path / "absent.txt")]) == 2
    assert "corrupt trace" in capsys.readouterr().err


def test_sweep_writes_table_and_subruns(tmp_path, capsys):
    # quorum must stay below every swept committee size
    config = _write(tmp_path, "scenario.txt", SMALL + "quorum = 5\n")
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", config, "--param", "n", "--values", "5,10,15",
                 "--out", str(out)]) == 0
    table = (out / "sweep.csv").read_text().rstrip("\n").split("\n")
    assert table[0] == (
        "param,value,epochs,accepted_epochs,throughput_pps,mean_e2e_s,stdev_e2e_s,"
        "slash_count,mean_slash_latency_s,liveness_violations,gas_sepolia,gas_scroll"
    )
    assert len(table) == 4
    for value in (5, 10, 15):
        assert (out / f"n_{value}" / "trace.txt").exists()
    # constant verify gas: per-chain totals match across committee sizes
    gas_cells = [row.split(",")[-2:] for row in table[1:]]
    assert gas_cells[0] == gas_cells[1] == gas_cells[2]


def test_sweep_quorum_requires_config_floor(tmp_path):
    # sweeping f_min within the committee bound works off the default config
    out = tmp_path / "sweep"
    config = _write(tmp_path, "scenario.txt", SMALL)
    assert main(["sweep", "--config", config, "--param", "f_min", "--values", "10,15",
                 "--out", str(out)]) == 0
    assert main(["sweep", "--config", config, "--param", "f_min", "--values", "16",
                 "--out", str(out)]) == 3


def test_sweep_delta_net_keeps_bounds_ordered(tmp_path):
    config = _write(tmp_path, "scenario.txt", SMALL)
    out = tmp_path / "sweep"
    # a sweep value below the configured minimum must not invert the window
    assert main(["sweep", "--config", config, "--param", "delta_net",
                 "--values", "0.05,1.0", "--out", str(out)]) == 0
    echoed = parse_config((out / "delta_net_0.05" / "config.txt").read_text())
    assert echoed.delta_net_min_s <= echoed.delta_net_max_s == 0.05


def test_sweep_exit_3_on_unknown_parameter(tmp_path, capsys):
    assert main(["sweep", "--param", "kappa", "--values", "1", "--out", str(tmp_path)]) == 3
    assert "unknown sweep parameter" in capsys.readouterr().err
    assert main(["sweep", "--param", "n", "--values", " , ", "--out", str(tmp_path)]) == 3
    assert main(["sweep", "--param", "n", "--values", "abc", "--out", str(tmp_path)]) == 3


def test_print_config_round_trips(capsys):
    assert main(["print-config"]) == 0
    printed = capsys.readouterr().out
    assert printed == canonical_text(ScenarioConfig())
    assert parse_config(printed) == ScenarioConfig()
