import csv
import io
import os
import subprocess
import sys

import pytest

from cfqkd.analytic import attack_stats, baseline_stats
from cfqkd.cli import RunSpec, main, run
from cfqkd.model import AttackParams, AttackScenario, ProtocolConfig


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    old = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = out, err
    try:
        code = main(list(argv))
    finally:
        sys.stdout, sys.stderr = old
    return code, out.getvalue(), err.getvalue()


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def default_cfg(tmp_path):
    path = tmp_path / "default.cfg"
    path.write_text("# reference setup\nmean_photon_number = 0.1\nreflectivity = 0.5\n")
    return str(path)


def test_vacuum_baseline(default_cfg):
    code, out, _ = _cli("baseline", "--config", default_cfg, "--set", "mean_photon_number=0", "--format", "csv")
    assert code == 0
    assert _rows(out) == [{"p_d0": "0.0", "p_d1": "0.0", "p_d2": "0.0", "p_d0_opp": "0.0"}]


def test_csv_round_trips_exactly():
    code, out, _ = _cli("baseline", "--format", "csv")
    assert code == 0
    row = _rows(out)[0]
    assert tuple(float(row[k]) for k in ("p_d0", "p_d1", "p_d2", "p_d0_opp")) == baseline_stats(ProtocolConfig()).as_tuple()

    code, out, _ = _cli("attack", "--x", "0.042", "--z", "0.668", "--format", "csv")
    row = _rows(out)[0]
    expected = attack_stats(ProtocolConfig(), AttackScenario.COMBINED_NODISC, AttackParams(x=0.042, y=1.0, z=0.668))
    assert float(row["p_d0_opp"]) == expected.p_d0_opp
    assert list(row) == [
        "p_d0", "p_d1", "p_d2", "p_d0_opp", "r_d0", "r_d1", "r_d2", "r_d0_opp", "x", "y", "z", "z0", "max_deviation",
    ]
    assert float(row["r_d0"]) == pytest.approx(1.01383, abs=5e-6)


def test_per_key_flags_equal_set():
    assert _cli("baseline", "--reflectivity", "0.4") == _cli("baseline", "--set", "reflectivity=0.4")


def test_simulate_is_deterministic():
    argv = ("simulate", "--scenario", "combined-nodisc", "--pulses", "1000000", "--seed", "7", "--x", "0.042", "--z", "0.668")
    first, second = _cli(*argv), _cli(*argv)
    assert first[0] == 0
    assert first[1] == second[1]
    assert "eve key recovery 1" in first[1]


def test_simulate_csv_and_records(tmp_path):
    records = tmp_path / "pulses.csv"
    code, out, _ = _cli(
        "simulate", "--pulses", "5000", "--seed", "1", "--format", "csv", "--records", str(records),
        "--source", "single-photon", "--channel-transmission", "1", "--eve-channel-transmission", "1",
    )
    assert code == 0
    row = _rows(out)[0]
    assert row["scenario"] == "baseline" and row["source"] == "single-photon"
    lines = records.read_text().splitlines()
    assert lines[0].startswith("alice_pol,bob_pol,eve_action")
    assert len(lines) == 5001


def test_simulate_requires_seed_and_pulses():
    assert _cli("simulate", "--pulses", "10")[0] == 1
    assert _cli("simulate", "--seed", "1")[0] == 1
    assert run(RunSpec("simulate"))[0] == 1


def test_tables_markdown_layout():
    code, out, _ = _cli("tables", "I", "--format", "markdown")
    assert code == 0
    assert out.count("### ") == 4
    assert "| r_d0 | 1.01383 | 1.02152 | 1.03706 |" in out
    assert "| z0 | 0.02005 | 0.01672 | 0.01116 |" in out
    blocks = out.split("### ")[1:]
    first_rows = [line.split("|")[1].strip() for line in blocks[0].splitlines() if line.startswith("| ")][1:]
    assert first_rows == ["r_d0", "r_d1", "r_d2", "r_d0_opp", "x", "y", "z"]
    assert _cli("tables", "I") == (code, out, "")


def test_tables_csv_parses():
    code, out, _ = _cli("tables", "II", "--format", "csv")
    rows = _rows(out)
    assert code == 0 and len(rows) == 12
    assert rows[2]["column"] == "sigma=0.1, sigma'=0.1, eta_E=0.9"
    assert float(rows[2]["y"]) == pytest.approx(0.95236, abs=1e-5)


def test_loss_equiv():
    code, out, _ = _cli("loss-equiv", "--deviation", "0.015", "--format", "csv")
    assert code == 0
    assert float(_rows(out)[0]["fluctuation_db"]) == pytest.approx(0.069, abs=0.005)
    assert _cli("loss-equiv", "--deviation", "0.99")[0] == 1


def test_optimize_infers_discrimination():
    code, out, _ = _cli("optimize", "--scenario", "combined-d0d2", "--format", "csv")
    assert code == 0
    assert float(_rows(out)[0]["z0"]) == pytest.approx(0.02005, abs=5e-6)


@pytest.mark.parametrize(
    "argv",
    [
        ("baseline", "--set", "gain=2"),
        ("baseline", "--set", "reflectivity=1.3"),
        ("baseline", "--config", "/no/such/file.cfg"),
        ("attack", "--scenario", "combined-d1d2", "--discrimination", "all"),
        ("attack", "--x", "1.5"),
        ("frobnicate",),
        ("tables", "III"),
    ],
)
def test_validation_errors_exit_1(argv):
    code, out, err = _cli(*argv)
    assert code == 1 and out == "" and err


def test_error_names_field():
    code, _, err = _cli("baseline", "--set", "reflectivity=1.3")
    assert "reflectivity" in err


def test_degenerate_baseline_exits_2():
    code, _, err = _cli("attack", "--set", "mean_photon_number=0", "--x", "0.1")
    assert code == 2 and "zero" in err


def test_blind_reduce_needs_halvable_loss_exit_1():
    code, _, err = _cli("simulate", "--scenario", "blind-reduce-losses", "--channel-transmission", "0.6",
                        "--eve-channel-transmission", "0.72", "--pulses", "10", "--seed", "0")
    assert code == 1 and "channel transmission" in err


def test_module_entry_and_numpy_fallback():
    env = dict(os.environ, CFQKD_DISABLE_NUMBA="1")
    argv = [sys.executable, "-m", "cfqkd", "simulate", "--scenario", "combined-fulldisc", "--x", "0.039",
            "--pulses", "100000", "--seed", "3", "--format", "csv"]
    slow = subprocess.run(argv, env=env, capture_output=True, text=True, check=True)
    fast = subprocess.run(argv, capture_output=True, text=True, check=True)
    assert slow.stdout == fast.stdout
    probe = subprocess.run(
        [sys.executable, "-c", "from cfqkd import _jit; print(_jit.backend_name())"], env=env, capture_output=True, text=True
    )
    assert probe.stdout.strip() == "numpy"
