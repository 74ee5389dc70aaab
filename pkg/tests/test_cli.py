import json

import numpy as np
import pytest

from pncsim import generic_scenario, save_scenario
from pncsim.cli import main


def run_cli(*args):
    return main(list(args))


def test_simulate_writes_trace_and_summary(tmp_path):
    out = tmp_path / "t.csv"
    summary = tmp_path / "s.json"
    code = run_cli("simulate", "--scenario", "builtin:generic", "--policy", "mw",
                   "--slots", "100", "--seed", "7",
                   "--out", str(out), "--summary", str(summary))
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 101
    header = lines[0].split(",")
    n, m = 2, 3
    assert len(header) == 1 + 1 + n + m + m + n
    assert header == ["t", "sigma", "q_1", "q_2", "u_1", "u_2", "u_3",
                      "s_1", "s_2", "s_3", "a_1", "a_2"]
    rows = np.array([line.split(",") for line in lines[1:]], dtype=np.int64)
    assert rows[0, 0] == 0 and rows[-1, 0] == 99
    # default arrivals overload MaxWeight, so buffer 1 builds up
    assert rows[-1, 2] > 20
    doc = json.loads(summary.read_text())
    assert set(doc) == {"avg_queue", "final_queue", "slope", "stable"}
    assert doc["slope"] is None  # too short to classify


def test_simulate_byte_identical_reruns(tmp_path):
    args = ("simulate", "--scenario", "builtin:natural", "--policy", "qpnc",
            "--horizon", "2", "--tau-hard", "1", "--slots", "300", "--seed", "3")
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(*args, "--out", str(out1), "--summary", str(tmp_path / "a.json")) == 0
    assert run_cli(*args, "--out", str(out2), "--summary", str(tmp_path / "b.json")) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_simulate_qpnc_h1_matches_mw_on_generic(tmp_path):
    a = tmp_path / "mw.csv"
    b = tmp_path / "q1.csv"
    assert run_cli("simulate", "--scenario", "builtin:generic", "--policy", "mw",
                   "--slots", "400", "--seed", "5", "--out", str(a)) == 0
    assert run_cli("simulate", "--scenario", "builtin:generic", "--policy", "qpnc",
                   "--horizon", "1", "--slots", "400", "--seed", "5", "--out", str(b)) == 0
    qa = [line.split(",")[2:4] for line in a.read_text().splitlines()[1:]]
    qb = [line.split(",")[2:4] for line in b.read_text().splitlines()[1:]]
    assert qa == qb


def test_simulate_missing_scenario_no_output(tmp_path):
    out = tmp_path / "never.csv"
    code = run_cli("simulate", "--scenario", str(tmp_path / "absent.json"),
                   "--policy", "mw", "--slots", "50", "--out", str(out))
    assert code == 2
    assert not out.exists()


def test_simulate_rate_override(tmp_path):
    summary = tmp_path / "s.json"
    code = run_cli("simulate", "--scenario", "builtin:generic", "--policy", "qpnc",
                   "--horizon", "2", "--a1", "1.0", "--slots", "400", "--seed", "1",
                   "--summary", str(summary))
    assert code == 0
    doc = json.loads(summary.read_text())
    assert doc["stable"] is True


def test_bad_flags_exit_2():
    assert run_cli("simulate", "--scenario", "builtin:generic",
                   "--policy", "bogus", "--slots", "10") == 2
    assert run_cli("simulate", "--scenario", "builtin:generic", "--policy", "qpnc",
                   "--horizon", "2", "--tau-hard", "5", "--slots", "10") == 2
    assert run_cli("simulate", "--scenario", "builtin:generic", "--policy", "mw",
                   "--alternating", "--slots", "10") == 2


def test_sweep_output_format(tmp_path):
    out = tmp_path / "region.csv"
    code = run_cli("sweep", "--scenario", "builtin:generic", "--policy", "mw",
                   "--a1", "1.5:2.5:0.5", "--a2", "0:0:1",
                   "--slots", "2000", "--seeds", "2", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "a1,a2,stable_fraction,stable"
    assert len(lines) == 4
    values = [line.split(",") for line in lines[1:]]
    assert [v[0] for v in values] == ["1.5", "2.0", "2.5"]
    assert values[0][3] == "1"  # rate 1.5 is well inside the region


def test_sweep_empty_grid(tmp_path):
    code = run_cli("sweep", "--scenario", "builtin:generic", "--policy", "mw",
                   "--a1", "2:1:0.5", "--a2", "0:0:1",
                   "--slots", "500", "--seeds", "1", "--out", str(tmp_path / "x.csv"))
    assert code == 2
    assert not (tmp_path / "x.csv").exists()


def test_compare_duplicate_policy_rows(tmp_path):
    out = tmp_path / "cmp.csv"
    code = run_cli("compare", "--scenario", "builtin:natural",
                   "--policies", "qpnc:2,qpnc:2", "--tau-hard", "1",
                   "--slots", "400", "--seeds", "2", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "policy,horizon,buffer,avg_queue"
    body = lines[1:]
    assert body[:3] == body[3:]


def test_compare_policy_spec_parsing(tmp_path):
    code = run_cli("compare", "--scenario", "builtin:natural",
                   "--policies", "mw,quux:2", "--slots", "300", "--seeds", "1",
                   "--out", str(tmp_path / "cmp.csv"))
    assert code == 2


def test_file_scenario_end_to_end(tmp_path):
    sc = generic_scenario(rate1=1.2)
    path = tmp_path / "custom.json"
    save_scenario(sc, path)
    summary = tmp_path / "s.json"
    code = run_cli("simulate", "--scenario", str(path), "--policy", "lpnc",
                   "--horizon", "2", "--all-hard", "--slots", "500", "--seed", "2",
                   "--summary", str(summary))
    assert code == 0
    doc = json.loads(summary.read_text())
    assert doc["stable"] is True
