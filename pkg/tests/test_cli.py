import json
import math
import re

import pytest

import rspsim.basis
from rspsim import BellLabel, PAULI_X
from rspsim.cli import canonical_json, main

PI = repr(math.pi)
PI_2 = repr(math.pi / 2)
PI_3 = repr(math.pi / 3)
PI_5 = repr(math.pi / 5)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_rsp_json_passes_and_roundtrips(capsys):
    code, out, _ = run_cli(
        capsys, "rsp", "--theta", PI_2, "--phi", "0.7853982",
        "--family", "equatorial", "--bell", "psi-minus",
        "--trials", "1000", "--seed", "7", "--format", "json",
    )
    assert code == 0
    text = out.strip()
    record = json.loads(text)
    assert record["schema_version"] == "1"
    assert record["verdict"] == "pass"
    assert record["results"]["exact_delivery_rate"] == 1.0
    assert record["results"]["cbits_per_run"] == 1.0
    # Byte-identical re-emission: canonical key order, fixed float format.
    assert canonical_json(record) == text


def test_json_floats_have_17_significant_digits(capsys):
    _, out, _ = run_cli(capsys, "rsp", "--theta", "1.0", "--phi", "0.5",
                        "--trials", "50", "--seed", "1")
    assert re.search(r"\d\.\d{17}e[+-]\d{2}", out)


def test_rsp_polar_analytic_both_branches(capsys):
    code, out, _ = run_cli(capsys, "rsp", "--theta", "0", "--phi", "0",
                           "--family", "polar", "--bell", "psi-minus", "--analytic")
    assert code == 0
    record = json.loads(out)
    assert record["config"]["seed"] is None
    branches = record["results"]["detail"]
    assert len(branches) == 2
    assert all(b["fidelity_to_target"] > 1 - 1e-9 for b in branches)


def test_analytic_output_identical_across_seeds(capsys):
    args = ["rsp", "--theta", "1.2", "--phi", "0", "--family", "polar", "--analytic"]
    _, out1, _ = run_cli(capsys, *args, "--seed", "1")
    _, out2, _ = run_cli(capsys, *args, "--seed", "424242")
    assert out1 == out2


def test_measure_sim_analytic_identical_across_seeds(capsys):
    args = ["measure-sim", "--theta", PI_3, "--phi", "0.3",
            "--bx", "0", "--by", "0", "--bz", "1", "--analytic"]
    _, out1, _ = run_cli(capsys, *args, "--seed", "5")
    _, out2, _ = run_cli(capsys, *args, "--seed", "50")
    assert out1 == out2


def test_family_violation_exits_1_with_diagnostic(capsys):
    code, _, err = run_cli(capsys, "rsp", "--theta", "1.0", "--phi", "1.0",
                           "--family", "polar", "--trials", "10", "--seed", "1")
    assert code == 1
    assert "polar" in err


def test_missing_flag_exits_1(capsys):
    code, _, err = run_cli(capsys, "rsp", "--phi", "0.0")
    assert code == 1
    assert "error:" in err


def test_no_command_exits_1(capsys):
    code, _, err = run_cli(capsys)
    assert code == 1
    assert "command" in err


def test_nan_angle_exits_1(capsys):
    code, _, err = run_cli(capsys, "rsp", "--theta", "nan", "--phi", "0",
                           "--trials", "10")
    assert code == 1
    assert "finite" in err


def test_measure_sim_trivial_direction(capsys):
    code, out, _ = run_cli(capsys, "measure-sim", "--theta", "0", "--phi", "0",
                           "--bx", "0", "--by", "0", "--bz", "1",
                           "--trials", "500", "--seed", "2")
    assert code == 0
    record = json.loads(out)
    assert record["results"]["p_plus_empirical"] == 1.0


def test_measure_sim_frozen_statistics(capsys):
    code, out, _ = run_cli(capsys, "measure-sim", "--theta", PI_3, "--phi", "0",
                           "--bx", "0", "--by", "0", "--bz", "1",
                           "--trials", "100000", "--seed", "11")
    assert code == 0
    record = json.loads(out)
    assert record["results"]["p_plus_analytic"] == pytest.approx(0.75, abs=1e-12)
    # 3*sqrt(0.75*0.25/1e5)
    assert abs(record["results"]["p_plus_empirical"] - 0.75) < 0.004107919181288746


def test_measure_sim_rejects_non_unit_direction(capsys):
    code, _, err = run_cli(capsys, "measure-sim", "--theta", "0", "--phi", "0",
                           "--bx", "0", "--by", "0", "--bz", "2", "--trials", "10")
    assert code == 1
    assert "unit vector" in err


def test_measure_sim_normalizes_near_unit_direction(capsys):
    code, out, _ = run_cli(capsys, "measure-sim", "--theta", "0", "--phi", "0",
                           "--bx", "0", "--by", "0", "--bz", "1.0000001",
                           "--trials", "50", "--seed", "3")
    assert code == 0
    assert json.loads(out)["config"]["b"]["bz"] == 1.0


def test_measure_sim_csv_schema(capsys):
    code, out, _ = run_cli(capsys, "measure-sim", "--theta", "1.0", "--phi", "0.5",
                           "--bx", "1", "--by", "0", "--bz", "0",
                           "--trials", "200", "--seed", "4", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ("theta,phi,bell,trials,seed,bx,by,bz,"
                        "p_plus_empirical,p_plus_analytic,three_sigma,verdict")
    assert len(lines) == 2


def test_rsp_csv_schema(capsys):
    code, out, _ = run_cli(capsys, "rsp", "--theta", "1.0", "--phi", "0.0",
                           "--family", "polar", "--trials", "100", "--seed", "6",
                           "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ("theta,phi,family,bell,trials,seed,"
                        "exact_delivery_rate,mean_fidelity,cbits_per_run,verdict")
    assert lines[1].endswith("pass")


def test_teleport_costs_two_cbits(capsys):
    code, out, _ = run_cli(capsys, "teleport", "--theta", PI_3, "--phi", PI_5,
                           "--trials", "300", "--seed", "2")
    assert code == 0
    record = json.loads(out)
    assert record["results"]["cbits_per_run"] == 2.0
    assert record["results"]["exact_delivery_rate"] == 1.0


def test_teleport_analytic(capsys):
    code, out, _ = run_cli(capsys, "teleport", "--theta", PI_3, "--phi", PI_5,
                           "--analytic")
    assert code == 0
    record = json.loads(out)
    assert record["results"]["mean_fidelity"] == pytest.approx(1.0, abs=1e-12)
    assert len(record["results"]["detail"]) == 4


def test_failing_verdict_exits_2(capsys):
    code, out, _ = run_cli(capsys, "rsp", "--theta", PI_3, "--phi", PI_5,
                           "--family", "arbitrary", "--trials", "16",
                           "--seed", "369")
    assert code == 2
    assert json.loads(out)["verdict"] == "fail"


def test_bell_check_passes(capsys):
    code, out, _ = run_cli(capsys, "bell-check", "--samples", "100", "--seed", "5")
    assert code == 0
    assert "pass" in out
    dev = float(re.search(r"states: ([0-9.e-]+)", out).group(1))
    assert dev < 1e-12


def test_bell_check_single_sample(capsys):
    code, out, _ = run_cli(capsys, "bell-check", "--samples", "1", "--seed", "0")
    assert code == 0


def test_bell_check_detects_corrupted_build(capsys, monkeypatch):
    monkeypatch.setitem(rspsim.basis.BELL_ROTATIONS, BellLabel.PSI_PLUS, PAULI_X)
    code, out, _ = run_cli(capsys, "bell-check", "--samples", "10", "--seed", "0")
    assert code == 2
    assert "FAIL" in out


def test_sweep_equatorial_all_certain(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--mode", "rsp",
                           "--family", "equatorial", "--grid-theta", "1",
                           "--grid-phi", "36", "--trials", "100", "--seed", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 37  # header + 36 cells
    for line in lines[1:]:
        fields = line.split(",")
        assert fields[6] == "1.0"
        assert fields[9] == "pass"


def test_sweep_arbitrary_rates_cluster_near_half(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--mode", "rsp",
                           "--family", "arbitrary", "--grid-theta", "4",
                           "--grid-phi", "4", "--trials", "1000", "--seed", "0")
    assert code == 0
    lines = out.strip().splitlines()[1:]
    assert len(lines) == 16
    rates = [float(line.split(",")[6]) for line in lines]
    bound = 3 * math.sqrt(0.25 / 1000)
    assert all(abs(r - 0.5) < bound for r in rates)


def test_sweep_rejects_incompatible_grid(capsys):
    code, _, err = run_cli(capsys, "sweep", "--family", "equatorial",
                           "--grid-theta", "3", "--grid-phi", "4")
    assert code == 1
    assert "equatorial" in err


def test_sweep_json_format(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--mode", "teleport",
                           "--grid-theta", "2", "--grid-phi", "2",
                           "--trials", "50", "--seed", "1", "--format", "json")
    assert code == 0
    record = json.loads(out)
    assert len(record["rows"]) == 4
    assert all(row["cbits_per_run"] == 2.0 for row in record["rows"])
    assert canonical_json(record) == out.strip()


def test_out_flag_writes_identical_bytes(capsys, tmp_path):
    path = tmp_path / "record.json"
    code, out, _ = run_cli(capsys, "rsp", "--theta", "0.5", "--phi", "0",
                           "--family", "polar", "--trials", "100",
                           "--seed", "5", "--out", str(path))
    assert code == 0
    assert path.read_text() == out


def test_serial_and_parallel_outputs_are_byte_identical(capsys):
    args = ["rsp", "--theta", "1.0", "--phi", "0.7", "--family", "arbitrary",
            "--trials", "5000", "--seed", "101"]
    _, serial, _ = run_cli(capsys, *args, "--workers", "1")
    _, parallel, _ = run_cli(capsys, *args, "--workers", "4")
    assert serial == parallel


def test_quote_check_prints_correction_table(capsys):
    code, out, _ = run_cli(capsys, "--quote-check")
    assert code == 0
    assert "iY" in out
    assert "rejected candidate" in out


def test_canonical_json_rejects_non_finite():
    with pytest.raises(ValueError):
        canonical_json({"x": float("inf")})
