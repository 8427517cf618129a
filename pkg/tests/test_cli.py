import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from causalview import scenario_file
from causalview.cli import main
from causalview.matcore import frob_dist
from causalview.multiparty import joint_tri_causal
from causalview.randgen import RngSpec, random_causal_scenario, random_tripartite_scenario
from causalview.scenario import joint_causal, joint_spacelike, polarizer_scenario, to_spacelike
from causalview.scenario_file import ScenarioFileError

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name):
    return str(FIXTURES / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_machine(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "machine")
    return code, json.loads(out)


def test_table_polarizer_both_views(capsys):
    code, doc = run_machine(capsys, "table", fixture("polarizer_causal.json"), "--view", "both")
    assert code == 0
    for view in ("causal", "spacelike"):
        t = doc[view]
        r, c = t["row_labels"].index("a_r"), t["col_labels"].index("b_t")
        assert t["table"][r][c] == pytest.approx(0.5, abs=1e-12)
    assert doc["max_gap"] < 1e-12


def test_table_human_output(capsys):
    code, out, _ = run(capsys, "table", fixture("polarizer_causal.json"), "--view", "both")
    assert code == 0
    assert "[causal view]" in out and "[spacelike view]" in out
    assert "a_r" in out and "b_t" in out and "p(B)" in out
    assert "max gap between views" in out


def test_table_bell_spacelike(capsys):
    code, doc = run_machine(capsys, "table", fixture("bell_spacelike.json"))
    assert code == 0
    assert np.allclose(doc["spacelike"]["table"], [[0.5, 0.0], [0.0, 0.5]], atol=1e-15)


def test_table_tripartite(capsys):
    code, doc = run_machine(capsys, "table", fixture("tripartite_depolarizing.json"), "--view", "both")
    assert code == 0
    # rho_C = diag(0.8, 0.2) sent through full depolarization: p = p(c) / 4
    expected = np.empty((2, 2, 2))
    expected[:, :, 0], expected[:, :, 1] = 0.2, 0.05
    assert np.allclose(doc["causal"]["table"], expected, atol=1e-14)
    assert doc["max_gap"] < 1e-12


def test_table_rejects_bad_povm(capsys):
    code, _, err = run(capsys, "table", fixture("bad_povm.json"))
    assert code == 2
    assert "povm_b" in err


def test_pure_marginal_causal_view_fails(capsys):
    code, _, err = run(capsys, "table", fixture("pure_marginal_spacelike.json"), "--view", "causal")
    assert code == 1
    assert "full rank" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "table", str(tmp_path / "nope.json"))
    assert code == 2
    assert "cannot read" in err


def test_unparseable_file_reports_line(capsys, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{\n "kind": "causal",\n "dims": {"a": 2\n}')
    code, _, err = run(capsys, "table", str(p))
    assert code == 2
    assert "line" in err


def test_convert_bell_generator(capsys, tmp_path):
    out = tmp_path / "bell_sl.json"
    code, _, _ = run(capsys, "convert", fixture("bell_causal.json"), "--direction", "to-spacelike", "-o", str(out))
    assert code == 0
    s = scenario_file.read_scenario(out)
    phi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    assert frob_dist(s.tau.mat, np.outer(phi, phi)) < 1e-12


def test_convert_round_trip(capsys, tmp_path):
    src = tmp_path / "random.json"
    original = random_causal_scenario(3, 2, RngSpec(21))
    scenario_file.write_scenario(original, src)
    mid, back = tmp_path / "mid.json", tmp_path / "back.json"
    assert main(["convert", str(src), "--direction", "to-spacelike", "-o", str(mid)]) == 0
    assert main(["convert", str(mid), "--direction", "to-causal", "-o", str(back)]) == 0
    capsys.readouterr()
    restored = scenario_file.read_scenario(back)
    assert joint_causal(restored).max_gap(joint_causal(original)) < 1e-9


def test_convert_pure_marginal_exits_1(capsys, tmp_path):
    code, _, err = run(
        capsys, "convert", fixture("pure_marginal_spacelike.json"),
        "--direction", "to-causal", "-o", str(tmp_path / "x.json"),
    )
    assert code == 1
    assert "full rank" in err
    assert not (tmp_path / "x.json").exists()


def test_convert_kind_mismatch(capsys, tmp_path):
    code, _, _ = run(
        capsys, "convert", fixture("bell_spacelike.json"),
        "--direction", "to-spacelike", "-o", str(tmp_path / "x.json"),
    )
    assert code == 2


@pytest.mark.parametrize("name", ["polarizer_causal.json", "bell_causal.json", "tripartite_depolarizing.json"])
def test_verify_passes(capsys, name):
    code, doc = run_machine(capsys, "verify", fixture(name))
    assert code == 0
    assert doc["passed"]
    assert doc["equivalence_gap"] < 1e-9


def test_verify_rejects_non_cptp(capsys):
    code, _, err = run(capsys, "verify", fixture("non_cptp.json"))
    assert code == 2
    assert "kraus" in err


def test_verify_needs_causal_file(capsys):
    assert run(capsys, "verify", fixture("bell_spacelike.json"))[0] == 2


def test_verify_negative_tolerance_fails(capsys):
    # nothing beats a negative tolerance, so this exercises the exit-1 path
    code, doc = run_machine(capsys, "verify", fixture("bell_causal.json"), "--tol", "-1")
    assert code == 1
    assert not doc["passed"]


def test_nosignal_bell(capsys):
    code, doc = run_machine(capsys, "nosignal", fixture("bell_spacelike.json"))
    assert code == 0
    assert doc["passed"]
    assert doc["direction_a_to_b"] < 1e-12


def test_nosignal_product(capsys):
    code, doc = run_machine(capsys, "nosignal", fixture("product_spacelike.json"), "--extra-povms", "3")
    assert code == 0
    assert doc["direction_a_to_b"] < 1e-14
    assert doc["direction_b_to_a"] < 1e-14


def test_nosignal_kind_mismatch(capsys):
    code, _, err = run(capsys, "nosignal", fixture("bell_causal.json"))
    assert code == 2
    assert "spacelike" in err


def test_nosignal_needs_alternatives(capsys):
    assert run(capsys, "nosignal", fixture("bell_spacelike.json"), "--extra-povms", "0")[0] == 2


def test_demo_polarizer(capsys):
    code, doc = run_machine(capsys, "demo", "polarizer", "--alpha", "0", "--beta", str(math.pi / 4))
    assert code == 0
    for key in ("p_ar_bt_causal", "p_ar_bt_spacelike", "p_ar_bt_analytic"):
        assert doc[key] == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("p", ["1", "0", "1.5"])
def test_demo_polarizer_rejects_pure_preparation(capsys, p):
    assert run(capsys, "demo", "polarizer", "--p", p)[0] == 2


def test_suite_small(capsys):
    code, doc = run_machine(capsys, "suite", "--trials", "20", "--dims", "2,3", "--seed", "3")
    assert code == 0
    assert doc["max_equivalence_gap"] < 1e-9


def test_suite_tripartite(capsys):
    code, doc = run_machine(capsys, "suite", "--trials", "10", "--dims", "2", "--tripartite")
    assert code == 0


@pytest.mark.parametrize("argv", [["suite", "--dims", "1,2"], ["suite", "--dims", "x"], ["frobnicate"], []])
def test_bad_arguments_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    capsys.readouterr()


def test_suite_rejects_zero_trials(capsys):
    assert run(capsys, "suite", "--trials", "0")[0] == 2


def test_entry_point_subprocess(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "causalview", "verify", fixture("bell_causal.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
    proc = subprocess.run(
        [sys.executable, "-m", "causalview", "verify", fixture("non_cptp.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2


# --- file format ---------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_file_round_trip_preserves_distributions(tmp_path, seed):
    s = random_causal_scenario(3, 4, RngSpec(seed))
    p = tmp_path / "s.json"
    scenario_file.write_scenario(s, p)
    back = scenario_file.read_scenario(p)
    assert joint_causal(back).max_gap(joint_causal(s)) < 1e-12
    assert np.array_equal(back.rho.mat, s.rho.mat)


def test_file_round_trip_spacelike_and_tripartite():
    sl = to_spacelike(random_causal_scenario(2, 3, RngSpec(1)))
    back = scenario_file.loads(scenario_file.dumps(sl))
    assert joint_spacelike(back).max_gap(joint_spacelike(sl)) < 1e-12
    tri = random_tripartite_scenario(2, 2, 3, RngSpec(2))
    back = scenario_file.loads(scenario_file.dumps(tri))
    assert joint_tri_causal(back).max_gap(joint_tri_causal(tri)) < 1e-12


def test_labels_survive_round_trip():
    s = polarizer_scenario(0.3, 1.1)
    back = scenario_file.loads(scenario_file.dumps(s))
    assert back.povm_a.labels == ("a_r", "a_t")
    assert back.povm_b.labels == ("b_r", "b_t")


def test_errors_name_the_field():
    doc = scenario_file.scenario_to_dict(polarizer_scenario(0.0, 0.5))
    doc["povm_a"]["effects"][1][0][1] = [0.1]
    with pytest.raises(ScenarioFileError) as exc:
        scenario_file.scenario_from_dict(doc)
    assert exc.value.field == "povm_a.effects[1][0][1]"

    doc = scenario_file.scenario_to_dict(polarizer_scenario(0.0, 0.5))
    del doc["kraus"]
    with pytest.raises(ScenarioFileError, match="kraus"):
        scenario_file.scenario_from_dict(doc)

    doc["kind"] = "timelike"
    with pytest.raises(ScenarioFileError, match="kind"):
        scenario_file.scenario_from_dict(doc)
