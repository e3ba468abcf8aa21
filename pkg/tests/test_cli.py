import json
import subprocess
import sys

import pytest

from igs.cli import main, read_graph_file
from igs.graph import ColoredDigraph, RuleGraph
from igs.spectral import deterministic_dimension
from igs.system import make_system, system_to_dict, write_system_file


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_theory_lines(capsys):
    code, out, _ = run(capsys, "theory", "pentagon_decagon")
    assert code == 0
    assert "dimension = log 7.65331 / log 3.37228 = 1.6742" in out
    assert "[(0,2), (4,1)]" in out.split("rho_min")[1]
    _, out, _ = run(capsys, "theory", "comb")
    assert "log 5 / log 3 = 1.4650" in out


def test_theory_json(capsys, tmp_path):
    p = tmp_path / "r.json"
    assert run(capsys, "theory", "pentagon_decagon", "--json", str(p))[0] == 0
    rep = json.loads(p.read_text())
    assert rep["command"] == "theory" and rep["theoretical"]["method"] == "spectral"
    assert rep["theoretical"]["value"] == pytest.approx(1.6742, abs=1e-3)
    assert rep["theoretical"]["D_min"] == [[[0, 2], [4, 1]]]
    assert len(rep["system_id"]) == 64 and rep["tool_version"] and rep["created"]


def test_theory_on_random_system_is_a_validation_error(capsys):
    assert run(capsys, "theory", "random_two_color")[0] == 2


def test_missing_file(capsys):
    code, _, err = run(capsys, "theory", "no/such/file.json")
    assert code == 2 and "error" in err


def test_non_primitive_toy_spec(capsys, tmp_path):
    r1 = RuleGraph(ColoredDigraph.from_arcs([(0, 2, 2), (2, 1, 2)], 2), 0, 1)
    r2 = RuleGraph(ColoredDigraph.from_arcs([(0, 2, 1), (2, 1, 1)], 2), 0, 1)
    init = ColoredDigraph.from_arcs([(0, 1, 1)], 2, {"A": 0, "B": 1})
    with pytest.warns(RuntimeWarning):
        spec = make_system(init, [r1, r2])
    p = tmp_path / "swap.json"
    write_system_file(spec, p)
    code, _, err = run(capsys, "theory", str(p))
    assert code == 4 and "[[0, 2], [2, 0]]" in err


def test_resource_cap_exit_code(capsys, monkeypatch):
    monkeypatch.setenv("IGS_MAX_ARCS", "100")
    assert run(capsys, "generate", "pentagon_decagon", "--steps", "4", "--seed", "0")[0] == 3


def test_seed_is_required(capsys):
    with pytest.raises(SystemExit):
        main(["lyapunov", "random_two_color"])


def test_lyapunov_two_trials(capsys, tmp_path):
    p = tmp_path / "l.json"
    code, out, _ = run(capsys, "lyapunov", "random_two_color", "--steps", "500", "--trials", "2",
                       "--seed", "0", "--json", str(p))
    assert code == 0
    assert sum(ln.startswith("P11=") for ln in out.splitlines()) == 12 and "dimension = " in out
    rep = json.loads(p.read_text())
    assert rep["parameters"] == {"steps": 500, "trials": 2, "seed": 0}
    assert rep["theoretical"]["method"] == "lyapunov"


def test_lyapunov_on_deterministic_matches_theory(capsys, tmp_path, det):
    p = tmp_path / "l.json"
    run(capsys, "lyapunov", "pentagon_decagon", "--steps", "2000", "--trials", "4",
        "--seed", "0", "--json", str(p))
    value = json.loads(p.read_text())["theoretical"]["value"]
    assert value == pytest.approx(deterministic_dimension(det).dimension, abs=1e-6)


def test_generate_level2(capsys):
    code, out, _ = run(capsys, "generate", "pentagon_decagon", "--steps", "2", "--seed", "0")
    assert code == 0
    doc = json.loads(out)
    assert doc["stats"]["num_arcs"] == 40 and doc["stats"]["ab_distance"] == 9
    assert len(doc["graph"]["arcs"]) == 40


def test_generate_level0_echoes_initial(capsys, det):
    _, out, _ = run(capsys, "generate", "pentagon_decagon", "--steps", "0", "--seed", "0")
    assert ColoredDigraph.from_dict(json.loads(out)["graph"]) == det.initial


def test_generate_seeds(capsys, tmp_path):
    def chi_of(seed):
        _, out, _ = run(capsys, "generate", "random_two_color", "--steps", "3", "--seed", str(seed))
        return json.loads(out)["stats"]["chi"], out

    a, b, c = chi_of(1), chi_of(1), chi_of(2)
    assert a == b
    assert a[0] != c[0]


def test_generate_out_round_trips_through_boxdim(capsys, tmp_path):
    g = tmp_path / "g.json"
    run(capsys, "generate", "pentagon_decagon", "--steps", "3", "--seed", "0", "--out", str(g))
    assert read_graph_file(g).num_arcs == 305  # (1,0) M^3 summed
    code, out, _ = run(capsys, "boxdim", "--graph", str(g), "--seed", "0")
    assert code == 0 and "estimate = " in out


def test_boxdim_long_path_file(capsys, tmp_path):
    p = tmp_path / "path.txt"
    p.write_text("\n".join(f"{i} {i + 1}" for i in range(999)) + "\n")
    csv_p, svg_p, rep_p = tmp_path / "c.csv", tmp_path / "c.svg", tmp_path / "r.json"
    code, out, _ = run(capsys, "boxdim", "--graph", str(p), "--seed", "0", "--csv", str(csv_p),
                       "--svg", str(svg_p), "--json", str(rep_p))
    assert code == 0
    rep = json.loads(rep_p.read_text())
    assert rep["empirical"]["value"] == pytest.approx(1.0, abs=0.1)
    assert csv_p.read_text().startswith("L,N_L,N_L_over_V")
    assert "<svg" in svg_p.read_text()


def test_boxdim_prints_theory_and_gap(capsys):
    code, out, _ = run(capsys, "boxdim", "comb", "--steps", "5", "--seed", "0")
    assert code == 0 and "theory = 1.4650" in out and "gap = " in out


def test_boxdim_small_graph_is_rejected(capsys):
    assert run(capsys, "boxdim", "pentagon_decagon", "--steps", "1", "--seed", "0")[0] == 2


def test_report_is_rerunnable(capsys, tmp_path):
    p = tmp_path / "r.json"
    run(capsys, "boxdim", "random_two_color", "--steps", "4", "--seed", "3", "--no-theory",
        "--json", str(p))
    rep = json.loads(p.read_text())
    prm = rep["parameters"]
    q = tmp_path / "again.json"
    run(capsys, "boxdim", "random_two_color", "--steps", str(prm["steps"]), "--seed",
        str(prm["seed"]), "--no-theory", "--json", str(q))
    again = json.loads(q.read_text())
    assert again["empirical"] == rep["empirical"] and again["system_id"] == rep["system_id"]


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest", "--quick")
    assert code == 0
    assert "FAIL" not in out
    assert "INFO" in out  # the counterexample family is reported, not failed


def test_selftest_reports_corrupted_fixture(capsys, tmp_path, det):
    d = system_to_dict(det)
    d["expect"]["rule_chis"][0][0] = [9, 9]
    p = tmp_path / "corrupt.json"
    p.write_text(json.dumps(d))
    code, out, _ = run(capsys, "selftest", "--quick", str(p))
    assert code == 1
    assert "rule_chis expected [[[9, 9]], [[5, 5]]] found [[[2, 3]], [[5, 5]]]" in out


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "igs.cli", "theory", "comb"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and "1.4650" in r.stdout
