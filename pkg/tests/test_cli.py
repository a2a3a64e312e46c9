import csv
import hashlib
import json

import pytest

from barrier_comp.cli import main
from barrier_comp.scenario import builtin_path


def read_csv(path):
    with open(path) as fh:
        rows = [line for line in fh if not line.startswith("#")]
    return list(csv.reader(rows))


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def short_scenario(tmp_path, name, horizon=0.2):
    doc = json.loads(builtin_path(name).read_text())
    doc["integration"]["horizon"] = horizon
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_eval(capsys):
    assert main(["eval", "--scenario", "example2", "--x", "0", "0"]) == 0
    header, row = read_csv_text(capsys.readouterr().out)
    assert header == ["x1", "x2", "h", "h_c", "dh1", "dh2", "lower", "upper"]
    values = dict(zip(header, map(float, row)))
    assert values["h_c"] + values["lower"] <= values["h"] <= values["h_c"] + values["upper"]


def read_csv_text(text):
    return list(csv.reader(text.strip().splitlines()))


def test_grid_buffers_nest(tmp_path, capsys):
    out = tmp_path / "g"
    rc = main(["grid", "--scenario", "example1", "--buffers", "0", "ln(2)", "ln(4)",
               "--res", "60", "--out", str(out)])
    assert rc == 0
    grids = [read_csv(out / f"grid_{i}.csv") for i in range(3)]
    assert all(g[0] == ["x1", "x2", "h", "h_c"] for g in grids)
    inside = [{tuple(r[:2]) for r in g[1:] if float(r[2]) >= 0} for g in grids]
    # larger buffer, smaller set
    assert inside[2] < inside[1] < inside[0]
    svg = (out / "grid.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg


def test_grid_is_bit_identical(tmp_path):
    for d in ("a", "b"):
        assert main(["grid", "--scenario", "example3", "--res", "40", "--out", str(tmp_path / d)]) == 0
    assert digest(tmp_path / "a" / "grid.csv") == digest(tmp_path / "b" / "grid.csv")
    assert digest(tmp_path / "a" / "grid.svg") == digest(tmp_path / "b" / "grid.svg")


def test_filter(capsys):
    rc = main(["filter", "--scenario", "example1", "--x", "-1.5", "0", "--u-des", "1", "0"])
    assert rc == 0
    header, row = read_csv_text(capsys.readouterr().out)
    assert header[-1] == "case" and row[-1] == "active"
    assert float(row[header.index("residual")]) >= -1e-10


def test_feas_infeasible(capsys):
    assert main(["feas", "--scenario", "opposing"]) == 2
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "infeasible"
    assert out[1] == "multipliers,1.0,1.0"
    assert out[3] == "gap,2.0"


def test_feas_feasible(tmp_path, capsys):
    doc = json.loads(builtin_path("opposing").read_text())
    doc["spec"]["children"][1]["normal"] = [0.0, 1.0]
    path = tmp_path / "corner.json"
    path.write_text(json.dumps(doc))
    assert main(["feas", "--scenario", str(path), "--x", "5", "0"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "feasible" and out[1].startswith("u_qp,")


def test_simulate_example3(tmp_path):
    scen = short_scenario(tmp_path, "example3")
    out = tmp_path / "sim"
    assert main(["simulate", "--scenario", scen, "--out", str(out), "--res", "40"]) == 0
    rows = read_csv(out / "trajectory_0.csv")
    assert rows[0] == ["t", "x1", "x2", "u1", "u2", "u_des1", "u_des2", "h", "h_c", "case"]
    assert len(rows) == 202
    assert (out / "trajectory_1.csv").exists()
    assert (out / "trajectories.svg").exists()
    first = digest(out / "trajectory_0.csv")
    assert main(["simulate", "--scenario", scen, "--out", str(out), "--no-svg"]) == 0
    assert digest(out / "trajectory_0.csv") == first


def test_sweep(tmp_path, capsys):
    scen = short_scenario(tmp_path, "example1", horizon=0.5)
    out = tmp_path / "sw"
    assert main(["sweep", "--scenario", scen, "--kappas", "2", "20", "--out", str(out), "--no-svg"]) == 0
    rows = read_csv(out / "sweep.csv")
    assert rows[0] == ["kappa", "max_input_jump", "min_turn_radius", "min_h", "final_distance"]
    assert [r[0] for r in rows[1:]] == ["2.0", "20.0"]
    assert (out / "trajectory_kappa_20.csv").exists()


def test_scan_echoes_seed(tmp_path, capsys):
    out = tmp_path / "scan"
    assert main(["scan", "--scenario", "example1", "--samples", "200", "--seed", "42", "--out", str(out)]) == 0
    assert "# seed=42" in capsys.readouterr().out
    assert (out / "scan.csv").read_text().startswith("# seed=42")


def test_overrides(capsys):
    main(["eval", "--scenario", "example2", "--x", "0", "0", "--kappa", "100", "--buffer", "auto_subset"])
    header, row = read_csv_text(capsys.readouterr().out)
    values = dict(zip(header, map(float, row)))
    assert values["upper"] == 0.0


@pytest.mark.parametrize("argv", [
    ["eval", "--scenario", "no-such-file.json"],
    ["eval", "--scenario", "example1", "--x", "1", "2", "3"],
    ["eval", "--scenario", "example1", "--kappa", "-1"],
])
def test_invalid_input_exit_code(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dynamics": {"type": "single_integrator", "n": 2}, "spec": ')
    assert main(["eval", "--scenario", str(bad)]) == 1
    assert "line" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path):
    doc = json.loads(builtin_path("example1").read_text())
    doc["controller"] = {"type": "constant", "u": [1e308, 1e308]}
    doc["integration"] = {"dt": 1.0, "horizon": 5.0}
    path = tmp_path / "blowup.json"
    path.write_text(json.dumps(doc))
    assert main(["simulate", "--scenario", str(path), "--out", str(tmp_path / "o"), "--no-svg"]) == 3


def test_console_script_help(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    assert "simulate" in capsys.readouterr().out
