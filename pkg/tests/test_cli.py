import json
import logging
import os

import pytest

from app import run_cli
from service import RunConfig, run
from tests.conftest import CORPUS_DIR


def fixture_path(name):
    return os.path.join(CORPUS_DIR, f"{name}.json")


def error_of(err):
    lines = [line for line in err.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    yield tmp_path
    root = logging.getLogger()
    for h in [h for h in root.handlers if getattr(h, "_console", False)]:
        root.removeHandler(h)


@pytest.fixture
def square_file(tmp_path):
    path = tmp_path / "square.json"
    path.write_text(json.dumps({"dim": 2, "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}))
    return str(path)


@pytest.fixture
def diamond_file(tmp_path):
    path = tmp_path / "diamond.json"
    path.write_text(json.dumps({"dim": 2, "vertices": [[1, 0], [0, 1], [-1, 0], [0, -1]]}))
    return str(path)


def test_na_exact_triangle(capsys):
    assert run_cli(["na-exact", fixture_path("triangle")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert (out["na"], out["via_eq0"], out["via_t1"]) == ("3", "3", "3")


def test_na_exact_with_point(capsys):
    assert run_cli(["na-exact", fixture_path("quad_pinned"), "--point", "1/2,1/4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["na"] == "5/2"
    assert out["na_point"] == 3
    assert len(out["diameters"]) == 3


def test_malformed_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(["na-exact", str(bad)]) == 2
    assert error_of(capsys.readouterr().err)["error"] == "parse_error"


def test_montecarlo_needs_seed(capsys):
    assert run_cli(["na-montecarlo", fixture_path("triangle")]) == 2
    assert error_of(capsys.readouterr().err)["error"] == "missing_seed"


def test_montecarlo_is_byte_identical(capsys):
    args = ["na-montecarlo", fixture_path("quad_pinned"), "--samples", "2000", "--seed", "42"]
    assert run_cli(args) == 0
    first = capsys.readouterr().out
    assert run_cli(args) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["samples"] == 2000


def test_failed_position_check_exits_1(square_file, capsys):
    assert run_cli(["check-position", square_file]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["holds"] is False
    assert len(out["witnesses"]) == 4


def test_not_general_position_is_an_input_error(square_file, capsys):
    assert run_cli(["na-exact", square_file]) == 2
    assert error_of(capsys.readouterr().err)["error"] == "not_general_position"


def test_volume_poly_csv(capsys):
    assert run_cli(["volume-poly", fixture_path("triangle"), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,coeff,mixed_volume"
    assert lines[1] == "0,1/2,1/2"
    assert lines[2] == "1,2,1"


def test_rs_check_and_thm2(square_file, capsys):
    assert run_cli(["rs-check", square_file]) == 0
    assert json.loads(capsys.readouterr().out)["lower_gap"] == "0"
    assert run_cli(["thm2-check", square_file]) == 0
    out = json.loads(capsys.readouterr().out)
    assert (out["na"], out["source"]) == ("1", "central_symmetry")


def test_triangulate(capsys):
    assert run_cli(["triangulate", fixture_path("quad_pinned")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["area_sum"] == out["difference_area"] == "20"
    assert len(out["triangles"]) == 8


def test_gauge_bundle_measures(square_file, diamond_file, capsys):
    assert run_cli(["gauge", "--body", square_file, "--gauge", diamond_file, "--point", "2,1/2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert (out["d"], out["p"]) == ("1", ["1", "1/2"])

    assert run_cli(["bundle", "--body", square_file, "--gauge", diamond_file]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["closed"] is True and len(out["pieces"]) == 8

    assert run_cli(["measures", "--body", square_file, "--gauge", diamond_file, "--arcs", "1,0;-1,0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["K"]["total"] == "4"
    assert len(out["B"]["atoms"]) == 2


def test_gauge_body_error(square_file, capsys):
    assert run_cli(["gauge", "--body", square_file, "--gauge", square_file, "--point", "2,2"]) == 2
    assert error_of(capsys.readouterr().err)["error"] == "gauge_body_error"


def test_lipschitz(square_file, diamond_file, capsys):
    args = ["lipschitz", "--body", square_file, "--gauge", diamond_file, "--samples", "500", "--seed", "3"]
    assert run_cli(args) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["probe"]["max_ratio"] <= out["bound"]["bound"] + 1e-9


def test_svg_output_is_deterministic(tmp_path, capsys):
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    for path in (first, second):
        code = run_cli(["na-exact", fixture_path("quad_pinned"), "--format", "svg",
                        "--point", "1/2,1/4", "--out", str(path)])
        assert code == 0
    capsys.readouterr()
    assert first.read_bytes() == second.read_bytes()
    assert b"<svg" in first.read_bytes()


def test_json_to_out_file(tmp_path):
    out = tmp_path / "result.json"
    assert run_cli(["rs-check", fixture_path("triangle"), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["upper_gap"] == "0"


def test_float_mode(capsys):
    assert run_cli(["volume-poly", fixture_path("quad_pinned"), "--mode", "float"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["integral"] == pytest.approx(14 / 3)


def test_montecarlo_in_float_mode(capsys):
    args = ["na-montecarlo", fixture_path("quad_pinned"), "--mode", "float", "--samples", "2000", "--seed", "42"]
    assert run_cli(args) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["samples"] == 2000
    assert 1 <= out["mean"] <= 3


def test_run_reports_unknown_command():
    outcome = run(RunConfig(command="nope"))
    assert outcome.exit_code == 2


@pytest.mark.slow
def test_counterexample_command(capsys):
    assert run_cli(["counterexample", "--depth", "6"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [p["n"] for p in out["probes"]] == [3, 5]
    assert all(p["pass"] for p in out["probes"])


@pytest.mark.slow
def test_corpus_run(tmp_path, capsys):
    assert run_cli(["corpus", CORPUS_DIR, "--out", str(tmp_path / "runs"), "--seed", "42"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["summary"]["Failed"] == 0
    run_dirs = list((tmp_path / "runs" / "corpus" / "runs").iterdir())
    assert len(run_dirs) == 1
    assert (run_dirs[0] / "metadata.json").exists()
    assert list((run_dirs[0] / "output").glob("*.xlsx"))
