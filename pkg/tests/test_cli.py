import json

import pytest
from click.testing import CliRunner

from conewise.cli import main


@pytest.fixture
def run(data_dir, tmp_path):
    runner = CliRunner()

    def go(*args):
        args = [a.format(d=data_dir, tmp=tmp_path) for a in args]
        return runner.invoke(main, args, catch_exceptions=False)

    return go


def test_check_space_ok(run):
    r = run("check-space", "--space", "{d}/four_ray.json", "--samples", "16")
    assert r.exit_code == 0, r.output
    rep = json.loads(r.output)
    assert rep["status"] == "pass"


def test_check_space_redundant(run):
    r = run("check-space", "--space", "{d}/redundant_plane.json", "--samples", "16")
    assert r.exit_code == 0
    assert json.loads(r.output)["removed_rows"]


def test_check_space_not_pointed(run):
    r = run("check-space", "--space", "{d}/not_pointed.json")
    assert r.exit_code == 1
    assert "cone not pointed" in r.output


def test_check_space_malformed(run):
    r = run("check-space", "--space", "{d}/missing_dim.json")
    assert r.exit_code == 2


def test_missing_file(run):
    assert run("check-space", "--space", "{d}/nope.json").exit_code == 2


@pytest.mark.parametrize("op,flag,code", [
    ("diag_op", "--local", 0),
    ("swap_op", "--local", 1),
    ("shear_op", "--dp", 1),
    ("rotation_op", "--positive", 1),
])
def test_operator_verdicts(run, op, flag, code):
    r = run("operator", "--space", "{d}/std2.json", "--op", "{d}/%s.json" % op, flag)
    assert r.exit_code == code, r.output


def test_operator_reflection_cross(run):
    r = run("operator", "--space", "{d}/four_ray.json", "--op", "{d}/reflection_op.json", "--dp",
            "--method", "cross", "--pairs", "200")
    assert r.exit_code == 0, r.output
    r = run("operator", "--space", "{d}/four_ray.json", "--op", "{d}/reflection_op.json", "--local")
    assert r.exit_code == 1


def test_operator_space_mismatch(run):
    r = run("operator", "--space", "{d}/four_ray.json", "--op", "{d}/swap_op.json", "--local")
    assert r.exit_code == 2


def test_unknown_suite(run):
    r = run("suite", "no-such-suite")
    assert r.exit_code == 2
    assert "thm-yosida" in r.output


def test_suite_csv(run):
    r = run("suite", "thm-yosida", "--config", "{d}/yosida_short.json", "--format", "csv")
    assert r.exit_code == 0, r.output
    lines = r.output.strip().splitlines()
    assert lines[0].split(",")[:3] == ["suite", "case", "t"]
    assert len(lines) > 5


def test_suite_out_file_deterministic(run, tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    a = run("suite", "thm-bounded-local", "--seed", "3", "--out", "{tmp}/a/rep.json")
    b = run("suite", "thm-bounded-local", "--seed", "3", "--out", "{tmp}/b/rep.json")
    assert a.exit_code == b.exit_code == 0
    assert (tmp_path / "a/rep.json").read_bytes() == (tmp_path / "b/rep.json").read_bytes()
    rep = json.loads((tmp_path / "a/rep.json").read_text())
    assert rep["config"]["seed"] == 3


def test_table_format(run):
    r = run("operator", "--space", "{d}/std2.json", "--op", "{d}/diag_op.json", "--local", "--positive",
            "--format", "table")
    # diag(2, -3) is local but not positive
    assert r.exit_code == 1
    assert "local" in r.output and "positive" in r.output


def test_bad_threads(run, monkeypatch):
    monkeypatch.setenv("CONEWISE_THREADS", "zero")
    r = run("check-space", "--space", "{d}/std2.json")
    assert r.exit_code == 2


@pytest.mark.parametrize("space,op,flag", [
    ("std2", "swap_op", "--local"),
    ("std2", "shear_op", "--dp"),
    ("std2", "rotation_op", "--positive"),
    ("four_ray", "reflection_op", "--local"),
])
def test_witnesses_round_trip(run, data_dir, space, op, flag):
    import numpy as np
    from conewise.spaces import Tri, is_disjoint_oracle, load_space

    r = run("operator", "--space", "{d}/%s.json" % space, "--op", "{d}/%s.json" % op, flag)
    assert r.exit_code == 1
    sp = load_space(data_dir / f"{space}.json")
    A = np.array(json.loads((data_dir / f"{op}.json").read_text())["matrix"], float)
    (res,) = json.loads(r.output)["results"]
    cert = res["certificate"]
    x = np.array(cert["x"])
    if flag == "--positive":
        assert np.all(sp.phi @ x >= 0) and np.any(sp.phi @ (A @ x) < 0)
        return
    y = np.array(cert["y"])
    assert is_disjoint_oracle(sp, x, y, exact=True) is Tri.TRUE
    img_y = y if flag == "--local" else A @ y
    assert is_disjoint_oracle(sp, A @ x, img_y, exact=True) is Tri.FALSE
