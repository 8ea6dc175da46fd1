import json
import subprocess
import sys

import numpy as np
import pytest

from ghcert import __version__
from ghcert.cli import main
from ghcert.metric import FiniteMetricSpace


@pytest.fixture
def spaces(tmp_path, rng):
    paths = {}
    for name, n in (("a", 6), ("b", 5)):
        pts = rng.normal(size=(n, 2))
        d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps({"n": n, "dist": d.tolist()}))
        paths[name] = str(p)
    return paths


def run(argv):
    return main([str(a) for a in argv])


def report(path):
    return json.loads(open(path).read())


def test_selftest_exit_zero(tmp_path):
    assert run(["selftest", "--out", tmp_path / "s.json"]) == 0
    assert report(tmp_path / "s.json")["result"]["passed"]


def test_hopf_sample_to_leaf_space(tmp_path):
    h, ls = tmp_path / "h.json", tmp_path / "ls.json"
    assert run(["sample", "hopf", "--fibers", 60, "--per-fiber", 12, "--seed", 1, "--out", h]) == 0
    assert run(["leafspace", "--in", h, "--mode", "chain", "--out", ls]) == 0
    result = report(ls)["result"]
    assert FiniteMetricSpace.from_dict(result).n == 60
    assert result["mode"] == "chain"


def test_torus_sample_validates(tmp_path):
    t = tmp_path / "t2.json"
    assert run(["sample", "torus", "--n", 2, "--p", 1, "--leaves", 10, "--per-leaf", 30, "--scale", "1,1",
                "--seed", 7, "--out", t]) == 0
    assert run(["validate", "--in", t, "--out", tmp_path / "v.json"]) == 0
    assert report(tmp_path / "v.json")["result"]["n"] == 300


def test_gh_on_identical_inputs(spaces, tmp_path):
    out = tmp_path / "gh.json"
    assert run(["gh", "--x", spaces["a"], "--y", spaces["a"], "--out", out]) == 0
    result = report(out)["result"]
    assert result["upper"]["value"] <= 1e-9
    assert result["lower"] is None
    assert result["upper_replayed"]


def test_report_embeds_version_and_config(spaces, tmp_path):
    out = tmp_path / "c.json"
    run(["cover", "--in", spaces["a"], "--eps-grid", "0.5,1", "--out", out])
    rep = report(out)
    assert rep["version"] == __version__ and rep["command"] == "cover"
    assert rep["config"]["eps_grid"] == [0.5, 1.0] and rep["config"]["mode"] == "exact"
    assert len(rep["config"]["inputs"]["input"]) == 64


@pytest.mark.parametrize("cmd, header", [
    (["cover", "--eps-grid", "0.5,1"], "epsilon,Cov,Cap"),
    (["pack", "--eps-grid", "0.5,1"], "epsilon,Cov,Cap"),
])
def test_csv_headers(spaces, tmp_path, cmd, header):
    csv = tmp_path / "t.csv"
    run([cmd[0], "--in", spaces["a"], *cmd[1:], "--out", tmp_path / "r.json", "--csv", csv])
    assert csv.read_text().splitlines()[0] == header


def test_bishop_csv_header(tmp_path):
    c, out, csv = tmp_path / "c.json", tmp_path / "b.json", tmp_path / "b.csv"
    t = np.sort(np.random.default_rng(0).uniform(0, 1, 300))
    diff = np.abs(t[:, None] - t[None]) % 1.0
    c.write_text(json.dumps({"n": 300, "dist": np.minimum(diff, 1 - diff).tolist()}))
    assert run(["bishop", "--in", c, "--out", out, "--csv", csv]) == 0
    assert csv.read_text().splitlines()[0] == "center,eta,mu"
    assert report(out)["result"]["replayed"]


def test_rerun_and_threads_are_byte_identical(spaces, tmp_path):
    outs = []
    for i, threads in enumerate((1, 8, 1)):
        out = tmp_path / f"g{i}.json"
        run(["gh", "--x", spaces["a"], "--y", spaces["b"], "--threads", threads, "--out", out])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_domain_error_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3, "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
    assert run(["validate", "--in", bad]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "MetricValidationError" and err["axiom"] == "triangle"


def test_malformed_input_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["validate", "--in", bad]) == 1
    assert "malformed" in json.loads(capsys.readouterr().err)["message"]


def test_usage_errors_exit_two(spaces):
    with pytest.raises(SystemExit) as info:
        run(["bogus"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run(["cover", "--in", spaces["a"], "--eps-grid", "1,0.5"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run(["net", "--in", spaces["a"]])
    assert info.value.code == 2


def test_separate_precondition_is_a_domain_error(tmp_path, capsys):
    t = tmp_path / "t.json"
    run(["sample", "torus", "--n", 2, "--p", 1, "--leaves", 4, "--per-leaf", 10, "--out", t])
    assert run(["separate", "--m", t, "--mprime", t, "--r-grid", "0.2,0.3"]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "PreconditionError"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ghcert.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
