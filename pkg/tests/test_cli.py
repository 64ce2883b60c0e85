import json

import numpy as np
import pytest

from numrange import io
from numrange.cli import parse_complex
from numrange.errors import InvalidInput


@pytest.fixture
def square(tmp_path):
    p = tmp_path / "square.json"
    io.save_matrix(np.diag([1, 1j, -1, -1j]), p)
    return p


@pytest.fixture
def block(tmp_path, cli_json):
    p = tmp_path / "block.json"
    cli_json("gallery", "build", "two_ellipse_block", "-o", p)
    return p


def error_of(err):
    d = json.loads(err)
    assert set(d) == {"error", "message", "exit_code"}
    return d


class TestGallery:
    def test_list(self, cli_json):
        names = [it["name"] for it in cli_json("gallery", "list")]
        assert "volterra" in names and "two_ellipse_block" in names

    def test_build_writes_sidecars(self, tmp_path, cli_json):
        out = tmp_path / "v.json"
        res = cli_json("gallery", "build", "volterra", "--param", "N=8", "-o", out)
        assert res["result"]["dim"] == 17
        A = io.load_matrix(out)
        meta = io.load_metadata(tmp_path / "v.json.meta.json", A)
        assert meta.essential_numerical_range == [0]
        man = io.loads((tmp_path / "v.json.manifest.json").read_text())
        assert man["input_hash"] == io.matrix_hash(A)

    def test_complex_list_param(self, tmp_path, cli_json):
        out = tmp_path / "d.json"
        cli_json("gallery", "build", "normal_diag", "--param", "values=[[1,0],[0,1]]", "-o", out)
        assert np.allclose(io.load_matrix(out), np.diag([1, 1j]))

    def test_unknown_name(self, tmp_path, run_cli):
        code, _, err = run_cli("gallery", "build", "nope", "-o", tmp_path / "x.json")
        assert code == 2 and error_of(err)["error"] == "InvalidInput"

    def test_bad_param(self, tmp_path, run_cli):
        code, _, _ = run_cli("gallery", "build", "volterra", "--param", "M=3",
                             "-o", tmp_path / "x.json")
        assert code == 2


class TestBoundary:
    def test_square_csv(self, square, tmp_path, run_cli):
        out = tmp_path / "b.csv"
        code, _, _ = run_cli("boundary", square, "-o", out)
        assert code == 0
        rows = io.read_boundary_csv(out)
        corners = [complex(r[2], r[3]) for r in rows if r[5] == "corner"]
        assert len(corners) == 4
        assert max(min(abs(c - v) for c in corners) for v in (1, 1j, -1, -1j)) <= 1e-8
        assert (tmp_path / "b.csv.manifest.json").exists()

    def test_stdout_csv(self, square, run_cli):
        code, out, _ = run_cli("boundary", square, "--grid", 64)
        assert code == 0 and out.startswith(",".join(io.BOUNDARY_HEADER))

    def test_json_summary(self, square, cli_json):
        res = cli_json("boundary", square, "--grid", 128)
        assert len(res["result"]["flats"]) == 4
        assert res["manifest"]["tolerances"]["grid"] == 128


def test_curves(square, tmp_path, run_cli):
    out = tmp_path / "c.csv"
    code, _, _ = run_cli("curves", square, "--range", 0, 3, "--top", 2, "--grid", 64, "-o", out)
    assert code == 0
    rows = io.read_curves_csv(out)
    assert {r[0] for r in rows} == {0, 1} and len(rows) == 128


class TestClassify:
    def test_block_origin(self, block, cli_json):
        res = cli_json("classify", block, "--z", "0,0")
        (r,) = res["result"]["reports"]
        assert r["verdict"] == "fails_weak" and r["case"] == "III"

    def test_metadata_sidecar_used(self, tmp_path, cli_json):
        p = tmp_path / "n.json"
        cli_json("gallery", "build", "compact_normal", "--param", "K=10", "-o", p)
        res = cli_json("classify", p, "--metadata", tmp_path / "n.json.meta.json",
                       "--z", "0,0")
        assert res["result"]["reports"][0]["verdict"] == "fails_weak"

    def test_metadata_for_other_matrix(self, block, square, run_cli):
        code, _, err = run_cli("classify", square, "--metadata",
                               str(block) + ".meta.json", "--z", "0,0")
        assert code == 2 and "different operator" in error_of(err)["message"]

    def test_outside_point(self, square, run_cli):
        code, _, err = run_cli("classify", square, "--z", "2,0")
        assert code == 3 and error_of(err)["error"] == "OutsideRange"


class TestInvert:
    def test_residual(self, block, cli_json):
        res = cli_json("invert", block, "--z", "0.1,0.1")["result"]
        x = np.array([complex(*c) for c in res["x"]])
        A = io.load_matrix(block)
        assert abs(np.vdot(x, A @ x) - (0.1 + 0.1j)) <= 1e-10

    def test_outside(self, square, run_cli):
        code, _, err = run_cli("invert", square, "--z", "5,5")
        assert code == 3
        assert error_of(err)["exit_code"] == 3


class TestProbe:
    def test_seed_from_environment(self, block, cli_json, monkeypatch):
        monkeypatch.setenv("NUMRANGE_SEED", "5")
        res = cli_json("probe", block, "--z", "0.1,0", "--samples", 2000)
        assert res["manifest"]["seeds"]["seed"] == 5

    def test_flag_overrides_environment(self, block, cli_json, monkeypatch):
        monkeypatch.setenv("NUMRANGE_SEED", "5")
        res = cli_json("probe", block, "--z", "0.1,0", "--samples", 2000, "--seed", 2)
        assert res["manifest"]["seeds"]["seed"] == 2

    def test_bad_environment_seed(self, block, run_cli, monkeypatch):
        monkeypatch.setenv("NUMRANGE_SEED", "abc")
        code, _, err = run_cli("probe", block, "--z", "0,0", "--samples", 2000)
        assert code == 2 and "NUMRANGE_SEED" in error_of(err)["message"]

    def test_cloud_file(self, block, tmp_path, run_cli):
        cloud = tmp_path / "cloud.csv"
        code, _, _ = run_cli("probe", block, "--z", "0.1,0", "--samples", 2000,
                             "--cloud", cloud)
        assert code == 0 and cloud.read_text().startswith("re,im\n")


def test_plot(square, tmp_path, run_cli):
    b, c, svg = tmp_path / "b.csv", tmp_path / "c.csv", tmp_path / "p.svg"
    run_cli("boundary", square, "--grid", 64, "-o", b)
    run_cli("curves", square, "--top", 3, "--grid", 64, "-o", c)
    code, _, _ = run_cli("plot", b, c, "--mark", "0,0", "-o", svg)
    assert code == 0
    text = svg.read_text()
    assert text.count('class="curve"') == 3 and "<metadata>" in text
    assert 'class="singular"' in text


class TestErrors:
    def test_missing_file(self, tmp_path, run_cli):
        code, out, err = run_cli("boundary", tmp_path / "none.json")
        assert code == 2 and out == ""
        assert error_of(err)["exit_code"] == 2

    def test_malformed_matrix(self, tmp_path, run_cli):
        p = tmp_path / "bad.json"
        p.write_text('{"dim": 2, "entries": [[1, 0]]}')
        assert run_cli("boundary", p)[0] == 2

    def test_usage(self, square, run_cli):
        code, _, err = run_cli("boundary", square, "--grid", "many")
        assert code == 2 and error_of(err)["error"] == "UsageError"

    def test_no_command(self, run_cli):
        assert run_cli()[0] == 2

    def test_grid_too_small(self, square, run_cli):
        assert run_cli("boundary", square, "--grid", 8)[0] == 2


def test_parse_complex():
    assert parse_complex("1.5,-2") == 1.5 - 2j
    for bad in ("1", "a,b", "inf,0"):
        with pytest.raises(InvalidInput):
            parse_complex(bad)
