import json

import pytest
from click.testing import CliRunner

from artifact.cli import dumps, main


@pytest.fixture
def runner():
    return CliRunner()


def generate(runner, tmp_path, name, *args):
    path = tmp_path / name
    res = runner.invoke(main, ["generate", *args, "-o", str(path)])
    assert res.exit_code == 0, res.output
    return path


def test_dumps_float_format():
    assert dumps(0.0) == "0.0"
    assert dumps(1) == "1"
    assert dumps(0.1) == "0.10000000000000001"
    assert json.loads(dumps({"a": [1.5, 2.0], "b": None})) == {"a": [1.5, 2.0], "b": None}


def test_analyze_flat(runner, tmp_path):
    path = generate(runner, tmp_path, "flat.json", "--kind", "flat", "--rows", "2")
    res = runner.invoke(main, ["analyze", str(path)])
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["diagram"] == {"rows": [2]}
    assert out["residuals"]["structural_residual"] < 1e-8
    assert all(abs(v) < 1e-10 for a in out["curvatures"] for e in a["jet"]["coeffs"] for v in e)


def test_analyze_order_too_low(runner, tmp_path):
    path = generate(runner, tmp_path, "flat.json", "--kind", "flat", "--rows", "2", "--order", "8")
    res = runner.invoke(main, ["analyze", str(path)])
    assert res.exit_code == 2
    assert "10" in res.output


def test_rotating_line_curvature(runner, tmp_path):
    path = generate(runner, tmp_path, "rot.json", "--kind", "rotating", "--order", "8")
    out = json.loads(runner.invoke(main, ["analyze", str(path)]).output)
    coeffs = out["curvatures"][0]["jet"]["coeffs"][0]
    assert abs(coeffs[0] + 1.0) < 1e-10


def test_reconstruct_matches_generate(runner, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"diagram": {"rows": [2, 1]}, "arrows": []}))
    out = tmp_path / "rec.json"
    res = runner.invoke(main, ["reconstruct", str(spec), "-o", str(out)])
    assert res.exit_code == 0, res.output
    flat = generate(runner, tmp_path, "flat.json", "--kind", "flat", "--rows", "2,1")
    assert out.read_text() == flat.read_text()


def test_reconstruct_rejects_nonsymmetric(runner, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(
        json.dumps(
            {
                "diagram": {"rows": [2, 2]},
                "arrows": [{"a": [1, 1], "b": [1, 1], "jet": {"rows": 2, "cols": 2, "coeffs": [[0.0], [1.0], [0.0], [0.0]]}}],
            }
        )
    )
    res = runner.invoke(main, ["reconstruct", str(spec)])
    assert res.exit_code == 1
    assert "compatibility" in res.output


@pytest.mark.parametrize("suite", ["roundtrip", "invariance", "duality"])
def test_verify_suites(runner, tmp_path, suite):
    path = generate(runner, tmp_path, "rand.json", "--kind", "random", "--rows", "2,1", "--seed", "3")
    res = runner.invoke(main, ["verify", str(path), "--suite", suite])
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["pass"] is True


def test_generate_mixed_inertia(runner, tmp_path):
    path = generate(runner, tmp_path, "mix.json", "--kind", "random", "--rows", "2,2,1", "--inertia", "1:1,0:1")
    out = json.loads(runner.invoke(main, ["analyze", str(path)]).output)
    assert out["inertia"] == [[1, 1], [0, 1]]
    assert out["residuals"]["ok"] is True


def test_hamiltonian_is_regular(runner, tmp_path):
    path = generate(runner, tmp_path, "ham.json", "--kind", "hamiltonian", "--rows", "1,1")
    out = json.loads(runner.invoke(main, ["analyze", str(path)]).output)
    assert out["diagram"] == {"rows": [1, 1]}


def test_bad_inputs(runner, tmp_path):
    assert runner.invoke(main, ["analyze", str(tmp_path / "missing.json")]).exit_code == 1
    assert runner.invoke(main, ["generate", "--rows", "a,b"]).exit_code == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert runner.invoke(main, ["analyze", str(bad)]).exit_code == 1


def test_analyze_reduce(runner, tmp_path):
    import numpy as np

    from artifact.flag import CurveJet
    from artifact.generators import rotating_line
    from artifact.jets import MatrixJet

    # rotating line in one plane plus a constant line in another
    line = rotating_line(0.0, 10).frame.coeffs
    c = np.zeros((11, 4, 2))
    c[:, [0, 2], 0] = line[:, :, 0]
    c[0, 3, 1] = 1.0
    path = tmp_path / "sum.json"
    path.write_text(dumps(CurveJet(MatrixJet(c)).to_json()))
    assert runner.invoke(main, ["analyze", str(path)]).exit_code == 2
    res = runner.invoke(main, ["analyze", str(path), "--reduce"])
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["diagram"] == {"rows": [1]}
