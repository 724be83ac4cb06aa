import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from millerlatent.cli import main
from millerlatent.datagen import gen_nonplanar, gen_polycrystal
from millerlatent.formats import fragment_svg, write_obj
from millerlatent.regime import FragmentSurface
from millerlatent.shape import project, similarity_transform
from millerlatent.slicing import CutPlane, slice_cube

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def fixtures(tmp_path_factory):
    d = tmp_path_factory.mktemp("fx")
    tri = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    (d / "triangle.txt").write_text("\n".join(f"{float(x)!r} {float(y)!r}" for x, y in tri))
    (d / "square.svg").write_text(fragment_svg(np.array([[0, 0], [2, 0], [2, 2], [0, 2]], float)))
    f112 = similarity_transform(project(slice_cube(CutPlane((1, 1, 2), 1.0))), 0.4, 3.0)
    (d / "f112.json").write_text(json.dumps(f112.tolist()))
    (d / "line.txt").write_text("0 0\n1 0\n2 0\n")
    flat = FragmentSurface.from_triangles([[[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[1, 0, 0], [1, 1, 0], [0, 1, 0]]])
    (d / "flat.obj").write_text(write_obj(flat))
    (d / "poly.obj").write_text(write_obj(gen_polycrystal(6, seed=1).surface))
    (d / "cap.obj").write_text(write_obj(gen_nonplanar("SphericalCap", seed=1).surface))
    (d / "bad.obj").write_text("v 0 0\n")
    return d


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_slice_square(capsys):
    code, out, _ = run(capsys, "slice", "(100)", "--d", "0.5")
    assert code == 0 and len(out.strip().splitlines()) == 4


def test_slice_hexagon_svg(capsys, tmp_path):
    code, _, _ = run(capsys, "slice", "(111)", "--d", "1.5", "--svg", tmp_path / "h.svg")
    assert code == 0
    text = (tmp_path / "h.svg").read_text()
    pts = text.split('<polygon points="')[1].split('"')[0].split()
    assert len(pts) == 6


def test_slice_exit_codes(capsys):
    assert run(capsys, "slice", "(111)", "--d", "9")[0] == 2
    code, _, err = run(capsys, "slice", "(1x1)", "--d", "1")
    assert code == 1 and "error" in err
    assert run(capsys, "slice", "(111)")[0] == 1
    assert run(capsys, "slice", "(111)", "--d", "nan")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1


def test_infer_triangle_and_square(capsys, fixtures):
    code, out, _ = run(capsys, "infer", fixtures / "triangle.txt")
    assert code == 0 and out.splitlines()[0].startswith("{111} ")
    code, out, _ = run(capsys, "infer", fixtures / "square.svg", "--top-k", "2")
    assert out.splitlines()[0].startswith("{100} ") and len(out.splitlines()) == 2


def test_infer_under_resolution(capsys, fixtures):
    code, out, _ = run(capsys, "infer", fixtures / "f112.json", "--max-index", "1", "--json")
    top = json.loads(out)["hypotheses"][0]
    assert code == 0 and top["family"] == "{111}" and top["score"] > 0


def test_infer_errors(capsys, fixtures):
    assert run(capsys, "infer", fixtures / "missing.txt")[0] == 1
    assert run(capsys, "infer", fixtures / "line.txt")[0] == 3


def test_classify_and_check(capsys, fixtures):
    assert run(capsys, "classify", fixtures / "square.svg")[1].strip() == "Square"
    code, out, _ = run(capsys, "check", fixtures / "triangle.txt", "(111)", "--d", "1/2")
    assert code == 0 and out.startswith("consistent")
    code, out, _ = run(capsys, "check", fixtures / "triangle.txt", "(100)", "--d", "1/2")
    assert out.startswith("inconsistent")
    assert run(capsys, "check", fixtures / "triangle.txt", "(100)", "--d", "4")[0] == 2


def test_assess(capsys, fixtures):
    assert run(capsys, "assess", fixtures / "flat.obj")[1].startswith("Inference applicable=true")
    assert run(capsys, "assess", fixtures / "poly.obj")[1].startswith("Partial applicable=true")
    assert run(capsys, "assess", fixtures / "cap.obj")[1].startswith("Rejection applicable=false")
    assert run(capsys, "assess", fixtures / "bad.obj")[0] == 1


@pytest.mark.parametrize("name,argv", [
    ("slice_111_hex", ["slice", "(111)", "--d", "3/2", "--json"]),
    ("infer_triangle", ["infer", "{fx}/triangle.txt", "--top-k", "3", "--json"]),
    ("classify_square", ["classify", "{fx}/square.svg", "--json"]),
    ("check_triangle", ["check", "{fx}/triangle.txt", "(111)", "--d", "1/2", "--json"]),
    ("assess_flat", ["assess", "{fx}/flat.obj", "--json"]),
])
def test_json_golden(capsys, fixtures, name, argv):
    argv = [a.replace("{fx}", str(fixtures)) for a in argv]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert json.loads(out) == json.loads((GOLDEN / f"{name}.json").read_text())


def test_gen_eval_score(capsys, tmp_path):
    assert run(capsys, "gen", "--out", tmp_path / "a", "--seed", "4")[0] == 0
    assert run(capsys, "gen", "--out", tmp_path / "b", "--seed", "4", "--threads", "4")[0] == 0
    assert (tmp_path / "a/manifest.jsonl").read_bytes() == (tmp_path / "b/manifest.jsonl").read_bytes()
    code, out, _ = run(capsys, "eval", tmp_path / "a", "--mock", "echo", "--out", tmp_path / "run", "--json")
    assert code == 0 and all(v == (0.0 if k.endswith("_rate") else 1.0) for k, v in json.loads(out)["metrics"].items())
    assert run(capsys, "score", tmp_path / "run/transcripts.jsonl", "--out", tmp_path / "s")[0] == 0
    assert (tmp_path / "s/report.csv").read_bytes() == (tmp_path / "run/report.csv").read_bytes()


def test_gen_with_config(capsys, tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"fragments": 2, "pairs": 2, "polycrystals": 0, "nonplanar": 1}))
    code, out, _ = run(capsys, "gen", "--config", tmp_path / "cfg.json", "--out", tmp_path / "o", "--json")
    assert code == 0 and json.loads(out)["samples"] == 5
    (tmp_path / "bad.json").write_text(json.dumps({"fragmentz": 1}))
    assert run(capsys, "gen", "--config", tmp_path / "bad.json", "--out", tmp_path / "o")[0] == 1


def test_score_empty(capsys, tmp_path):
    (tmp_path / "t.jsonl").write_text("")
    code, _, err = run(capsys, "score", tmp_path / "t.jsonl")
    assert code == 1 and "no evaluation results" in err


def test_eval_endpoint_failure(capsys, tmp_path):
    run(capsys, "gen", "--out", tmp_path / "d", "--config", _tiny(tmp_path))
    (tmp_path / "ep.json").write_text(json.dumps({"base_url": "http://127.0.0.1:9", "timeout": 0.5,
                                                  "retry": {"max_attempts": 1, "backoff": 0}}))
    code, _, err = run(capsys, "eval", tmp_path / "d", "--endpoint", tmp_path / "ep.json", "--out", tmp_path / "r")
    assert code == 4 and "endpoint failure" in err
    assert len((tmp_path / "r/transcripts.jsonl").read_text().splitlines()) == 2
    (tmp_path / "ep2.json").write_text(json.dumps({"base_url": "http://x", "credential_env": "ML_NOPE_UNSET"}))
    assert run(capsys, "eval", tmp_path / "d", "--endpoint", tmp_path / "ep2.json", "--out", tmp_path / "r")[0] == 4


def _tiny(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps({"fragments": 1, "pairs": 0, "polycrystals": 0, "nonplanar": 0}))
    return p


def test_eval_against_mock_server_process(tmp_path):
    """The installed entry point, with the mock served from a separate process."""
    exe = [sys.executable, "-m", "millerlatent"]
    subprocess.run(exe + ["gen", "--out", str(tmp_path / "d")], check=True, capture_output=True)
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    srv = subprocess.Popen(exe + ["mock-server", str(tmp_path / "d"), "--port", str(port)],
                           stdout=subprocess.PIPE, text=True)
    try:
        assert "listening" in srv.stdout.readline()
        (tmp_path / "ep.json").write_text(json.dumps({"base_url": f"http://127.0.0.1:{port}"}))
        r = subprocess.run(exe + ["eval", str(tmp_path / "d"), "--endpoint", str(tmp_path / "ep.json"),
                                  "--out", str(tmp_path / "r"), "--json"], capture_output=True, text=True)
    finally:
        srv.terminate()
        srv.wait(timeout=10)
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["metrics"]["Inference/accuracy"] == 1.0
