import json
from pathlib import Path

import pytest

from carnotlie.cli import CORPUS, STAGES, main, run_report
from carnotlie.algebra import heisenberg

from conftest import DATA

BUNDLED = Path(__file__).resolve().parent.parent / "src" / "carnotlie" / "data"


def _run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_heisenberg_report(capsys):
    code, out, _ = _run(capsys, str(BUNDLED / "heisenberg.alg"))
    assert code == 0
    r = json.loads(out)
    assert r["ok"] and r["failures"] == []
    assert r["derivations"]["dim_g0"] == 1 and r["derivations"]["dim_der0"] == 4
    assert r["killing"]["dim"] == 4
    assert r["filtration"]["dims"] == {"-1": 3, "0": 1, "1": 0}
    assert r["prolongation"]["degree_dims"]["1"] == 0 and r["prolongation"]["g1_zero"]
    assert r["isometry_algebra_dim"] == 4


def test_abelian3_isometry_dim(capsys):
    code, out, _ = _run(capsys, str(BUNDLED / "abelian3.alg"))
    assert code == 0 and json.loads(out)["isometry_algebra_dim"] == 6


def test_json_is_deterministic(capsys):
    args = [str(BUNDLED / "free_2_3.alg"), "--norm", str(BUNDLED / "hexagon.norm")]
    _, first, _ = _run(capsys, *args)
    _, second, _ = _run(capsys, *args)
    assert first == second
    data = json.loads(first)
    assert data["john"]["symmetries"] == 12
    assert data["derivations"]["gram"] == [["4/3", "2/3"], ["2/3", "4/3"]]


def test_corrupted_jacobi_exit_1(capsys):
    code, out, err = _run(capsys, str(DATA / "broken_jacobi.alg"))
    assert code == 1
    r = json.loads(out)
    assert not r["validation"]["ok"]
    assert "Jacobi fails on (X1,X2,X3)" in r["validation"]["defects"][0]
    assert "Jacobi" in err


def test_perturbed_structure_constant_exit_1(tmp_path, capsys):
    from carnotlie.algebra import format_algebra, free_nilpotent

    text = format_algebra(free_nilpotent(3, 3))
    assert "[X1, H6] = H9 - H11" in text
    text = text.replace("[X1, H6] = H9 - H11", "[X1, H6] = H9 - 2*H11")
    path = tmp_path / "perturbed.alg"
    path.write_text(text)
    code, _, err = _run(capsys, str(path), "--format", "text")
    assert code == 1 and "Jacobi fails on (X1,X2,X3)" in err


def test_parse_error_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.alg"
    path.write_text("dim: 3\nstrata: [[X, Y], [Z]]\n[X, Y] = 1/0*Z\n")
    code, _, err = _run(capsys, str(path))
    assert code == 2 and f"{path}:3:" in err


def test_input_errors_exit_2(capsys):
    assert _run(capsys, "/nonexistent.alg")[0] == 2
    assert _run(capsys)[0] == 2
    assert _run(capsys, str(BUNDLED / "heisenberg.alg"), "--check", "nonsense")[0] == 2
    assert _run(capsys, str(BUNDLED / "abelian3.alg"), "--norm", str(BUNDLED / "square.norm"))[0] == 2
    assert _run(capsys, "--corpus", "--norm", str(BUNDLED / "square.norm"))[0] == 2


def test_check_subset_does_not_change_results():
    full = run_report(heisenberg())
    for stage in STAGES:
        part = run_report(heisenberg(), stages=[stage])
        key = {"validate": "validation"}.get(stage, stage)
        assert part[key] == full[key]
        assert set(part) - {"isometry_algebra_dim"} <= set(full)


def test_corpus_text_and_output_file(tmp_path, capsys):
    out = tmp_path / "corpus.json"
    code, _, _ = _run(capsys, "--corpus", "-o", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert [r["algebra"]["name"] for r in data["reports"]][:1] == ["abelian(1)"]
    assert len(data["reports"]) == len(CORPUS)
    assert all(r["filtration"]["k1_zero"] or r["filtration"]["dims"]["0"] == 0 for r in data["reports"])
    code, text, _ = _run(capsys, "--corpus", "--format", "text", "--timings")
    assert code == 0 and text.count("result: ok") == len(CORPUS) and "timings:" in text


def test_timings_only_on_request():
    assert "timings" not in run_report(heisenberg())
    assert "timings" in run_report(heisenberg(), timings=True)


def test_max_degree_flag(capsys):
    code, out, _ = _run(capsys, str(BUNDLED / "engel.alg"), "--max-degree", "2")
    assert code == 0 and json.loads(out)["prolongation"]["max_degree"] == 2
    assert _run(capsys, str(BUNDLED / "engel.alg"), "--max-degree", "0")[0] == 2


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "carnotlie", str(BUNDLED / "heisenberg.alg"), "--format", "text"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "K_1: 0" in proc.stdout
