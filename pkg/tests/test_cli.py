import csv
import io
import json
import subprocess
import sys

import pytest

from collective_decay import cli


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_evolve_e1_csv(capsys):
    code, out, _ = run(["evolve", "--e", "1", "--n", "4", "--t-max", "2", "--samples", "100", "--format", "csv"], capsys)
    assert code == 0
    table = rows(out)
    assert table[0] == ["t", "a0", "a1", "a2", "a3"]
    assert len(table) == 101
    assert "\r" not in out


def test_evolve_e2_oracle(capsys):
    code, out, _ = run(["evolve", "--e", "2", "--n", "4", "--t-max", "2", "--samples", "9", "--oracle"], capsys)
    assert code == 0
    table = rows(out)
    assert table[0][-1] == "max_abs_dev"
    assert table[0][:2] == ["t", "b0"]
    assert max(float(r[-1]) for r in table[1:]) < 1e-8


def test_evolve_e2_small_n_is_usage_error(capsys):
    code, _, err = run(["evolve", "--e", "2", "--n", "3"], capsys)
    assert code == 2
    assert "n >= 4" in err


def test_bad_arguments(capsys):
    assert run(["evolve", "--samples", "1"], capsys)[0] == 2
    assert run(["evolve", "--t-max", "0"], capsys)[0] == 2
    assert run(["evolve", "--e", "3", "--n", "5"], capsys)[0] == 2
    assert run(["evolve", "--format", "dot"], capsys)[0] == 2
    assert run(["graph", "--n", "6", "--threshold", "high"], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["evolve", "--format", "xml"])
    assert exc.value.code == 2


def test_concurrence_n2_limit(capsys):
    code, out, _ = run(["concurrence", "--e", "1", "--n", "2", "--t-max", "20", "--samples", "5"], capsys)
    assert code == 0
    table = rows(out)
    assert table[0][:3] == ["t", "C_excited_ground", "C_ground_ground"]
    assert abs(float(table[-1][1]) - 0.5) < 1e-6
    assert table[-1][-1] == "1"  # degenerate flag: no ground-ground pair


def test_concurrence_e2_excited_pair_column(capsys):
    code, out, _ = run(["concurrence", "--e", "2", "--n", "4", "--samples", "11"], capsys)
    table = rows(out)
    assert table[0] == ["t", "C_excited_ground", "C_ground_ground", "C_excited_excited"]
    assert all(float(r[3]) == 0 for r in table[1:])


def test_fig1_preset_ordering(capsys):
    code, out, _ = run(["concurrence", "--preset", "fig1", "--samples", "21"], capsys)
    assert code == 0
    table = rows(out)[1:]
    last = {int(r[0]): float(r[2]) for r in table if float(r[1]) == 1.0}
    assert list(last) == [2, 6, 10, 14]
    vals = [last[n] for n in (2, 6, 10, 14)]
    assert vals == sorted(vals, reverse=True)


def test_fig5_preset(capsys):
    code, out, _ = run(["concurrence", "--preset", "fig5", "--samples", "5"], capsys)
    assert code == 0
    assert {r[0] for r in rows(out)[1:]} == {"4", "7", "10", "13"}


def test_preset_command_mismatch(capsys):
    assert run(["evolve", "--preset", "fig2"], capsys)[0] == 2


def test_scan(capsys):
    code, out, _ = run(["scan", "--e", "1", "--n-min", "2", "--n-max", "4"], capsys)
    table = rows(out)
    assert table[0] == ["n", "C_kj_inf", "C_jm_inf", "source", "degenerate"]
    assert table[1] == ["2", "0.5", "0.5", "analytic", "1"]
    assert table[3][:3] == ["4", "0.375", "0.125"]
    code, out, _ = run(["scan", "--e", "2", "--n-min", "4", "--n-max", "5", "--oracle"], capsys)
    table = rows(out)
    assert [r[3] for r in table[1:]] == ["oracle", "oracle"]
    assert abs(float(table[1][1]) - 0.25) < 1e-6


def test_scan_json(capsys):
    code, out, _ = run(["scan", "--preset", "fig2", "--format", "json"], capsys)
    doc = json.loads(out)
    assert doc["columns"][:3] == ["n", "C_kj_inf", "C_jm_inf"]
    assert len(doc["rows"]) == 29


def test_graph_outputs(capsys):
    code, out, _ = run(["graph", "--e", "1", "--n", "6", "--threshold", "0.1"], capsys)
    assert code == 0
    assert out.count("color=red") == 1 and out.count(" -- ") == 5
    assert out.count("[label=") == 11
    _, out, _ = run(["graph", "--e", "2", "--n", "6", "--threshold", "auto", "--format", "json"], capsys)
    doc = json.loads(out)
    assert len(doc["edges"]) == 8
    _, out, _ = run(["graph", "--e", "1", "--n", "2", "--threshold", "0.6"], capsys)
    assert out.count(" -- ") == 0 and out.count("role=") == 2


def test_rate_rescales_time(capsys):
    _, fast, _ = run(["evolve", "--n", "3", "--t-max", "1", "--samples", "3", "--rate", "2"], capsys)
    _, slow, _ = run(["evolve", "--n", "3", "--t-max", "2", "--samples", "3"], capsys)
    assert [r[1:] for r in rows(fast)] == [r[1:] for r in rows(slow)]


def test_output_file_and_env_dir(tmp_path, capsys, monkeypatch):
    target = tmp_path / "sub" / "out.csv"
    assert run(["evolve", "--n", "3", "--samples", "3", "--output", str(target)], capsys) == (0, "", "")
    assert target.read_bytes().startswith(b"t,a0")
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert run(["graph", "--e", "1", "--n", "3"], capsys)[1] == ""
    assert (tmp_path / "env" / "graph_e1_n3.dot").exists()


def test_output_is_deterministic(capsys):
    args = ["concurrence", "--e", "2", "--n", "5", "--samples", "7"]
    assert run(args, capsys)[1] == run(args, capsys)[1]


def test_full_precision(capsys):
    _, out, _ = run(["evolve", "--n", "3", "--t-max", "1", "--samples", "2"], capsys)
    value = rows(out)[2][1]
    assert len(value.replace("0.", "")) >= 16


def test_validate_passes(capsys):
    code, out, err = run(["validate"], capsys)
    report = json.loads(out)
    assert code == 0, err
    assert report["passed"]
    assert set(report["checks"]["e2_closure_M_match"]["per_n"]) == {"4", "5", "6"}
    assert "verdict" in report["checks"]["eq32_b7_discrepancy"]


def test_validate_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_validation", lambda full=False: {"passed": False, "checks": {"x": {"passed": False}}})
    code, _, err = run(["validate"], capsys)
    assert code == 1 and "x" in err


def test_numerical_failure_exit_code(capsys, monkeypatch):
    from collective_decay.errors import NumericalFailure

    def boom(*a, **k):
        raise NumericalFailure("diverged")

    monkeypatch.setattr(cli, "evolve_full", boom)
    assert run(["evolve", "--n", "3", "--oracle"], capsys)[0] == 3


def test_console_module_entry():
    res = subprocess.run(
        [sys.executable, "-m", "collective_decay.cli", "evolve", "--e", "2", "--n", "3"], capture_output=True, text=True
    )
    assert res.returncode == 2
    assert "n >= 4" in res.stderr
