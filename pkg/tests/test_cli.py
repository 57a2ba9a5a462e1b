import csv
import io

import pytest

from iham.cli import run
from iham.config import ConfigError, case_to_toml, loads_config
from iham.problem import ManufacturedCase, catalog_case

TABLE1_ARGS = [
    "refine", "--case", "ex1",
    "--param", "k1=5", "--param", "k2=3", "--param", "alpha=0.333333333333",
    "--method", "improved", "--N", "32:4096",
]


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_refine_reproduces_first_table_row(capsys):
    assert run(TABLE1_ARGS) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["N", "error", "order"]
    assert rows[1][0] == "32" and f"{float(rows[1][1]):.4e}" == "2.7133e-03"
    assert rows[-1][0] == "average" and rows[-1][1] == ""
    assert float(rows[-1][2]) == pytest.approx(2.1093, abs=5e-4)
    assert len(rows) == 10


def test_refine_digits(capsys):
    assert run(TABLE1_ARGS + ["--digits", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1] == "32,2.7133e-03,"
    assert out[2] == "64,4.0582e-04,2.7411"
    assert out[-1] == "average,,2.1093"


def test_greens_check(capsys):
    args = ["greens-check", "--alpha", "0.3333333333", "--beta-minus", "1", "--beta-plus", "2", "--W", "1", "--N", "64"]
    assert run(args) == 0
    rows = _rows(capsys.readouterr().out)
    record = dict(zip(rows[0], rows[1]))
    assert float(record["max_error"]) <= 1e-10
    assert record["status"] == "pass"


def test_list_cases(capsys):
    assert run(["list-cases"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert [r[0] for r in rows[1:]] == ["ex1", "ex2", "ex3", "ex2d"]
    assert "k1=5" in rows[1][2]


def test_solve1d(capsys):
    assert run(["solve1d", "--case", "ex1", "--N", "32", "--digits", "5"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["N", "method", "j", "h_l", "h_r", "error"]
    assert rows[1][:3] == ["32", "improved", "10"]
    assert rows[1][5] == "2.7133e-03"


def test_solve1d_emit_solution(capsys):
    assert run(["solve1d", "--case", "ex1", "--N", "8", "--emit-solution"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0] == ["x", "u"] and len(rows) == 10
    assert float(rows[1][0]) == 0.0 and float(rows[1][1]) == 0.0


def test_solve2d(capsys):
    assert run(["solve2d", "--case", "ex2d", "--N", "16"]) == 0
    rows = _rows(capsys.readouterr().out)
    record = dict(zip(rows[0], rows[1]))
    assert float(record["error"]) == pytest.approx(3.0436e-03, rel=2e-2)
    assert float(record["residual"]) <= 1e-12


def test_truncation(capsys):
    assert run(["truncation", "--case", "ex1", "--N", "32"]) == 0
    record = dict(zip(*_rows(capsys.readouterr().out)))
    assert float(record["T_j"]) == pytest.approx(4.5144, rel=5e-3)
    assert float(record["T_j1"]) == pytest.approx(-6.2990, rel=5e-3)
    assert run(["truncation", "--case", "ex1", "--N", "16", "--all"]) == 0
    assert len(_rows(capsys.readouterr().out)) == 16


def test_table_format(capsys):
    assert run(["refine", "--case", "ex1", "--N", "32:128", "--format", "table"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split() == ["N", "||E||_inf", "order"]
    assert lines[1].split() == ["32", "2.7133e-03"]


@pytest.mark.parametrize(
    "args",
    [
        [],
        ["frobnicate"],
        ["refine", "--case", "ex1", "--param", "alpha=1/3", "--N", "32:64"],
        ["refine", "--case", "ex1"],
        ["refine", "--case", "ex1", "--N", "32:100"],
        ["refine", "--case", "ex1", "--param", "gamma=1", "--N", "32:64"],
        ["solve1d"],
        ["solve2d", "--case", "ex1"],
        ["greens-check", "--alpha", "0.5", "--beta-minus", "1", "--beta-plus", "1", "--N", "4"],
    ],
)
def test_usage_errors(args, capsys):
    assert run(args) == 1
    assert capsys.readouterr().err


def test_validation_errors(capsys):
    assert run(["solve1d", "--case", "ex1", "--param", "alpha=1.5"]) == 3
    assert "interface outside domain" in capsys.readouterr().err
    assert run(["greens-check", "--alpha", "0.5", "--beta-minus", "-1", "--beta-plus", "1"]) == 3


def test_numerical_failure(capsys):
    assert run(["solve2d", "--case", "ex2d", "--N", "32", "--max-iter", "2"]) == 2
    assert "residual" in capsys.readouterr().err


def test_output_file_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(TABLE1_ARGS + ["--out", str(a)]) == 0
    assert run(TABLE1_ARGS + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().startswith(b"N,error,order\n")


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex3"])
def test_config_matches_flags(name, tmp_path, capsys):
    path = tmp_path / f"{name}.toml"
    path.write_text(case_to_toml(catalog_case(name)), encoding="utf-8")
    assert run(["refine", "--case", name, "--N", "32:256"]) == 0
    from_flags = capsys.readouterr().out
    assert run(["refine", "--config", str(path), "--N", "32:256"]) == 0
    assert capsys.readouterr().out == from_flags


def test_config_matches_flags_2d(tmp_path, capsys):
    path = tmp_path / "ex2d.toml"
    assert run(["list-cases", "--template", "ex2d", "--out", str(path)]) == 0
    assert run(["solve2d", "--case", "ex2d", "--N", "16"]) == 0
    from_flags = capsys.readouterr().out
    assert run(["solve2d", "--config", str(path), "--N", "16"]) == 0
    assert capsys.readouterr().out == from_flags


CONFIG = """
domain = [0.0, 1.0]
alpha = 0.4

[beta]
left = 2.0
right = "5"

[f]
left = "0"
right = "0"

[jumps]
v = 0.0
w = 0.7

[boundary]
left = "0"
right = "0"

[solver]
N = 40
"""


def test_config_with_delta_jumps(tmp_path, capsys):
    problem, solver = loads_config(CONFIG)
    assert not isinstance(problem, ManufacturedCase)
    assert solver == {"N": 40}
    assert problem.jump_values() == pytest.approx((0.2, 0.0))
    path = tmp_path / "p.toml"
    path.write_text(CONFIG, encoding="utf-8")
    assert run(["solve1d", "--config", str(path)]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[1][0] == "40" and rows[1][5] == ""
    # no exact solution, so refinement is refused
    assert run(["refine", "--config", str(path), "--N", "8:16"]) == 1


@pytest.mark.parametrize(
    "text, match",
    [
        ("alpha = 0.5", "domain"),
        ("domain = [0.0, 1.0]\nalpha = 0.5\n", r"\[beta\]"),
        ("domain = [0, 1]\nalpha = 0.5\n[beta]\nleft = 1\n", "left"),
        ("domain = [0, 1]\nalpha = 0.5\ncolour = 1\n", "unknown"),
        ("domain = [0, 1\n", "invalid"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        loads_config(text)


def test_bad_config_exit_codes(tmp_path):
    assert run(["solve1d", "--config", str(tmp_path / "missing.toml")]) == 3
    bad = tmp_path / "bad.toml"
    bad.write_text('domain = [0.0, 1.0]\nalpha = 0.5\n[beta]\nleft = "1 +"\nright = "1"\n[boundary]\nleft="0"\nright="0"\n')
    assert run(["solve1d", "--config", str(bad)]) == 3
