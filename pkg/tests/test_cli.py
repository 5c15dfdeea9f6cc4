import json

import pytest

from nldg.cli import main


def run(argv, capsys=None):
    code = main(argv)
    out = capsys.readouterr() if capsys else None
    return code, out


def test_solve_example1_writes_one_line_per_node(tmp_path, capsys):
    prefix = tmp_path / "sol"
    code, out = run(["solve", "--problem", "example1", "--delta-over-h", "4", "--out", str(prefix)], capsys)
    assert code == 0
    lines = (tmp_path / "sol.csv").read_text().splitlines()
    assert len(lines) == 11
    x, u, b = map(float, lines[5].split(","))
    assert x == 0.5 and u == pytest.approx(0.25, abs=5e-3)
    meta = json.loads((tmp_path / "sol.meta.json").read_text())
    assert meta["config"]["delta_over_h"] == 4
    assert meta["cond"] == pytest.approx(5.8875, rel=1e-4)
    assert "cond = 5.887" in out.out


def test_solve_example2_shows_kinks(tmp_path, capsys):
    prefix = tmp_path / "ex2"
    assert run(["solve", "--problem", "example2", "--delta_over_h", "64", "--out", str(prefix)], capsys)[0] == 0
    rows = [list(map(float, l.split(","))) for l in (tmp_path / "ex2.csv").read_text().splitlines()]
    x = [r[0] for r in rows]
    u = [r[1] for r in rows]
    k = x.index(0.4)
    left = (u[k] - u[k - 1]) / (x[k] - x[k - 1])
    right = (u[k + 1] - u[k]) / (x[k + 1] - x[k])
    assert abs(right - left) > 1.0


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('problem = "example1"\ndelta_over_h = 8\n')
    prefix = tmp_path / "a"
    assert run(["solve", "--config", str(cfg), "--out", str(prefix)], capsys)[0] == 0
    assert len((tmp_path / "a.csv").read_text().splitlines()) == 21
    assert run(["solve", "--config", str(cfg), "--delta-over-h", "4", "--out", str(prefix)], capsys)[0] == 0
    assert len((tmp_path / "a.csv").read_text().splitlines()) == 11


@pytest.mark.parametrize("content, key", [
    ('problme = "example1"\n', "problme"),
    ('delta = "wide"\n', "delta"),
    ("delta = 0.7\n", "delta"),
    ('mesh = "chebyshev"\n', "mesh"),
    ("[section]\nx = 1\n", "section"),
])
def test_bad_config_key_exits_2(tmp_path, capsys, content, key):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(content)
    code, out = run(["solve", "--config", str(cfg), "--out", str(tmp_path / "x")], capsys)
    assert code == 2
    assert f"'{key}'" in out.err


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--bogus", "1"])
    assert exc.value.code == 2
    assert "--bogus" in capsys.readouterr().err


def test_env_seed_overrides_config(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "p.toml"
    cfg.write_text('mesh = "perturbed"\nseed = 1\ndelta_over_h = 4\n')
    monkeypatch.setenv("NLDG_SEED", "5")
    assert run(["solve", "--config", str(cfg), "--out", str(tmp_path / "e")], capsys)[0] == 0
    assert json.loads((tmp_path / "e.meta.json").read_text())["config"]["seed"] == 5
    # an explicit flag still wins over the environment
    assert run(["solve", "--config", str(cfg), "--seed", "2", "--out", str(tmp_path / "f")], capsys)[0] == 0
    assert json.loads((tmp_path / "f.meta.json").read_text())["config"]["seed"] == 2


def test_reruns_are_bit_identical(tmp_path, capsys):
    args = ["study", "--problem", "example1", "--mesh", "perturbed", "--seeds", "0..2",
            "--resolutions", "4,8,16"]
    assert run(args + ["--out", str(tmp_path / "r1")], capsys)[0] == 0
    meta = json.loads((tmp_path / "r1.meta.json").read_text())
    # rerun from the echoed config alone
    cfg = meta["config"]
    toml = "".join(f"{k} = {json.dumps(v)}\n" for k, v in cfg.items() if v is not None and k != "out")
    (tmp_path / "echo.toml").write_text(toml)
    assert run(["study", "--config", str(tmp_path / "echo.toml"), "--out", str(tmp_path / "r2")], capsys)[0] == 0
    assert (tmp_path / "r1.csv").read_bytes() == (tmp_path / "r2.csv").read_bytes()
    assert (tmp_path / "r1.md").read_bytes() == (tmp_path / "r2.md").read_bytes()


def test_study_needs_two_resolutions(tmp_path, capsys):
    code, out = run(["study", "--resolutions", "4", "--out", str(tmp_path / "s")], capsys)
    assert code == 2 and "'resolutions'" in out.err


def test_cond_command(tmp_path, capsys):
    assert run(["cond", "--resolutions", "4,8", "--out", str(tmp_path / "c")], capsys)[0] == 0
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "delta_over_h,h,cond,lambda_min,lambda_max"
    assert float(lines[1].split(",")[2]) == pytest.approx(5.8875, rel=1e-4)
    assert float(lines[2].split(",")[2]) == pytest.approx(6.7743, rel=1e-4)


def test_jump_command(tmp_path, capsys):
    args = ["jump", "--problem", "example2", "--x0", "0.4", "--resolutions", "4,8,16", "--out", str(tmp_path / "j")]
    assert run(args, capsys)[0] == 0
    lines = (tmp_path / "j.csv").read_text().splitlines()
    assert lines[0] == "h,jump,delta_over_h,snap_distance"
    jumps = [float(l.split(",")[1]) for l in lines[1:]]
    assert min(jumps) > 1.0


def test_dump_matrix(tmp_path, capsys):
    path = tmp_path / "A.txt"
    assert run(["solve", "--delta-over-h", "4", "--dump-matrix", str(path), "--out", str(tmp_path / "d")], capsys)[0] == 0
    assert path.read_text().splitlines()[0].startswith("0 0 ")


def test_custom_problem_needs_forcing(tmp_path, capsys):
    code, out = run(["solve", "--problem", "custom", "--out", str(tmp_path / "c")], capsys)
    assert code == 2 and "'forcing'" in out.err
    assert run(["solve", "--problem", "custom", "--forcing", "exp(x)", "--out", str(tmp_path / "c")], capsys)[0] == 0


def test_reproduce_table1(tmp_path, capsys):
    code, out = run(["reproduce", "table1", "--out", str(tmp_path / "t1")], capsys)
    assert code == 0
    assert "[FAIL]" not in out.out
    assert "[PASS] cond vs published" in out.out
    csv_lines = (tmp_path / "t1.csv").read_text().splitlines()
    assert len(csv_lines) == 7
    assert "(published)" in (tmp_path / "t1.md").read_text()
