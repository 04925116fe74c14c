import json

import pytest

from kleinheat.cli import EXIT_CHECK, EXIT_OK, EXIT_USAGE, UsageError, build_parser, parse_grid, run


def test_parse_grid():
    assert parse_grid("1,2,5") == [1.0, 2.0, 5.0]
    assert parse_grid("1:2:0.5") == [1.0, 1.5, 2.0]
    assert parse_grid([0.5, 1]) == [0.5, 1.0]
    assert parse_grid(3) == [3.0]
    for bad in ("", "2,1", "1:2:0", "1:2"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_nu_of_zero(capsys):
    assert run(["nu", "--dim", "3", "--lambda", "0", "--rho", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "routes_agree: True" in out
    row = out.splitlines()[1].split()
    assert all(abs(float(v) - 1) < 1e-9 for v in row[2:5])


def test_count_trivial(capsys):
    assert run(["count", "--group", "trivial", "--rho", "5"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[1].split() == ["5", "1", "True"]


def test_count_json(tmp_path):
    out = tmp_path / "c.json"
    assert run(["count", "--group", "cyclic-1", "--rho", "1.5,3.5", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert [r["N"] for r in doc["results"]["rows"]] == [3, 7]
    assert doc["parameters"]["group"] == "cyclic-1"


def test_group_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"dimension": 3, "generators": [[[2, 0], [0, 0.5]]]}))
    assert run(["count", "--group", str(path), "--rho", "3"]) == EXIT_OK
    # translation length 2 ln 2
    assert capsys.readouterr().out.splitlines()[1].split()[1] == "5"


def test_heat(capsys):
    assert run(["heat", "--t", "1"]) == EXIT_OK
    assert float(capsys.readouterr().out.splitlines()[1].split()[1]) == pytest.approx(0.00825830126612423)
    assert run(["heat", "--group", "cyclic-1", "--t", "0.5,1"]) == EXIT_OK


def test_heat_uncertified(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(
        json.dumps({"dimension": 3, "generators": [[[3, 8], [1, 3]], [[[0, 1.875], -3.6125], [1.25, [0, 1.875]]]]})
    )
    assert run(["heat", "--group", str(path), "--t", "1"]) == EXIT_USAGE
    assert "allow-incomplete" in capsys.readouterr().err
    assert run(["heat", "--group", str(path), "--t", "1", "--allow-incomplete"]) == EXIT_OK


def test_verify_spectral(capsys):
    assert run(["verify-spectral", "--dim", "3", "--beta", "4", "--rho", "50,100,200"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "item1_decreasing: True" in out


def test_verify_delsarte(capsys):
    code = run(["verify-delsarte", "--lambda", "1", "--rho", "1", "--x", "0,1,3", "--samples", "20000", "--seed", "3"])
    assert code == EXIT_OK
    assert "failures: 0" in capsys.readouterr().out


def test_check_failure_exit_code():
    # a spread tolerance of zero cannot be met by three quadratures
    assert run(["nu", "--lambda", "3", "--rho", "2", "--tolerance", "0"]) == EXIT_CHECK


def test_experiment_csv_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["experiment", "--group", "cyclic-1", "--rho", "1:4:1", "--out", str(a), "--threads", "1"]) == 0
    assert run(["experiment", "--group", "cyclic-1", "--rho", "1:4:1", "--out", str(b), "--threads", "8"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "rho,N,p,p_tail,V,ratio,complete"


def test_sandwich_and_exponent(capsys):
    assert run(["sandwich", "--group", "cyclic-1", "--configs", "50"]) == EXIT_OK
    assert "violations: 0" in capsys.readouterr().out
    assert run(["exponent", "--group", "schottky-sl2c"]) == EXIT_OK
    assert "estimate" in capsys.readouterr().out


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('seed = 5\n[count]\ngroup = "cyclic-1"\nrho = [1.5, 3.5]\n')
    assert run(["count", "--config", str(cfg)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert [l.split()[1] for l in lines[1:]] == ["3", "7"]
    # flags win over the file
    assert run(["count", "--config", str(cfg), "--rho", "2.5"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[1].split()[1] == "5"


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[count]\nbogus = 1\n")
    assert run(["count", "--config", str(cfg)]) == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["count", "--group", "no-such-group"],
        ["count", "--group", "trivial", "--rho", "3,1"],
        ["count", "--group", "trivial", "--x", "0,1"],
        ["count", "--bogus-flag"],
        ["heat", "--group", "schottky-sl2r"],
        ["count", "--group", "schottky-sl2c", "--rho", "30", "--frontier-cap", "100"],
    ],
)
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_help_lists_defaults(capsys):
    parser = build_parser()
    sub = next(a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction")
    for name in ("count", "heat", "nu", "verify-delsarte", "verify-spectral", "sandwich", "experiment", "exponent"):
        assert run([name, "--help"]) == EXIT_OK
        text = capsys.readouterr().out
        assert "--out" in text and "default" in text
    assert len(sub.choices) == 8
