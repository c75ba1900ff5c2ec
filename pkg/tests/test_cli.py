import json

import pytest

from cp1hqe import cli
from cp1hqe.suites import INTERPRETATIONS, REPORT_SCHEMA


def _run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_getzler_report(capsys):
    code, out, err = _run(["getzler", "--K", "6", "--points", "2"], capsys)
    report = json.loads(out)
    assert code == 0 and report["schema"] == REPORT_SCHEMA
    assert report["summary"]["status"] == "pass"
    assert {q["id"] for q in report["metadata"]["open_questions"]} == set(INTERPRETATIONS)
    assert all(set(c) >= {"identity", "cuts", "point", "status", "witness"} for c in report["checks"])
    assert "passed" in err


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["smatrix", "--points", "1", "--dmax", "3", "--order", "6", "--output", str(a)]) == 0
    assert cli.main(["smatrix", "--points", "1", "--dmax", "3", "--order", "6", "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# demo\nseed = 7\npoints=2\nK=3\n")
    args = cli.build_parser().parse_args(["getzler", "--config", str(cfg), "--K", "4"])
    run, extra = cli.resolve(args)
    assert (run.seed, run.points, run.K) == (7, 2, 4)
    assert extra["jobs"] == 1


def test_env_seed(monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "41")
    run, _ = cli.resolve(cli.build_parser().parse_args(["fock"]))
    assert run.seed == 41
    run, _ = cli.resolve(cli.build_parser().parse_args(["fock", "--seed", "2"]))
    assert run.seed == 2


def test_m_n_restrict_pairs():
    run, _ = cli.resolve(cli.build_parser().parse_args(["hqe-equivalence", "--m", "0", "--n", "0"]))
    assert run.ms == (0,) and run.ns == (0,)


@pytest.mark.parametrize("args", [["bogus"], ["getzler", "--K", "0"], ["getzler", "--points", "-1"],
                                  ["getzler", "--jobs", "0"], ["getzler", "--config", "/nonexistent"]])
def test_usage_errors(args, capsys):
    assert cli.main(args) == cli.EXIT_USAGE


def test_bad_config_lines(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert cli.main(["getzler", "--config", str(cfg)]) == cli.EXIT_USAGE
    cfg.write_text("seed = x\n")
    assert cli.main(["getzler", "--config", str(cfg)]) == cli.EXIT_USAGE
    assert "must be an integer" in capsys.readouterr().err


def test_bad_env_seed(monkeypatch, capsys):
    monkeypatch.setenv(cli.SEED_ENV, "abc")
    assert cli.main(["fock"]) == cli.EXIT_USAGE


def test_failure_exit_code(monkeypatch, capsys):
    from cp1hqe import suites
    fake = suites.Check("always_false", "getzler", 1, False, {"mode": "symbolic"}, {}, "1")
    monkeypatch.setitem(suites.SUITES, "getzler", [lambda cfg: [fake]])
    code, out, _ = _run(["getzler"], capsys)
    assert code == cli.EXIT_FAIL
    assert json.loads(out)["checks"][0]["witness"] == "1"


def test_cut_overflow_exit_code(monkeypatch, capsys):
    from cp1hqe import suites
    from cp1hqe.series import SeriesError

    def boom(cfg):
        raise SeriesError("window too shallow")
    monkeypatch.setitem(suites.SUITES, "getzler", [boom])
    assert cli.main(["getzler"]) == cli.EXIT_INTERNAL
    assert "cut overflow" in capsys.readouterr().err


def test_help_exits_cleanly(capsys):
    assert cli.main(["--help"]) == cli.EXIT_PASS
