import json
import os

import pytest

from exitdom import cli
from exitdom.io import OUTDIR_ENV


def run(args):
    return cli.main(args)


def read(path):
    with open(path) as fh:
        return fh.read()


def test_no_command_is_usage_error(capsys):
    assert run([]) == 1


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    out = capsys.readouterr().out
    for name in ("rw-survival", "rw-dominance", "rw-independence", "rw-reweight",
                 "rw-factorization", "bm-survival", "bm-dominance", "bm-couple",
                 "bm-independence", "bm-reweight", "verify-all"):
        assert name in out


def test_subcommand_help_shows_units_and_defaults(capsys):
    assert run(["rw-survival", "--help"]) == 0
    out = capsys.readouterr().out
    assert "(steps)" in out and "[default: 2]" in out


def test_rw_survival_csv_rows(tmp_path, capsys):
    assert run(["rw-survival", "--p", "0.6", "--k", "2", "--horizon", "2",
                "--outdir", str(tmp_path)]) == 0
    lines = read(tmp_path / "rw_survival.csv").splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data == ["n,survival", "0,1", "1,1", "2,0.48"]
    # resolved config is echoed and embedded
    assert "# p = 0.6" in lines
    assert "p = 0.6" in capsys.readouterr().out
    doc = json.loads(read(tmp_path / "rw_survival.json"))
    assert doc["schema_version"] == 1
    assert doc["config"]["horizon"] == "2"
    assert doc["survival"]["values"][2] == "0.48"


def test_rw_survival_rational_mode(tmp_path):
    assert run(["rw-survival", "--p", "3/5", "--k", "2", "--horizon", "2",
                "--mode", "rational", "--outdir", str(tmp_path)]) == 0
    data = [l for l in read(tmp_path / "rw_survival.csv").splitlines()
            if not l.startswith("#")]
    assert data[-1] == "2,12/25"


def test_bad_flag_value_is_exit_1(tmp_path, capsys):
    assert run(["rw-survival", "--k", "two", "--outdir", str(tmp_path)]) == 1
    assert "bad value for key 'k'" in capsys.readouterr().err


def test_bad_domain_value_is_exit_1(tmp_path, capsys):
    assert run(["rw-survival", "--p", "1.5", "--outdir", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err


def test_unwritable_outdir_is_exit_3(tmp_path, capsys):
    target = tmp_path / "blocked"
    target.write_text("")  # a file where a directory is needed
    assert run(["rw-survival", "--outdir", str(target / "sub")]) == 3


def test_config_file_and_precedence(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("# demo config\np = 0.7\nhorizon = 3\n")
    assert run(["rw-survival", "--horizon", "2", "--config", str(cfgfile),
                "--outdir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "p = 0.7" in out       # from file
    assert "horizon = 2" in out   # flag wins over file


def test_config_file_unknown_key(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("nonsense = 1\n")
    assert run(["rw-survival", "--config", str(cfgfile),
                "--outdir", str(tmp_path)]) == 1
    assert "nonsense" in capsys.readouterr().err


def test_config_file_syntax_error(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("p 0.7\n")
    assert run(["rw-survival", "--config", str(cfgfile),
                "--outdir", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "run.cfg:1" in err


def test_outdir_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTDIR_ENV, str(tmp_path))
    assert run(["rw-survival", "--horizon", "2"]) == 0
    assert (tmp_path / "rw_survival.csv").exists()


def test_rw_dominance_ok(tmp_path, capsys):
    assert run(["rw-dominance", "--ps", "0.5,0.7", "--k", "2", "--horizon", "60",
                "--outdir", str(tmp_path)]) == 0
    assert "violations: 0" in capsys.readouterr().out
    doc = json.loads(read(tmp_path / "rw_dominance.json"))
    assert doc["report"]["n_violations"] == 0


def test_rw_independence_tolerance_failure_is_exit_2(tmp_path):
    assert run(["rw-independence", "--tol", "1e-300", "--truncation", "200",
                "--outdir", str(tmp_path)]) == 2
    assert run(["rw-independence", "--truncation", "200",
                "--outdir", str(tmp_path)]) == 0


def test_rw_reweight_and_factorization(tmp_path):
    assert run(["rw-reweight", "--outdir", str(tmp_path)]) == 0
    doc = json.loads(read(tmp_path / "rw_reweight.json"))
    assert doc["abs_diff"] <= max(doc["tail_bound"], 1e-10)
    assert run(["rw-factorization", "--outdir", str(tmp_path)]) == 0


def test_bm_survival_csv(tmp_path):
    assert run(["bm-survival", "--lambdas", "0,1", "--times", "1",
                "--outdir", str(tmp_path)]) == 0
    data = [l for l in read(tmp_path / "bm_survival.csv").splitlines()
            if not l.startswith("#")]
    assert data[0] == "lambda,t,survival,error_bound"
    assert data[1].startswith("0,1,0.37077742979952")
    assert data[2].startswith("1,1,0.24693790529559")


def test_bm_dominance(tmp_path, capsys):
    assert run(["bm-dominance", "--lambdas", "0,1", "--times", "0.5,1",
                "--outdir", str(tmp_path)]) == 0
    assert "violations: 0" in capsys.readouterr().out


def test_bm_couple(tmp_path):
    assert run(["bm-couple", "--n-paths", "100", "--dt", "1e-3",
                "--time-horizon", "0.2", "--outdir", str(tmp_path)]) == 0
    doc = json.loads(read(tmp_path / "bm_couple.json"))
    assert doc["violation_fraction"] <= 1e-3
    assert len(doc["hit_mean"]) == 3


def test_bm_independence_and_path_dump(tmp_path):
    assert run(["bm-independence", "--n-paths", "5000", "--dump-paths", "1",
                "--outdir", str(tmp_path)]) == 0
    doc = json.loads(read(tmp_path / "bm_independence.json"))
    assert doc["p_value"] >= 1e-3
    dump = [l for l in read(tmp_path / "bm_independence_paths.csv").splitlines()
            if not l.startswith("#")]
    assert dump[0] == "path,time,side,terminal"
    assert len(dump) == 5001


def test_bm_reweight(tmp_path):
    assert run(["bm-reweight", "--n-paths", "5000",
                "--outdir", str(tmp_path)]) == 0
    doc = json.loads(read(tmp_path / "bm_reweight.json"))
    assert doc["z_score"] <= 4.0
    assert not (tmp_path / "bm_reweight_paths.csv").exists()  # dump is opt-in


def test_verify_all_quick(tmp_path, capsys):
    assert run(["verify-all", "--profile", "quick",
                "--outdir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 10
    assert "10/10 checks passed" in out
    txt = read(tmp_path / "verify_all.txt")
    assert "10/10 checks passed" in txt
    doc = json.loads(read(tmp_path / "verify_all.json"))
    assert all(r["passed"] for r in doc["results"])


def test_verify_all_bad_profile(tmp_path, capsys):
    assert run(["verify-all", "--profile", "huge",
                "--outdir", str(tmp_path)]) == 1
