import json
import math

import pytest

from smoothlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_mertens_csv(capsys):
    code, out, _ = run(capsys, "mertens", "--n", "100,1000", "--limit", "10000")
    lines = out.splitlines()
    assert lines[0] == ("n,lambda,log_n,first_resid,first_bound,second_resid,second_bound,"
                        "third_scaled_resid,pi_n,trudgian_resid,trudgian_bound,pass")
    assert len(lines) == 3
    assert code == 1  # the literal first-formula bound fails at these n


def test_mertens_json(capsys):
    _, out, _ = run(capsys, "mertens", "--n", "1000", "--format", "json")
    assert json.loads(out)[0]["pi_n"] == 168


def test_dickman_eval(capsys):
    code, out, _ = run(capsys, "dickman", "eval", "--u", "2", "--integral", "--cdf")
    d = json.loads(out)
    assert code == 0
    assert d["rho"] == pytest.approx(1 - math.log(2))
    assert d["integral"] == pytest.approx(3 - 2 * math.log(2))
    assert d["saturated"] is False


def test_dickman_table_roundtrip(capsys, tmp_path):
    path = tmp_path / "d.tbl"
    assert run(capsys, "dickman", "table", "--u-max", "10", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "dickman", "eval", "--u", "3.5", "--table", str(path))
    assert code == 0 and json.loads(out)["rho"] == pytest.approx(0.0162295932, abs=1e-10)


def test_dickman_out_of_range(capsys):
    code, _, err = run(capsys, "dickman", "eval", "--u", "25")
    assert code == 2 and "u_max" in err


def test_psi(capsys):
    code, out, _ = run(capsys, "psi", "--n", "100", "--m", "3")
    assert code == 0 and json.loads(out) == {"n": 100, "m": 3, "upsilon": math.log(100) / math.log(3),
                                             "value": 20}
    _, out, _ = run(capsys, "psi", "--n", "1e6", "--m", "100", "--raw")
    assert out.strip() == "72271"


def test_psih(capsys):
    _, out, _ = run(capsys, "psih", "--n", "4", "--m", "2", "--raw")
    assert float(out) == pytest.approx(0.84)
    _, out, _ = run(capsys, "psih", "--n", "1000", "--m", "1000", "--approx", "--gamma", "off", "--raw")
    assert float(out) == pytest.approx(1.0)
    code, _, _ = run(capsys, "psih", "--n", "1", "--m", "2")
    assert code == 2


@pytest.mark.parametrize("kind, flag", [("harmonic", "--n"), ("harmonic-rej", "--n"),
                                        ("dickman", None), ("sm", "--m")])
def test_sample(capsys, tmp_path, kind, flag):
    path = tmp_path / "s.csv"
    argv = ["sample", kind, "--count", "500", "--seed", "3", "--out", str(path)]
    if flag:
        argv += [flag, "50"]
    assert run(capsys, *argv)[0] == 0
    first = path.read_text()
    assert first.splitlines()[0] == "value" and len(first.splitlines()) == 501
    run(capsys, *argv)
    assert path.read_text() == first


def test_sample_missing_arg(capsys):
    assert run(capsys, "sample", "sm", "--count", "10")[0] == 2


def test_verify_small_targets(capsys):
    code, out, _ = run(capsys, "verify", "sizebias")
    assert code == 0 and json.loads(out)["checks"][0]["passed"]
    code, out, _ = run(capsys, "verify", "tv", "--n", "1000")
    assert code == 0
    code, out, _ = run(capsys, "verify", "vm", "--m", "1000")
    assert code == 0
    assert run(capsys, "verify", "tv", "--n", "5")[0] == 2


def test_verify_representation_and_stein(capsys):
    code, out, _ = run(capsys, "verify", "representation", "--n", "100", "--count", "1e6",
                       "--seed", "42")
    assert code == 0
    code, out, _ = run(capsys, "verify", "stein", "--count", "200000", "--seed", "7")
    assert code == 0


def test_scan_cli(capsys, tmp_path):
    out = tmp_path / "db.csv"
    code, _, err = run(capsys, "scan", "debruijn", "--debruijn-n-grid", "1e4,1e5", "--out", str(out))
    assert code == 0 and "PASS debruijn" in err
    assert out.read_text().startswith("n,m,z,upsilon,")
    cfg = tmp_path / "c.toml"
    cfg.write_text("mc_count = 10\n")
    assert run(capsys, "scan", "kolmogorov", "--config", str(cfg))[0] == 2


def test_bad_usage_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["psi", "--n", "abc", "--m", "3"])
    assert exc.value.code == 2
