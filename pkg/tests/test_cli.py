import io
import json
import numpy as np
import pandas as pd
from scipy import special
from ksdiff import cli as kcli
from ksdiff.exceptions import ConvergenceError
from ksdiff.kilbas_saigo import KSParams, ks_eval

ml_half = ["--a", "0.5", "--m", "1", "--l", "0"]


def _json(path):
    with open(path) as f:
        return json.load(f)


def test_ks_eval_json(tmp_path):
    """Does ks-eval write a valid JSON table with E_{1/2}(-1) in it?"""
    out = str(tmp_path / "ks.json")
    argv = ["ks-eval", *ml_half, "--x", "-1", "0", "--format", "json", "-o", out]
    code = kcli.main(argv)
    assert code == kcli.EXIT_OK
    doc = _json(out)
    assert doc["header"]["command"].startswith("ksdiff ks-eval")
    assert doc["header"]["seed"] == 0
    assert doc["columns"][:4] == ["re_z", "im_z", "re_E", "im_E"]
    assert np.isclose(doc["rows"][0]["re_E"], 0.4275836, atol=1e-7)
    assert doc["rows"][1]["re_E"] == 1


def test_ks_eval_csv(capsys):
    code = kcli.main(["ks-eval", *ml_half, "--z=-3+2j"])
    assert code == kcli.EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("# command: ")
    row = text.splitlines()[-1].split(",")
    assert float(row[0]) == -3
    assert float(row[1]) == 2
    expected = ks_eval(-3 + 2j, KSParams(0.5, 1.0, 0.0))
    assert np.isclose(float(row[2]), expected.real)


def test_usage_errors(capsys):
    """Are bad parameters and missing options usage errors?"""
    assert kcli.main(["ks-eval", "--a", "0.5", "--m", "0", "--l", "0", "--x", "1"]) == 2
    assert kcli.main(["ks-eval", "--m", "1", "--l", "0", "--x", "1"]) == 2
    assert kcli.main(["ks-eval", *ml_half, "--z", "one"]) == 2
    assert kcli.main(["ks-eval", *ml_half]) == 2
    assert kcli.main(["caputo", "--alpha", "0.5", "--function", "sine"]) == 2
    assert "missing required options: --a" in capsys.readouterr().err


def test_numerical_failure(monkeypatch, capsys):
    def fail(args, argv):
        raise ConvergenceError("no convergence")

    monkeypatch.setitem(kcli.COMMANDS, "tables", fail)
    assert kcli.main(["tables"]) == kcli.EXIT_NUMERIC
    assert "numerical failure" in capsys.readouterr().err


def test_verify(tmp_path):
    out = str(tmp_path / "verify.json")
    assert kcli.main(["verify", "--suite", "mb-constant", "-o", out]) == kcli.EXIT_OK
    doc = _json(out)
    assert doc["passed"]
    assert doc["suite"] == "mb-constant"
    assert doc["checks"][0]["suite"] == "mb-constant"


def test_verify_deterministic_suites(tmp_path):
    """Do all suites without Monte Carlo sampling pass from the command line?"""
    for suite in [
        "double-gamma",
        "ks-representations",
        "ks-asymptotic",
        "spectral",
        "eigenfunction",
        "ks-bounds",
    ]:
        out = str(tmp_path / "{}.json".format(suite))
        code = kcli.main(["verify", "--suite", suite, "-o", out])
        assert code != kcli.EXIT_NUMERIC
        failed = [c["name"] for c in _json(out)["checks"] if not c["passed"]]
        assert failed == []
        assert code == kcli.EXIT_OK


def test_simulate_reproducible(capsys):
    """Does a fixed seed give byte-identical output?"""
    argv = [
        "simulate",
        "--model", "ou",
        "--alpha", "0.5",
        "--gamma", "0.25",
        "--t", "1",
        "--x0", "0.3",
        "--paths", "50",
        "--dt", "1e-3",
        "--seed", "5",
    ]  # fmt: skip
    texts = []
    for _ in range(2):
        assert kcli.main(argv) == kcli.EXIT_OK
        texts.append(capsys.readouterr().out)
    assert texts[0] == texts[1]
    assert "# seed: 5" in texts[0]
    table = pd.read_csv(io.StringIO(texts[0]), comment="#")
    assert list(table.columns) == ["path", "z", "x"]
    assert len(table) == 50
    assert (table.z > 0).all()


def test_config_file(tmp_path):
    """Are config values used unless a flag overrides them?"""
    config = tmp_path / "ks.cfg"
    config.write_text("# Mittag-Leffler 1/2\na = 0.5\nm = 1\nl = 0\nx = -1, 0\n")
    out = str(tmp_path / "ks.json")
    argv = ["ks-eval", "--config", str(config), "--format", "json", "-o", out]
    assert kcli.main(argv) == kcli.EXIT_OK
    assert len(_json(out)["rows"]) == 2
    assert kcli.main(argv + ["--x", "-2"]) == kcli.EXIT_OK
    rows = _json(out)["rows"]
    assert len(rows) == 1
    assert np.isclose(rows[0]["re_E"], special.erfcx(2.0))
    config.write_text("a = 0.5\nwidth = 3\n")
    assert kcli.main(argv) == 2


def test_seed_resolution(monkeypatch):
    monkeypatch.setenv("KSDIFF_SEED", "9")
    assert kcli.parse_args(["tables"]).seed == 9
    assert kcli.parse_args(["tables", "--seed", "3"]).seed == 3
    monkeypatch.delenv("KSDIFF_SEED")
    assert kcli.parse_args(["tables"]).seed == 0


def test_dgamma(tmp_path):
    out = str(tmp_path / "dg.json")
    argv = ["dgamma", "--tau", "1", "--z", "1", "5", "--format", "json", "-o", out]
    assert kcli.main(argv) == kcli.EXIT_OK
    rows = _json(out)["rows"]
    assert abs(rows[0]["re_logG"]) < 1e-9
    assert np.isclose(np.exp(rows[1]["re_logG"]), 12)


def test_caputo(tmp_path):
    out = tmp_path / "caputo.csv"
    argv = ["caputo", "--alpha", "0.5", "--function", "const", "--n", "11"]
    assert kcli.main(argv + ["-o", str(out)]) == kcli.EXIT_OK
    table = pd.read_csv(out, comment="#")
    assert len(table) == 11
    assert np.allclose(table.D_f, 0)
    argv = ["caputo", "--alpha", "0.5", "--function", "power:1", "--n", "201"]
    assert kcli.main(argv + ["-o", str(out)]) == kcli.EXIT_OK
    table = pd.read_csv(out, comment="#")
    assert np.allclose(table.D_f[1:], table.exact[1:], atol=1e-10)


def test_solve(tmp_path):
    """Is the stretched OU conditional mean y E(-t^beta) reproduced?"""
    out = str(tmp_path / "solve.json")
    argv = [
        "solve",
        "--model", "ou",
        "--alpha", "0.5",
        "--gamma", "0.25",
        "--t", "0", "1",
        "--x", "1.3",
        "--initial", "identity",
        "--N", "4",
        "--format", "json",
        "-o", out,
    ]  # fmt: skip
    assert kcli.main(argv) == kcli.EXIT_OK
    doc = _json(out)
    assert doc["header"]["tolerances"]["N"] == 4
    u = [row["u"] for row in doc["rows"]]
    decay = ks_eval(-1.0, KSParams.stretched(0.5, 0.25)).real
    assert np.allclose(u, [1.3, 1.3 * decay], rtol=1e-8)
    assert kcli.main(argv + ["--direction", "forward"]) == 2


def test_tables(tmp_path):
    out = tmp_path / "ratio.csv"
    assert kcli.main(["tables", "--table", "hyperbolic-ratio", "-o", str(out)]) == 0
    table = pd.read_csv(out, comment="#")
    assert list(table.columns) == ["n", "T_n", "envelope", "ratio"]
    assert abs(table.ratio.iloc[-1] - 1) < 0.02


# test_ks_eval_json()
# test_config_file()
# test_solve()
