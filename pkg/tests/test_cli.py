import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qcfactor.cli as cli
from qcfactor.cli import (EXIT_DIVERGENCE, EXIT_FAIL, EXIT_PASS, EXIT_USAGE, RunConfig,
                          UsageError, main, parse_coefficient, parse_h_list,
                          parse_nonlinearity, parse_tensor, thread_count)
from qcfactor.disk_solver import SolverDivergence

SOLVE_REGRESSION = 3.5e-4  # L-inf node error, solve --f exp --rho 0.9 --bc lb-disk --h 1/128


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(out):
    return json.loads(out)


def kv(out):
    pairs = {}
    for tok in out.split():
        k, _, v = tok.partition("=")
        pairs[k] = v
    return pairs


# -- convert ----------------------------------------------------------------
def test_convert_mu_to_tensor(capsys):
    code, out, _ = run(capsys, "convert", "--mu", "0.5", "0.5")
    got = kv(out)
    assert code == EXIT_PASS
    assert float(got["a11"]) == pytest.approx(1.0, abs=1e-14)
    assert float(got["a12"]) == pytest.approx(-2.0, abs=1e-14)
    assert float(got["a22"]) == pytest.approx(5.0, abs=1e-14)
    assert float(got["K"]) == pytest.approx(5.8284, abs=1e-4)
    assert float(got["det"]) == pytest.approx(1.0, abs=1e-13)


def test_convert_identity_tensor(capsys):
    code, out, _ = run(capsys, "convert", "--tensor", "1", "0", "1")
    got = kv(out)
    assert code == EXIT_PASS
    assert got["mu"] == "0,0" and got["K"] == "1"


def test_convert_round_trip(capsys):
    _, out, _ = run(capsys, "convert", "--mu", "0.3", "0")
    got = kv(out)
    code, out, _ = run(capsys, "convert", "--tensor", got["a11"], got["a12"], got["a22"])
    re, im = (float(v) for v in kv(out)["mu"].split(","))
    assert code == EXIT_PASS
    assert re == pytest.approx(0.3, abs=1e-15) and abs(im) <= 1e-15


@pytest.mark.parametrize("argv", [
    ("convert", "--mu", "1", "0"),
    ("convert", "--mu", "0.8", "0.8"),
    ("convert", "--tensor", "1", "0", "2"),
    ("convert", "--tensor", "-1", "0", "-1"),
    ("convert",),
    ("frobnicate",),
])
def test_convert_rejects_bad_input(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and err.startswith("error:")


# -- verify -----------------------------------------------------------------
def test_verify_spiral_on_the_disk(capsys):
    code, out, _ = run(capsys, "verify", "lb-disk", "--tensor", "spiral",
                       "--h", "1/64,1/128,1/256", "--margin", "0.1")
    rep = report(out)
    assert code == EXIT_PASS
    assert rep["command"] == "verify"
    assert 1.8 <= rep["summary"]["order"] <= 2.2
    assert [r["h"] for r in rep["results"]] == [1 / 64, 1 / 128, 1 / 256]
    for row in rep["results"]:
        assert set(row) >= {"id", "h", "linf", "l2", "order", "pass"}


def test_verify_dead_zone(capsys):
    code, out, _ = run(capsys, "verify", "dead-zone", "--q", "0.5", "--nu", "const:0.7071")
    assert code == EXIT_PASS
    assert 1.8 <= report(out)["summary"]["order"] <= 2.2


def test_verify_single_grid_warns(capsys):
    code, out, err = run(capsys, "verify", "lb-disk", "--h", "1/16")
    rep = report(out)
    assert code == EXIT_PASS
    assert rep["summary"]["order"] is None and rep["summary"]["warning"]
    assert "warning" in err


def test_verify_bound_failure(capsys):
    code, out, _ = run(capsys, "verify", "lb-disk", "--h", "1/32,1/64,1/128", "--bound", "1e-12")
    assert code == EXIT_FAIL and report(out)["summary"]["pass"] is False


def test_verify_weak_residual_option(capsys):
    code, out, _ = run(capsys, "verify", "lb-disk", "--tensor", "spiral", "--h", "1/32",
                       "--bumps", "5")
    assert code == EXIT_PASS
    assert "weak_relative" in out


@pytest.mark.parametrize("argv", [
    ("verify", "no-such-id"),
    ("verify", "lb-disk", "--h", "0"),
    ("verify", "lb-disk", "--h", "1/x"),
    ("verify", "lb-disk", "--tensor", "bogus"),
    ("verify", "dead-zone", "--tensor", "spiral"),
    ("verify", "lb-disk", "--tensor", "radial:1.5"),
    ("verify", "lb-disk", "--tensor", "radial:table:/nonexistent/table.csv"),
])
def test_verify_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and "error:" in err


def test_verify_table_profile(capsys, tmp_path):
    table = tmp_path / "nu.csv"
    table.write_text("t,nu\n0,0.3\n1,0.6\n")
    code, _, _ = run(capsys, "verify", "lb-disk", "--tensor", f"radial:table:{table}",
                     "--h", "1/32,1/64,1/128")
    assert code == EXIT_PASS


def test_kinked_table_fails_strong_but_not_weak(capsys, tmp_path):
    # a kink in nu at |z| = 1/2 leaves the tensor only Lipschitz there
    table = tmp_path / "nu.csv"
    table.write_text("t,nu\n0,0.3\n0.5,0.6\n1,0.4\n")
    code, out, _ = run(capsys, "verify", "lb-disk", "--tensor", f"radial:table:{table}",
                       "--h", "1/32,1/64,1/128", "--bumps", "10")
    rows = report(out)["results"]
    assert code == EXIT_FAIL
    assert rows[-1]["linf"] > 0.5
    weak = [r["weak_relative"] for r in rows]
    assert weak[0] > weak[1] > weak[2] and weak[2] <= 1e-4


def test_report_files_and_determinism(capsys, tmp_path, monkeypatch):
    out_dir = tmp_path / "run"
    argv = ("verify", "lb-disk", "--tensor", "spiral", "--h", "1/32,1/64,1/128",
            "--out", str(out_dir))

    def snapshot(threads):
        monkeypatch.setenv("QCFACTOR_THREADS", threads)
        code, out, _ = run(capsys, *argv)
        assert code == EXIT_PASS
        files = {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}
        return out, files

    first = snapshot("1")
    second = snapshot("4")
    third = snapshot("4")
    assert first == second == third
    names = set(first[1])
    assert {"report.json", "config.txt", "residual_lb-disk_h32.csv"} <= names
    csv = first[1]["residual_lb-disk_h32.csv"].decode().splitlines()
    assert csv[0] == "x,y,value" and len(csv) > 100
    cfg = RunConfig.from_text(first[1]["config.txt"].decode())
    assert cfg.hs == (1 / 32, 1 / 64, 1 / 128) and cfg.tensor == "spiral"


def test_unwritable_output_is_a_usage_error(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "verify", "lb-disk", "--h", "1/16", "--out", str(blocker / "x"))
    assert code == EXIT_USAGE and "cannot write" in err


# -- heat -------------------------------------------------------------------
@pytest.mark.parametrize("argv", [
    ("heat", "--a", "1", "--tensor", "radial:0.7071", "--t", "0.5,1,2"),
    ("heat", "--a", "1", "--tensor", "identity"),
    ("heat", "--a", "2", "--t", "0.25"),
])
def test_heat_examples(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_PASS
    assert 1.8 <= report(out)["summary"]["order"] <= 2.2


def test_heat_rejects_early_times(capsys):
    code, _, _ = run(capsys, "heat", "--t", "0.05")
    assert code == EXIT_USAGE


# -- solve ------------------------------------------------------------------
def test_solve_regression_bound(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--f", "exp", "--rho", "0.9", "--bc", "lb-disk",
                       "--h", "1/128", "--out", str(tmp_path))
    rep = report(out)
    assert code == EXIT_PASS
    assert rep["results"][0]["linf"] <= SOLVE_REGRESSION
    assert rep["checks"]["converged"] and rep["checks"]["monotone"]
    for name in ("T.csv", "u.csv", "iterations.csv", "report.json", "config.txt"):
        assert (tmp_path / name).is_file()


def test_solve_harmonic_max_principle(capsys):
    code, out, _ = run(capsys, "solve", "--f", "zero", "--bc", "re", "--h", "1/64")
    rep = report(out)
    assert code == EXIT_PASS
    assert rep["checks"]["max_principle"] is True
    assert rep["results"][0]["linf"] <= 1e-12


def test_solve_spiral_composition_matches_exact(capsys):
    code, out, _ = run(capsys, "solve", "--tensor", "spiral", "--f", "exp", "--rho", "0.9",
                       "--bc", "lb-disk")
    rep = report(out)
    assert code == EXIT_PASS
    assert rep["map"] == "radial"
    assert rep["results"][0]["linf"] <= 5e-3


def test_solve_divergence_exit_code(capsys, tmp_path, monkeypatch):
    from qcfactor.disk_solver import solve_dirichlet
    from qcfactor.fields import Nonlinearity

    best = solve_dirichlet(1.0, Nonlinearity.zero(), lambda w: np.zeros(np.shape(w)),
                           cli.SolveOptions(h=1 / 16))

    def explode(*args, **kwargs):
        raise SolverDivergence("residual grew", best)

    monkeypatch.setattr(cli, "factorize", explode)
    code, out, err = run(capsys, "solve", "--h", "1/16", "--out", str(tmp_path))
    assert code == EXIT_DIVERGENCE
    assert "diverged" in err
    assert report(out)["results"][0]["pass"] is False
    assert (tmp_path / "best_T.csv").read_text().startswith("x,y,value")


@pytest.mark.parametrize("argv", [
    ("solve", "--f", "cubic"),
    ("solve", "--h", "1/32,1/64"),
    ("solve", "--center", "abc"),
    ("solve", "--relaxation", "2"),
    ("solve", "--bc", "nowhere"),
])
def test_solve_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == EXIT_USAGE


# -- grammar and plumbing ---------------------------------------------------
def test_parsers():
    assert parse_h_list("1/64, 1/128") == (1 / 64, 1 / 128)
    assert parse_coefficient("const:0.5") == 0.5
    assert parse_nonlinearity("power:0.5").param == 0.5
    assert parse_nonlinearity("exp:2").tag == "exp-scaled"
    A = parse_tensor("const:1,-2,5")
    assert np.allclose(A(np.array(0.3j)), (1.0, -2.0, 5.0))
    assert parse_tensor("const:0.5").structure == "constant"
    with pytest.raises(UsageError):
        parse_tensor("const:1,2")
    with pytest.raises(UsageError):
        parse_nonlinearity("power")


def test_thread_count(monkeypatch):
    monkeypatch.setenv("QCFACTOR_THREADS", "2")
    assert thread_count(5) == 2 and thread_count(1) == 1
    for bad in ("zero", "0"):
        monkeypatch.setenv("QCFACTOR_THREADS", bad)
        with pytest.raises(UsageError):
            thread_count(3)


def test_bad_thread_setting_exits_2(capsys, monkeypatch):
    monkeypatch.setenv("QCFACTOR_THREADS", "many")
    code, _, _ = run(capsys, "verify", "lb-disk", "--h", "1/32,1/64,1/128")
    assert code == EXIT_USAGE


_word = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789:-/._", min_size=0, max_size=12)
_real = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=200, deadline=None)
@given(command=st.sampled_from(["verify", "solve", "heat", "convert"]), problem=_word,
       tensor=_word, hs=st.lists(_real, max_size=4).map(tuple),
       margin=st.none() | _real, rho=_real, center=st.tuples(_real, _real),
       sign=st.sampled_from([-1, 1]), bound=st.none() | _real,
       seed=st.integers(0, 2 ** 31), out=st.none() | _word.filter(lambda s: s != "none"))
def test_run_config_text_round_trip(command, problem, tensor, hs, margin, rho, center, sign,
                                    bound, seed, out):
    if problem == "none" or tensor == "none":
        return
    cfg = RunConfig(command=command, problem=problem, tensor=tensor, hs=hs, margin=margin,
                    rho=rho, center=center, sign=sign, bound=bound, seed=seed, out=out)
    text = cfg.to_text()
    back = RunConfig.from_text(text)
    assert back == cfg
    assert back.to_text() == text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcfactor.cli", "convert", "--mu", "2", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
