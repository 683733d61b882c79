"""Command-line interface: exit codes, determinism, CSV/JSON round trips."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from evtdyn.cli import main


@pytest.fixture
def runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:                     # click >= 8.2 separates them already
        return CliRunner()


def _run(runner, args):
    return runner.invoke(main, args, catch_exceptions=False,
                         standalone_mode=False)


def invoke(runner, args):
    # standalone mode so exit codes and stderr behave as in a real shell
    return runner.invoke(main, args)


def test_simulate_byte_identical_reruns(runner, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["simulate", "--system", "bernoulli", "--q", "3", "--n", "1000",
            "--seed", "7"]
    assert invoke(runner, base + ["-o", str(a)]).exit_code == 0
    assert invoke(runner, base + ["-o", str(b)]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    rows = [l for l in a.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "x1"
    assert len(rows) == 1001


def test_simulate_lorenz_three_columns(runner, tmp_path):
    out = tmp_path / "l.csv"
    r = invoke(runner, ["simulate", "--system", "lorenz", "--dt", "0.01",
                        "--n", "500", "--seed", "1", "-o", str(out)])
    assert r.exit_code == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "x1,x2,x3"
    assert all(len(l.split(",")) == 3 for l in rows[1:])


def test_simulate_divergence_exit_code(runner):
    r = invoke(runner, ["simulate", "--system", "henon", "--x0", "10,10",
                        "--n", "100", "--seed", "1"])
    assert r.exit_code == 3


def test_bm_fit_external_input_round_trip(runner, tmp_path):
    orb = tmp_path / "orb.csv"
    invoke(runner, ["simulate", "--system", "bernoulli", "--q", "3",
                    "--n", "100000", "--seed", "3", "-o", str(orb)])
    common = ["--obs", "g1", "--zeta", "0.7371", "--n", "100",
              "--method", "lmom"]
    fa = tmp_path / "a.json"
    fb = tmp_path / "b.json"
    ra = invoke(runner, ["bm-fit", "--input", str(orb)] + common +
                ["-o", str(fa)])
    rb = invoke(runner, ["bm-fit", "--system", "bernoulli", "--q", "3",
                         "--s", "1e5", "--seed", "3"] + common +
                ["-o", str(fb)])
    assert ra.exit_code == 0 and rb.exit_code == 0
    assert fa.read_bytes() == fb.read_bytes()
    d = json.loads(fa.read_text())
    assert d["schema_version"] == 1
    assert abs(d["xi"]) < 0.1
    assert d["sigma"] == pytest.approx(1.0, abs=0.15)


def test_pot_fit_json_shape(runner, tmp_path):
    out = tmp_path / "fit.json"
    r = invoke(runner, ["pot-fit", "--system", "bernoulli", "--q", "3",
                        "--obs", "g1", "--zeta", "0.7371", "--s", "1e5",
                        "--p", "0.98", "--seed", "3", "-o", str(out)])
    assert r.exit_code == 0
    d = json.loads(out.read_text())
    assert set(("method", "xi", "sigma", "threshold")) <= set(d)


def test_malformed_csv_exit_code_and_line(runner, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x1\n0.1\n0.2\nnot_a_number\n")
    r = invoke(runner, ["bm-fit", "--input", str(bad), "--obs", "raw",
                        "--n", "2"])
    assert r.exit_code == 2
    assert "line 4" in r.output


def test_exactly_one_source_required(runner, tmp_path):
    r = invoke(runner, ["bm-fit", "--obs", "raw", "--n", "10"])
    assert r.exit_code == 6
    f = tmp_path / "x.csv"
    f.write_text("x1\n1.0\n2.0\n")
    r2 = invoke(runner, ["bm-fit", "--input", str(f), "--system", "bernoulli",
                         "--q", "3", "--obs", "raw", "--n", "10"])
    assert r2.exit_code == 6


def test_require_gof_exit_code(runner, tmp_path):
    """A wildly non-extreme sample fails the KS check under --require-gof."""
    f = tmp_path / "flat.csv"
    vals = np.concatenate([np.zeros(3000), np.linspace(0, 1, 3000)])
    f.write_text("x1\n" + "\n".join(str(v) for v in vals) + "\n")
    r = invoke(runner, ["bm-fit", "--input", str(f), "--obs", "raw",
                        "--n", "60", "--trim", "0", "--require-gof"])
    assert r.exit_code in (4, 5)


def test_missing_seed_is_config_error(runner):
    r = invoke(runner, ["bm-fit", "--system", "bernoulli", "--q", "3",
                        "--obs", "g1", "--zeta", "0.5", "--n", "100"])
    assert r.exit_code == 6


def test_ei_command_matches_library(runner):
    r = invoke(runner, ["ei", "--system", "bernoulli", "--q", "3",
                        "--obs", "g1", "--zeta", "0.5", "--p", "0.999",
                        "--s", "1e6", "--estimator", "sueveges",
                        "--seed", "5"])
    assert r.exit_code == 0
    d = json.loads(r.stdout)
    assert d["theta"] == pytest.approx(2.0 / 3.0, abs=0.1)


def test_config_file_merging(runner, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("system = bernoulli\nq = 3\nn = 500\nseed = 7\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert invoke(runner, ["simulate", "--config", str(cfg),
                           "-o", str(a)]).exit_code == 0
    assert invoke(runner, ["simulate", "--system", "bernoulli", "--q", "3",
                           "--n", "500", "--seed", "7",
                           "-o", str(b)]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    # explicit flags win over the file
    c = tmp_path / "c.csv"
    invoke(runner, ["simulate", "--config", str(cfg), "--n", "200",
                    "-o", str(c)])
    rows = [l for l in c.read_text().splitlines()
            if l and not l.startswith("#")]
    assert len(rows) == 201


def test_config_unknown_key_rejected(runner, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    r = invoke(runner, ["simulate", "--config", str(cfg), "--system",
                        "bernoulli", "--q", "3", "--n", "10", "--seed", "1"])
    assert r.exit_code == 6
    assert "bogus" in r.output


def test_recurrence_csv_columns(runner, tmp_path):
    out = tmp_path / "rec.csv"
    r = invoke(runner, ["recurrence", "--system", "bernoulli", "--q", "3",
                        "--num-points", "3", "--s", "2e4", "--B", "200",
                        "--seed", "2", "-o", str(out)])
    assert r.exit_code == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].startswith("zeta,theta_fs,theta_sv,xi,sigma,mu")
    assert len(rows) == 4


def test_stability_map_threads_canonical_order(runner, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["stability-map", "--K", "100", "--grid", "2", "--s", "2e4",
            "--n-exceed", "300", "--seed", "9"]
    assert invoke(runner, base + ["-o", str(a)]).exit_code == 0
    assert invoke(runner, base + ["--threads", "4",
                                  "-o", str(b)]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_tipping_emits_csv_and_uc_json(runner, tmp_path):
    out = tmp_path / "tip.csv"
    r = invoke(runner, ["tipping", "--mu", "1", "--nu", "0.2475",
                        "--u-grid", "0.1:0.1:0.3", "--ensemble", "2",
                        "--s", "1e4", "--bin-len", "100", "--seed", "1",
                        "-o", str(out)])
    assert r.exit_code == 0
    d = json.loads(r.output)
    assert "u_c" in d
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].startswith("u,xi_max")
    assert len(rows) == 4


def test_noise_study_csv(runner, tmp_path):
    out = tmp_path / "ns.csv"
    r = invoke(runner, ["noise-study", "--system", "rotation", "--map-alpha",
                        "0.618", "--zeta", "0.4123", "--eps-grid", "1e-2",
                        "--m-grid", "1000", "--s", "1e5", "--B", "200",
                        "--seed", "2", "-o", str(out)])
    assert r.exit_code == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].startswith("eps,m,xi,sigma,mu,b_theory")
    assert len(rows) == 2


def test_help_screens_render(runner):
    for cmd in ("simulate", "bm-fit", "pot-fit", "ei", "recurrence",
                "dimension", "stability-map", "tipping", "noise-study"):
        r = invoke(runner, [cmd, "--help"])
        assert r.exit_code == 0
        assert "--help" in r.output
