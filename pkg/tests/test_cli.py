import json
import os
import subprocess
import sys

import numpy as np
import pytest

from thermalsim.cli import build_experiment_config, build_model, main
from thermalsim.config import ConfigError, parse_config_text, parse_value
from thermalsim.experiments import ExperimentConfig, bootstrap_ci
from thermalsim.models import mixed_field_ising


def test_parse_values():
    assert parse_value("3") == 3
    assert parse_value("3.5e-4") == 3.5e-4
    assert parse_value("true") is True
    assert parse_value('"a b"') == "a b"
    assert parse_value("error-vs-t") == "error-vs-t"
    assert parse_value("[1, 2.5, x]") == [1, 2.5, "x"]
    assert parse_value("[]") == []


def test_parse_config_text():
    flat = parse_config_text("""
    # a comment
    experiment = error-vs-t
    model.kind = mixed_field_ising   # trailing comment
    model.n = 12
    grid.tau = [0.1, 0.2]
    """)
    assert flat["model.n"] == 12
    assert flat["grid.tau"] == [0.1, 0.2]
    with pytest.raises(ConfigError):
        parse_config_text("just a line")
    with pytest.raises(ConfigError):
        parse_config_text("a = 1\na = 2")


def test_build_model_variants():
    m = build_model({"model.kind": "mixed_field_ising", "model.n": 8})
    assert m.g == 1.4 and m.h == 0.9045
    xy = build_model({"model.kind": "xy", "model.rows": 4, "model.cols": 4})
    assert xy.n == 16 and len(xy.edges) == 32
    with pytest.raises(ConfigError):
        build_model({"model.kind": "xy", "model.n": 4})
    with pytest.raises(ConfigError):
        build_model({"model.n": 4})


def test_build_experiment_config_requires_seed():
    flat = {"experiment": "error-vs-t", "model.kind": "mixed_field_ising", "model.n": 8}
    with pytest.raises(ConfigError):
        build_experiment_config(flat, "dynamics", {})
    cfg = build_experiment_config(flat, "dynamics", {"seed": 5})
    assert cfg.seed == 5


def test_build_experiment_config_rejects_unknown_keys():
    flat = {"experiment": "error-vs-t", "model.kind": "mixed_field_ising",
            "model.n": 8, "seed": 1, "grid.bogus": 3}
    with pytest.raises(ConfigError):
        build_experiment_config(flat, "dynamics", {})


def test_verb_experiment_mismatch():
    flat = {"experiment": "xy-decay", "model.kind": "mixed_field_ising",
            "model.n": 8, "seed": 1}
    with pytest.raises(ConfigError):
        build_experiment_config(flat, "dynamics", {})


def test_bootstrap_ci_basics():
    rng = np.random.default_rng(0)
    lo, hi = bootstrap_ci(np.full(50, 3.25), rng=rng)
    assert lo == hi == 3.25
    data = rng.normal(0.0, 1.0, size=400)
    lo, hi = bootstrap_ci(data, resamples=800, level=0.68, rng=rng)
    width = hi - lo
    assert width == pytest.approx(2.0 / np.sqrt(400), rel=0.2)
    with pytest.raises(ValueError):
        bootstrap_ci([])


def test_infeasible_sizes_rejected():
    cfg = ExperimentConfig(experiment="error-vs-t", model=mixed_field_ising(18), seed=1)
    from thermalsim.states import InfeasibleSizeError

    with pytest.raises(InfeasibleSizeError):
        cfg.validate()
    cfg2 = ExperimentConfig(experiment="tdpt-check", model=mixed_field_ising(14), seed=1)
    with pytest.raises(InfeasibleSizeError):
        cfg2.validate()


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_cli_config_error_exit_code(tmp_path):
    path = _write(tmp_path, "bad.cfg", "experiment = error-vs-t\n")
    assert main(["dynamics", "--config", path]) == 2


def test_cli_infeasible_exit_code(tmp_path):
    path = _write(tmp_path, "big.cfg", """
experiment = error-vs-t
model.kind = mixed_field_ising
model.n = 18
seed = 1
""")
    assert main(["dynamics", "--config", path]) == 3


def test_cli_dynamics_end_to_end(tmp_path, capsys):
    path = _write(tmp_path, "run.cfg", f"""
experiment = error-vs-t
model.kind = mixed_field_ising
model.n = 6
time.tau = 0.25
grid.t = [0.5, 1.0]
initial.samples = 6
trajectories = 12
bootstrap.resamples = 50
seed = 9
threads = 1
out = {tmp_path}/out
""")
    assert main(["dynamics", "--config", path]) == 0
    csv_path = tmp_path / "out" / "error_vs_t.csv"
    assert csv_path.exists()
    header = csv_path.read_text().splitlines()[0]
    assert header == ("experiment,N,tau,t,site_set,obs_x,obs_y,obs_z,"
                      "trace_distance,ci_lo,ci_hi,n_samples")
    report = json.loads((tmp_path / "out" / "error_vs_t.json").read_text())
    assert report["experiment"] == "error-vs-t"
    assert len(report["rows"]) == 2
    first = csv_path.read_bytes()
    # same master seed reproduces the CSV byte-for-byte
    assert main(["dynamics", "--config", path]) == 0
    assert csv_path.read_bytes() == first


def test_cli_seed_override_changes_output(tmp_path):
    path = _write(tmp_path, "run.cfg", f"""
experiment = error-vs-t
model.kind = mixed_field_ising
model.n = 6
time.tau = 0.25
grid.t = [0.5]
initial.samples = 4
trajectories = 8
bootstrap.resamples = 50
seed = 9
threads = 1
out = {tmp_path}/out
""")
    assert main(["dynamics", "--config", path]) == 0
    first = (tmp_path / "out" / "error_vs_t.csv").read_bytes()
    assert main(["dynamics", "--config", path, "--seed", "10"]) == 0
    assert (tmp_path / "out" / "error_vs_t.csv").read_bytes() != first


def test_cli_sample_rpe_dump(tmp_path):
    path = _write(tmp_path, "s.cfg", f"""
model.kind = mixed_field_ising
model.n = 8
initial.energy_per_site = -1.4
initial.samples = 5
sampler.burn_in = 10
seed = 3
out = {tmp_path}/rpe
""")
    assert main(["sample-rpe", "--config", path]) == 0
    lines = (tmp_path / "rpe" / "rpe_samples.csv").read_text().splitlines()
    assert lines[0] == "site,sx,sy,sz,chain,sweep"
    assert len(lines) == 1 + 5 * 8


def test_cli_entry_point_installed():
    out = subprocess.run([sys.executable, "-m", "thermalsim.cli", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "dynamics" in out.stdout


def test_cli_fit_then_predict(tmp_path):
    from thermalsim.predictor import ErrorFit, error_model
    from thermalsim.reporting import write_rows_csv

    fit = ErrorFit(s=0.75, c=0.11, p0=3.5e-4, p1=9.5e-4)
    rows = [{"t": 4.0, "tau": tau, "trace_distance": error_model(4.0, tau, fit).value}
            for tau in (0.05, 0.1, 0.16, 0.2, 0.25)]
    curve = tmp_path / "curve.csv"
    write_rows_csv(curve, rows)
    fit_cfg = _write(tmp_path, "fit.cfg", f"""
experiment = fit-and-predict
model.kind = mixed_field_ising
model.n = 12
fit.input = {curve}
noise.p0 = 3.5e-4
noise.p1 = 9.5e-4
grid.t = [2.0, 4.0]
seed = 2
out = {tmp_path}/fit
""")
    assert main(["fit", "--config", fit_cfg]) == 0
    report = json.loads((tmp_path / "fit" / "fit_and_predict.json").read_text())
    assert report["summary"]["S"] == pytest.approx(0.75, abs=1e-8)
    predict_cfg = _write(tmp_path, "predict.cfg", f"""
predict.fit = {tmp_path}/fit/fit_and_predict.json
grid.t = [4.0]
out = {tmp_path}/pred
""")
    assert main(["predict", "--config", predict_cfg]) == 0
    lines = (tmp_path / "pred" / "predictions.csv").read_text().splitlines()
    assert lines[0] == "t,optimal_tau,error_at_optimum,model_valid"
    assert len(lines) == 2


def test_cli_single_error_writes_maps(tmp_path):
    cfg = _write(tmp_path, "se.cfg", f"""
experiment = single-error
model.kind = mixed_field_ising
model.n = 6
time.tau = 0.1
time.t = 1.0
insertion.t0 = 0.5
initial.samples = 3
seed = 5
threads = 1
out = {tmp_path}/se
""")
    assert main(["single-error", "--config", cfg]) == 0
    for name in ("map_energy.csv", "map_tracedist.csv", "single_error.csv"):
        assert (tmp_path / "se" / name).exists()
    header = (tmp_path / "se" / "map_energy.csv").read_text().splitlines()[0]
    assert header == "r,t,value"


def test_cli_sample_rpe_validate_routing(tmp_path):
    cfg = _write(tmp_path, "v.cfg", f"""
experiment = rpe-validate
model.kind = mixed_field_ising
model.n = 6
initial.energy_per_site = -1.4
validate.epsilons = [1.0]
validate.rejection_samples = 20
sampler.sweeps = 200
seed = 6
out = {tmp_path}/v
""")
    assert main(["sample-rpe", "--config", cfg]) == 0
    assert (tmp_path / "v" / "rpe_validate.csv").exists()
