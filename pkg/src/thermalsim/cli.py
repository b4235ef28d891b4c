"""Command-line entry point.

Verbs map onto the experiment kinds: ``dynamics`` runs the error-vs-t/N/tau
studies, ``sample-rpe`` dumps sampler chains or runs the sampler-validation
study, ``tables`` builds ensemble tables, ``single-error``, ``scar``,
``xy-decay`` and ``tdpt`` run the corresponding numerical experiments, and
``fit``/``predict`` fit the error model and evaluate its predictions.
Exit codes: 0 on success, 2 on config errors, 3 on infeasible sizes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments, reporting
from .config import ConfigError, parse_config_file
from .models import ModelParams, square_lattice_edges
from .states import InfeasibleSizeError

_VERB_EXPERIMENTS = {
    "dynamics": ("error-vs-t", "error-vs-N", "error-vs-tau"),
    "single-error": ("single-error",),
    "scar": ("scar-vs-thermal",),
    "xy-decay": ("xy-decay",),
    "tables": ("rpe-tables",),
    "tdpt": ("tdpt-check",),
    "fit": ("fit-and-predict",),
    "sample-rpe": ("rpe-validate", "sample-rpe"),
}

_KEY_MAP = {
    "time.tau": "tau",
    "time.t": "t",
    "grid.t": "t_grid",
    "grid.tau": "tau_grid",
    "grid.n": "n_grid",
    "noise.p0": "noise_p0",
    "noise.p1": "noise_p1",
    "noise.kind": "noise_kind",
    "noise.lambda": "noise_lambda",
    "initial.source": "initial_source",
    "initial.energy_per_site": "initial_energy_per_site",
    "initial.samples": "rpe_samples",
    "initial.vectors": "initial_vectors",
    "sampler.move_size": "move_size",
    "sampler.sweeps_per_sample": "sweeps_per_sample",
    "sampler.burn_in": "burn_in",
    "sampler.sweeps": "mcmc_sweeps",
    "sampler.epsilon": "sampler_epsilon",
    "trajectories": "trajectories",
    "measure.sites": "measure_sites",
    "baseline.kind": "baseline",
    "baseline.tau0": "reference_tau",
    "insertion.site": "insertion_site",
    "insertion.letters": "insertion_letters",
    "insertion.t0": "insertion_time",
    "insertion.rms_window": "rms_fit_window",
    "scar.theta": "theta",
    "validate.epsilons": "epsilon_grid",
    "validate.rejection_samples": "rejection_samples",
    "tables.energy_grid": "energy_grid",
    "tdpt.s": "interpolation_s",
    "fit.input": "fit_input",
    "fit.tau_max": "fit_tau_max",
    "bootstrap.resamples": "resamples",
    "bootstrap.level": "ci_level",
}

_MODEL_KEYS = ("model.kind", "model.n", "model.g", "model.h", "model.j",
               "model.boundary", "model.rows", "model.cols", "model.periodic",
               "model.disorder_seed", "model.disorder")


def build_model(flat: dict) -> ModelParams:
    kind = flat.get("model.kind")
    if kind is None:
        raise ConfigError("model.kind is required")
    kind = str(kind).replace("-", "_")
    kwargs = {"kind": kind}
    if kind == "xy":
        rows = flat.get("model.rows")
        cols = flat.get("model.cols")
        if rows is None or cols is None:
            raise ConfigError("xy model needs model.rows and model.cols")
        kwargs["n"] = int(rows) * int(cols)
        kwargs["edges"] = square_lattice_edges(int(rows), int(cols),
                                               bool(flat.get("model.periodic", True)))
    else:
        if "model.n" not in flat:
            raise ConfigError("model.n is required")
        kwargs["n"] = int(flat["model.n"])
    for key, name in (("model.g", "g"), ("model.h", "h"), ("model.j", "j")):
        if key in flat:
            kwargs[name] = float(flat[key])
    if "model.boundary" in flat:
        kwargs["boundary"] = str(flat["model.boundary"])
    elif kind == "quantum_east":
        kwargs["boundary"] = "periodic"
    if "model.disorder_seed" in flat:
        kwargs["disorder_seed"] = int(flat["model.disorder_seed"])
    if "model.disorder" in flat:
        kwargs["disorder"] = tuple(float(x) for x in flat["model.disorder"])
    try:
        return ModelParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_experiment_config(flat: dict, verb: str,
                            overrides: dict) -> experiments.ExperimentConfig:
    known = set(_KEY_MAP) | set(_MODEL_KEYS) | {"experiment", "seed", "out", "threads"}
    unknown = set(flat) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    experiment = str(flat.get("experiment", _VERB_EXPERIMENTS[verb][0]))
    if experiment not in _VERB_EXPERIMENTS[verb]:
        raise ConfigError(
            f"verb {verb!r} runs {', '.join(_VERB_EXPERIMENTS[verb])}; got {experiment!r}")
    seed = overrides.get("seed", flat.get("seed"))
    if seed is None:
        raise ConfigError("a master seed is required (seed = ... or --seed)")
    kwargs = {
        "experiment": experiment,
        "model": build_model(flat),
        "seed": int(seed),
        "out": overrides.get("out", flat.get("out")),
        "threads": overrides.get("threads", flat.get("threads")),
    }
    for key, name in _KEY_MAP.items():
        if key in flat:
            value = flat[key]
            if isinstance(value, list):
                value = tuple(value)
            kwargs[name] = value
    try:
        return experiments.ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _dump_samples(cfg: experiments.ExperimentConfig) -> str:
    from .models import build_hamiltonian
    from .rpe import SamplerConfig, run_chain, write_samples_csv

    ham = build_hamiltonian(cfg.model)
    sampler = SamplerConfig(
        energy=cfg.initial_energy_per_site * cfg.model.n,
        epsilon=cfg.sampler_epsilon,
        move_size=cfg.move_size, sweeps=cfg.rpe_samples * cfg.sweeps_per_sample,
        burn_in=cfg.burn_in, thin=cfg.sweeps_per_sample, seed=cfg.seed)
    chain = run_chain(ham, sampler)
    out_dir = cfg.out or "."
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "rpe_samples.csv")
    write_samples_csv(path, chain.samples)
    return path


def _run_predict(args) -> int:
    flat = parse_config_file(args.config)
    fit_path = flat.get("predict.fit")
    if fit_path is None:
        raise ConfigError("predict needs predict.fit = <fit report json>")
    with open(fit_path) as fh:
        fit_rec = json.load(fh)["summary"]
    from .predictor import ErrorFit, error_model, optimal_tau

    fit = ErrorFit(fit_rec["S"], fit_rec["C"], fit_rec["p0"], fit_rec["p1"])
    t_grid = flat.get("grid.t", [1.0, 2.0, 4.0, 8.0])
    rows = []
    for t in t_grid:
        tau_star, err_star = optimal_tau(fit, float(t))
        value, valid = error_model(float(t), tau_star, fit)
        rows.append({"t": float(t), "optimal_tau": tau_star,
                     "error_at_optimum": err_star, "model_valid": valid})
    out_dir = args.out or flat.get("out") or "."
    reporting.write_rows_csv(os.path.join(out_dir, "predictions.csv"), rows)
    print(f"wrote {os.path.join(out_dir, 'predictions.csv')}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="thermalsim",
        description="Trotterized spin-chain dynamics under gate noise: "
                    "simulation, sampling, and error prediction.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("sample-rpe", "tables", "dynamics", "single-error", "scar",
                 "xy-decay", "tdpt", "fit", "predict"):
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True, help="flat key = value config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker count (default: THERMALSIM_THREADS or CPU count)")
    args = parser.parse_args(argv)

    try:
        if args.verb == "predict":
            return _run_predict(args)
        flat = parse_config_file(args.config)
        overrides = {k: v for k, v in
                     (("seed", args.seed), ("out", args.out), ("threads", args.threads))
                     if v is not None}
        if args.verb == "sample-rpe" and flat.get("experiment", "sample-rpe") == "sample-rpe":
            flat.setdefault("experiment", "sample-rpe")
            cfg = build_experiment_config(flat, "sample-rpe", overrides)
            path = _dump_samples(cfg)
            print(f"wrote {path}")
            return 0
        cfg = build_experiment_config(flat, args.verb, overrides)
        report = experiments.run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleSizeError as exc:
        print(f"infeasible size: {exc}", file=sys.stderr)
        return 3

    out_dir = cfg.out or "."
    base = report.experiment.replace("-", "_")
    csv_path = os.path.join(out_dir, f"{base}.csv")
    json_path = os.path.join(out_dir, f"{base}.json")
    reporting.write_rows_csv(csv_path, report.rows)
    reporting.write_report_json(json_path, report)
    for name, (times, sites, values) in report.maps.items():
        reporting.write_map_csv(os.path.join(out_dir, f"{name}.csv"), times, sites, values)
    for name, text in report.artifacts.items():
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)
    for key, value in report.summary.items():
        print(f"{key} = {value}")
    print(f"wrote {csv_path} and {json_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
