"""Reproducible experiment runners for every figure-class study.

Noisy dynamics estimates use jump-conditioned trajectories: since every
channel branch is a Pauli with state-independent probability, the noisy
ensemble mean splits exactly into

    E[obs] = P(no jump) * obs_noiseless + P(>=1 jump) * E[obs | >= 1 jump]

and only the conditioned part is sampled.  Against a same-step noiseless
baseline the zero-jump term cancels identically, which removes almost all
Monte Carlo variance at realistic gate error rates.  Everything is
deterministic given the master seed: worker seeds are spawned from it and
results are reduced in task order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, parallel
from .circuits import TrotterCircuit, build_trotter_circuit, steps_for
from .config import ConfigError
from .ensemble import EnsembleTables, ensemble_tables
from .evolve import (CompiledCircuit, compile_circuit, evolve,
                     no_jump_probability, sample_jumps)
from .models import ModelParams, build_hamiltonian, local_energy_density
from .noise import DEFAULT_P0, DEFAULT_P1, NoiseModel, fixed_depolarizing
from .pauli import Operator, PauliString, error_shift_operator
from .rpe import (SamplerConfig, SpinConfiguration, rejection_sample_many,
                  run_chain)
from .states import (EigenSystem, InfeasibleSizeError, StateVector,
                     prepare_product_state)

MAX_CIRCUIT_SITES = 16
MAX_ED_SITES = 12


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run; every field is settable from a config file."""

    experiment: str
    model: ModelParams
    seed: int
    tau: float = 0.1
    t: float = 4.0
    t_grid: tuple[float, ...] = ()
    tau_grid: tuple[float, ...] = ()
    n_grid: tuple[int, ...] = ()
    noise_p0: float = DEFAULT_P0
    noise_p1: float = DEFAULT_P1
    noise_kind: str = "depolarizing"
    noise_lambda: float | None = None       # fixed-lambda channel when set
    initial_source: str = "rpe"             # zeros | rpe | config
    initial_energy_per_site: float = -1.4
    initial_vectors: tuple | None = None
    rpe_samples: int = 100
    sampler_epsilon: float = 0.0
    move_size: int = 2
    sweeps_per_sample: int = 2
    burn_in: int = 100
    trajectories: int = 600
    measure_sites: str = "all"              # all | interior
    baseline: str = "same-tau"              # same-tau | reference-tau
    reference_tau: float = 0.04
    insertion_site: int | None = None
    insertion_letters: str = "Y"
    insertion_time: float = 1.5
    rms_fit_window: tuple[float, float] = (0.4, 4.0)
    theta: float = 3.0 * math.pi / 8.0
    epsilon_grid: tuple[float, ...] = (0.25, 0.5, 1.0)
    rejection_samples: int = 120
    mcmc_sweeps: int = 2000
    energy_grid: tuple[float, ...] = ()
    interpolation_s: float = 0.0
    resamples: int = 1000
    ci_level: float = 0.68
    fit_tau_max: float = 0.25
    fit_input: str | None = None
    out: str | None = None
    threads: int | None = None

    def noise(self):
        if self.noise_lambda is not None:
            return fixed_depolarizing(self.noise_lambda)
        return NoiseModel(self.noise_p0, self.noise_p1, self.noise_kind)

    def validate(self) -> None:
        if not self.experiment:
            raise ConfigError("experiment kind is required")
        sizes = list(self.n_grid) or [self.model.n]
        if self.experiment in ("error-vs-t", "error-vs-N", "error-vs-tau",
                               "single-error", "scar-vs-thermal", "xy-decay"):
            for n in sizes:
                if n > MAX_CIRCUIT_SITES:
                    raise InfeasibleSizeError(
                        f"statevector circuits support up to {MAX_CIRCUIT_SITES} sites, got {n}")
        if self.experiment == "tdpt-check" and self.model.n > MAX_ED_SITES:
            raise InfeasibleSizeError(
                f"exact diagonalization supports up to {MAX_ED_SITES} sites, got {self.model.n}")


@dataclass
class RunReport:
    experiment: str
    rows: list[dict]
    summary: dict
    metadata: dict
    maps: dict = field(default_factory=dict)       # name -> (times, sites, values)
    artifacts: dict = field(default_factory=dict)  # filename -> text content


def bootstrap_ci(samples, resamples: int = 1000, level: float = 0.68,
                 rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean."""
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise ValueError("bootstrap needs at least one sample")
    if rng is None:
        rng = np.random.default_rng(0)
    idx = rng.integers(0, data.size, size=(resamples, data.size))
    means = data[idx].mean(axis=1)
    half = 100.0 * (1.0 - level) / 2.0
    return float(np.percentile(means, half)), float(np.percentile(means, 100.0 - half))


def _measure_sites(n: int, mode: str) -> tuple[int, ...]:
    if mode == "interior":
        return tuple(range(1, n - 1))
    return tuple(range(n))


def _rpe_vectors(params: ModelParams, e_per_site: float, count: int,
                 cfg: ExperimentConfig, seed: int) -> np.ndarray:
    ham = build_hamiltonian(params)
    sampler = SamplerConfig(energy=e_per_site * params.n, move_size=cfg.move_size,
                            sweeps=count * cfg.sweeps_per_sample, burn_in=cfg.burn_in,
                            thin=cfg.sweeps_per_sample, seed=seed)
    return run_chain(ham, sampler).samples


def _initial_vectors(cfg: ExperimentConfig, params: ModelParams, seed: int) -> np.ndarray:
    if cfg.initial_source == "zeros":
        return SpinConfiguration.polarized(params.n).vectors[None, :, :]
    if cfg.initial_source == "plus":
        return SpinConfiguration.polarized(params.n, (1.0, 0.0, 0.0)).vectors[None, :, :]
    if cfg.initial_source == "config":
        if cfg.initial_vectors is None:
            raise ConfigError("initial.source = config needs initial.vectors")
        arr = np.asarray(cfg.initial_vectors, dtype=float).reshape(-1, params.n, 3)
        return arr
    if cfg.initial_source == "rpe":
        return _rpe_vectors(params, cfg.initial_energy_per_site, cfg.rpe_samples, cfg, seed)
    raise ConfigError(f"unknown initial state source {cfg.initial_source!r}")


# ---------------------------------------------------------------------------
# workers

def _w_noiseless(task):
    ctx = parallel.worker_context()
    idx = task
    amps = prepare_product_state(SpinConfiguration(ctx["init"][idx])).amps
    out = evolve(amps, ctx["compiled"], measure_steps=ctx["measure_steps"],
                 measure=lambda a: _bloch_block(a, ctx["sites"]))
    return np.array(out)


def _w_conditioned(task):
    ctx = parallel.worker_context()
    run_index, seed = task
    rng = np.random.default_rng(seed)
    sample = run_index % len(ctx["init"])
    jumps = sample_jumps(ctx["compiled"], ctx["noise"], rng, conditional=True)
    amps = prepare_product_state(SpinConfiguration(ctx["init"][sample])).amps
    out = evolve(amps, ctx["compiled"], jumps=jumps,
                 measure_steps=ctx["measure_steps"],
                 measure=lambda a: _bloch_block(a, ctx["sites"]))
    return sample, np.array(out)


def _w_plain_trajectory(task):
    ctx = parallel.worker_context()
    run_index, seed = task
    rng = np.random.default_rng(seed)
    sample = run_index % len(ctx["init"])
    amps = prepare_product_state(SpinConfiguration(ctx["init"][sample])).amps
    out = evolve(amps, ctx["compiled"], noise=ctx["noise"], rng=rng,
                 measure_steps=ctx["measure_steps"],
                 measure=ctx["measure"])
    return sample, np.array(out)


def _bloch_block(amps: np.ndarray, sites) -> np.ndarray:
    return np.array([kernels._bloch(amps, j) for j in sites])


def _energy_measure(amps: np.ndarray) -> float:
    return _op_expectation(amps, parallel.worker_context()["ham_terms"])


# ---------------------------------------------------------------------------
# jump-conditioned noisy estimator

@dataclass
class NoisyEstimate:
    """Noisy site-averaged Bloch vectors (and deltas) at the measure steps."""

    steps: np.ndarray
    times: np.ndarray
    base_mean: np.ndarray      # (K, 3) noiseless site-averaged Bloch
    delta_mean: np.ndarray     # (K, 3) conditioned-average change
    weight: float              # 1 - P(no jump)
    deltas: np.ndarray         # (n_runs, K, 3) per-run site-averaged changes
    n_samples: int

    @property
    def noisy_mean(self) -> np.ndarray:
        return self.base_mean + self.weight * self.delta_mean


def noisy_dynamics(params: ModelParams, tau: float, measure_steps,
                   noise, init_vectors: np.ndarray, n_runs: int,
                   sites, seed: int, threads: int) -> NoisyEstimate:
    measure_steps = sorted(set(measure_steps))
    circuit = build_trotter_circuit(params, tau, max(measure_steps))
    compiled = compile_circuit(circuit)
    n_samples = len(init_vectors)
    n_runs = max(n_runs, n_samples)
    n_runs += (-n_runs) % n_samples  # balance the round-robin over samples
    ctx = {"compiled": compiled, "init": init_vectors, "sites": tuple(sites),
           "noise": noise, "measure_steps": tuple(measure_steps)}
    base = parallel.run_indexed(_w_noiseless, range(n_samples), threads, ctx)
    base = np.array(base)  # (M, K, sites, 3)
    seeds = np.random.SeedSequence(seed).generate_state(n_runs, dtype=np.uint64)
    tasks = [(c, int(seeds[c])) for c in range(n_runs)]
    cond = parallel.run_indexed(_w_conditioned, tasks, threads, ctx)
    deltas = np.array([out - base[s] for s, out in cond])  # (C, K, sites, 3)
    weight = 1.0 - no_jump_probability(compiled, noise)
    steps = np.asarray(sorted(measure_steps))
    return NoisyEstimate(
        steps=steps,
        times=steps * tau,
        base_mean=base.mean(axis=(0, 2)),
        delta_mean=deltas.mean(axis=(0, 2)),
        weight=weight,
        deltas=deltas.mean(axis=2),
        n_samples=n_samples,
    )


def _distance_with_ci(est: NoisyEstimate, baseline: np.ndarray, k: int,
                      resamples: int, level: float, rng) -> tuple[float, float, float]:
    """Site-averaged trace distance at measure index k, with bootstrap CI."""
    point = 0.5 * np.linalg.norm(est.noisy_mean[k] - baseline[k])
    n_c = est.deltas.shape[0]
    idx = rng.integers(0, n_c, size=(resamples, n_c))
    boots = np.empty(resamples)
    for b in range(resamples):
        dmean = est.deltas[idx[b], k].mean(axis=0)
        boots[b] = 0.5 * np.linalg.norm(est.base_mean[k] + est.weight * dmean - baseline[k])
    half = 100.0 * (1.0 - level) / 2.0
    return point, float(np.percentile(boots, half)), float(np.percentile(boots, 100 - half))


# ---------------------------------------------------------------------------
# dynamics experiments (error vs t / N / tau)

def error_vs_time(cfg: ExperimentConfig) -> RunReport:
    params = cfg.model
    threads = parallel.resolve_threads(cfg.threads)
    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    init = _initial_vectors(cfg, params, _seed_int(seeds[0]))
    sites = _measure_sites(params.n, cfg.measure_sites)
    t_grid = cfg.t_grid or tuple(np.arange(0.5, cfg.t + 1e-9, 0.5))
    steps = [steps_for(t, cfg.tau) for t in t_grid]
    est = noisy_dynamics(params, cfg.tau, steps, cfg.noise(), init,
                         cfg.trajectories, sites, _seed_int(seeds[1]), threads)
    rng = np.random.default_rng(_seed_int(seeds[2]))
    rows = []
    for k, t in enumerate(est.times):
        value, lo, hi = _distance_with_ci(est, est.base_mean, k, cfg.resamples,
                                          cfg.ci_level, rng)
        rows.append(_dynamics_row(cfg, params.n, cfg.tau, t, est, k, value, lo, hi))
    fit = _relative_line_fit(est.times, [r["trace_distance"] for r in rows])
    return RunReport("error-vs-t", rows, fit, {})


def error_vs_size(cfg: ExperimentConfig) -> RunReport:
    threads = parallel.resolve_threads(cfg.threads)
    t_grid = cfg.t_grid or (4.0, 6.0)
    steps = [steps_for(t, cfg.tau) for t in t_grid]
    rows = []
    for i, n in enumerate(cfg.n_grid or (8, 10, 12)):
        params = replace(cfg.model, n=n)
        seeds = np.random.SeedSequence(cfg.seed).spawn(2 * i + 2)
        init = _initial_vectors(cfg, params, _seed_int(seeds[-2]))
        sites = _measure_sites(n, cfg.measure_sites)
        est = noisy_dynamics(params, cfg.tau, steps, cfg.noise(), init,
                             cfg.trajectories, sites, _seed_int(seeds[-1]), threads)
        rng = np.random.default_rng(cfg.seed + 17 * n)
        for k, t in enumerate(est.times):
            value, lo, hi = _distance_with_ci(est, est.base_mean, k, cfg.resamples,
                                              cfg.ci_level, rng)
            rows.append(_dynamics_row(cfg, n, cfg.tau, t, est, k, value, lo, hi))
    spread = {}
    for t in t_grid:
        vals = [r["trace_distance"] for r in rows if abs(r["t"] - t) < 1e-9]
        spread[f"relative_spread_t{t:g}"] = float((max(vals) - min(vals)) / np.mean(vals))
    return RunReport("error-vs-N", rows, spread, {})


def error_vs_tau(cfg: ExperimentConfig) -> RunReport:
    params = cfg.model
    threads = parallel.resolve_threads(cfg.threads)
    tau_grid = cfg.tau_grid or tuple(cfg.t / d for d in (80, 50, 40, 32, 25, 20, 16, 13, 10))
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(tau_grid) + 2)
    init = _initial_vectors(cfg, params, _seed_int(seeds[0]))
    sites = _measure_sites(params.n, cfg.measure_sites)

    # shared noiseless reference at the small Trotter step
    ref_steps = steps_for(cfg.t, cfg.reference_tau)
    ref_ctx = {"compiled": compile_circuit(build_trotter_circuit(params, cfg.reference_tau, ref_steps)),
               "init": init, "sites": sites, "measure_steps": (ref_steps,)}
    ref = np.array(parallel.run_indexed(_w_noiseless, range(len(init)), threads, ref_ctx))
    ref_mean = ref.mean(axis=(0, 2))  # (1, 3)

    rows = []
    rng = np.random.default_rng(cfg.seed + 23)
    samples = []
    for i, tau in enumerate(tau_grid):
        steps = steps_for(cfg.t, tau)
        est = noisy_dynamics(params, tau, [steps], cfg.noise(), init,
                             cfg.trajectories, sites, _seed_int(seeds[i + 1]), threads)
        value, lo, hi = _distance_with_ci(est, ref_mean, 0, cfg.resamples, cfg.ci_level, rng)
        t_eff = steps * tau
        rows.append(_dynamics_row(cfg, params.n, tau, t_eff, est, 0, value, lo, hi))
        samples.append((t_eff, tau, value))

    from .predictor import fit_error_model, optimal_tau

    fit_pts = [s for s in samples if s[1] <= cfg.fit_tau_max + 1e-12]
    fit = fit_error_model(fit_pts, cfg.noise_p0, cfg.noise_p1)
    values = [s[2] for s in samples]
    taus = [s[1] for s in samples]
    summary = {
        "S": fit.s, "C": fit.c, "p0": cfg.noise_p0, "p1": cfg.noise_p1,
        "fit_window_tau_max": cfg.fit_tau_max,
        "fit_rel_residual_max": float(np.max(np.abs(np.array(fit.residuals))
                                             / np.array([p[2] for p in fit_pts]))),
        "empirical_argmin_tau": float(taus[int(np.argmin(values))]),
        "interior_minimum": bool(0 < int(np.argmin(values)) < len(values) - 1),
    }
    if fit.s > 0 and fit.c > 0:
        tau_star, err_star = optimal_tau(fit, cfg.t)
        summary["model_argmin_tau"] = float(tau_star)
        summary["model_error_at_argmin"] = float(err_star)
    return RunReport("error-vs-tau", rows, summary, {})


def _dynamics_row(cfg, n, tau, t, est: NoisyEstimate, k, value, lo, hi) -> dict:
    bloch = est.noisy_mean[k]
    return {
        "experiment": cfg.experiment, "N": n, "tau": tau, "t": float(t),
        "site_set": cfg.measure_sites,
        "obs_x": float(bloch[0]), "obs_y": float(bloch[1]), "obs_z": float(bloch[2]),
        "trace_distance": float(value), "ci_lo": float(lo), "ci_hi": float(hi),
        "n_samples": int(est.deltas.shape[0]),
    }


def _relative_line_fit(t, values) -> dict:
    """Line fit judged in relative terms.

    Minimizes the summed squared relative residuals (an unweighted fit
    would be dominated by the large late-time values and misstate how well
    a line describes the small early-time ones)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    design = np.stack([t / y, 1.0 / y], axis=1)
    coef, *_ = np.linalg.lstsq(design, np.ones_like(y), rcond=None)
    pred = coef[0] * t + coef[1]
    return {
        "slope": float(coef[0]), "intercept": float(coef[1]),
        "max_relative_residual": float(np.max(np.abs(pred - y) / np.abs(y))),
    }


def _seed_int(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# XY decay

def xy_decay(cfg: ExperimentConfig) -> RunReport:
    params = cfg.model
    threads = parallel.resolve_threads(cfg.threads)
    ham = build_hamiltonian(params)
    t_grid = cfg.t_grid or tuple(np.arange(0.0, 10.0 + 1e-9, 1.0))
    steps = sorted({steps_for(t, cfg.tau) for t in t_grid})
    init = _initial_vectors(cfg, params, cfg.seed)
    noise = cfg.noise()
    compiled = compile_circuit(build_trotter_circuit(params, cfg.tau, max(steps)))
    ctx = {"compiled": compiled, "init": init, "noise": noise,
           "measure_steps": tuple(steps), "measure": _energy_measure,
           "ham_terms": _prepared_terms(ham)}
    seeds = np.random.SeedSequence(cfg.seed).generate_state(cfg.trajectories, dtype=np.uint64)
    tasks = [(i, int(seeds[i])) for i in range(cfg.trajectories)]
    results = parallel.run_indexed(_w_plain_trajectory, tasks, threads, ctx)
    energies = np.array([e for _, e in results])  # (traj, K)
    mean_e = energies.mean(axis=0)
    stderr = energies.std(axis=0, ddof=1) / math.sqrt(cfg.trajectories)
    times = np.asarray(steps) * cfg.tau

    # decay-rate fit on log mean energy; drop points that have decayed into
    # the trajectory noise floor (they would bias the unweighted log fit)
    mask = (mean_e > 5.0 * stderr) & (np.abs(mean_e) > 0.02 * abs(mean_e[0]))
    slope, intercept = np.polyfit(times[mask], np.log(mean_e[mask]), 1)
    lam = noise.channel(cfg.tau).jump_probability * 16.0 / 15.0
    z = round(2 * len(params.edges) / params.n)
    from .predictor import xy_decay_rate

    gamma_theory = xy_decay_rate(z, lam, cfg.tau)
    rows = [{"experiment": cfg.experiment, "N": params.n, "tau": cfg.tau,
             "t": float(t), "site_set": "all", "obs_x": 0.0, "obs_y": 0.0, "obs_z": 0.0,
             "trace_distance": float(e), "ci_lo": float(e - se), "ci_hi": float(e + se),
             "n_samples": cfg.trajectories}
            for t, e, se in zip(times, mean_e, stderr)]
    summary = {
        "gamma_fit": float(-slope),
        "gamma_theory": float(gamma_theory),
        "relative_error": float(abs(-slope - gamma_theory) / gamma_theory),
        "initial_energy": float(mean_e[0]),
        "column_note": "trace_distance column holds the mean energy for xy-decay",
    }
    return RunReport("xy-decay", rows, summary, {})


# ---------------------------------------------------------------------------
# single error

@dataclass
class SingleErrorResult:
    times: np.ndarray
    sites: np.ndarray
    du_map: np.ndarray            # (T, R) energy-density change
    dtr_map: np.ndarray           # (T, R) local trace distance
    rms_energy: np.ndarray
    rms_tracedist: np.ndarray
    total_dtr: np.ndarray
    energy_ideal: np.ndarray
    energy_error: np.ndarray
    jump_measured: float
    jump_predicted: float
    insertion_time: float


def _w_single_error(task):
    ctx = parallel.worker_context()
    idx = task
    compiled: CompiledCircuit = ctx["compiled"]
    t0_step = ctx["t0_step"]
    measure = ctx["measure_steps"]
    amps = prepare_product_state(SpinConfiguration(ctx["init"][idx])).amps

    def grab(a):
        return (_bloch_block(a, range(compiled.n)),
                np.array([_op_expectation(a, terms) for terms in ctx["h_r_terms"]]),
                _op_expectation(a, ctx["ham_terms"]))

    early = [m for m in measure if m <= t0_step]
    late = [m for m in measure if m > t0_step]
    out_ideal, out_err = [], []
    evolve(amps, compiled, end_step=t0_step)
    jump_pred = _op_expectation(amps, ctx["shift_terms"])
    e_before = _op_expectation(amps, ctx["ham_terms"])
    branch = amps.copy()
    kernels.apply_pauli(branch, ctx["letters"], ctx["ins_sites"])
    jump_meas = _op_expectation(branch, ctx["ham_terms"]) - e_before
    for m in early:
        out_ideal.append(grab(amps))
        out_err.append(grab(branch) if m == t0_step else grab(amps))
    out_ideal += evolve(amps, compiled, start_step=t0_step, measure_steps=late, measure=grab)
    out_err += evolve(branch, compiled, start_step=t0_step, measure_steps=late, measure=grab)
    return out_ideal, out_err, jump_meas, jump_pred


def _op_expectation(amps, terms) -> float:
    total = 0.0
    for word, w, mx, ms, a0 in terms:
        total += w.real * kernels._pauli_expectation(amps, a0, mx, ms).real
    return total


def _prepared_terms(op: Operator):
    out = []
    for word, w in op.terms():
        mx, ms, a0 = kernels.pauli_masks(word)
        out.append((word, w, mx, ms, a0))
    return out


def single_error_experiment(cfg: ExperimentConfig) -> tuple[RunReport, SingleErrorResult]:
    params = cfg.model
    threads = parallel.resolve_threads(cfg.threads)
    n = params.n
    ham = build_hamiltonian(params)
    site = cfg.insertion_site if cfg.insertion_site is not None else n // 2
    t0_step = steps_for(cfg.insertion_time, cfg.tau)
    total_steps = steps_for(cfg.t, cfg.tau)
    if not 0 <= t0_step <= total_steps:
        raise ConfigError("insertion time outside the circuit window")
    measure_stride = max(1, round(0.2 / cfg.tau))
    measure_steps = sorted(set(list(range(0, total_steps + 1, measure_stride)) + [t0_step, total_steps]))
    ins = PauliString.from_sites(n, dict(zip(range(site, site + len(cfg.insertion_letters)),
                                             cfg.insertion_letters)))
    init = _initial_vectors(cfg, params, cfg.seed)
    ctx = {
        "compiled": compile_circuit(build_trotter_circuit(params, cfg.tau, total_steps)),
        "init": init, "t0_step": t0_step, "measure_steps": measure_steps,
        "letters": cfg.insertion_letters,
        "ins_sites": tuple(range(site, site + len(cfg.insertion_letters))),
        "ham_terms": _prepared_terms(ham),
        "h_r_terms": [_prepared_terms(local_energy_density(params, r)) for r in range(n)],
        "shift_terms": _prepared_terms(error_shift_operator(ins, ham)),
    }
    results = parallel.run_indexed(_w_single_error, range(len(init)), threads, ctx)

    times = np.array(measure_steps) * cfg.tau
    blochs_i = np.array([[m[0] for m in r[0]] for r in results])  # (M, T, R, 3)
    blochs_e = np.array([[m[0] for m in r[1]] for r in results])
    u_i = np.array([[m[1] for m in r[0]] for r in results])       # (M, T, R)
    u_e = np.array([[m[1] for m in r[1]] for r in results])
    e_i = np.array([[m[2] for m in r[0]] for r in results])       # (M, T)
    e_e = np.array([[m[2] for m in r[1]] for r in results])
    jump_meas = float(np.mean([r[2] for r in results]))
    jump_pred = float(np.mean([r[3] for r in results]))
    jump_identity_err = float(max(abs(r[2] - r[3]) for r in results))

    du = (u_e - u_i).mean(axis=0)
    dtr = 0.5 * np.linalg.norm(blochs_e.mean(axis=0) - blochs_i.mean(axis=0), axis=-1)
    rms_u = _rms_radius(np.abs(du), site, n)
    rms_d = _rms_radius(dtr, site, n)
    result = SingleErrorResult(
        times=times, sites=np.arange(n), du_map=du, dtr_map=dtr,
        rms_energy=rms_u, rms_tracedist=rms_d, total_dtr=dtr.sum(axis=1),
        energy_ideal=e_i.mean(axis=0), energy_error=e_e.mean(axis=0),
        jump_measured=jump_meas, jump_predicted=jump_pred,
        insertion_time=t0_step * cfg.tau,
    )
    # fit inside the diffusive window: after the insertion transient but
    # before the spreading front feels the open boundary
    lo, hi = cfg.rms_fit_window
    dt_all = times - result.insertion_time
    after = (dt_all >= lo) & (dt_all <= hi)
    expo = _diffusion_exponent(dt_all[after], rms_d[after])
    drift = np.abs(result.energy_error[times >= result.insertion_time]
                   - result.energy_error[measure_steps.index(t0_step)])
    summary = {
        "jump_measured": jump_meas, "jump_predicted": jump_pred,
        "jump_identity_max_error": jump_identity_err,
        "max_drift_after_insertion": float(drift.max()),
        "drift_over_jump": float(drift.max() / abs(jump_meas)) if jump_meas else float("nan"),
        "rms_exponent_tracedist": expo,
        "rms_exponent_energy": _diffusion_exponent(dt_all[after], rms_u[after]),
    }
    rows = [{"experiment": cfg.experiment, "N": n, "tau": cfg.tau, "t": float(t),
             "site_set": "all", "obs_x": 0.0, "obs_y": 0.0, "obs_z": 0.0,
             "trace_distance": float(d), "ci_lo": float(d), "ci_hi": float(d),
             "n_samples": len(init)}
            for t, d in zip(times, result.total_dtr)]
    maps = {"map_energy": (times, result.sites, result.du_map),
            "map_tracedist": (times, result.sites, result.dtr_map)}
    return RunReport("single-error", rows, summary, {}, maps), result


def _rms_radius(profile: np.ndarray, center: int, n: int) -> np.ndarray:
    r = np.arange(n) - center
    weights = profile.sum(axis=1)
    out = np.zeros(profile.shape[0])
    ok = weights > 1e-30
    out[ok] = np.sqrt((profile[ok] * r**2).sum(axis=1) / weights[ok])
    return out


def _diffusion_exponent(dt: np.ndarray, rms: np.ndarray) -> float:
    ok = (dt > 0) & (rms > 0)
    if ok.sum() < 3:
        return float("nan")
    slope, _ = np.polyfit(np.log(dt[ok]), np.log(rms[ok]), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# scar vs thermal

def scar_vs_thermal(cfg: ExperimentConfig) -> RunReport:
    params = cfg.model
    if params.kind != "quantum_east":
        raise ConfigError("scar experiment needs the quantum-East model")
    n = params.n
    steps = steps_for(cfg.t, cfg.tau)
    compiled = compile_circuit(build_trotter_circuit(params, cfg.tau, steps))
    site = cfg.insertion_site if cfg.insertion_site is not None else n // 2
    measure_steps = list(range(0, steps + 1))
    series = {}
    for label, vectors in [("scar", SpinConfiguration.polarized(n).vectors),
                           ("thermal", _rotated_scar(n, cfg.theta))]:
        ideal = prepare_product_state(SpinConfiguration(vectors)).amps
        err = ideal.copy()
        kernels.apply_pauli(err, cfg.insertion_letters, tuple(range(site, site + len(cfg.insertion_letters))))
        grab = lambda a: _bloch_block(a, range(n))
        bi = np.array(evolve(ideal, compiled, measure_steps=measure_steps, measure=grab))
        be = np.array(evolve(err, compiled, measure_steps=measure_steps, measure=grab))
        series[label] = 0.5 * np.linalg.norm(be - bi, axis=-1).sum(axis=1)
    times = np.array(measure_steps) * cfg.tau
    window = (times >= 0.5) & (times <= min(cfg.t, 6.0))
    slope, r2 = _line_fit_r2(times[window], series["scar"][window])
    ratios = {k: float(v[-1] / v[0]) if v[0] > 0 else float("nan")
              for k, v in series.items()}
    rows = []
    for label in ("scar", "thermal"):
        rows += [{"experiment": cfg.experiment, "N": n, "tau": cfg.tau, "t": float(t),
                  "site_set": label, "obs_x": 0.0, "obs_y": 0.0, "obs_z": 0.0,
                  "trace_distance": float(d), "ci_lo": float(d), "ci_hi": float(d),
                  "n_samples": 1}
                 for t, d in zip(times, series[label])]
    summary = {
        "scar_slope": slope, "scar_r2": r2,
        "scar_ratio": ratios["scar"], "thermal_ratio": ratios["thermal"],
        "ratio_of_ratios": ratios["scar"] / ratios["thermal"],
    }
    return RunReport("scar-vs-thermal", rows, summary, {})


def _rotated_scar(n: int, theta: float) -> np.ndarray:
    direction = (math.sin(2 * theta), 0.0, math.cos(2 * theta))
    return SpinConfiguration.polarized(n, direction).vectors


def _line_fit_r2(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return float(slope), 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")


# ---------------------------------------------------------------------------
# sampler validation (windowed MCMC vs rejection sampling)

def rpe_validate(cfg: ExperimentConfig) -> RunReport:
    params = cfg.model
    ham = build_hamiltonian(params)
    energy = cfg.initial_energy_per_site * params.n
    rows = []
    trend = []
    for i, eps in enumerate(sorted(cfg.epsilon_grid, reverse=True)):
        sampler = SamplerConfig(energy=energy, epsilon=eps, move_size=cfg.move_size,
                                sweeps=cfg.mcmc_sweeps, burn_in=cfg.burn_in, thin=1,
                                seed=cfg.seed + i)
        chain = run_chain(ham, sampler)
        z_series = chain.samples[:, :, 2].mean(axis=1)
        z_mcmc, se_mcmc = _block_mean(z_series)
        rng = np.random.default_rng(cfg.seed + 1000 + i)
        rej = rejection_sample_many(ham, energy, eps, rng, cfg.rejection_samples)
        z_r = rej[:, :, 2].mean(axis=1)
        z_rej, se_rej = float(z_r.mean()), float(z_r.std(ddof=1) / math.sqrt(z_r.size))
        rows.append({"epsilon": eps, "method": "mcmc", "z": z_mcmc, "stderr": se_mcmc,
                     "n": int(chain.samples.shape[0])})
        rows.append({"epsilon": eps, "method": "rejection", "z": z_rej, "stderr": se_rej,
                     "n": int(z_r.size)})
        trend.append((eps, z_mcmc, se_mcmc, z_rej, se_rej))
    fixed = SamplerConfig(energy=energy, epsilon=0.0, move_size=cfg.move_size,
                          sweeps=cfg.mcmc_sweeps, burn_in=cfg.burn_in, thin=1,
                          seed=cfg.seed + 99)
    chain0 = run_chain(ham, fixed)
    z0, se0 = _block_mean(chain0.samples[:, :, 2].mean(axis=1))
    rows.append({"epsilon": 0.0, "method": "mcmc", "z": z0, "stderr": se0,
                 "n": int(chain0.samples.shape[0])})
    max_sigma = max(abs(z_m - z_r) / math.hypot(s_m, s_r)
                    for _, z_m, s_m, z_r, s_r in trend)
    eps_arr = np.array([t[0] for t in trend])
    z_arr = np.array([t[1] for t in trend])
    coef = np.polyfit(eps_arr, z_arr, 1)
    extrap = float(np.polyval(coef, 0.0))
    se_extrap = float(np.sqrt(np.mean([t[2] ** 2 for t in trend])))
    summary = {
        "max_discrepancy_sigma": float(max_sigma),
        "z_fixed_energy": z0, "stderr_fixed": se0,
        "z_extrapolated": extrap,
        "trend_sigma": float(abs(z0 - extrap) / math.hypot(se0, se_extrap)),
    }
    return RunReport("rpe-validate", rows, summary, {})


def _block_mean(series: np.ndarray, blocks: int = 40) -> tuple[float, float]:
    """Mean and autocorrelation-robust standard error via block averaging."""
    size = max(1, series.size // blocks)
    usable = series[: size * (series.size // size)]
    means = usable.reshape(-1, size).mean(axis=1)
    return float(series.mean()), float(means.std(ddof=1) / math.sqrt(means.size))


# ---------------------------------------------------------------------------
# tables and tdpt

def rpe_tables(cfg: ExperimentConfig) -> tuple[RunReport, EnsembleTables]:
    params = cfg.model
    ham = build_hamiltonian(params)
    from .rpe import product_state_energy_range

    if cfg.energy_grid:
        grid = np.asarray(cfg.energy_grid, dtype=float)
    else:
        e_lo, e_hi = product_state_energy_range(ham)
        margin = 0.02 * (e_hi - e_lo)
        grid = np.linspace((e_lo + margin) / params.n, (e_hi - margin) / params.n, 41)
    sampler = SamplerConfig(energy=0.0, move_size=cfg.move_size,
                            sweeps=cfg.rpe_samples * cfg.sweeps_per_sample,
                            burn_in=cfg.burn_in, thin=cfg.sweeps_per_sample, seed=cfg.seed)
    tables = ensemble_tables(ham, grid, sampler)
    rows = []
    for i, e in enumerate(tables.energy_density):
        row = {"energy_density": float(e),
               "obs_x": float(tables.obs[i, 0]), "obs_y": float(tables.obs[i, 1]),
               "obs_z": float(tables.obs[i, 2]),
               "energy_variance_per_site": float(tables.energy_variance_per_site[i]),
               "purity": float(tables.purity[i])}
        row.update({f"delta_{w}": float(tables.delta_e[w][i]) for w in sorted(tables.delta_e)})
        rows.append(row)
    report = RunReport("rpe-tables", rows, {"grid_points": int(grid.size)}, {},
                       artifacts={"tables.json": tables.to_json()})
    return report, tables


def tdpt_check(cfg: ExperimentConfig) -> RunReport:
    from .predictor import tdpt_terms_batch
    from .states import DensityMatrix, observable_series

    params = cfg.model
    n = params.n
    from .models import hamiltonian_split, trotter_perturbation

    h1, h2 = hamiltonian_split(params)
    ham = h1 + h2
    eig = EigenSystem.from_operator(ham)
    v_op = trotter_perturbation(h1, h2)
    t_grid = cfg.t_grid or (1, 2, 5, 10, 20, 50, 100)
    t_grid = tuple(float(t) for t in t_grid)

    init = _initial_vectors(cfg, params, cfg.seed)
    psis = np.array([prepare_product_state(SpinConfiguration(v)).amps for v in init])
    rho = DensityMatrix.from_statevectors(psis, n)
    if cfg.interpolation_s > 0:
        from .states import diagonal_ensemble, interpolate

        rho = interpolate(rho, diagonal_ensemble(rho, eig), cfg.interpolation_s)

    obs = [Operator(n, [(PauliString.from_sites(n, {r: a}).letters, 1.0)])
           for r in range(n) for a in "XYZ"]
    # exact observables under continuous evolution and under the Trotter unitary
    from .evolve import circuit_unitary

    u_step = circuit_unitary(build_trotter_circuit(params, cfg.tau, 1))
    eig_u = EigenSystem.from_unitary(u_step, cfg.tau, n)
    steps = [round(t / cfg.tau) for t in t_grid]
    t_exact = [s * cfg.tau for s in steps]
    exact = observable_series(eig, rho.mat, obs, t_exact)        # (obs, T)
    trott = observable_series(eig_u, rho.mat, obs, t_exact)
    t1, t2 = tdpt_terms_batch(eig, v_op, rho, obs, t_exact, cfg.tau)

    def bloch_distance(diff):  # (obs, T) -> summed trace distance series
        per_site = diff.reshape(n, 3, len(t_exact))
        return 0.5 * np.linalg.norm(per_site, axis=1).sum(axis=0)

    exact_err = bloch_distance(trott - exact)
    tdpt_err = bloch_distance(np.real(t1 + t2))
    t1_err = bloch_distance(np.real(t1))
    rows = [{"t": float(t), "exact_error": float(a), "tdpt_error": float(b),
             "t1_error": float(c)}
            for t, a, b, c in zip(t_exact, exact_err, tdpt_err, t1_err)]
    rel = np.abs(tdpt_err - exact_err) / np.maximum(exact_err, 1e-30)
    summary = {
        "max_relative_deviation": float(rel.max()),
        "t1_max": float(np.max(np.abs(np.real(t1)))),
        "late_over_early": float(exact_err[-1] / exact_err[0]),
    }
    return RunReport("tdpt-check", rows, summary, {})


# ---------------------------------------------------------------------------
# fit & predict

def fit_and_predict(cfg: ExperimentConfig, samples=None) -> RunReport:
    from .predictor import ErrorFit, error_model, fit_error_model, optimal_tau

    if samples is None:
        if cfg.fit_input is None:
            raise ConfigError("fit-and-predict needs fit.input (CSV of t, tau, error)")
        import csv as _csv

        with open(cfg.fit_input) as fh:
            reader = _csv.DictReader(fh)
            samples = [(float(r["t"]), float(r["tau"]), float(r["trace_distance"]))
                       for r in reader]
    pts = [s for s in samples if s[1] <= cfg.fit_tau_max + 1e-12]
    fit = fit_error_model(pts, cfg.noise_p0, cfg.noise_p1)
    t_grid = cfg.t_grid or (1.0, 2.0, 4.0, 8.0, 16.0)
    rows = []
    for t in t_grid:
        tau_star, err_star = optimal_tau(fit, float(t))
        value, valid = error_model(float(t), tau_star, fit)
        rows.append({"t": float(t), "optimal_tau": float(tau_star),
                     "error_at_optimum": float(err_star), "model_valid": bool(valid)})
    summary = {"S": fit.s, "C": fit.c, "p0": fit.p0, "p1": fit.p1,
               "window": fit.window, "residuals": list(fit.residuals),
               "residual_rms": float(np.sqrt(np.mean(np.square(fit.residuals))))}
    return RunReport("fit-and-predict", rows, summary, {})


# ---------------------------------------------------------------------------
# dispatcher

_RUNNERS = {
    "error-vs-t": error_vs_time,
    "error-vs-N": error_vs_size,
    "error-vs-tau": error_vs_tau,
    "xy-decay": xy_decay,
    "scar-vs-thermal": scar_vs_thermal,
    "rpe-validate": rpe_validate,
    "fit-and-predict": fit_and_predict,
    "tdpt-check": tdpt_check,
}


def run(cfg: ExperimentConfig) -> RunReport:
    """Run one experiment and return its report (no file output here)."""
    cfg.validate()
    start = time.time()
    if cfg.experiment == "single-error":
        report, _ = single_error_experiment(cfg)
    elif cfg.experiment == "rpe-tables":
        report, _ = rpe_tables(cfg)
    else:
        runner = _RUNNERS.get(cfg.experiment)
        if runner is None:
            raise ConfigError(f"unknown experiment kind {cfg.experiment!r}")
        report = runner(cfg)
    import numpy
    import scipy

    from . import __version__

    report.metadata.update({
        "seed": cfg.seed,
        "seed_scheme": "numpy SeedSequence(seed); worker streams spawned in "
                       "grid/run order, so each row is reproducible from the "
                       "master seed and its index",
        "threads": parallel.resolve_threads(cfg.threads),
        "wall_time_s": round(time.time() - start, 3),
        "versions": {"thermalsim": __version__, "numpy": numpy.__version__,
                     "scipy": scipy.__version__},
    })
    return report
