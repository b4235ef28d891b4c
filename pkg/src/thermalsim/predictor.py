"""Closed-form and fitted predictions of observable error.

The heuristic error model combines gate errors (linear in time, with the
angle-dependent rate splitting into a 1/tau floor term and a
tau-independent slope term) and the leading Trotter error (constant in
time, quadratic in tau):

    error(t, tau) = S p0 t / tau + S p1 t + C tau^2

S and C are fit constants; the model is trusted only while the gate part
stays small and tau is below the large-step regime.  The optimal step and
the error there follow in closed form.  Independently, a table-driven
heating model tracks the ensemble energy as gate errors pump it toward
zero and reads observables off the ensemble tables, and a perturbative
evaluator splits the Trotter error of an observable into a linear-in-time
diagonal term and a bounded off-diagonal term in the exact eigenbasis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import nnls

from .ensemble import EnsembleTables
from .models import ModelParams
from .noise import variant_branch_probs
from .pauli import Operator
from .states import DensityMatrix, EigenSystem

MODEL_GATE_PART_LIMIT = 0.1
MODEL_TAU_LIMIT = 0.25


def naive_estimate(p: float, n2q: float) -> tuple[float, float]:
    """(suppression factor, relative error) of plain gate counting.

    The suppression factor is the probability that none of the n2q gates
    failed; for small p * n2q the relative observable error is p * n2q.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError("gate error must lie in [0, 1)")
    return (1.0 - p) ** n2q, p * n2q


@dataclass(frozen=True)
class ErrorFit:
    """Constants of the heuristic error model, with the fit window kept."""

    s: float
    c: float
    p0: float
    p1: float
    window: dict | None = None
    residuals: tuple[float, ...] = ()

    def __post_init__(self):
        if self.s < 0 or self.c < 0:
            raise ValueError("thermalizing fits need S >= 0 and C >= 0")


class ModelPrediction(NamedTuple):
    value: float
    valid: bool


def error_model(t: float, tau: float, fit: ErrorFit) -> ModelPrediction:
    """Predicted observable error, flagged invalid outside the trusted window."""
    if tau <= 0:
        raise ValueError("need tau > 0")
    gate_part = fit.s * (fit.p0 * t / tau + fit.p1 * t)
    value = gate_part + fit.c * tau**2
    return ModelPrediction(value, gate_part < MODEL_GATE_PART_LIMIT and tau <= MODEL_TAU_LIMIT)


def fit_error_model(samples, p0: float, p1: float) -> ErrorFit:
    """Least-squares (S, C) from (t, tau, measured error) triples.

    Unweighted, with a nonnegativity clamp on both constants.  Needs at
    least two distinct tau values, otherwise the design is rank-deficient.
    """
    pts = [(float(t), float(tau), float(err)) for t, tau, err in samples]
    if len({round(tau, 12) for _, tau, _ in pts}) < 2:
        raise ValueError("fit needs at least two distinct tau values")
    design = np.array([[p0 * t / tau + p1 * t, tau**2] for t, tau, _ in pts])
    target = np.array([err for _, _, err in pts])
    coeffs, _ = nnls(design, target)
    pred = design @ coeffs
    window = {
        "t": (min(t for t, _, _ in pts), max(t for t, _, _ in pts)),
        "tau": (min(tau for _, tau, _ in pts), max(tau for _, tau, _ in pts)),
        "points": len(pts),
    }
    return ErrorFit(float(coeffs[0]), float(coeffs[1]), p0, p1,
                    window=window, residuals=tuple(pred - target))


def optimal_tau(fit: ErrorFit, t: float) -> tuple[float, float]:
    """Argmin of the model in tau and the error there.

    tau* = (S p0 t / 2C)^(1/3); the minimum value is
    3 C^(1/3) (S p0 t / 2)^(2/3) + p1 S t.
    """
    if t < 0:
        raise ValueError("need t >= 0")
    if fit.c <= 0 or fit.s <= 0 or fit.p0 <= 0:
        raise ValueError("optimal step needs S, C, p0 > 0")
    if t == 0:
        return 0.0, 0.0
    tau_star = (fit.s * fit.p0 * t / (2.0 * fit.c)) ** (1.0 / 3.0)
    err_star = 3.0 * fit.c ** (1.0 / 3.0) * (fit.s * fit.p0 * t / 2.0) ** (2.0 / 3.0) \
        + fit.p1 * fit.s * t
    return tau_star, err_star


# ---------------------------------------------------------------------------
# XY decay law

def xy_decay_rate(z: int, lam: float, tau: float) -> float:
    """Energy decay rate of the depolarized XY circuit: 3 (2z - 1) lam / tau."""
    if z < 1 or tau <= 0:
        raise ValueError("need coordination number >= 1 and tau > 0")
    return 3.0 * (2 * z - 1) * lam / tau


def xy_energy(t, e0: float, gamma: float):
    return e0 * np.exp(-gamma * np.asarray(t, dtype=float))


# ---------------------------------------------------------------------------
# table-driven heating model

@dataclass
class HeatingResult:
    t: np.ndarray
    energy: np.ndarray
    obs: np.ndarray              # (len(t), 3) read off the tables at E(t)
    trace_distance: np.ndarray   # vs the t = 0 tables entry
    clamped: bool


def heating_trajectory(tables: EnsembleTables, kind: str, p: float,
                       params: ModelParams, tau: float, t_grid,
                       initial_energy: float) -> HeatingResult:
    """Mean-field energy trajectory under per-gate Pauli errors.

    Each two-qubit gate shifts the ensemble energy by the error-weighted
    mean of the tabulated energy shifts at the current energy; observables
    are then read off the tables at the drifted energy.  Error events are
    applied deterministically in the mean, one Trotter step at a time.
    """
    if params.kind != "mixed_field_ising":
        raise ValueError("heating model expects the chain model")
    n = params.n
    lo, hi = tables.range
    if not lo <= initial_energy / n <= hi:
        raise ValueError("initial energy outside the table grid")
    branches = variant_branch_probs(kind, p)
    gates_per_step = n - 1
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    steps = int(math.ceil(t_grid[-1] / tau + 1e-9))

    energies = np.empty(steps + 1)
    energies[0] = initial_energy
    clamped = False
    e = initial_energy
    for k in range(steps):
        shift = sum(q * tables.delta_at(word, e / n) for word, q in branches)
        e = e + gates_per_step * shift
        if e / n < lo or e / n > hi:
            clamped = True
            e = min(max(e, lo * n), hi * n)
        energies[k + 1] = e

    t_steps = tau * np.arange(steps + 1)
    energy_t = np.interp(t_grid, t_steps, energies)
    obs = np.array([tables.obs_at(en / n) for en in energy_t])
    p_initial = tables.obs_at(initial_energy / n)
    dist = 0.5 * np.linalg.norm(obs - p_initial, axis=1)
    return HeatingResult(t_grid, energy_t, obs, dist, clamped)


# ---------------------------------------------------------------------------
# time-dependent perturbation theory for Trotter error

def tdpt_terms_batch(eig: EigenSystem, v: Operator, rho0: DensityMatrix,
                     obs_list, t_list, tau: float,
                     degeneracy_tol: float = 1e-10):
    """Both perturbative error terms for many observables at once.

    Returns (T1, T2) arrays of shape (len(obs_list), len(t_list)).  T1 is
    the diagonal term, exactly linear in t and zero whenever the initial
    state is diagonal in the eigenbasis or the observable commutes with
    the Hamiltonian; T2 is the bounded off-diagonal term.  Energy gaps
    below ``degeneracy_tol`` use the analytic (1 - e^{-i t d}) / d -> i t
    limit.
    """
    rho0.check()
    v_tilde = eig.to_eigenbasis(v.dense())
    rho_tilde = eig.to_eigenbasis(rho0.mat)
    obs_tilde = [eig.to_eigenbasis(o.dense()) for o in obs_list]
    energies = eig.values
    gaps = energies[:, None] - energies[None, :]
    small = np.abs(gaps) < degeneracy_tol
    safe = np.where(small, 1.0, gaps)
    v_diag = np.real(np.diag(v_tilde))
    dv = v_diag[:, None] - v_diag[None, :]   # V_mm - V_nn

    t_arr = np.asarray(t_list, dtype=float)
    t1 = np.zeros((len(obs_tilde), t_arr.size), dtype=complex)
    t2 = np.zeros_like(t1)
    v_off = v_tilde - np.diag(np.diag(v_tilde))
    for it, t in enumerate(t_arr):
        phase = np.exp(-1j * t * energies)
        rho_t = rho_tilde * np.outer(phase, phase.conj())
        g = np.where(small, 1j * t, (1.0 - np.exp(-1j * t * safe)) / safe)
        m_mat = v_off * g
        a_mat = m_mat @ rho_t
        b_mat = rho_t @ m_mat
        d1 = dv * rho_t
        for io, o_t in enumerate(obs_tilde):
            t1[io, it] = -1j * tau**2 * t * np.sum(o_t.T * d1)
            t2[io, it] = -(tau**2) * (np.sum(a_mat.T * o_t) - np.sum(b_mat.T * o_t))
    return t1, t2


def tdpt_trotter_error(eig: EigenSystem, v: Operator, rho0: DensityMatrix,
                       obs: Operator, t_list, tau: float):
    """(T1, T2) of one observable; their sum approximates the Trotterized
    minus exact expectation value difference to leading order in tau."""
    t1, t2 = tdpt_terms_batch(eig, v, rho0, [obs], t_list, tau)
    return t1[0], t2[0]
