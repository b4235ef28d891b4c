import numpy as np
import pytest

from thermalsim.ensemble import ensemble_tables
from thermalsim.models import (build_hamiltonian, hamiltonian_split,
                               mixed_field_ising, trotter_perturbation)
from thermalsim.pauli import Operator, PauliString
from thermalsim.predictor import (ErrorFit, error_model, fit_error_model,
                                  heating_trajectory, naive_estimate,
                                  optimal_tau, tdpt_terms_batch,
                                  tdpt_trotter_error, xy_decay_rate, xy_energy)
from thermalsim.rpe import SamplerConfig, SpinConfiguration
from thermalsim.states import (DensityMatrix, EigenSystem, diagonal_ensemble,
                               prepare_product_state)

PAPER_FIT = ErrorFit(s=0.7661, c=0.0979, p0=3.5e-4, p1=9.6e-4)


def test_naive_estimate():
    assert naive_estimate(0.0, 5700) == (1.0, 0.0)
    suppression, rel = naive_estimate(1e-3, 5700)
    assert suppression == pytest.approx(0.00335, abs=2e-4)
    assert rel == pytest.approx(5.7)
    with pytest.raises(ValueError):
        naive_estimate(1.0, 10)


def test_error_model_paper_numbers():
    value, valid = error_model(4.0, 0.2, PAPER_FIT)
    expected = 0.7661 * 3.5e-4 * 20 + 0.7661 * 9.6e-4 * 4 + 0.0979 * 0.04
    assert value == pytest.approx(expected, rel=1e-12)
    assert value == pytest.approx(0.012221, abs=1e-6)  # 0.00536 + 0.00294 + 0.00392
    assert valid


def test_error_model_validity_flag():
    assert not error_model(4.0, 0.3, PAPER_FIT).valid  # tau above window
    hot = ErrorFit(s=5.0, c=0.1, p0=1e-2, p1=0.0)
    assert not error_model(10.0, 0.1, hot).valid  # gate part >= 0.1


def test_error_model_pure_trotter():
    fit = ErrorFit(s=0.5, c=0.2, p0=0.0, p1=0.0)
    assert error_model(7.0, 0.1, fit).value == pytest.approx(0.2 * 0.01)


def test_error_model_monotone_in_time():
    taus = [0.05, 0.1, 0.2]
    for tau in taus:
        values = [error_model(t, tau, PAPER_FIT).value for t in (1, 2, 4, 8)]
        assert all(b > a for a, b in zip(values, values[1:]))


def test_fit_round_trip():
    rng = np.random.default_rng(1)
    pts = []
    for tau in (0.05, 0.1, 0.15, 0.2, 0.25):
        for t in (1.0, 2.0, 4.0):
            pts.append((t, tau, error_model(t, tau, PAPER_FIT).value))
    fit = fit_error_model(pts, PAPER_FIT.p0, PAPER_FIT.p1)
    assert fit.s == pytest.approx(0.7661, abs=1e-6)
    assert fit.c == pytest.approx(0.0979, abs=1e-6)
    assert max(abs(r) for r in fit.residuals) < 1e-12


def test_fit_needs_two_taus():
    with pytest.raises(ValueError):
        fit_error_model([(1.0, 0.1, 0.01), (2.0, 0.1, 0.02)], 1e-4, 1e-3)


def test_optimal_tau_closed_form_and_scan():
    t = 4.0
    tau_star, err_star = optimal_tau(PAPER_FIT, t)
    assert tau_star == pytest.approx((PAPER_FIT.s * PAPER_FIT.p0 * t / (2 * PAPER_FIT.c)) ** (1 / 3))
    assert tau_star == pytest.approx(0.176, abs=0.006)
    grid = np.linspace(1e-3, 0.6, 6000)
    values = [error_model(t, tau, PAPER_FIT).value for tau in grid]
    scan_tau = grid[int(np.argmin(values))]
    assert abs(scan_tau - tau_star) < 1e-4 + grid[1] - grid[0]
    assert err_star == pytest.approx(min(values), rel=1e-6)


def test_optimal_tau_degenerate():
    with pytest.raises(ValueError):
        optimal_tau(ErrorFit(s=1.0, c=0.0, p0=1e-4, p1=0.0), 4.0)
    assert optimal_tau(PAPER_FIT, 0.0) == (0.0, 0.0)


def test_optimal_error_scales_as_p0_to_two_thirds():
    # keep the max-angle error fixed and vary the zero-angle offset
    p_max = 1.1e-3
    p0s = np.array([1e-5, 1e-4, 5e-4])
    errs = []
    for p0 in p0s:
        p1 = (p_max - p0) / (np.pi / 4)
        fit = ErrorFit(s=0.77, c=0.1, p0=float(p0), p1=float(p1))
        tau_star, err_star = optimal_tau(fit, 4.0)
        errs.append(err_star - fit.p1 * fit.s * 4.0)  # tau-dependent part
    slope = np.polyfit(np.log(p0s), np.log(errs), 1)[0]
    assert slope == pytest.approx(2.0 / 3.0, abs=1e-6)


def test_xy_decay_rate_values():
    assert xy_decay_rate(4, 1e-3, 0.1) == pytest.approx(0.21)
    assert xy_decay_rate(4, 2.0e-3, 2.0) == pytest.approx(3 * 7 * 1e-3)
    assert xy_decay_rate(2, 0.0, 0.1) == 0.0
    e = xy_energy([0.0, 1.0], 32.0, 0.21)
    assert e[0] == 32.0 and e[1] == pytest.approx(32.0 * np.exp(-0.21))


# ---------------------------------------------------------------------------
# heating model

@pytest.fixture(scope="module")
def tables10():
    ham = build_hamiltonian(mixed_field_ising(10))
    cfg = SamplerConfig(energy=0.0, sweeps=200, burn_in=60, thin=2, seed=31)
    grid = np.linspace(-2.0, 1.4, 12)
    return ensemble_tables(ham, grid, cfg)


def test_heating_zero_error_is_static(tables10):
    params = mixed_field_ising(10)
    res = heating_trajectory(tables10, "depolarizing", 0.0, params, 0.02,
                             np.linspace(0, 4, 9), -14.0)
    assert np.all(res.energy == -14.0)
    assert np.all(res.trace_distance == 0.0)


def test_heating_decays_toward_zero_energy(tables10):
    params = mixed_field_ising(10)
    t_grid = np.linspace(0, 30, 31)
    res = heating_trajectory(tables10, "depolarizing", 5e-4, params, 0.02,
                             t_grid, -14.0)
    assert res.energy[0] == pytest.approx(-14.0)
    assert np.all(np.diff(res.energy) >= -1e-9)
    assert abs(res.energy[-1]) < 14.0
    # early growth of the observable error is near-linear
    early = res.trace_distance[:6]
    fit = np.polyfit(t_grid[:6], early, 1)
    resid = early - np.polyval(fit, t_grid[:6])
    assert np.abs(resid).max() < 0.2 * max(early.max(), 1e-9)
    # exponential-decay fit of the energy
    mask = res.energy < -0.5
    slope = np.polyfit(t_grid[mask], np.log(-res.energy[mask]), 1)[0]
    pred = -14.0 * np.exp(slope * t_grid)
    assert np.abs(pred - res.energy).max() < 0.1 * 14.0


def test_heating_fixed_point_at_zero_energy(tables10):
    params = mixed_field_ising(10)
    res = heating_trajectory(tables10, "depolarizing", 5e-4, params, 0.02,
                             np.linspace(0, 10, 11), 0.0)
    assert np.abs(res.energy).max() < 0.3


def test_heating_all_channel_kinds_decay(tables10):
    params = mixed_field_ising(10)
    t_grid = np.linspace(0, 20, 21)
    finals = {}
    for kind in ("depolarizing", "phase_flip", "bit_flip"):
        res = heating_trajectory(tables10, kind, 5e-4, params, 0.02, t_grid, -14.0)
        finals[kind] = res.energy[-1]
        assert res.energy[-1] > -14.0
    assert len(finals) == 3


def test_heating_rejects_out_of_range_energy(tables10):
    with pytest.raises(ValueError):
        heating_trajectory(tables10, "depolarizing", 1e-4, mixed_field_ising(10),
                           0.02, [0, 1], -30.0)


# ---------------------------------------------------------------------------
# perturbative Trotter error

def _tdpt_setup(n=6, seed=41):
    params = mixed_field_ising(n)
    h1, h2 = hamiltonian_split(params)
    ham = h1 + h2
    eig = EigenSystem.from_operator(ham)
    v = trotter_perturbation(h1, h2)
    rng = np.random.default_rng(seed)
    psis = np.array([prepare_product_state(SpinConfiguration.random(n, rng)).amps
                     for _ in range(6)])
    rho = DensityMatrix.from_statevectors(psis, n)
    return params, ham, eig, v, rho


def test_tdpt_zero_tau():
    _, ham, eig, v, rho = _tdpt_setup()
    obs = Operator(6, [(PauliString.from_sites(6, {2: "Z"}).letters, 1.0)])
    t1, t2 = tdpt_trotter_error(eig, v, rho, obs, [1.0, 5.0], 0.0)
    assert np.abs(t1).max() == 0.0 and np.abs(t2).max() == 0.0


def test_tdpt_t1_vanishes_for_diagonal_state():
    _, ham, eig, v, rho = _tdpt_setup()
    rho_d = diagonal_ensemble(rho, eig)
    obs = Operator(6, [(PauliString.from_sites(6, {1: "X"}).letters, 1.0)])
    t1, t2 = tdpt_trotter_error(eig, v, rho_d, obs, [1.0, 10.0], 0.05)
    assert np.abs(t1).max() < 1e-14


def test_tdpt_t1_vanishes_for_conserved_observable():
    _, ham, eig, v, rho = _tdpt_setup()
    t1, _ = tdpt_trotter_error(eig, v, rho, ham, [1.0, 3.0, 7.0], 0.05)
    assert np.abs(t1).max() < 1e-12


def test_tdpt_t1_linear_in_time():
    _, ham, eig, v, rho = _tdpt_setup()
    obs = Operator(6, [(PauliString.from_sites(6, {3: "Z"}).letters, 1.0)])
    # T1 at time t has an explicit factor t with a t-dependent trace; the
    # trace part oscillates, so check the small-t linear coefficient
    t1_a, _ = tdpt_trotter_error(eig, v, rho, obs, [1e-6], 0.05)
    t1_b, _ = tdpt_trotter_error(eig, v, rho, obs, [2e-6], 0.05)
    assert np.real(t1_b[0]) == pytest.approx(2 * np.real(t1_a[0]), rel=1e-4)


def test_tdpt_matches_direct_formula():
    # independent dense evaluation of both terms for one observable
    _, ham, eig, v, rho = _tdpt_setup(n=4, seed=43)
    obs = Operator(4, [(PauliString.from_sites(4, {1: "Y"}).letters, 1.0)])
    tau, t = 0.07, 2.3
    t1, t2 = tdpt_trotter_error(eig, v, rho, obs, [t], tau)

    w = eig.vectors
    vt = w.conj().T @ v.dense() @ w
    ot = w.conj().T @ obs.dense() @ w
    rt = w.conj().T @ rho.mat @ w
    e = eig.values
    phase = np.exp(-1j * t * e)
    rho_t = rt * np.outer(phase, phase.conj())
    dim = len(e)
    t1_ref = 0.0 + 0.0j
    t2_ref = 0.0 + 0.0j
    for n_i in range(dim):
        ket = np.zeros((dim, dim), dtype=complex)
        ket[n_i, n_i] = 1.0
        comm = ket @ rho_t - rho_t @ ket
        t1_ref += -1j * tau**2 * t * vt[n_i, n_i] * np.trace(ot @ comm)
    for m_i in range(dim):
        for n_i in range(dim):
            if m_i == n_i:
                continue
            ket = np.zeros((dim, dim), dtype=complex)
            ket[m_i, n_i] = 1.0
            comm = ket @ rho_t - rho_t @ ket
            gap = e[m_i] - e[n_i]
            t2_ref += -(tau**2) * vt[m_i, n_i] * (1 - np.exp(-1j * t * gap)) / gap \
                * np.trace(ot @ comm)
    assert t1[0] == pytest.approx(t1_ref, abs=1e-12)
    assert t2[0] == pytest.approx(t2_ref, abs=1e-12)


def test_tdpt_batch_matches_single():
    _, ham, eig, v, rho = _tdpt_setup(n=5, seed=44)
    obs = [Operator(5, [(PauliString.from_sites(5, {r: a}).letters, 1.0)])
           for r in (0, 2) for a in "XZ"]
    t_list = [0.5, 2.0]
    t1b, t2b = tdpt_terms_batch(eig, v, rho, obs, t_list, 0.03)
    for i, o in enumerate(obs):
        t1, t2 = tdpt_trotter_error(eig, v, rho, o, t_list, 0.03)
        assert np.abs(t1 - t1b[i]).max() < 1e-13
        assert np.abs(t2 - t2b[i]).max() < 1e-13
