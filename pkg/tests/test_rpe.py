import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermalsim.models import build_hamiltonian, mixed_field_ising
from thermalsim.pauli import Operator
from thermalsim.rpe import (ClassicalHamiltonian, InfeasibleEnergyError,
                            SamplerConfig, SpinConfiguration, autocorrelation,
                            classical_expectation, config_energy,
                            effective_field, mcmc_run, mcmc_step,
                            product_state_energy_range, rejection_sample_many,
                            run_chain, seed_configuration, write_samples_csv,
                            _direction, _feasible_interval)
from thermalsim.states import expectation, prepare_product_state

H12 = build_hamiltonian(mixed_field_ising(12))


def test_config_energy_polarized():
    ham = build_hamiltonian(mixed_field_ising(20))
    assert config_energy(SpinConfiguration.polarized(20), ham) == pytest.approx(-28.0)


def test_config_energy_x_polarized():
    ham = build_hamiltonian(mixed_field_ising(3))
    config = SpinConfiguration.polarized(3, (1, 0, 0))
    assert config_energy(config, ham) == pytest.approx(-2 - 3 * 0.9045)


def test_config_energy_matches_statevector():
    rng = np.random.default_rng(0)
    for n in (2, 5, 9):
        ham = build_hamiltonian(mixed_field_ising(n))
        config = SpinConfiguration.random(n, rng)
        sv = prepare_product_state(config)
        assert config_energy(config, ham) == pytest.approx(
            expectation(sv, ham), abs=1e-12)


def test_classical_expectation_higher_weight_terms():
    rng = np.random.default_rng(1)
    n = 6
    ham = build_hamiltonian(mixed_field_ising(n))
    h2 = ham @ ham
    config = SpinConfiguration.random(n, rng)
    sv = prepare_product_state(config)
    assert classical_expectation(config, h2) == pytest.approx(
        expectation(sv, h2), abs=1e-10)
    with pytest.raises(ValueError):
        ClassicalHamiltonian(h2)  # 3- and 4-site terms rejected by the sampler


def test_effective_field_bulk_value():
    config = SpinConfiguration.polarized(12)
    field = effective_field(config, H12, 5)
    assert field == pytest.approx([-0.9045, 0.0, -1.4])
    assert np.linalg.norm(field) == pytest.approx(1.6668, abs=1e-4)


def test_effective_field_is_exact_gradient():
    rng = np.random.default_rng(2)
    config = SpinConfiguration.random(12, rng)
    e0 = config_energy(config, H12)
    for j in (0, 4, 11):
        field = effective_field(config, H12, j)
        new = config.copy()
        new.vectors[j] = rng.normal(size=3)
        new.vectors[j] /= np.linalg.norm(new.vectors[j])
        de = config_energy(new, H12) - e0
        assert de == pytest.approx(field @ (new.vectors[j] - config.vectors[j]),
                                   abs=1e-12)


def test_effective_field_free_spin_is_zero():
    ham = Operator(3, [("XXI", -1.0)])  # site 2 uncoupled
    rng = np.random.default_rng(3)
    config = SpinConfiguration.random(3, rng)
    assert np.linalg.norm(effective_field(config, ham, 2)) == 0.0


def _seeded_config(energy=-16.8):
    return seed_configuration(H12, energy)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_move_preserves_energy_and_bounds(m):
    cfg = SamplerConfig(energy=-16.8, move_size=m, seed=4)
    rng = np.random.default_rng(4)
    config = _seeded_config()
    e0 = config_energy(config, H12)
    cham = ClassicalHamiltonian(H12)
    for _ in range(200):
        config = mcmc_step(config, cham, cfg, rng)
    assert config_energy(config, cham) == pytest.approx(e0, abs=1e-10)
    for j in range(12):
        field = effective_field(config, cham, j)
        assert abs(field @ config.vectors[j]) <= np.linalg.norm(field) * (1 + 1e-12)
        assert np.linalg.norm(config.vectors[j]) == pytest.approx(1.0, abs=1e-12)


def test_single_site_move_preserves_local_energy():
    cfg = SamplerConfig(energy=-16.8, move_size=1, seed=5)
    rng = np.random.default_rng(5)
    config = _seeded_config()
    cham = ClassicalHamiltonian(H12)
    for _ in range(50):
        before = {j: effective_field(config, cham, j) @ config.vectors[j]
                  for j in range(12)}
        new = mcmc_step(config, cham, cfg, rng)
        moved = [j for j in range(12)
                 if np.linalg.norm(new.vectors[j] - config.vectors[j]) > 1e-12]
        assert len(moved) <= 1
        for j in moved:
            after = effective_field(new, cham, j) @ new.vectors[j]
            assert after == pytest.approx(before[j], abs=1e-12)
        config = new


def test_proposal_interval_symmetry():
    # the feasible interval seen from the proposed state is the original
    # one shifted by -dE, so the uniform proposal density is symmetric
    rng = np.random.default_rng(6)
    e_loc = np.array([0.3, -0.8, 0.1])
    norms = np.array([1.0, 1.2, 0.7])
    rhat = _direction(3, 0.0, rng)
    lo, hi = _feasible_interval(e_loc, norms, rhat)
    de = rng.uniform(lo, hi)
    lo2, hi2 = _feasible_interval(e_loc + de * rhat, norms, rhat)
    assert lo2 == pytest.approx(lo - de, abs=1e-12)
    assert hi2 == pytest.approx(hi - de, abs=1e-12)
    assert lo <= 0.0 <= hi


def test_direction_fixed_energy_sums_to_zero():
    rng = np.random.default_rng(7)
    for m in (2, 3, 5):
        r = _direction(m, 0.0, rng)
        assert abs(r.sum()) < 1e-12
        assert np.linalg.norm(r) == pytest.approx(1.0)


def test_mcmc_run_fixed_energy():
    cfg = SamplerConfig(energy=-16.8, sweeps=50, burn_in=20, seed=8)
    samples = mcmc_run(H12, cfg)
    assert len(samples) == 50
    for s in samples[::7]:
        assert config_energy(s, H12) == pytest.approx(-16.8, abs=1e-9)


def test_mcmc_run_windowed_stays_in_window():
    cfg = SamplerConfig(energy=-16.8, epsilon=0.5, sweeps=60, burn_in=20, seed=9)
    result = run_chain(H12, cfg)
    assert np.all(np.abs(result.energies + 16.8) <= 0.5 + 1e-9)
    assert result.stats.accepted == result.stats.proposals


def test_mcmc_rejects_infeasible_energy():
    lo, hi = product_state_energy_range(H12)
    with pytest.raises(InfeasibleEnergyError):
        mcmc_run(H12, SamplerConfig(energy=lo - 5.0, sweeps=5, seed=10))


def test_move_size_chain_bound():
    with pytest.raises(ValueError):
        mcmc_run(H12, SamplerConfig(energy=-16.8, move_size=5, sweeps=5, seed=11))


def test_seed_configuration_reaches_targets():
    lo, hi = product_state_energy_range(H12)
    assert lo == pytest.approx(-26.1168, abs=1e-3)  # matches direct optimization
    assert hi == pytest.approx(18.6882, abs=1e-3)
    for target in (lo + 0.5, -16.8, 0.0, hi - 0.5):
        config = seed_configuration(H12, target)
        assert config_energy(config, H12) == pytest.approx(target, abs=1e-9)


def test_rejection_sampler_window_and_symmetry():
    rng = np.random.default_rng(12)
    ham = build_hamiltonian(mixed_field_ising(6))
    samples = rejection_sample_many(ham, -8.4, 0.5, rng, 40)
    cham = ClassicalHamiltonian(ham)
    energies = cham.energy_batch(samples)
    assert np.all(np.abs(energies + 8.4) < 0.5)
    # huge window: unconstrained uniform Bloch vectors, mean Z near zero
    wide = rejection_sample_many(ham, 0.0, 100.0, rng, 4000)
    z = wide[:, :, 2].mean()
    assert abs(z) < 3.0 / math.sqrt(4000 * 6)


def test_autocorrelation_basics():
    rng = np.random.default_rng(13)
    series = rng.normal(size=4000)
    assert autocorrelation(series, 0) == 1.0
    assert abs(autocorrelation(series, 3)) < 2.0 / math.sqrt(4000)
    with pytest.raises(ValueError):
        autocorrelation(np.ones(10), 1)
    with pytest.raises(ValueError):
        autocorrelation(series[:5], 10)


def test_write_samples_csv(tmp_path):
    cfg = SamplerConfig(energy=-16.8, sweeps=4, burn_in=5, seed=14)
    result = run_chain(H12, cfg)
    path = tmp_path / "samples.csv"
    write_samples_csv(path, result.samples)
    lines = path.read_text().splitlines()
    assert lines[0] == "site,sx,sy,sz,chain,sweep"
    assert len(lines) == 1 + 4 * 12


@given(st.integers(2, 8), st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_energy_identity_random_operators(n, seed):
    # random 1-/2-site Hermitian operators: classical product-state energy
    # equals the quantum expectation
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(6):
        sites = rng.choice(n, size=rng.integers(1, 3), replace=False)
        letters = rng.choice(list("XYZ"), size=len(sites))
        word = "".join(letters[list(sites).index(j)] if j in sites else "I"
                       for j in range(n))
        terms.append((word, float(rng.normal())))
    ham = Operator(n, terms)
    config = SpinConfiguration.random(n, rng)
    sv = prepare_product_state(config)
    assert config_energy(config, ham) == pytest.approx(
        expectation(sv, ham), abs=1e-10)
