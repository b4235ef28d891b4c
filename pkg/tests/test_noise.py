import math

import numpy as np
import pytest

from thermalsim.noise import (BIT_FLIP_PAULIS, GeometryConstants, NoiseModel,
                              depolarizing_kraus, effective_gate_counts,
                              fixed_depolarizing, infidelity_conversions,
                              variant_branch_probs, variant_channels)


def kraus_completeness(kraus):
    total = sum(k.conj().T @ k for k in kraus)
    return np.abs(total - np.eye(4)).max()


def test_depolarizing_kraus_completeness():
    for lam in (0.0, 1e-3, 0.5, 16.0 / 15.0):
        assert kraus_completeness(depolarizing_kraus(lam)) < 1e-14


def test_depolarizing_kraus_limits():
    assert len(depolarizing_kraus(0.0)) == 16
    with pytest.raises(ValueError):
        depolarizing_kraus(1.1)


def test_infidelity_conversions():
    lam, proc = infidelity_conversions(1.1e-3)
    assert lam == pytest.approx(4 * 1.1e-3 / 3)
    assert proc == pytest.approx(1.375e-3)


def test_variant_channels_completeness_and_probs():
    for kind in ("depolarizing", "phase_flip", "bit_flip"):
        assert kraus_completeness(variant_channels(kind, 0.12)) < 1e-14
    probs = dict(variant_branch_probs("depolarizing", 0.15))
    assert len(probs) == 15
    assert all(p == pytest.approx(0.01) for p in probs.values())
    bits = variant_branch_probs("bit_flip", 0.3)
    assert [w for w, _ in bits] == list(BIT_FLIP_PAULIS)
    assert sum(p for _, p in bits) == pytest.approx(0.3)
    assert len(variant_channels("phase_flip", 0.0)) == 4  # identity plus zero branches
    with pytest.raises(ValueError):
        variant_channels("amplitude", 0.1)


def test_gate_error_linear_in_angle():
    h11_fit = NoiseModel(p0=2.7e-4, p1=9.4e-4)
    assert h11_fit.gate_error(0.0) == pytest.approx(2.7e-4)
    assert h11_fit.gate_error(math.pi / 4) == pytest.approx(1.0e-3, abs=5e-5)
    flat = NoiseModel(p0=5e-4, p1=0.0)
    assert flat.gate_error(0.3) == flat.gate_error(1.2) == 5e-4
    with pytest.raises(ValueError):
        NoiseModel(p0=0.9, p1=0.5).gate_error(1.0)


def test_channel_jump_probability_is_process_infidelity():
    nm = NoiseModel(p0=3.5e-4, p1=9.5e-4)
    angle = 0.2
    p = nm.gate_error(angle)
    ch = nm.channel(angle)
    assert ch.jump_probability == pytest.approx(5 * p / 4)
    assert ch.probs.sum() == pytest.approx(1.0)
    assert len(ch.paulis) == 15


def test_fixed_depolarizing_channel():
    ch = fixed_depolarizing(1e-3).channel(0.7)
    assert ch.jump_probability == pytest.approx(15 * 1e-3 / 16)


def test_channel_sampling_distribution():
    rng = np.random.default_rng(0)
    ch = NoiseModel(p0=0.05, p1=0.0, kind="phase_flip").channel(0.0)
    draws = [ch.sample(rng) for _ in range(20000)]
    rate = sum(d is not None for d in draws) / len(draws)
    assert rate == pytest.approx(0.05, abs=0.005)
    assert set(d for d in draws if d is not None) <= {"ZI", "IZ", "ZZ"}


def test_effective_gate_counts():
    k = GeometryConstants(a=2.0, b=1.0, c=3.0, alpha=0.5)
    assert effective_gate_counts(1, 10, 0.0, 0.1, k) == 0.0
    # butterfly early time: A v^d t^{d+1} / tau
    got = effective_gate_counts(1, 100, 2.0, 0.1, k, velocity="butterfly", v_b=2.0)
    assert got == pytest.approx(2.0 * 2.0 * 2.0**2 / 0.1)
    # circuit late time: C N^2 + alpha N t / tau in 1d
    got = effective_gate_counts(1, 4, 50.0, 0.1, k, velocity="circuit")
    assert got == pytest.approx(3.0 * 16 + 0.5 * 4 * 50.0 / 0.1)
    with pytest.raises(ValueError):
        effective_gate_counts(1, 4, 1.0, 0.1, k, velocity="warp")
