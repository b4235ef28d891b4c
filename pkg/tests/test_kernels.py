import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from thermalsim import kernels
from thermalsim.pauli import PauliString

kernels.warmup()


def random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def embed(letters, sites, n):
    return PauliString.from_sites(n, dict(zip(sites, letters)))


@pytest.mark.parametrize("letters,sites", [
    ("XX", (0, 2)), ("YY", (1, 3)), ("ZX", (2, 0)), ("ZX", (0, 3)),
    ("ZZ", (1, 2)), ("XY", (3, 0)), ("X", (2,)), ("Y", (0,)), ("Z", (3,)),
])
def test_pauli_rotation_against_expm(letters, sites):
    n = 4
    psi = random_state(n, seed=3)
    theta = -0.83
    u = scipy.linalg.expm(1j * theta * embed(letters, sites, n).dense())
    got = psi.copy()
    kernels.apply_pauli_rotation(got, theta, letters, sites)
    assert np.abs(u @ psi - got).max() < 1e-13


@pytest.mark.parametrize("letters,sites", [
    ("XX", (0, 2)), ("YZ", (1, 3)), ("Y", (2,)), ("ZZ", (0, 1)), ("XYZ", (0, 1, 3)),
])
def test_apply_and_expectation_against_dense(letters, sites):
    n = 4
    psi = random_state(n, seed=5)
    mat = embed(letters, sites, n).dense()
    got = psi.copy()
    kernels.apply_pauli(got, letters, sites)
    assert np.abs(mat @ psi - got).max() < 1e-13
    exp = kernels.pauli_expectation(psi, letters, sites)
    assert abs(exp - np.vdot(psi, mat @ psi)) < 1e-12


def test_apply_1q_against_dense():
    n = 3
    psi = random_state(n, seed=9)
    u = scipy.linalg.expm(1j * 0.4 * (0.3 * np.array([[0, 1], [1, 0]])
                                      + 0.9 * np.array([[1, 0], [0, -1]])))
    for site in range(n):
        mats = [np.eye(2)] * n
        mats[site] = u
        full = np.array([[1.0]])
        for j in reversed(range(n)):
            full = np.kron(full, mats[j])
        got = psi.copy()
        kernels.apply_1q(got, u, site)
        assert np.abs(full @ psi - got).max() < 1e-13


def test_bloch_vector_against_dense():
    n = 3
    psi = random_state(n, seed=11)
    for site in range(n):
        got = kernels.bloch_vector(psi, site)
        ref = [np.vdot(psi, embed(a, (site,), n).dense() @ psi).real for a in "XYZ"]
        assert np.abs(np.array(ref) - got).max() < 1e-12


@given(st.integers(1, 4), st.data())
@settings(max_examples=40, deadline=None)
def test_numba_and_numpy_paths_agree(n, data):
    word = data.draw(st.text(alphabet="IXYZ", min_size=n, max_size=n)
                     .filter(lambda w: set(w) != {"I"}))
    theta = data.draw(st.floats(-3.0, 3.0))
    psi = random_state(n, seed=data.draw(st.integers(0, 100)))
    c, a, mx, ms = kernels.rotation_coeffs(theta, word)
    via_np = psi.copy()
    if mx == 0:
        kernels._apply_rot_diag_np(via_np, c, a, ms)
    else:
        kernels._apply_rot_np(via_np, c, a, mx, ms, (mx & -mx).bit_length() - 1)
    via_dispatch = psi.copy()
    kernels.apply_pauli_rotation(via_dispatch, theta, word)
    assert np.abs(via_np - via_dispatch).max() < 1e-13


def test_rotation_unitarity_preserves_norm():
    psi = random_state(5, seed=21)
    got = psi.copy()
    for theta, word in [(0.2, "XXIII"), (1.1, "IZYII"), (-0.7, "IIIZZ")]:
        kernels.apply_pauli_rotation(got, theta, word)
    assert abs(np.linalg.norm(got) - 1.0) < 1e-12
