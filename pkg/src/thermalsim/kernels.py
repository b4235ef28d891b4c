"""Low-level statevector kernels.

State layout: a flat complex128 array of 2^n amplitudes with site j mapped
to bit j of the index (site 0 least significant).  Every circuit gate used
here is either a general single-qubit unitary or exp(i * theta * P) for a
Pauli string P; the latter reduces to one fused pass

    new[b] = cos * psi[b] + a * sgn(b) * psi[b ^ mx]

where mx is the X|Y bit mask of P, sgn(b) = (-1)^popcount(b & ms) with ms
the Y|Z mask, and the constant a folds i*sin, the i-per-Y phase and the
parity of mx & ms.  Kernels are numba-jitted when numba is importable and
fall back to vectorized numpy otherwise.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


# ---------------------------------------------------------------------------
# mask helpers

def pauli_masks(letters: str, sites: tuple[int, ...] | None = None) -> tuple[int, int, complex]:
    """(mx, ms, a0) for a Pauli word.

    ``letters`` is either a full-length word (sites=None) or a short word
    placed on explicit ``sites``.  ``a0`` is the state-independent phase
    such that (P psi)[b] = a0 * sgn(b) * psi[b ^ mx].
    """
    if sites is None:
        sites = tuple(range(len(letters)))
    mx = 0
    ms = 0
    n_y = 0
    for letter, site in zip(letters, sites):
        bit = 1 << site
        if letter == "X":
            mx |= bit
        elif letter == "Y":
            mx |= bit
            ms |= bit
            n_y += 1
        elif letter == "Z":
            ms |= bit
    a0 = 1j**n_y
    if (mx & ms).bit_count() % 2:
        a0 = -a0
    return mx, ms, a0


def rotation_coeffs(theta: float, letters: str, sites: tuple[int, ...] | None = None):
    """(c, a, mx, ms) implementing exp(i * theta * P)."""
    mx, ms, a0 = pauli_masks(letters, sites)
    return np.cos(theta), 1j * np.sin(theta) * a0, mx, ms


# ---------------------------------------------------------------------------
# numba kernels

@njit(cache=True, inline="always")
def _parity(x):
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


@njit(cache=True)
def _apply_1q_nb(state, u00, u01, u10, u11, bit):
    run = 1 << bit
    for o in range(state.size >> (bit + 1)):
        i0 = o << (bit + 1)
        for k in range(run):
            i = i0 + k
            j = i + run
            v0 = state[i]
            v1 = state[j]
            state[i] = u00 * v0 + u01 * v1
            state[j] = u10 * v0 + u11 * v1


@njit(cache=True)
def _apply_rot_nb(state, c, a, mx, ms, pivot):
    k = 1 << pivot
    mask = k - 1
    for g in range(state.size >> 1):
        i = ((g >> pivot) << (pivot + 1)) | (g & mask)
        j = i ^ mx
        si = 1.0 - 2.0 * _parity(i & ms)
        sj = 1.0 - 2.0 * _parity(j & ms)
        vi = state[i]
        vj = state[j]
        state[i] = c * vi + a * si * vj
        state[j] = c * vj + a * sj * vi


@njit(cache=True)
def _apply_rot_block_nb(state, c, a, mx, ms, pivot):
    # requires ms & (2^pivot - 1) == 0: signs are constant per block
    run = 1 << pivot
    for o in range(state.size >> (pivot + 1)):
        i0 = o << (pivot + 1)
        j0 = i0 ^ mx
        ai = a * (1.0 - 2.0 * _parity(i0 & ms))
        aj = a * (1.0 - 2.0 * _parity(j0 & ms))
        for k in range(run):
            i = i0 + k
            j = j0 + k
            vi = state[i]
            vj = state[j]
            state[i] = c * vi + ai * vj
            state[j] = c * vj + aj * vi


@njit(cache=True)
def _apply_rot_diag_nb(state, c, a, ms):
    for i in range(state.size):
        state[i] = (c + a * (1.0 - 2.0 * _parity(i & ms))) * state[i]


@njit(cache=True)
def _apply_pauli_nb(state, a0, mx, ms, pivot):
    k = 1 << pivot
    mask = k - 1
    for g in range(state.size >> 1):
        i = ((g >> pivot) << (pivot + 1)) | (g & mask)
        j = i ^ mx
        si = 1.0 - 2.0 * _parity(i & ms)
        sj = 1.0 - 2.0 * _parity(j & ms)
        vi = state[i]
        state[i] = a0 * si * state[j]
        state[j] = a0 * sj * vi


@njit(cache=True)
def _apply_pauli_diag_nb(state, a0, ms):
    for i in range(state.size):
        state[i] = a0 * (1.0 - 2.0 * _parity(i & ms)) * state[i]


@njit(cache=True)
def _pauli_expectation_nb(state, a0, mx, ms):
    acc = 0.0 + 0.0j
    for i in range(state.size):
        s = 1.0 - 2.0 * _parity(i & ms)
        acc += np.conj(state[i]) * (a0 * s * state[i ^ mx])
    return acc


@njit(cache=True)
def _bloch_nb(state, bit):
    k = 1 << bit
    mask = k - 1
    x = 0.0
    y = 0.0
    z = 0.0
    for g in range(state.size >> 1):
        i0 = ((g >> bit) << (bit + 1)) | (g & mask)
        v0 = state[i0]
        v1 = state[i0 | k]
        w = np.conj(v0) * v1
        x += 2.0 * w.real
        y += 2.0 * w.imag
        z += v0.real * v0.real + v0.imag * v0.imag - v1.real * v1.real - v1.imag * v1.imag
    return x, y, z


# ---------------------------------------------------------------------------
# numpy fallbacks

def _signs(size: int, ms: int) -> np.ndarray:
    par = np.bitwise_count(np.arange(size, dtype=np.uint64) & np.uint64(ms)) & 1
    return 1.0 - 2.0 * par.astype(np.float64)


def _apply_1q_np(state, u00, u01, u10, u11, bit):
    view = state.reshape(-1, 2, 1 << bit)
    v0 = view[:, 0, :].copy()
    v1 = view[:, 1, :]
    view[:, 0, :] = u00 * v0 + u01 * v1
    view[:, 1, :] = u10 * v0 + u11 * v1


def _apply_rot_np(state, c, a, mx, ms, pivot):
    flipped = state[np.arange(state.size) ^ mx]
    out = c * state
    if ms:
        out += (a * _signs(state.size, ms)) * flipped
    else:
        out += a * flipped
    state[:] = out


def _apply_rot_diag_np(state, c, a, ms):
    state *= c + a * _signs(state.size, ms)


def _apply_pauli_np(state, a0, mx, ms, pivot):
    flipped = state[np.arange(state.size) ^ mx]
    if ms:
        state[:] = (a0 * _signs(state.size, ms)) * flipped
    else:
        state[:] = a0 * flipped


def _apply_pauli_diag_np(state, a0, ms):
    state *= a0 * _signs(state.size, ms)


def _pauli_expectation_np(state, a0, mx, ms):
    flipped = state[np.arange(state.size) ^ mx]
    if ms:
        flipped = flipped * _signs(state.size, ms)
    return a0 * np.vdot(state, flipped)


def _bloch_np(state, bit):
    view = state.reshape(-1, 2, 1 << bit)
    v0 = view[:, 0, :]
    v1 = view[:, 1, :]
    w = np.vdot(v0, v1)
    z = float(np.sum(np.abs(v0) ** 2 - np.abs(v1) ** 2))
    return 2.0 * w.real, 2.0 * w.imag, z


if HAS_NUMBA:
    def _apply_rot(state, c, a, mx, ms, pivot):
        if ms & ((1 << pivot) - 1):
            _apply_rot_nb(state, c, a, mx, ms, pivot)
        else:
            _apply_rot_block_nb(state, c, a, mx, ms, pivot)

    _apply_1q, _apply_rot_diag = _apply_1q_nb, _apply_rot_diag_nb
    _apply_pauli, _apply_pauli_diag = _apply_pauli_nb, _apply_pauli_diag_nb
    _pauli_expectation, _bloch = _pauli_expectation_nb, _bloch_nb
else:
    _apply_1q, _apply_rot, _apply_rot_diag = _apply_1q_np, _apply_rot_np, _apply_rot_diag_np
    _apply_pauli, _apply_pauli_diag = _apply_pauli_np, _apply_pauli_diag_np
    _pauli_expectation, _bloch = _pauli_expectation_np, _bloch_np


# ---------------------------------------------------------------------------
# public wrappers (operate in place on flat complex128 arrays)

def apply_1q(state: np.ndarray, u: np.ndarray, site: int) -> None:
    """Apply a 2x2 unitary to one site."""
    _apply_1q(state, complex(u[0, 0]), complex(u[0, 1]), complex(u[1, 0]), complex(u[1, 1]), site)


def apply_pauli_rotation(state: np.ndarray, theta: float, letters: str,
                         sites: tuple[int, ...] | None = None) -> None:
    """Apply exp(i * theta * P) for the Pauli word P."""
    c, a, mx, ms = rotation_coeffs(theta, letters, sites)
    if mx == 0:
        _apply_rot_diag(state, c, a, ms)
    else:
        _apply_rot(state, c, a, mx, ms, _lowest_bit(mx))


def apply_pauli(state: np.ndarray, letters: str, sites: tuple[int, ...] | None = None,
                coeff: complex = 1.0) -> None:
    """Apply coeff * P in place (unitary for unimodular coeff)."""
    mx, ms, a0 = pauli_masks(letters, sites)
    a0 = a0 * coeff
    if mx == 0:
        _apply_pauli_diag(state, a0, ms)
    else:
        _apply_pauli(state, a0, mx, ms, _lowest_bit(mx))


def pauli_expectation(state: np.ndarray, letters: str,
                      sites: tuple[int, ...] | None = None) -> complex:
    """<psi| P |psi> for the Pauli word P."""
    mx, ms, a0 = pauli_masks(letters, sites)
    return complex(_pauli_expectation(state, a0, mx, ms))


def bloch_vector(state: np.ndarray, site: int) -> np.ndarray:
    """(<X>, <Y>, <Z>) of one site."""
    return np.array(_bloch(state, site))


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def warmup() -> None:
    """Trigger jit compilation on a tiny state (no-op without numba)."""
    state = np.zeros(4, dtype=np.complex128)
    state[0] = 1.0
    apply_1q(state, np.eye(2, dtype=complex), 0)
    apply_pauli_rotation(state, 0.1, "XX", (0, 1))
    apply_pauli_rotation(state, 0.1, "Z", (0,))
    apply_pauli(state, "Y", (1,))
    apply_pauli(state, "Z", (0,))
    pauli_expectation(state, "ZZ", (0, 1))
    bloch_vector(state, 0)
