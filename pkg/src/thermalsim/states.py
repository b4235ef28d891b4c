"""Dense quantum states: statevectors, density matrices, 1-RDMs.

Statevectors support up to n = 16 sites; the density-matrix path is meant
for n <= 12 where a full 2^n x 2^n matrix is affordable.  Exact evolution
works in a fixed eigenbasis so its cost is independent of the evolution
time; the eigensystem can come from a Hermitian operator or from a
one-step circuit unitary (eigenphases divided by the step size).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .pauli import Operator, PauliString
from .rpe import SpinConfiguration

# plain states allow a few more sites than circuit experiments (capped at 16)
MAX_STATEVECTOR_SITES = 20
MAX_DENSITY_SITES = 12


class InfeasibleSizeError(ValueError):
    pass


@dataclass
class StateVector:
    amps: np.ndarray
    n: int

    @classmethod
    def zeros_state(cls, n: int) -> "StateVector":
        _check_size(n, MAX_STATEVECTOR_SITES, "statevector")
        amps = np.zeros(2**n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps, n)

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), self.n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def density_matrix(self) -> "DensityMatrix":
        _check_size(self.n, MAX_DENSITY_SITES, "density matrix")
        return DensityMatrix(np.outer(self.amps, self.amps.conj()), self.n)

    def dump(self, path) -> None:
        """Little-endian complex pairs, amplitude order = basis order."""
        self.amps.astype("<c16").tofile(path)

    @classmethod
    def load(cls, path, n: int) -> "StateVector":
        amps = np.fromfile(path, dtype="<c16")
        if amps.size != 2**n:
            raise ValueError(f"file holds {amps.size} amplitudes, expected {2**n}")
        return cls(amps.astype(np.complex128), n)


@dataclass
class DensityMatrix:
    mat: np.ndarray
    n: int

    @classmethod
    def from_statevectors(cls, states: list[np.ndarray] | np.ndarray, n: int,
                          weights=None) -> "DensityMatrix":
        """Mixture (weighted sum of projectors) of pure states."""
        _check_size(n, MAX_DENSITY_SITES, "density matrix")
        psi = np.asarray(states, dtype=np.complex128)
        if weights is None:
            weights = np.full(psi.shape[0], 1.0 / psi.shape[0])
        scaled = psi.T * np.sqrt(np.asarray(weights))
        return cls(scaled @ scaled.conj().T, n)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.mat.copy(), self.n)

    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def check(self, tol: float = 1e-10) -> None:
        if abs(self.trace() - 1.0) > tol:
            raise ValueError("density matrix trace differs from 1")
        if np.max(np.abs(self.mat - self.mat.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")


@dataclass(frozen=True)
class OneRdm:
    """Single-site reduced state rho = (I + p . sigma) / 2."""

    bloch: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bloch", np.asarray(self.bloch, dtype=float))
        if np.linalg.norm(self.bloch) > 1.0 + 1e-10:
            raise ValueError("Bloch vector longer than 1")

    @property
    def purity(self) -> float:
        return 0.5 * (1.0 + float(self.bloch @ self.bloch))

    def matrix(self) -> np.ndarray:
        px, py, pz = self.bloch
        return 0.5 * np.array([[1 + pz, px - 1j * py], [px + 1j * py, 1 - pz]])


def trace_distance(a: OneRdm, b: OneRdm) -> float:
    """Half the l1 distance; for 1-RDMs this is half the Bloch l2 distance."""
    return 0.5 * float(np.linalg.norm(a.bloch - b.bloch))


def prepare_product_state(config: SpinConfiguration) -> StateVector:
    """|psi> = prod_j (cos(theta_j/2)|0> + sin(theta_j/2) e^{i phi_j} |1>)."""
    _check_size(config.n, MAX_STATEVECTOR_SITES, "statevector")
    amps = np.array([1.0 + 0.0j])
    for v in config.vectors:
        theta = np.arccos(np.clip(v[2], -1.0, 1.0))
        phi = np.arctan2(v[1], v[0])
        site = np.array([np.cos(theta / 2.0), np.sin(theta / 2.0) * np.exp(1j * phi)])
        amps = np.kron(site, amps)  # site j occupies bit j
    return StateVector(amps, config.n)


def expectation(state: StateVector | DensityMatrix, op: Operator) -> float:
    """<O> for a Hermitian operator (sum over its Pauli terms)."""
    if isinstance(state, StateVector):
        if op.n != state.n:
            raise ValueError("site count mismatch")
        total = sum(w * kernels.pauli_expectation(state.amps, word)
                    for word, w in op.terms())
    else:
        if op.n != state.n:
            raise ValueError("site count mismatch")
        total = complex(np.trace(op.dense() @ state.mat))
    return float(np.real(total))


def expectation_complex(state: StateVector, op: Operator) -> complex:
    return sum(w * kernels.pauli_expectation(state.amps, word) for word, w in op.terms())


def one_rdm(state: StateVector | DensityMatrix, site: int) -> OneRdm:
    if isinstance(state, StateVector):
        return OneRdm(kernels.bloch_vector(state.amps, site))
    rho = _partial_trace_single(state.mat, state.n, site)
    return OneRdm(np.array([2.0 * rho[1, 0].real, 2.0 * rho[1, 0].imag,
                            (rho[0, 0] - rho[1, 1]).real]))


def site_averaged_rdm(state: StateVector | DensityMatrix, sites=None) -> OneRdm:
    n = state.n
    if sites is None:
        sites = range(n)
    blochs = [one_rdm(state, j).bloch for j in sites]
    return OneRdm(np.mean(blochs, axis=0))


def bloch_table(state: StateVector, sites=None) -> np.ndarray:
    """(len(sites), 3) Bloch components, one row per site."""
    n = state.n
    if sites is None:
        sites = range(n)
    return np.array([kernels.bloch_vector(state.amps, j) for j in sites])


def insert_pauli(state: StateVector, pauli: PauliString) -> StateVector:
    """Apply a Pauli string in place (returns the same object)."""
    if pauli.n != state.n:
        raise ValueError("site count mismatch")
    kernels.apply_pauli(state.amps, pauli.letters, coeff=pauli.coeff)
    return state


# ---------------------------------------------------------------------------
# eigenbasis evolution

@dataclass
class EigenSystem:
    """Eigenbasis of a Hamiltonian, possibly via a one-step unitary.

    ``values`` are generator eigenvalues E_n (for unitary input, folded
    eigenphases divided by tau, exact for evolution at integer multiples
    of tau).  ``vectors`` columns are the eigenstates.
    """

    values: np.ndarray
    vectors: np.ndarray
    n: int

    @classmethod
    def from_operator(cls, op: Operator) -> "EigenSystem":
        _check_size(op.n, MAX_DENSITY_SITES, "dense diagonalization")
        mat = op.dense()
        if np.max(np.abs(mat.imag)) < 1e-14:
            vals, vecs = np.linalg.eigh(mat.real)  # real eigenvectors
            vecs = vecs.astype(np.complex128)
        else:
            vals, vecs = np.linalg.eigh(mat)
        sys = cls(vals, vecs, op.n)
        sys.check_residual(mat)
        return sys

    @classmethod
    def from_unitary(cls, u: np.ndarray, tau: float, n: int) -> "EigenSystem":
        """Diagonalize a circuit unitary; normal matrices have a diagonal
        (complex) Schur form with unitary vectors."""
        t_mat, q_mat = scipy.linalg.schur(u, output="complex")
        off = np.max(np.abs(t_mat - np.diag(np.diag(t_mat))))
        if off > 1e-8:
            raise ValueError(f"input is not normal (off-diagonal Schur weight {off:.2e})")
        phases = np.diag(t_mat)
        return cls(-np.angle(phases) / tau, q_mat, n)

    def check_residual(self, mat: np.ndarray, tol: float = 1e-8) -> None:
        resid = mat @ self.vectors - self.vectors * self.values
        worst = float(np.max(np.linalg.norm(resid, axis=0)))
        if worst > tol:
            raise ValueError(f"eigen residual {worst:.2e} exceeds {tol:g}")

    def to_eigenbasis(self, mat: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ mat @ self.vectors

    def from_eigenbasis(self, mat: np.ndarray) -> np.ndarray:
        return self.vectors @ mat @ self.vectors.conj().T


def evolve_exact(rho: DensityMatrix, eig: EigenSystem, t: float) -> DensityMatrix:
    """rho(t) with matrix elements rho_mn e^{-i t (E_m - E_n)}; runtime
    independent of t."""
    rho.check()
    tilde = eig.to_eigenbasis(rho.mat)
    phase = np.exp(-1j * t * eig.values)
    return DensityMatrix(eig.from_eigenbasis(tilde * np.outer(phase, phase.conj())), rho.n)


def evolve_statevector_exact(state: StateVector, eig: EigenSystem, t: float) -> StateVector:
    coeff = eig.vectors.conj().T @ state.amps
    return StateVector(eig.vectors @ (np.exp(-1j * t * eig.values) * coeff), state.n)


def diagonal_ensemble(rho: DensityMatrix, eig: EigenSystem) -> DensityMatrix:
    """Drop all off-diagonal elements in the eigenbasis."""
    tilde = eig.to_eigenbasis(rho.mat)
    return DensityMatrix(eig.from_eigenbasis(np.diag(np.diag(tilde))), rho.n)


def interpolate(rho: DensityMatrix, rho_d: DensityMatrix, s: float) -> DensityMatrix:
    if not 0.0 <= s <= 1.0:
        raise ValueError("mixing parameter must lie in [0, 1]")
    return DensityMatrix((1.0 - s) * rho.mat + s * rho_d.mat, rho.n)


def observable_series(eig: EigenSystem, rho_mat: np.ndarray, obs_list,
                      t_list, chunk: int = 12) -> np.ndarray:
    """<O_k(t)> for many observables over a time grid, in one eigenbasis.

    The density matrix is transformed once; each time point is an
    elementwise phase update, so the cost is independent of t.  Observables
    are transformed in chunks to bound memory.  Returns (len(obs), len(t)).
    """
    rho_tilde = eig.to_eigenbasis(rho_mat)
    t_arr = np.asarray(t_list, dtype=float)
    out = np.empty((len(obs_list), t_arr.size))
    for base in range(0, len(obs_list), chunk):
        block = obs_list[base: base + chunk]
        tilde_t = [np.ascontiguousarray(eig.to_eigenbasis(o.dense()).T) for o in block]
        for it, t in enumerate(t_arr):
            phase = np.exp(-1j * t * eig.values)
            rho_t = rho_tilde * np.outer(phase, phase.conj())
            for io, o_t in enumerate(tilde_t):
                out[base + io, it] = float(np.real(np.sum(rho_t * o_t)))
    return out


def _partial_trace_single(mat: np.ndarray, n: int, site: int) -> np.ndarray:
    low = 2**site
    high = 2 ** (n - site - 1)
    view = mat.reshape(high, 2, low, high, 2, low)
    return np.einsum("aibajb->ij", view)


def _check_size(n: int, limit: int, label: str) -> None:
    if n > limit:
        raise InfeasibleSizeError(f"{label} supports up to {limit} sites, got {n}")
