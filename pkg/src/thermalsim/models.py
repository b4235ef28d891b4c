"""Spin-chain Hamiltonians and operators derived from them.

Three models are supported:

* ``mixed_field_ising`` -- open chain, H = -sum XX - g sum Z - h sum X,
  split as H2 (the XX bond sum) plus H1 (the field sum).  Defaults
  g = 1.4, h = 0.9045.
* ``xy`` -- H = sum over edges of XX + YY on a caller-supplied graph
  (helper :func:`square_lattice_edges` builds periodic square lattices);
  split as H1 (XX) plus H2 (YY).
* ``quantum_east`` -- periodic chain, H = sum_j (J_j/2)(1 - Z_j) X_{j+1}
  with weakly randomized couplings J_j = J (1 + eta_j); its all-zeros
  state is an exact zero-energy eigenstate (a scar).

Site indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import Operator, PauliString

MFI_G = 1.4
MFI_H = 0.9045


@dataclass(frozen=True)
class ModelParams:
    """Model selection plus couplings.

    ``edges`` is required for the XY model.  Quantum-East disorder is
    either given explicitly via ``disorder`` (one eta per site) or drawn
    uniformly from [-0.1, 0.1] with ``disorder_seed``; with neither, the
    couplings are uniform.
    """

    kind: str
    n: int
    g: float = MFI_G
    h: float = MFI_H
    j: float = 1.0
    boundary: str = "open"
    edges: tuple[tuple[int, int], ...] | None = None
    disorder: tuple[float, ...] | None = None
    disorder_seed: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 sites")
        if self.kind not in ("mixed_field_ising", "xy", "quantum_east"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "xy":
            if not self.edges:
                raise ValueError("xy model needs an adjacency list")
            for a, b in self.edges:
                if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                    raise ValueError(f"malformed edge ({a}, {b})")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")


def mixed_field_ising(n: int, g: float = MFI_G, h: float = MFI_H) -> ModelParams:
    return ModelParams(kind="mixed_field_ising", n=n, g=g, h=h)


def square_lattice_edges(rows: int, cols: int, periodic: bool = True) -> tuple[tuple[int, int], ...]:
    """Edges of a rows x cols square lattice, row-major site order."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            s = r * cols + c
            if periodic or c + 1 < cols:
                edges.append((s, r * cols + (c + 1) % cols))
            if periodic or r + 1 < rows:
                edges.append((s, ((r + 1) % rows) * cols + c))
    return tuple(sorted(set(tuple(sorted(e)) for e in edges)))


def xy_model(rows: int, cols: int, periodic: bool = True) -> ModelParams:
    return ModelParams(kind="xy", n=rows * cols, edges=square_lattice_edges(rows, cols, periodic))


def quantum_east_couplings(params: ModelParams) -> np.ndarray:
    """Per-bond couplings J_j = J (1 + eta_j), resolved deterministically."""
    if params.disorder is not None:
        if len(params.disorder) != params.n:
            raise ValueError("disorder must have one entry per site")
        eta = np.asarray(params.disorder, dtype=float)
    elif params.disorder_seed is not None:
        eta = np.random.default_rng(params.disorder_seed).uniform(-0.1, 0.1, params.n)
    else:
        eta = np.zeros(params.n)
    return params.j * (1.0 + eta)


def hamiltonian_split(params: ModelParams) -> tuple[Operator, Operator]:
    """The (H1, H2) pieces whose exponentials form one Trotter step."""
    n = params.n
    if params.kind == "mixed_field_ising":
        h2 = Operator(n, _mfi_bonds(params))
        h1 = Operator(n, _mfi_fields(params))
        return h1, h2
    if params.kind == "xy":
        h1 = Operator(n, ((_bond_word(n, a, b, "X"), 1.0) for a, b in params.edges))
        h2 = Operator(n, ((_bond_word(n, a, b, "Y"), 1.0) for a, b in params.edges))
        return h1, h2
    raise ValueError(f"no two-piece split defined for model {params.kind!r}")


def build_hamiltonian(params: ModelParams) -> Operator:
    """The full Hamiltonian for any supported model."""
    if params.kind in ("mixed_field_ising", "xy"):
        h1, h2 = hamiltonian_split(params)
        return h1 + h2
    if params.kind == "quantum_east":
        n = params.n
        couplings = quantum_east_couplings(params)
        terms = []
        for jsite in range(n):
            nxt = (jsite + 1) % n
            if nxt == 0 and params.boundary == "open":
                continue
            half = couplings[jsite] / 2.0
            terms.append((PauliString.from_sites(n, {nxt: "X"}).letters, half))
            terms.append((PauliString.from_sites(n, {jsite: "Z", nxt: "X"}).letters, -half))
        return Operator(n, terms)
    raise ValueError(f"unknown model kind {params.kind!r}")


def local_energy_density(params: ModelParams, r: int) -> Operator:
    """Site-r energy density h_r of the mixed-field Ising chain.

    Interior bonds are halved between their two sites; the boundary sites
    keep the half-weight of their single bond, so sum_r h_r == H term-by-term.
    """
    if params.kind != "mixed_field_ising":
        raise ValueError("local energy density is defined for the mixed-field Ising model")
    n = params.n
    if not 0 <= r < n:
        raise ValueError(f"site {r} outside [0, {n})")
    terms = [
        (PauliString.from_sites(n, {r: "Z"}).letters, -params.g),
        (PauliString.from_sites(n, {r: "X"}).letters, -params.h),
    ]
    if r > 0:
        terms.append((_bond_word(n, r - 1, r, "X"), -0.5))
    if r < n - 1:
        terms.append((_bond_word(n, r, r + 1, "X"), -0.5))
    return Operator(n, terms)


def floquet_hamiltonian(h1: Operator, h2: Operator, tau: float) -> Operator:
    """Effective generator of one symmetric Trotter step, to second order.

    H_F = H + (tau^2 / 24) [H1 + 2 H2, [H1, H2]]; the third-order term
    vanishes for the symmetric split.
    """
    return h1 + h2 + (tau**2) * trotter_perturbation(h1, h2)


def trotter_perturbation(h1: Operator, h2: Operator) -> Operator:
    """V = (H_F - H) / tau^2 = (1/24) [H1 + 2 H2, [H1, H2]]."""
    inner = h1.commutator(h2)
    return (1.0 / 24.0) * (h1 + 2.0 * h2).commutator(inner)


def reflection_permutation(n: int) -> np.ndarray:
    """Basis permutation of the site-reflection operator j -> n-1-j."""
    perm = np.zeros(2**n, dtype=np.int64)
    for idx in range(2**n):
        out = 0
        for j in range(n):
            if (idx >> j) & 1:
                out |= 1 << (n - 1 - j)
        perm[idx] = out
    return perm


def _mfi_bonds(params: ModelParams):
    last = params.n if params.boundary == "periodic" else params.n - 1
    for jsite in range(last):
        yield _bond_word(params.n, jsite, (jsite + 1) % params.n, "X"), -1.0


def _mfi_fields(params: ModelParams):
    for jsite in range(params.n):
        yield PauliString.from_sites(params.n, {jsite: "Z"}).letters, -params.g
        yield PauliString.from_sites(params.n, {jsite: "X"}).letters, -params.h


def _bond_word(n: int, a: int, b: int, letter: str) -> str:
    return PauliString.from_sites(n, {a: letter, b: letter}).letters
