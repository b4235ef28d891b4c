"""Observable tables of the fixed-energy product-state ensemble.

For a grid of energy densities, chains of the MCMC sampler estimate the
site-averaged magnetizations, the mean energy shift caused by each
two-site Pauli error on a chosen bond, the quantum energy variance per
site, and the mean single-site purity of the ensemble mixed state.  These
tables drive the table-based heating predictor and double as ensemble
diagnostics (variance shrinks and purity approaches 1 toward the unique
lowest-energy product state).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .noise import TWO_SITE_PAULIS
from .pauli import Operator, PauliString, error_shift_operator
from .rpe import (ClassicalHamiltonian, SamplerConfig, config_energy,
                  product_state_energy_range, run_chain)


@dataclass
class EnsembleTables:
    """Per-energy-density ensemble means (grid strictly increasing)."""

    n: int
    bond: tuple[int, int]
    energy_density: np.ndarray
    obs: np.ndarray                      # (grid, 3): site-averaged <X>, <Y>, <Z>
    delta_e: dict[str, np.ndarray]       # two-site pauli -> mean <P H P - H>
    energy_variance_per_site: np.ndarray
    purity: np.ndarray
    samples_per_point: int = 0

    def __post_init__(self):
        if np.any(np.diff(self.energy_density) <= 0):
            raise ValueError("energy grid must be strictly increasing")
        for arr in (self.obs, self.energy_variance_per_site, self.purity,
                    *self.delta_e.values()):
            if not np.all(np.isfinite(arr)):
                raise ValueError("tables contain non-finite entries")

    def obs_at(self, e_density: float) -> np.ndarray:
        return np.array([np.interp(e_density, self.energy_density, self.obs[:, k])
                         for k in range(3)])

    def delta_at(self, word: str, e_density: float) -> float:
        return float(np.interp(e_density, self.energy_density, self.delta_e[word]))

    @property
    def range(self) -> tuple[float, float]:
        return float(self.energy_density[0]), float(self.energy_density[-1])

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "bond": list(self.bond),
            "samples_per_point": self.samples_per_point,
            "energy_density": self.energy_density.tolist(),
            "obs": self.obs.tolist(),
            "delta_e": {k: v.tolist() for k, v in self.delta_e.items()},
            "energy_variance_per_site": self.energy_variance_per_site.tolist(),
            "purity": self.purity.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "EnsembleTables":
        rec = json.loads(text)
        return cls(
            n=rec["n"], bond=tuple(rec["bond"]),
            energy_density=np.array(rec["energy_density"]),
            obs=np.array(rec["obs"]),
            delta_e={k: np.array(v) for k, v in rec["delta_e"].items()},
            energy_variance_per_site=np.array(rec["energy_variance_per_site"]),
            purity=np.array(rec["purity"]),
            samples_per_point=rec.get("samples_per_point", 0),
        )


def classical_expectation_batch(vectors: np.ndarray, op: Operator) -> np.ndarray:
    """Product-state expectations for a (batch, n, 3) stack, any term support."""
    axis = {"X": 0, "Y": 1, "Z": 2}
    out = np.zeros(vectors.shape[0], dtype=complex)
    for word, w in op.terms():
        prod = np.ones(vectors.shape[0])
        for j, c in enumerate(word):
            if c != "I":
                prod = prod * vectors[:, j, axis[c]]
        out += w * prod
    return out.real


def ensemble_tables(ham: Operator, energy_densities, cfg: SamplerConfig,
                    bond: tuple[int, int] | None = None,
                    progress=None) -> EnsembleTables:
    """Build tables by running one chain per grid point.

    ``cfg.energy`` is ignored; chain seeds are derived from ``cfg.seed``
    and the grid index.  The grid must stay inside the product-state
    energy range.
    """
    cham = ClassicalHamiltonian(ham)
    n = cham.n
    grid = np.asarray(sorted(energy_densities), dtype=float)
    e_lo, e_hi = product_state_energy_range(cham)
    if grid[0] * n < e_lo - 1e-9 or grid[-1] * n > e_hi + 1e-9:
        raise ValueError(
            f"grid [{grid[0]:.4f}, {grid[-1]:.4f}] exceeds the product-state "
            f"density range [{e_lo / n:.4f}, {e_hi / n:.4f}]")
    if bond is None:
        bond = (n // 2 - 1, n // 2)

    shift_ops = {}
    for word in TWO_SITE_PAULIS:
        p = PauliString.from_sites(n, {bond[0]: word[0], bond[1]: word[1]})
        shift_ops[word] = ClassicalHamiltonian(error_shift_operator(p, ham))
    h_squared = ham @ ham

    obs = np.zeros((grid.size, 3))
    delta = {word: np.zeros(grid.size) for word in TWO_SITE_PAULIS}
    variance = np.zeros(grid.size)
    purity = np.zeros(grid.size)
    for i, e_density in enumerate(grid):
        point_cfg = replace(cfg, energy=float(e_density * n), seed=cfg.seed + 7919 * i)
        result = run_chain(cham, point_cfg)
        samples = result.samples
        obs[i] = samples.mean(axis=(0, 1))
        for word, op in shift_ops.items():
            delta[word][i] = float(op.energy_batch(samples).mean())
        h2 = classical_expectation_batch(samples, h_squared)
        variance[i] = float((h2.mean() - (e_density * n) ** 2) / n)
        mean_bloch = samples.mean(axis=0)
        purity[i] = float(np.mean(0.5 * (1.0 + np.sum(mean_bloch**2, axis=1))))
        if progress is not None:
            progress(i, grid.size)
    return EnsembleTables(n, bond, grid, obs, delta, variance, purity,
                          samples_per_point=len(samples))
