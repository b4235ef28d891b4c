"""Fixed-energy random product states via classical Markov chain Monte Carlo.

A product state is a set of unit Bloch vectors, one per site.  Its energy
under a Hamiltonian with 1- and 2-site Pauli terms is the classical energy
obtained by replacing each Pauli expectation with the corresponding Bloch
component, which makes sampling product states at fixed quantum energy a
classical microcanonical sampling problem.

The Metropolis moves used here rotate m mutually non-interacting spins
about their effective local fields while redistributing local energy among
them along a random direction orthogonal to (1, ..., 1).  Proposals are
symmetric and energy-preserving by construction, so every proposal is
accepted.  A windowed variant biases the direction so that the total
energy random-walks inside [E - eps, E + eps] and reduces to the
fixed-energy sampler as eps -> 0.  A brute-force rejection sampler over
uniform Bloch vectors provides an independent check of the distribution.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .pauli import Operator

_AXIS = {"X": 0, "Y": 1, "Z": 2}
DEGENERATE_FIELD = 1e-12
NORM_TOL = 1e-12


class SamplingError(RuntimeError):
    pass


class InfeasibleEnergyError(ValueError):
    """Target energy outside the product-state energy range."""


@dataclass
class SpinConfiguration:
    """N unit Bloch vectors, shape (n, 3)."""

    vectors: np.ndarray

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != 3:
            raise ValueError("expected shape (n, 3)")
        norms = np.linalg.norm(self.vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise ValueError("Bloch vectors must be unit length")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    def copy(self) -> "SpinConfiguration":
        return SpinConfiguration(self.vectors.copy())

    @classmethod
    def polarized(cls, n: int, direction=(0.0, 0.0, 1.0)) -> "SpinConfiguration":
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        return cls(np.tile(d, (n, 1)))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "SpinConfiguration":
        return cls(_uniform_sphere(rng, n))

    @classmethod
    def from_angles(cls, theta: np.ndarray, phi: np.ndarray) -> "SpinConfiguration":
        st = np.sin(theta)
        return cls(np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=1))


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs of one MCMC chain.

    ``sweeps`` counts post-burn-in sweeps (one sweep = n proposals);
    ``thin`` is the number of sweeps between kept samples.  ``epsilon``
    is the energy window half-width; 0 means fixed energy.
    """

    energy: float
    epsilon: float = 0.0
    move_size: int = 2
    sweeps: int = 200
    burn_in: int = 100
    thin: int = 1
    seed: int = 0
    check_invariants: bool = True

    def __post_init__(self):
        if self.move_size < 1:
            raise ValueError("move size must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


class ClassicalHamiltonian:
    """Preprocessed 1-/2-site operator for fast classical evaluation."""

    def __init__(self, op: Operator):
        if not op.is_hermitian():
            raise ValueError("classical energies need a Hermitian operator")
        if op.max_support > 2:
            raise ValueError("classical sampler supports only 1- and 2-site Pauli terms")
        self.n = op.n
        self.operator = op
        self.offset = 0.0
        # per-site term lists drive the effective-field evaluation
        self.site_terms: list[list[tuple[float, int, int, int]]] = [[] for _ in range(op.n)]
        self.neighbors: list[set[int]] = [set() for _ in range(op.n)]
        pairs, singles = [], []
        for word, w in op.terms():
            w = w.real
            sites = [(j, _AXIS[c]) for j, c in enumerate(word) if c != "I"]
            if len(sites) == 0:
                self.offset += w
            elif len(sites) == 1:
                (j, a), = sites
                singles.append((j, a, w))
                self.site_terms[j].append((w, a, -1, -1))
            else:
                (j, a), (k, b) = sites
                pairs.append((j, a, k, b, w))
                self.site_terms[j].append((w, a, k, b))
                self.site_terms[k].append((w, b, j, a))
                self.neighbors[j].add(k)
                self.neighbors[k].add(j)
        self._p_j = np.array([p[0] for p in pairs], dtype=np.intp)
        self._p_a = np.array([p[1] for p in pairs], dtype=np.intp)
        self._p_k = np.array([p[2] for p in pairs], dtype=np.intp)
        self._p_b = np.array([p[3] for p in pairs], dtype=np.intp)
        self._p_w = np.array([p[4] for p in pairs], dtype=float)
        self._s_j = np.array([s[0] for s in singles], dtype=np.intp)
        self._s_a = np.array([s[1] for s in singles], dtype=np.intp)
        self._s_w = np.array([s[2] for s in singles], dtype=float)

    def energy(self, vectors: np.ndarray) -> float:
        e = self.offset
        if self._p_w.size:
            e += float(self._p_w @ (vectors[self._p_j, self._p_a] * vectors[self._p_k, self._p_b]))
        if self._s_w.size:
            e += float(self._s_w @ vectors[self._s_j, self._s_a])
        return e

    def energy_batch(self, vectors: np.ndarray) -> np.ndarray:
        """Energies for a (batch, n, 3) stack of configurations."""
        e = np.full(vectors.shape[0], self.offset)
        if self._p_w.size:
            e += (vectors[:, self._p_j, self._p_a] * vectors[:, self._p_k, self._p_b]) @ self._p_w
        if self._s_w.size:
            e += vectors[:, self._s_j, self._s_a] @ self._s_w
        return e

    def field(self, vectors: np.ndarray, j: int) -> tuple[float, float, float]:
        """Effective local field h_j, the gradient of the energy in spin j."""
        fx = fy = fz = 0.0
        for w, a, k, b in self.site_terms[j]:
            v = w if k < 0 else w * vectors[k, b]
            if a == 0:
                fx += v
            elif a == 1:
                fy += v
            else:
                fz += v
        return fx, fy, fz


def _as_classical(ham) -> ClassicalHamiltonian:
    return ham if isinstance(ham, ClassicalHamiltonian) else ClassicalHamiltonian(ham)


def config_energy(config: SpinConfiguration, ham) -> float:
    """Classical energy of a product state; equals <psi|H|psi> exactly."""
    return _as_classical(ham).energy(config.vectors)


def effective_field(config: SpinConfiguration, ham, j: int) -> np.ndarray:
    """h_j with h_j . (sigma'_j - sigma_j) the exact single-spin energy change."""
    return np.array(_as_classical(ham).field(config.vectors, j))


def classical_expectation(config: SpinConfiguration, op: Operator) -> float:
    """Product-state expectation of an arbitrary Pauli-sum operator.

    Valid for any term support since a Pauli string factorizes over sites.
    Used for, e.g., energy variance via the squared Hamiltonian.
    """
    v = config.vectors
    total = 0.0 + 0.0j
    for word, w in op.terms():
        prod = 1.0
        for j, c in enumerate(word):
            if c != "I":
                prod *= v[j, _AXIS[c]]
        total += w * prod
    return float(total.real)


# ---------------------------------------------------------------------------
# moves

def _uniform_sphere(rng: np.random.Generator, n: int = 1) -> np.ndarray:
    out = rng.normal(size=(n, 3))
    norms = np.linalg.norm(out, axis=1)
    while np.any(norms < 1e-12):
        bad = norms < 1e-12
        out[bad] = rng.normal(size=(int(bad.sum()), 3))
        norms = np.linalg.norm(out, axis=1)
    return out / norms[:, None]


def _unit_perpendicular(axis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        v -= (v @ axis) * axis
        norm = math.sqrt(v @ v)
        if norm > 1e-9:
            return v / norm


def _pick_sites(cham: ClassicalHamiltonian, m: int, rng: np.random.Generator,
                max_tries: int = 1000) -> list[int]:
    n = cham.n
    if m == 1:
        return [int(rng.integers(n))]
    for _ in range(max_tries):
        sites = rng.choice(n, size=m, replace=False)
        ok = True
        for i in range(m):
            nbrs = cham.neighbors[sites[i]]
            for j in range(i + 1, m):
                if sites[j] in nbrs:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return [int(s) for s in sites]
    raise SamplingError(
        f"could not select {m} mutually non-interacting sites in {max_tries} tries "
        f"(for a 1D chain, m <= n/3 must hold)")


def _direction(n_active: int, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Unit direction in local-energy space.

    Fixed-energy sampling draws isotropically in the subspace orthogonal
    to (1, ..., 1); the windowed variant keeps unit std there but std eps
    along (1, ..., 1), which suppresses energy drift as eps -> 0.
    """
    ones = np.full(n_active, 1.0 / math.sqrt(n_active))
    while True:
        g = rng.normal(size=n_active)
        par = g @ ones
        r = g - par * ones
        if eps > 0:
            r += (eps * par) * ones
        norm = math.sqrt(r @ r)
        if norm > 1e-12:
            return r / norm


def _feasible_interval(e_loc: np.ndarray, norms: np.ndarray, rhat: np.ndarray) -> tuple[float, float]:
    """Range of dE keeping every |E_a + dE * rhat_a| <= ||h_a||.

    The current state satisfies the constraints, so the intersection always
    contains 0 (a ray-hyperrectangle intersection through an interior point).
    """
    lo, hi = -math.inf, math.inf
    for e, h, r in zip(e_loc, norms, rhat):
        if abs(r) < 1e-12:
            continue
        a = (-h - e) / r
        b = (h - e) / r
        if a > b:
            a, b = b, a
        lo = max(lo, a)
        hi = min(hi, b)
    return min(lo, 0.0), max(hi, 0.0)


@dataclass
class MoveStats:
    proposals: int = 0
    accepted: int = 0
    site_resamples: int = 0


def _move(vectors: np.ndarray, cham: ClassicalHamiltonian, cfg: SamplerConfig,
          e_curr: float, rng: np.random.Generator, stats: MoveStats | None = None) -> float:
    """One in-place proposal; returns the exact energy change (0 when eps=0).

    Every proposal is accepted: the proposal density is symmetric (the
    feasible dE interval is identical from the proposed state) and the
    target weights all configurations at a given energy equally.
    """
    sites = _pick_sites(cham, cfg.move_size, rng)
    fields = [cham.field(vectors, j) for j in sites]
    norms = [math.sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) for f in fields]

    active = [i for i, h in enumerate(norms) if h >= DEGENERATE_FIELD]
    degenerate = [i for i, h in enumerate(norms) if h < DEGENERATE_FIELD]

    delta_total = 0.0
    if active:
        e_loc = np.array([fields[i][0] * vectors[sites[i], 0]
                          + fields[i][1] * vectors[sites[i], 1]
                          + fields[i][2] * vectors[sites[i], 2] for i in active])
        h_norm = np.array([norms[i] for i in active])
        if cfg.epsilon == 0.0 and len(active) == 1:
            de = np.zeros(1)
        else:
            rhat = _direction(len(active), cfg.epsilon, rng)
            lo, hi = _feasible_interval(e_loc, h_norm, rhat)
            s = float(rhat.sum())
            if cfg.epsilon > 0 and abs(s) > 1e-12:
                # keep the running total inside the window
                lo = max(lo, min((cfg.energy - cfg.epsilon - e_curr) / s,
                                 (cfg.energy + cfg.epsilon - e_curr) / s))
                hi = min(hi, max((cfg.energy - cfg.epsilon - e_curr) / s,
                                 (cfg.energy + cfg.epsilon - e_curr) / s))
                lo, hi = min(lo, 0.0), max(hi, 0.0)
            de = rng.uniform(lo, hi) * rhat

        for idx, i in enumerate(active):
            j = sites[i]
            h = h_norm[idx]
            x = (e_loc[idx] + de[idx]) / h
            x = min(1.0, max(-1.0, x))
            n_par = np.array(fields[i]) / h
            n_perp = _unit_perpendicular(n_par, rng)
            new = x * n_par + math.sqrt(max(0.0, 1.0 - x * x)) * n_perp
            old = vectors[j].copy()
            vectors[j] = new
            delta_total += fields[i][0] * (new[0] - old[0]) \
                + fields[i][1] * (new[1] - old[1]) + fields[i][2] * (new[2] - old[2])
            if cfg.check_invariants:
                nrm = math.sqrt(new @ new)
                if abs(nrm - 1.0) > NORM_TOL:
                    raise AssertionError(f"spin norm drifted to {nrm}")
                e_new = fields[i][0] * new[0] + fields[i][1] * new[1] + fields[i][2] * new[2]
                if abs(e_new) > h * (1.0 + 1e-12):
                    raise AssertionError("local energy exceeds field norm")

    for i in degenerate:
        # zero field: any orientation has E_j = 0, resample uniformly
        vectors[sites[i]] = _uniform_sphere(rng)[0]
        if stats is not None:
            stats.site_resamples += 1

    if stats is not None:
        stats.proposals += 1
        stats.accepted += 1
    return delta_total


def mcmc_step(config: SpinConfiguration, ham, cfg: SamplerConfig,
              rng: np.random.Generator) -> SpinConfiguration:
    """One accepted proposal; returns a new configuration."""
    cham = _as_classical(ham)
    vectors = config.vectors.copy()
    _move(vectors, cham, cfg, cham.energy(config.vectors), rng)
    return SpinConfiguration(vectors)


@dataclass
class ChainResult:
    samples: np.ndarray          # (n_samples, n, 3)
    energies: np.ndarray         # recomputed energy of each kept sample
    stats: MoveStats
    seed_energy: float

    def configurations(self) -> list[SpinConfiguration]:
        return [SpinConfiguration(v) for v in self.samples]


def run_chain(ham, cfg: SamplerConfig, start: SpinConfiguration | None = None) -> ChainResult:
    """Burn in, then collect thinned samples from one chain."""
    cham = _as_classical(ham)
    rng = np.random.default_rng(cfg.seed)
    if cfg.move_size >= 2:
        _check_move_size(cham, cfg.move_size)
    if start is None:
        start = seed_configuration(ham, cfg.energy)
    vectors = start.vectors.copy()
    e_curr = cham.energy(vectors)
    if abs(e_curr - cfg.energy) > max(cfg.epsilon, 1e-9):
        raise InfeasibleEnergyError(
            f"seed configuration energy {e_curr} outside window around {cfg.energy}")

    stats = MoveStats()
    n = cham.n
    drift_tol_per_step = 1e-9
    steps = 0

    def sweep():
        nonlocal e_curr, steps
        for _ in range(n):
            e_curr += _move(vectors, cham, cfg, e_curr, rng, stats)
            steps += 1
        if cfg.check_invariants:
            e_exact = cham.energy(vectors)
            if abs(e_exact - e_curr) > drift_tol_per_step * max(steps, 1):
                raise AssertionError("tracked energy drifted from recomputed energy")
            e_curr = e_exact
            if cfg.epsilon == 0.0:
                if abs(e_curr - cfg.energy) > 1e-9:
                    raise AssertionError("fixed-energy chain left the target energy")
            elif abs(e_curr - cfg.energy) > cfg.epsilon + 1e-9:
                raise AssertionError("windowed chain left the energy window")

    for _ in range(cfg.burn_in):
        sweep()
    kept = []
    energies = []
    for i in range(cfg.sweeps):
        sweep()
        if (i + 1) % cfg.thin == 0:
            kept.append(vectors.copy())
            energies.append(cham.energy(vectors))
    return ChainResult(np.array(kept), np.array(energies), stats, float(cham.energy(start.vectors)))


def mcmc_run(ham, cfg: SamplerConfig, start: SpinConfiguration | None = None) -> list[SpinConfiguration]:
    return run_chain(ham, cfg, start).configurations()


def _check_move_size(cham: ClassicalHamiltonian, m: int) -> None:
    degrees = [len(s) for s in cham.neighbors]
    if degrees and max(degrees) <= 2 and m > cham.n // 3:
        raise ValueError(f"move size {m} too large for a chain of {cham.n} sites (m <= n/3)")


# ---------------------------------------------------------------------------
# seeding and rejection sampling

def product_state_energy_range(ham) -> tuple[float, float]:
    """(lowest, highest) product-state energies, from iterated alignment."""
    cham = _as_classical(ham)
    lo = _extremal(cham, minimize=True)
    hi = _extremal(cham, minimize=False)
    return cham.energy(lo), cham.energy(hi)


def _extremal(cham: ClassicalHamiltonian, minimize: bool) -> np.ndarray:
    sign = -1.0 if minimize else 1.0
    rng = np.random.default_rng(12345)
    starts = [SpinConfiguration.polarized(cham.n, d).vectors
              for d in [(0, 0, 1), (0, 0, -1), (1, 0, 0), (-1, 0, 0)]]
    starts += [_uniform_sphere(rng, cham.n) for _ in range(4)]
    best, best_e = None, math.inf
    for vectors in starts:
        v = vectors.copy()
        for _ in range(500):
            biggest = 0.0
            for j in range(cham.n):
                f = cham.field(v, j)
                norm = math.sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2])
                if norm < DEGENERATE_FIELD:
                    continue
                new = sign * np.array(f) / norm
                biggest = max(biggest, float(np.max(np.abs(new - v[j]))))
                v[j] = new
            if biggest < 1e-13:
                break
        e = sign * cham.energy(v)
        if e < best_e:
            best, best_e = v, e
    return best


def seed_configuration(ham, energy: float, tol: float = 1e-11) -> SpinConfiguration:
    """Deterministic product state at the target energy.

    Bisects along a per-site great-circle interpolation between the lowest-
    and highest-energy aligned configurations; the interpolated energy is
    continuous so a crossing exists for any target in the product range.
    """
    cham = _as_classical(ham)
    lo_v = _extremal(cham, minimize=True)
    hi_v = _extremal(cham, minimize=False)
    e_lo, e_hi = cham.energy(lo_v), cham.energy(hi_v)
    if not e_lo - 1e-9 <= energy <= e_hi + 1e-9:
        raise InfeasibleEnergyError(
            f"target energy {energy} outside product-state range [{e_lo:.6f}, {e_hi:.6f}]")

    axes, angles = [], []
    for j in range(cham.n):
        a, b = lo_v[j], hi_v[j]
        cross = np.cross(a, b)
        norm = np.linalg.norm(cross)
        if norm < 1e-12:
            axis = np.cross(a, [0.0, 0.0, 1.0])
            if np.linalg.norm(axis) < 1e-6:
                axis = np.cross(a, [1.0, 0.0, 0.0])
            axis /= np.linalg.norm(axis)
            theta = 0.0 if a @ b > 0 else math.pi
        else:
            axis = cross / norm
            theta = math.atan2(norm, float(a @ b))
        axes.append(axis)
        angles.append(theta)

    def config_at(s: float) -> np.ndarray:
        out = np.empty((cham.n, 3))
        for j in range(cham.n):
            out[j] = _rotate(lo_v[j], axes[j], s * angles[j])
        return out

    s_lo, s_hi = 0.0, 1.0
    f_lo = e_lo - energy
    vec = config_at(0.0) if abs(f_lo) <= tol else None
    if vec is None:
        for _ in range(200):
            mid = 0.5 * (s_lo + s_hi)
            f_mid = cham.energy(config_at(mid)) - energy
            if abs(f_mid) <= tol:
                vec = config_at(mid)
                break
            if (f_mid > 0) == (f_lo > 0):
                s_lo, f_lo = mid, f_mid
            else:
                s_hi = mid
        else:
            vec = config_at(0.5 * (s_lo + s_hi))
    return SpinConfiguration(vec)


def _rotate(v: np.ndarray, axis: np.ndarray, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return c * v + s * np.cross(axis, v) + (1.0 - c) * (axis @ v) * axis


def rejection_sample(ham, energy: float, eps: float, rng: np.random.Generator,
                     max_tries: int = 50_000_000, batch: int = 65536) -> SpinConfiguration:
    """One Haar-random product state with |E - energy| < eps."""
    samples = rejection_sample_many(ham, energy, eps, rng, 1, max_tries, batch)
    return SpinConfiguration(samples[0])


def rejection_sample_many(ham, energy: float, eps: float, rng: np.random.Generator,
                          count: int, max_tries: int = 50_000_000,
                          batch: int = 65536) -> np.ndarray:
    """Batch rejection sampling; returns (count, n, 3). Raises if the
    acceptance rate is too low to finish within ``max_tries`` draws."""
    if eps <= 0:
        raise ValueError("rejection sampling needs a positive window")
    cham = _as_classical(ham)
    out = []
    tries = 0
    while len(out) < count:
        if tries >= max_tries:
            raise SamplingError(
                f"rejection sampling got {len(out)}/{count} samples in {tries} draws")
        m = min(batch, max_tries - tries)
        vecs = _uniform_sphere(rng, m * cham.n).reshape(m, cham.n, 3)
        energies = cham.energy_batch(vecs)
        hits = np.nonzero(np.abs(energies - energy) < eps)[0]
        out.extend(vecs[h] for h in hits)
        tries += m
    return np.array(out[:count])


# ---------------------------------------------------------------------------
# diagnostics and persistence

def autocorrelation(series, lag: int) -> float:
    """Normalized autocorrelation at the given lag."""
    x = np.asarray(series, dtype=float)
    if x.size <= lag:
        raise ValueError("series shorter than requested lag")
    x = x - x.mean()
    var = float(x @ x) / x.size
    if var <= 0:
        raise ValueError("constant series has no autocorrelation")
    if lag == 0:
        return 1.0
    return float(x[:-lag] @ x[lag:]) / ((x.size - lag) * var)


def write_samples_csv(path, samples: np.ndarray, chain_id: int = 0,
                      sweep_indices=None, mode: str = "w") -> None:
    """Rows: site, sx, sy, sz, chain id, sweep index."""
    if sweep_indices is None:
        sweep_indices = range(len(samples))
    with open(path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if mode == "w":
            writer.writerow(["site", "sx", "sy", "sz", "chain", "sweep"])
        for sweep, config in zip(sweep_indices, samples):
            for j, v in enumerate(config):
                writer.writerow([j, repr(v[0]), repr(v[1]), repr(v[2]), chain_id, sweep])
