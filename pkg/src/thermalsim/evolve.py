"""Circuit execution on statevectors.

A circuit is compiled once into a flat op list (single-qubit matrices and
fused Pauli-rotation coefficients) and can then be replayed unitarily,
as a quantum trajectory with stochastic Pauli noise after every two-qubit
gate, or with an explicit jump schedule (a list of Pauli insertions keyed
by two-qubit gate index).  The jump schedule is how conditioned-trajectory
estimators and single-error studies drive the same engine.

Branch probabilities of all supported channels are state-independent
(each Kraus operator is a scalar times a Pauli), so a trajectory consumes
one uniform draw per channel plus one more when a jump fires; a zero-rate
channel therefore reproduces the noiseless state exactly.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .circuits import TrotterCircuit


class CompiledCircuit:
    """Flat executable form of a TrotterCircuit."""

    def __init__(self, circuit: TrotterCircuit):
        self.n = circuit.n
        self.steps = circuit.steps
        self.tau = circuit.tau
        ops = []
        for gate in circuit.gates:
            if gate.kind == "rot1":
                u = gate.matrix()
                ops.append(("u", gate.sites[0], complex(u[0, 0]), complex(u[0, 1]),
                            complex(u[1, 0]), complex(u[1, 1])))
            elif gate.kind == "rot2":
                c, a, mx, ms = kernels.rotation_coeffs(gate.angle, gate.letters, gate.sites)
                pivot = (mx & -mx).bit_length() - 1 if mx else -1
                ops.append(("r", c, a, mx, ms, pivot, gate.sites, abs(gate.angle)))
            elif gate.kind == "pauli":
                mx, ms, a0 = kernels.pauli_masks(gate.letters, gate.sites)
                pivot = (mx & -mx).bit_length() - 1 if mx else -1
                ops.append(("p", a0, mx, ms, pivot))
            else:
                raise ValueError(f"unknown gate kind {gate.kind!r}")
        self.ops = ops
        self.ops_per_step = len(ops) // circuit.steps if circuit.steps else 0
        self.two_qubit_per_step = sum(
            1 for op in ops[: self.ops_per_step] if op[0] == "r") if circuit.steps else 0

    @property
    def two_qubit_count(self) -> int:
        return self.two_qubit_per_step * self.steps


def compile_circuit(circuit: TrotterCircuit) -> CompiledCircuit:
    return CompiledCircuit(circuit)


def _apply_op(amps: np.ndarray, op) -> None:
    code = op[0]
    if code == "u":
        kernels._apply_1q(amps, op[2], op[3], op[4], op[5], op[1])
    elif code == "r":
        if op[3] == 0:
            kernels._apply_rot_diag(amps, op[1], op[2], op[4])
        else:
            kernels._apply_rot(amps, op[1], op[2], op[3], op[4], op[5])
    else:
        if op[2] == 0:
            kernels._apply_pauli_diag(amps, op[1], op[3])
        else:
            kernels._apply_pauli(amps, op[1], op[2], op[3], op[4])


def evolve(amps: np.ndarray, compiled: CompiledCircuit, *,
           noise=None, rng: np.random.Generator | None = None,
           jumps=None, measure_steps=None, measure=None,
           start_step: int = 0, end_step: int | None = None,
           norm_tol: float = 1e-10):
    """Run steps [start_step, end_step) in place.

    ``noise`` is sampled per two-qubit gate (requires ``rng``); ``jumps``
    is a sequence of (two_qubit_gate_index, letters) pairs with indices
    counted over the whole circuit, applied after the indexed gate.
    ``measure(amps)`` is recorded at every step index in ``measure_steps``
    (step s = state after s steps); results are returned in step order.
    """
    end = compiled.steps if end_step is None else end_step
    mset = set() if measure_steps is None else {int(s) for s in measure_steps}
    results = []
    if noise is not None and rng is None:
        raise ValueError("noise sampling needs an rng")
    jump_map: dict[int, list[str]] = {}
    if jumps:
        for g, letters in jumps:
            jump_map.setdefault(g, []).append(letters)
    channels = {}
    g2q = start_step * compiled.two_qubit_per_step
    for step in range(start_step, end):
        if step in mset:
            _checked_measure(amps, measure, results, norm_tol)
        base = step * compiled.ops_per_step
        for op in compiled.ops[base: base + compiled.ops_per_step]:
            _apply_op(amps, op)
            if op[0] != "r":
                continue
            if noise is not None:
                angle = op[7]
                channel = channels.get(angle)
                if channel is None:
                    channel = channels[angle] = noise.channel(angle)
                branch = channel.sample(rng)
                if branch is not None:
                    kernels.apply_pauli(amps, branch, op[6])
            elif jump_map:
                for letters in jump_map.get(g2q, ()):
                    kernels.apply_pauli(amps, letters, op[6])
            g2q += 1
    if end in mset:
        _checked_measure(amps, measure, results, norm_tol)
    return results


def _checked_measure(amps, measure, results, norm_tol):
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > norm_tol:
        raise RuntimeError(f"state norm drifted to {norm}")
    if measure is not None:
        results.append(measure(amps))


def apply_circuit_trajectory(state, circuit: TrotterCircuit, noise=None,
                             rng: np.random.Generator | None = None):
    """One quantum trajectory of the full circuit (in place).

    After every two-qubit gate a channel branch is sampled with its Born
    probability; all branches here are weighted Paulis, so the state stays
    normalized without explicit renormalization.
    """
    evolve(state.amps, compile_circuit(circuit), noise=noise, rng=rng)
    return state


def circuit_unitary(circuit: TrotterCircuit) -> np.ndarray:
    """Dense matrix of the full circuit (test scale, n <= 10)."""
    compiled = compile_circuit(circuit)
    dim = 2**circuit.n
    if dim > 1 << 12:
        raise ValueError("dense circuit unitary limited to small systems")
    cols = np.zeros((dim, dim), dtype=np.complex128)
    for i in range(dim):
        amps = np.zeros(dim, dtype=np.complex128)
        amps[i] = 1.0
        evolve(amps, compiled)
        cols[:, i] = amps
    return cols


def sample_jumps(compiled: CompiledCircuit, noise, rng: np.random.Generator,
                 conditional: bool = False):
    """Draw a jump schedule for a full trajectory.

    Jump counts follow the exact binomial over all two-qubit gates (equal
    per-gate rates; mixed-angle circuits fall back to per-gate draws).
    With ``conditional`` the count is drawn conditioned on >= 1 jump; the
    caller weights results by 1 - P(no jump) (see
    :func:`no_jump_probability`).
    """
    angles = {op[7] for op in compiled.ops[: compiled.ops_per_step] if op[0] == "r"}
    total = compiled.two_qubit_count
    if len(angles) != 1:
        schedule = []
        for g in range(total):
            # per-gate draw; rare path, only mixed-angle circuits
            angle = _gate_angle(compiled, g)
            branch = noise.channel(angle).sample(rng)
            if branch is not None:
                schedule.append((g, branch))
        if conditional and not schedule:
            return sample_jumps(compiled, noise, rng, conditional=True)
        return schedule
    channel = noise.channel(angles.pop())
    q = channel.jump_probability
    if conditional:
        k = _conditional_binomial(total, q, rng)
    else:
        k = rng.binomial(total, q)
    positions = np.sort(rng.choice(total, size=k, replace=False)) if k else []
    return [(int(g), channel.sample_conditional(rng)) for g in positions]


def no_jump_probability(compiled: CompiledCircuit, noise) -> float:
    prob = 1.0
    for g in range(compiled.two_qubit_count):
        prob *= 1.0 - noise.channel(_gate_angle(compiled, g)).jump_probability
    return prob


def _gate_angle(compiled: CompiledCircuit, g: int) -> float:
    step_ops = [op for op in compiled.ops[: compiled.ops_per_step] if op[0] == "r"]
    return step_ops[g % compiled.two_qubit_per_step][7]


def _conditional_binomial(total: int, q: float, rng: np.random.Generator) -> int:
    """Binomial(total, q) conditioned on >= 1, by inverse CDF."""
    from scipy.stats import binom

    p0 = (1.0 - q) ** total
    u = rng.uniform()
    return int(binom.ppf(p0 + u * (1.0 - p0), total, q)) or 1
