"""Second-order Trotter circuits.

One step of the mixed-field Ising circuit is U1(tau/2) U2(tau) U1(tau/2)
with U1 a product of single-site field rotations and U2 the XX bond
rotations, split into even/odd bond sublayers (two 2-qubit layers per
step, (n-1) two-qubit gates per step).  The XY circuit alternates
XX(tau/2) YY(tau) XX(tau/2) bond layers.  The quantum-East circuit uses
the exact per-bond exponential exp(-i tau (J_j/2)(1 - Z_j) X_{j+1}),
realized as a single-site X rotation times a ZX rotation (the two factors
commute); the all-zeros state is an exact fixed point of every such gate.

Half-layers are never merged across steps, so two-qubit gate counts match
the layer counting used for error budgets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .models import ModelParams, quantum_east_couplings

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    kind ``rot1``: exp(i * angle * axis . sigma) on sites[0];
    kind ``rot2``: exp(i * angle * P) with the two-letter Pauli ``letters``;
    kind ``pauli``: apply the Pauli word ``letters`` on ``sites``.
    """

    kind: str
    sites: tuple[int, ...]
    angle: float = 0.0
    layer: int = 0
    axis: tuple[float, float, float] | None = None
    letters: str | None = None

    def matrix(self) -> np.ndarray:
        if self.kind == "rot1":
            nx, ny, nz = self.axis
            gen = nx * PAULI_1Q["X"] + ny * PAULI_1Q["Y"] + nz * PAULI_1Q["Z"]
            return math.cos(self.angle) * np.eye(2) + 1j * math.sin(self.angle) * gen
        gen = PAULI_1Q[self.letters[0]]
        for c in self.letters[1:]:
            gen = np.kron(PAULI_1Q[c], gen)  # later site = higher bit
        if self.kind == "rot2":
            return math.cos(self.angle) * np.eye(gen.shape[0]) + 1j * math.sin(self.angle) * gen
        return gen


@dataclass(frozen=True)
class TrotterCircuit:
    gates: tuple[Gate, ...]
    n: int
    tau: float
    steps: int
    gates_per_step: int
    model_kind: str

    @property
    def total_time(self) -> float:
        return self.tau * self.steps

    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == "rot2")

    def step_gates(self, step: int) -> tuple[Gate, ...]:
        if self.steps == 0:
            return ()
        return self.gates[step * self.gates_per_step:(step + 1) * self.gates_per_step]

    def time_reversed(self) -> "TrotterCircuit":
        rev = tuple(replace(g, angle=-g.angle) for g in reversed(self.gates))
        return replace(self, gates=rev)

    def to_jsonl(self) -> str:
        lines = []
        for g in self.gates:
            rec = {"kind": g.kind, "sites": list(g.sites), "angle": g.angle, "layer": g.layer}
            if g.axis is not None:
                rec["axis"] = list(g.axis)
            if g.letters is not None:
                rec["letters"] = g.letters
            lines.append(json.dumps(rec))
        return "\n".join(lines)

    @classmethod
    def from_jsonl(cls, text: str, n: int, tau: float, steps: int,
                   gates_per_step: int, model_kind: str = "custom") -> "TrotterCircuit":
        gates = []
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            gates.append(Gate(rec["kind"], tuple(rec["sites"]), rec["angle"], rec["layer"],
                              tuple(rec["axis"]) if "axis" in rec else None,
                              rec.get("letters")))
        return cls(tuple(gates), n, tau, steps, gates_per_step, model_kind)


def steps_for(t: float, tau: float) -> int:
    """Nearest integer step count; the realized time is steps * tau."""
    return max(1, round(t / tau)) if t > 0 else 0


def build_trotter_circuit(params: ModelParams, tau: float, steps: int) -> TrotterCircuit:
    if steps < 0:
        raise ValueError("step count must be >= 0")
    if tau <= 0 and steps > 0:
        raise ValueError("need a positive Trotter step")
    if params.kind == "mixed_field_ising":
        builder, per_step = _mfi_step, 3 * params.n - 1
    elif params.kind == "xy":
        builder, per_step = _xy_step, 3 * len(params.edges)
    elif params.kind == "quantum_east":
        if params.n % 2:
            raise ValueError("quantum-East circuit needs an even number of sites")
        builder, per_step = _quantum_east_step, 3 * params.n
    else:
        raise ValueError(f"unknown model kind {params.kind!r}")
    gates = []
    for step in range(steps):
        gates.extend(builder(params, tau, step))
    return TrotterCircuit(tuple(gates), params.n, tau, steps, per_step, params.kind)


def _mfi_step(params: ModelParams, tau: float, step: int) -> list[Gate]:
    n = params.n
    w = math.hypot(params.g, params.h)
    axis = (params.h / w, 0.0, params.g / w)
    half = 0.5 * tau * w  # exp(-i tau H1 / 2) = prod_j exp(+i tau (g Z + h X) / 2)
    base = 4 * step
    gates = [Gate("rot1", (j,), half, base, axis) for j in range(n)]
    even = [(j, j + 1) for j in range(0, n - 1, 2)]
    odd = [(j, j + 1) for j in range(1, n - 1, 2)]
    gates += [Gate("rot2", b, tau, base + 1, letters="XX") for b in even]
    gates += [Gate("rot2", b, tau, base + 2, letters="XX") for b in odd]
    gates += [Gate("rot1", (j,), half, base + 3, axis) for j in range(n)]
    return gates


def _xy_step(params: ModelParams, tau: float, step: int) -> list[Gate]:
    base = 3 * step
    gates = [Gate("rot2", e, -0.5 * tau, base, letters="XX") for e in params.edges]
    gates += [Gate("rot2", e, -tau, base + 1, letters="YY") for e in params.edges]
    gates += [Gate("rot2", e, -0.5 * tau, base + 2, letters="XX") for e in params.edges]
    return gates


def _quantum_east_step(params: ModelParams, tau: float, step: int) -> list[Gate]:
    n = params.n
    couplings = quantum_east_couplings(params)
    even = [j for j in range(0, n, 2)]
    odd = [j for j in range(1, n, 2)]
    base = 3 * step
    gates = []
    for layer, (bonds, frac) in enumerate([(even, 0.5), (odd, 1.0), (even, 0.5)]):
        for j in bonds:
            theta = 0.5 * frac * tau * couplings[j]
            nxt = (j + 1) % n
            #  exp(-i theta' (1 - Z_j) X_{j+1}) = exp(-i theta' X) exp(+i theta' Z X)
            gates.append(Gate("rot1", (nxt,), -theta, base + layer, (1.0, 0.0, 0.0)))
            gates.append(Gate("rot2", (j, nxt), theta, base + layer, letters="ZX"))
    return gates
