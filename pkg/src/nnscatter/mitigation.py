"""Error-mitigation stack: readout calibration, randomized compiling,
and depolarizing-model state purification.

The three techniques compose in the fixed pipeline order
RCAL correction -> RC averaging -> purification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import (Distribution, NoiseModel, evolve, measure,
                      pauli_expectations, probs_from_expectations)
from .circuits import Circuit, Gate, gate_unitary, su2_to_u3, unitary_of
from .linalg import dagger, kron
from .rng import stream

_I2 = np.eye(2, dtype=complex)
_PAULIS = (
    _I2,
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

MIN_LAMBDA_POWER = 1e-6


@dataclass(frozen=True)
class ConfusionEstimate:
    """Per-qubit confusion matrices estimated from the two RCAL circuits."""

    matrices: tuple
    shots: int | None


@dataclass(frozen=True)
class TwirlSet:
    """Logically equivalent randomizations of a base circuit."""

    base: Circuit
    members: list[Circuit]
    seeds: list[int]

    @property
    def n(self) -> int:
        return len(self.members)


def rcal_calibrate(noise: NoiseModel, shots: int | None, seed: int = 0) -> ConfusionEstimate:
    """Estimate per-qubit confusion from an identity and an X(x)X circuit.

    Two circuits regardless of qubit count: all qubits are calibrated from
    the marginals of the same pair of experiments.
    """
    ident = Circuit(gates=[])
    flip = Circuit(gates=[Gate("RX", (0,), (np.pi,)), Gate("RX", (1,), (np.pi,))])
    dists = []
    for k, circ in enumerate((ident, flip)):
        rho = evolve(circ, noise)
        dists.append(measure(rho, noise, shots, stream(seed, k)))
    p_id, p_fl = dists[0].probs, dists[1].probs

    matrices = []
    for qubit in range(2):
        if qubit == 0:
            m1_given_0 = p_id[2] + p_id[3]
            m0_given_1 = p_fl[0] + p_fl[1]
        else:
            m1_given_0 = p_id[1] + p_id[3]
            m0_given_1 = p_fl[0] + p_fl[2]
        matrices.append(np.array([[1.0 - m1_given_0, m0_given_1],
                                  [m1_given_0, 1.0 - m0_given_1]]))
    return ConfusionEstimate(matrices=tuple(matrices), shots=shots)


def invert_confusion(probs: np.ndarray, est: ConfusionEstimate) -> np.ndarray:
    """Apply the per-qubit inverse confusion; may produce negative entries."""
    inverses = []
    for c in est.matrices:
        det = float(np.linalg.det(c))
        if abs(det) <= 1e-6:
            raise ValueError(f"confusion matrix nearly singular: |det| = {abs(det):.3e}")
        inverses.append(np.linalg.inv(c))
    return kron(inverses[0], inverses[1]).real @ np.asarray(probs, dtype=float)


def clip_and_renormalize(probs: np.ndarray) -> np.ndarray:
    p = np.asarray(probs, dtype=float).copy()
    p[p < 0.0] = 0.0
    total = p.sum()
    if total <= 0.0:
        raise ValueError("all probability mass clipped away")
    return p / total


def rcal_correct(dist: Distribution, est: ConfusionEstimate) -> Distribution:
    """Invert the estimated confusion; negatives are clipped and renormalized."""
    corrected = clip_and_renormalize(invert_confusion(dist.probs, est))
    return Distribution(probs=corrected, shots=dist.shots)


def _pauli_pair_after(entangler: Gate, p0: int, p1: int):
    """Conjugate P0 (x) P1 through the entangling gate: U P U^dag = sign * Q0 (x) Q1."""
    u = gate_unitary(entangler)
    m = u @ kron(_PAULIS[p0], _PAULIS[p1]) @ dagger(u)
    for q0 in range(4):
        for q1 in range(4):
            cand = kron(_PAULIS[q0], _PAULIS[q1])
            overlap = np.trace(dagger(cand) @ m) / 4.0
            if abs(overlap) > 0.5:
                return q0, q1, complex(overlap)
    raise ArithmeticError("entangling gate did not map a Pauli pair to a Pauli pair")


def _flush(gates: list[Gate], pending: list[np.ndarray], phase: float) -> float:
    for q in (0, 1):
        if np.max(np.abs(pending[q] - _I2)) < 1e-15:
            pending[q] = _I2
            continue
        theta, phi, lam, gamma = su2_to_u3(pending[q])
        phase += gamma
        if abs(theta) > 1e-15 or abs(np.mod(phi + lam + np.pi, 2 * np.pi) - np.pi) > 1e-15:
            gates.append(Gate("U3", (q,), (theta, phi, lam)))
        pending[q] = _I2
    return phase


def randomized_compile(circuit: Circuit, n: int, master_seed: int = 0) -> TwirlSet:
    """Pauli-twirl every entangling gate, n independent randomizations.

    Random Paulis go in front of each entangling gate and their exact
    conjugates behind it; all single-qubit content between entangling gates
    is folded into at most one U3 per qubit, so members keep the base
    circuit's entangling structure and depth.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    members = []
    seeds = list(range(n))
    for j in seeds:
        gen = stream(master_seed, j)
        gates: list[Gate] = []
        pending = [_I2, _I2]
        phase = float(circuit.global_phase)
        for gate in circuit.gates:
            if not gate.is_entangling:
                q = gate.qubits[0]
                pending[q] = gate_unitary_2x2(gate) @ pending[q]
                continue
            p0, p1 = int(gen.integers(0, 4)), int(gen.integers(0, 4))
            pending[0] = _PAULIS[p0] @ pending[0]
            pending[1] = _PAULIS[p1] @ pending[1]
            phase = _flush(gates, pending, phase)
            gates.append(gate)
            q0, q1, overlap = _pauli_pair_after(gate, p0, p1)
            pending[0] = overlap * _PAULIS[q0]
            pending[1] = _PAULIS[q1].copy()
        phase = _flush(gates, pending, phase)
        members.append(Circuit(gates=gates, global_phase=float(np.mod(phase, 2 * np.pi)),
                               metadata=dict(circuit.metadata)))
    return TwirlSet(base=circuit, members=members, seeds=seeds)


def gate_unitary_2x2(gate: Gate) -> np.ndarray:
    from .circuits import rx_matrix, rz_matrix, u3_matrix

    if gate.kind == "RX":
        return rx_matrix(*gate.angles)
    if gate.kind == "RZ":
        return rz_matrix(*gate.angles)
    if gate.kind == "U3":
        return u3_matrix(*gate.angles)
    raise ValueError(f"{gate.kind} is not a single-qubit gate")


def average_distributions(dists) -> Distribution:
    probs = np.mean([d.probs for d in dists], axis=0)
    shots = None
    if all(d.shots is not None for d in dists):
        shots = int(sum(d.shots for d in dists))
    return Distribution(probs=probs / probs.sum(), shots=shots)


def purify(dist: Distribution, lam: float, n_2q_gates: int) -> Distribution:
    """Undo depolarizing decay: divide Pauli expectations by lam^N, rebuild.

    Exact inverse of the backend's per-entangling-gate depolarizing channel
    in exact-measurement mode with matching (lam, N).
    """
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lambda = {lam} outside (0, 1]")
    factor = lam ** n_2q_gates
    if factor < MIN_LAMBDA_POWER:
        raise ValueError(
            f"lambda^N = {factor:.3e} below {MIN_LAMBDA_POWER}: amplification too large")
    zi, iz, zz = pauli_expectations(dist)
    raw = probs_from_expectations(zi / factor, iz / factor, zz / factor)
    return Distribution(probs=clip_and_renormalize(raw), shots=dist.shots)


def lambda_from_process_fidelity(fidelity: float, dim: int = 4) -> float:
    """Depolarizing parameter from process fidelity: lam = (d^2 F - 1)/(d^2 - 1)."""
    d2 = dim * dim
    if not 1.0 / d2 <= fidelity <= 1.0:
        raise ValueError(f"process fidelity {fidelity} outside [{1.0 / d2}, 1]")
    return (d2 * fidelity - 1.0) / (d2 - 1.0)


def process_fidelity_from_lambda(lam: float, dim: int = 4) -> float:
    d2 = dim * dim
    return lam + (1.0 - lam) / d2
