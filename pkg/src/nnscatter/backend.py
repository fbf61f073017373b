"""Noisy virtual two-qubit processor.

Density-matrix evolution with per-gate depolarizing noise, an optional
deterministic coherent ZZ over-rotation after each entangling gate (the
error that randomized compiling is meant to tailor away), readout
confusion, and seeded multinomial shot sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, gate_unitary
from .linalg import dagger
from .rng import stream

OUTCOME_LABELS = ("00", "01", "10", "11")

_I4 = np.eye(4, dtype=complex)
_ZZ = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)
_IDENTITY_CONFUSION = np.eye(2)


def symmetric_confusion(eps: float) -> np.ndarray:
    """Per-qubit confusion matrix with symmetric flip probability eps."""
    return np.array([[1.0 - eps, eps], [eps, 1.0 - eps]])


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing strengths, readout confusion, and coherent over-rotation.

    lambda2q / lambda1q are the depolarizing survival probabilities applied
    after each entangling / single-qubit gate (1.0 = noiseless).  confusion
    holds one 2x2 column-stochastic matrix per qubit with
    C[i][j] = P(measure i | true j).  coherent_zz is the angle of a
    deterministic exp(-i theta/2 ZZ) applied after every entangling gate.
    """

    lambda2q: float = 1.0
    lambda1q: float = 1.0
    confusion: tuple = (_IDENTITY_CONFUSION, _IDENTITY_CONFUSION)
    coherent_zz: float = 0.0

    def __post_init__(self):
        for lam, label in ((self.lambda2q, "lambda2q"), (self.lambda1q, "lambda1q")):
            if not 0.0 <= lam <= 1.0:
                raise ValueError(f"{label} = {lam} outside [0, 1]")
        if len(self.confusion) != 2:
            raise ValueError("confusion must hold one 2x2 matrix per qubit")
        for c in self.confusion:
            c = np.asarray(c, dtype=float)
            if c.shape != (2, 2) or np.any(c < 0.0) or np.any(c > 1.0):
                raise ValueError("confusion entries must be probabilities in a 2x2 matrix")
            if np.max(np.abs(c.sum(axis=0) - 1.0)) > 1e-12:
                raise ValueError("confusion columns must sum to 1")

    @property
    def confusion_4(self) -> np.ndarray:
        return np.kron(np.asarray(self.confusion[0], dtype=float),
                       np.asarray(self.confusion[1], dtype=float))


@dataclass(frozen=True)
class Distribution:
    """Probability mass over the outcomes 00, 01, 10, 11.

    shots is None for exact (infinite-shot) distributions; counts carries the
    integer sample counts in shot mode.
    """

    probs: np.ndarray
    shots: int | None = None
    counts: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"distribution sums to {total}, expected 1")


def basis_density(index: int) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    rho[index, index] = 1.0
    return rho


def state_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, np.conjugate(psi))


def _depolarize(rho: np.ndarray, lam: float) -> np.ndarray:
    if lam >= 1.0:
        return rho
    return lam * rho + (1.0 - lam) * np.trace(rho).real * _I4 / 4.0


def evolve(circuit: Circuit, noise: NoiseModel, initial: np.ndarray | None = None) -> np.ndarray:
    """Apply the circuit gate by gate: rho -> U rho U^dagger, noise after each gate."""
    rho = basis_density(0) if initial is None else np.asarray(initial, dtype=complex).copy()
    coherent = None
    if noise.coherent_zz != 0.0:
        half = 0.5 * noise.coherent_zz
        coherent = np.diag(np.exp(-1j * half * np.array([1.0, -1.0, -1.0, 1.0])))
    for gate in circuit.gates:
        u = gate_unitary(gate)
        rho = u @ rho @ dagger(u)
        if gate.is_entangling:
            if coherent is not None:
                rho = coherent @ rho @ dagger(coherent)
            rho = _depolarize(rho, noise.lambda2q)
        else:
            rho = _depolarize(rho, noise.lambda1q)
    return rho


def measure(rho: np.ndarray, noise: NoiseModel, shots: int | None,
            seed: int | np.random.Generator = 0) -> Distribution:
    """Readout through the confusion channel; exact mode when shots is None.

    seed may be an integer (a fresh Philox stream is derived from it) or an
    already-split generator provided by the caller.
    """
    p = np.real(np.diag(rho)).copy()
    p[p < 0.0] = 0.0
    p = p / p.sum()
    q = noise.confusion_4 @ p
    if shots is None:
        return Distribution(probs=q, shots=None)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    gen = seed if isinstance(seed, np.random.Generator) else stream(int(seed))
    counts = gen.multinomial(shots, q / q.sum())
    return Distribution(probs=counts / shots, shots=shots, counts=counts)


def pauli_expectations(dist: Distribution):
    """(<Z x I>, <I x Z>, <Z x Z>) under the fixed bit ordering."""
    p = dist.probs
    zi = p[0] + p[1] - p[2] - p[3]
    iz = p[0] - p[1] + p[2] - p[3]
    zz = p[0] - p[1] - p[2] + p[3]
    return float(zi), float(iz), float(zz)


def probs_from_expectations(zi: float, iz: float, zz: float) -> np.ndarray:
    """Exact inverse of pauli_expectations (before any clipping)."""
    return 0.25 * np.array([
        1.0 + zi + iz + zz,
        1.0 + zi - iz - zz,
        1.0 - zi + iz - zz,
        1.0 - zi - iz + zz,
    ])


def counts_to_json(dist: Distribution, seed: int, path) -> None:
    """Export `{outcome: count}` plus the shots and seed that produced them."""
    if dist.counts is None:
        raise ValueError("exact-mode distribution has no counts to export")
    payload = {
        "counts": {label: int(c) for label, c in zip(OUTCOME_LABELS, dist.counts)},
        "shots": int(dist.shots),
        "seed": int(seed),
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
