"""Pure-state tomography from 2n+1 measurement settings, and synthesis of
the reinitializing operator that re-prepares the reconstructed state.

Settings: the bare circuit, then for each qubit a copy with a final
Rx(-pi/2) and one with a final Ry(-pi/2) on that qubit.  Relative phases
come from a quadrant-aware two-argument arctangent of

    ( -P^x_i + (P_i + P_j)/2 ,  P^y_i - (P_i + P_j)/2 )

for the index pair (i, j = i + stride) linked by each rotation round; the
pairs form a binary tree walked from the most significant bit down
(round i rotates the i-th most significant qubit, stride 2^(n-1-i)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate
from .linalg import unitarity_defect

ZERO_AMPLITUDE_TOL = 1e-9


@dataclass(frozen=True)
class TomographyRecord:
    """Bare probabilities plus the x/y-rotated tables, one pair per qubit."""

    n: int
    bare: np.ndarray
    px: tuple
    py: tuple

    def __post_init__(self):
        dim = 2 ** self.n
        tables = [self.bare, *self.px, *self.py]
        if len(self.px) != self.n or len(self.py) != self.n:
            raise ValueError("need one x table and one y table per qubit")
        for t in tables:
            t = np.asarray(t, dtype=float)
            if t.shape != (dim,):
                raise ValueError(f"probability table has shape {t.shape}, expected ({dim},)")
            if abs(float(t.sum()) - 1.0) > 1e-9:
                raise ValueError(f"probability table sums to {t.sum()}")


@dataclass(frozen=True)
class ReconstructedState:
    """Amplitudes sqrt(P_i) and phases with phi_0 = 0 (global phase dropped)."""

    amplitudes: np.ndarray
    phases: np.ndarray

    @property
    def n(self) -> int:
        return int(np.log2(self.amplitudes.shape[0]))

    def statevector(self) -> np.ndarray:
        return self.amplitudes * np.exp(1j * self.phases)


def tomography_settings(base: Circuit, n: int = 2) -> list[Circuit]:
    """The 2n+1 measurement circuits: bare, then (x, y) per qubit, MSB first."""
    if n < 1:
        raise ValueError("n must be >= 1")
    settings = [Circuit(gates=list(base.gates), global_phase=base.global_phase,
                        metadata={**base.metadata, "setting": "bare"})]
    for qubit in range(n):
        for axis, kind_angle in (("x", ("RX", (-np.pi / 2,))),
                                 ("y", ("U3", (-np.pi / 2, 0.0, 0.0)))):
            kind, angles = kind_angle
            gates = list(base.gates) + [Gate(kind, (qubit,), angles)]
            settings.append(Circuit(gates=gates, global_phase=base.global_phase,
                                    metadata={**base.metadata,
                                              "setting": f"{axis}{qubit}"}))
    return settings


def reconstruct(record: TomographyRecord) -> ReconstructedState:
    """Amplitudes from the bare table, phases accumulated down the pair tree.

    Branches whose probability is below ZERO_AMPLITUDE_TOL get phase 0 and
    their descendants anchor to the nearest resolved ancestor (the phase of
    a vanishing amplitude carries no information).
    """
    n = record.n
    dim = 2 ** n
    bare = np.asarray(record.bare, dtype=float)
    phases = np.zeros(dim)
    # eff[i]: phase that children of node i accumulate from.
    eff = np.zeros(dim)
    resolved = np.zeros(dim, dtype=bool)
    resolved[0] = bare[0] >= ZERO_AMPLITUDE_TOL

    for round_idx in range(n):
        stride = 2 ** (n - 1 - round_idx)
        px = np.asarray(record.px[round_idx], dtype=float)
        py = np.asarray(record.py[round_idx], dtype=float)
        for base_idx in range(0, dim, 2 * stride):
            i, j = base_idx, base_idx + stride
            half = 0.5 * (bare[i] + bare[j])
            delta = float(np.arctan2(-px[i] + half, py[i] - half))
            if bare[j] < ZERO_AMPLITUDE_TOL:
                phases[j] = 0.0
                eff[j] = eff[i]
                resolved[j] = False
            elif not resolved[i]:
                phases[j] = eff[i]
                eff[j] = phases[j]
                resolved[j] = True
            else:
                phases[j] = eff[i] + delta
                eff[j] = phases[j]
                resolved[j] = True

    phases = np.mod(phases + np.pi, 2 * np.pi) - np.pi
    phases[0] = 0.0
    return ReconstructedState(amplitudes=np.sqrt(bare), phases=phases)


def reinit_operator(state: ReconstructedState) -> np.ndarray:
    """U_reinit = Ph . R_TOT re-preparing the state from |0...0>.

    R_TOT is the ordered product of Givens rotations on index pairs (0, k)
    with angles theta_k = 2 arcsin(sqrt(P_k) / prod_{i<k} cos(theta_i / 2));
    Ph is the diagonal phase gate.  The arcsin argument is clamped to [0, 1]
    when the cosine cascade underflows.
    """
    amps = np.asarray(state.amplitudes, dtype=float)
    dim = amps.shape[0]
    norm = float(np.sum(amps ** 2))
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state not normalized: sum P = {norm}")

    r_tot = np.eye(dim)
    running = 1.0
    for k in range(1, dim):
        if running < ZERO_AMPLITUDE_TOL:
            theta_k = 0.0
        else:
            ratio = min(amps[k] / running, 1.0)
            theta_k = 2.0 * np.arcsin(ratio)
        c, s = np.cos(theta_k / 2.0), np.sin(theta_k / 2.0)
        givens = np.eye(dim)
        givens[0, 0] = c
        givens[k, k] = c
        givens[0, k] = -s
        givens[k, 0] = s
        r_tot = givens @ r_tot
        running *= c

    u = np.exp(1j * state.phases)[:, np.newaxis] * r_tot
    defect = unitarity_defect(u)
    if defect > 1e-10:
        raise ArithmeticError(f"reinitializing operator not unitary: {defect:.3e}")
    return u


def reinit_circuit(state: ReconstructedState) -> Circuit:
    """Synthesized (<=3 entangling gates) preparation circuit, two qubits only."""
    if state.amplitudes.shape[0] != 4:
        raise ValueError("circuit synthesis supports exactly 2 qubits")
    from .circuits import synthesize

    return synthesize(reinit_operator(state), metadata={"role": "reinit"})
