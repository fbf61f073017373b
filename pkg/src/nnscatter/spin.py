"""Spin-dependent Hamiltonian and time-ordered spin propagators.

Basis convention, fixed once for the whole package: index
0 <-> |S=1, Sz=-1>, 1 <-> |S=1, Sz=0>, 2 <-> |S=1, Sz=+1>, 3 <-> |S=0, Sz=0>.
The coupled states map onto the two-qubit computational basis
|00>, |01>, |10>, |11> in that order.  Operators are constructed in the
product basis (|uu>, |ud>, |du>, |dd>, with |0> = spin up) via Pauli/Kron
algebra and conjugated into the coupled basis with the Clebsch-Gordan
change-of-basis matrix below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg import ATOL_HERMITIAN, dagger, hermitian_exp, kron
from .potentials import PotentialModel
from .trajectory import Trajectory

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Columns: coupled states expressed in the product basis (uu, ud, du, dd),
# i.e. |coupled_i> = PRODUCT_FROM_COUPLED @ e_i.
_SQ2 = 1.0 / np.sqrt(2.0)
PRODUCT_FROM_COUPLED = np.array(
    [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, _SQ2, 0.0, _SQ2],
        [0.0, _SQ2, 0.0, -_SQ2],
        [1.0, 0.0, 0.0, 0.0],
    ],
    dtype=complex,
)

SIGMA_DOT_SIGMA = (kron(PAULI_X, PAULI_X) + kron(PAULI_Y, PAULI_Y)
                   + kron(PAULI_Z, PAULI_Z))

TRIPLET_INDICES = (0, 1, 2)
SINGLET_INDEX = 3


def sigma_dot(direction: np.ndarray) -> np.ndarray:
    """sigma . n for a unit 3-vector n."""
    return (direction[0] * PAULI_X + direction[1] * PAULI_Y
            + direction[2] * PAULI_Z)


def tensor_operator(rhat: np.ndarray) -> np.ndarray:
    """(sigma_1 . rhat)(sigma_2 . rhat) - sigma_1 . sigma_2 / 3, product basis."""
    sr = sigma_dot(rhat)
    return kron(sr, sr) - SIGMA_DOT_SIGMA / 3.0


def to_coupled(op_product: np.ndarray) -> np.ndarray:
    """Conjugate a product-basis two-spin operator into the coupled basis."""
    b = PRODUCT_FROM_COUPLED
    return dagger(b) @ op_product @ b


def build_vsd(model: PotentialModel, r) -> np.ndarray:
    """V_SD(r) = V_s(r) sigma.sigma + V_t(r) tensor(rhat), 4x4 Hermitian (MeV)."""
    r = np.asarray(r, dtype=float)
    rnorm = float(np.linalg.norm(r))
    if rnorm <= 0.0:
        raise ValueError("|r| = 0: direction undefined")
    rhat = r / rnorm
    vp = (model.s.value(rnorm) * SIGMA_DOT_SIGMA
          + model.t.value(rnorm) * tensor_operator(rhat))
    return to_coupled(vp)


def short_time_propagator(model: PotentialModel, r, dt: float) -> np.ndarray:
    """exp(-i dt V_SD(r)) in the coupled basis."""
    if dt < 0.0:
        raise ValueError("dt must be >= 0")
    return hermitian_exp(build_vsd(model, r), dt, atol=ATOL_HERMITIAN * 100)


@dataclass(frozen=True)
class CoarsePropagator:
    """Time-ordered product of the fine-step propagators over one coarse window."""

    index: int
    t_start: float
    t_end: float
    matrix: np.ndarray


def coarse_propagators(model: PotentialModel, traj: Trajectory,
                       steps_per_coarse: int) -> list[CoarsePropagator]:
    """Split the trajectory into windows of `steps_per_coarse` fine steps.

    Window j covers fine steps [j*s, (j+1)*s); factors are evaluated at the
    left endpoint r(t_i) and later times multiply on the left (time ordering).
    """
    n_fine = len(traj) - 1
    if steps_per_coarse < 1 or n_fine % steps_per_coarse != 0:
        raise ValueError(
            f"{n_fine} fine steps not divisible by steps_per_coarse={steps_per_coarse}")
    out = []
    for j in range(n_fine // steps_per_coarse):
        u = np.eye(4, dtype=complex)
        for i in range(j * steps_per_coarse, (j + 1) * steps_per_coarse):
            u = short_time_propagator(model, traj.r[i], traj.dt) @ u
        out.append(CoarsePropagator(
            index=j,
            t_start=traj.t[j * steps_per_coarse],
            t_end=traj.t[(j + 1) * steps_per_coarse],
            matrix=u,
        ))
    return out


def exact_spin_evolution(propagators, initial: np.ndarray) -> list[np.ndarray]:
    """Noiseless reference evolution: psi_k = U_coarse(T_{k-1}) psi_{k-1}.

    Returns the N_s+1 states including the initial one.  This sequence is the
    baseline every TVD/fidelity comparison is made against.
    """
    psi = np.asarray(initial, dtype=complex)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"initial state not normalized: |psi| = {norm}")
    states = [psi.copy()]
    for prop in propagators:
        matrix = prop.matrix if isinstance(prop, CoarsePropagator) else prop
        psi = matrix @ psi
        states.append(psi.copy())
    return states


def propagators_to_json(propagators, path) -> None:
    """Dump the coarse propagators as re/im matrix pairs for cross-checking."""
    payload = []
    for prop in propagators:
        payload.append({
            "index": prop.index,
            "t_start": prop.t_start,
            "t_end": prop.t_end,
            "re": np.real(prop.matrix).tolist(),
            "im": np.imag(prop.matrix).tolist(),
        })
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
