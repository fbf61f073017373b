"""Brute-force reference computations.

Each routine here recomputes a quantity by a route independent of the
implementation it checks (explicit index loops, truncated series, finite
differences, dense superoperators, direct statevector algebra).  The test
suite freezes its expected values against these, and `nnscatter oracle`
runs the whole battery from the command line.
"""

from __future__ import annotations

import numpy as np


def kron_index_formula(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a (x) b)[p*i+k, q*j+l] = a[i,j] b[k,l] via explicit loops."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    p, q = b.shape
    out = np.zeros((a.shape[0] * p, a.shape[1] * q), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for k in range(p):
                for l in range(q):
                    out[p * i + k, q * j + l] = a[i, j] * b[k, l]
    return out


def taylor_matrix_exp(h: np.ndarray, theta: float, terms: int = 30) -> np.ndarray:
    """Truncated series for exp(-i theta h)."""
    h = np.asarray(h, dtype=complex)
    out = np.eye(h.shape[0], dtype=complex)
    term = np.eye(h.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ ((-1j * theta) * h) / k
        out = out + term
    return out


def finite_difference_force(model, r: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """-grad V_SI by central differences, component by component."""
    r = np.asarray(r, dtype=float)
    out = np.zeros(3)
    for axis in range(3):
        plus = r.copy()
        minus = r.copy()
        plus[axis] += step
        minus[axis] -= step
        vp = model.si.value(float(np.linalg.norm(plus)))
        vm = model.si.value(float(np.linalg.norm(minus)))
        out[axis] = -(vp - vm) / (2.0 * step)
    return out


def dense_circuit_product(circuit) -> np.ndarray:
    """Sequential 4x4 multiplication of the gate embeddings, in reverse order."""
    from .circuits import gate_unitary

    mats = [gate_unitary(g) for g in circuit.gates]
    out = np.eye(4, dtype=complex)
    for m in reversed(mats):
        out = out @ m
    return np.exp(1j * circuit.global_phase) * out


def channel_superoperator(circuit, noise) -> np.ndarray:
    """16x16 superoperator on vec(rho) composing unitaries and depolarizing maps."""
    from .circuits import gate_unitary

    dim = 4
    eye = np.eye(dim * dim, dtype=complex)
    vec_id = np.eye(dim, dtype=complex).reshape(-1)

    def depol(lam):
        # vec(lam rho + (1-lam) tr(rho) I/4) = lam vec(rho) + (1-lam)/4 |vec(I)><vec(I)| vec(rho)
        return lam * eye + (1.0 - lam) / dim * np.outer(vec_id, np.conjugate(vec_id))

    coherent = None
    if noise.coherent_zz != 0.0:
        half = 0.5 * noise.coherent_zz
        v = np.diag(np.exp(-1j * half * np.array([1.0, -1.0, -1.0, 1.0])))
        coherent = np.kron(v, np.conjugate(v))

    s = eye
    for gate in circuit.gates:
        u = gate_unitary(gate)
        s = np.kron(u, np.conjugate(u)) @ s
        if gate.is_entangling:
            if coherent is not None:
                s = coherent @ s
            s = depol(noise.lambda2q) @ s
        else:
            s = depol(noise.lambda1q) @ s
    return s


def exact_tomography_record(psi: np.ndarray):
    """Infinite-shot tomography tables computed directly from the statevector.

    Applies the -pi/2 x/y rotations by amplitude algebra (no circuit code):
    for the rotated qubit the pair (a_i, a_j) mixes as
    a_i' = (a_i + e a_j)/sqrt(2), a_j' = (e a_i + a_j)/sqrt(2) with
    e = i for Rx(-pi/2) and the real sign pattern for Ry(-pi/2).
    """
    psi = np.asarray(psi, dtype=complex)
    dim = psi.shape[0]
    n = int(np.log2(dim))
    bare = np.abs(psi) ** 2
    px, py = [], []
    sq = 1.0 / np.sqrt(2.0)
    for qubit in range(n):
        stride = 2 ** (n - 1 - qubit)
        ax = psi.copy()
        ay = psi.copy()
        for base in range(dim):
            if base & stride:
                continue
            i, j = base, base | stride
            ax[i], ax[j] = sq * (psi[i] + 1j * psi[j]), sq * (1j * psi[i] + psi[j])
            ay[i], ay[j] = sq * (psi[i] + psi[j]), sq * (-psi[i] + psi[j])
        px.append(np.abs(ax) ** 2)
        py.append(np.abs(ay) ** 2)
    return bare, px, py


def harmonic_period(times: np.ndarray, coordinate: np.ndarray) -> float:
    """Oscillation period from successive upward zero crossings (linear interp)."""
    crossings = []
    for i in range(len(coordinate) - 1):
        if coordinate[i] < 0.0 <= coordinate[i + 1]:
            frac = -coordinate[i] / (coordinate[i + 1] - coordinate[i])
            crossings.append(times[i] + frac * (times[i + 1] - times[i]))
    if len(crossings) < 2:
        raise ValueError("fewer than two upward zero crossings")
    return float(np.mean(np.diff(crossings)))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(dim: int, rng: np.random.Generator,
                      min_amplitude: float = 0.0) -> np.ndarray:
    """Normalized random state, optionally with all |a_i| above a floor."""
    while True:
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi = psi / np.linalg.norm(psi)
        if min_amplitude <= 0.0 or np.min(np.abs(psi)) > min_amplitude:
            return psi
