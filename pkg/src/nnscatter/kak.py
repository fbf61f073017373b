"""Cartan (KAK) decomposition of two-qubit unitaries.

Any u in U(4) factors as

    u = e^{i phase} (k1a (x) k1b) . exp(i (c1 XX + c2 YY + c3 ZZ)) . (k2a (x) k2b)

with canonical coordinates in the Weyl chamber pi/4 >= c1 >= c2 >= |c3|
(and c3 >= 0 when c1 = pi/4, which makes the representative unique).

Route: conjugate into the magic (Bell) basis, where u becomes m = L D P^T
with L, P real special-orthogonal and D a diagonal phase matrix; D is found
by simultaneously diagonalizing the real and imaginary parts of the complex
symmetric matrix m^T m, and the interaction coordinates are linear in the
half-angles of D's entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import dagger, kron, unitarity_defect

_SQ2 = 1.0 / np.sqrt(2.0)
MAGIC = np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=complex,
) * _SQ2

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
XX = kron(_X, _X)
YY = kron(_Y, _Y)
ZZ = kron(_Z, _Z)

# Diagonal of XX, YY, ZZ in the magic basis; theta_k = c0 + W[k] . (c1, c2, c3).
_W = np.array(
    [
        [1.0, -1.0, 1.0],
        [1.0, 1.0, -1.0],
        [-1.0, -1.0, -1.0],
        [-1.0, 1.0, 1.0],
    ]
)

# Special-unitary single-qubit operations used by the canonicalization moves:
# flippers negate two of the three interaction axes, swappers exchange two.
_FLIPPERS = [1j * _X, 1j * _Y, 1j * _Z]
_SWAPPERS = [
    1j * _SQ2 * np.array([[1, -1j], [1j, -1]], dtype=complex),  # swaps Y and Z
    1j * _SQ2 * np.array([[1, 1], [1, -1]], dtype=complex),     # swaps X and Z
    1j * _SQ2 * np.array([[0, 1 - 1j], [1 + 1j, 0]], dtype=complex),  # swaps X and Y
]


@dataclass
class KakDecomposition:
    """Local factors, canonical coordinates (radians) and global phase."""

    k1a: np.ndarray
    k1b: np.ndarray
    k2a: np.ndarray
    k2b: np.ndarray
    coords: tuple[float, float, float]
    phase: float

    def canonical_matrix(self) -> np.ndarray:
        return canonical_gate(*self.coords)

    def reconstruct(self) -> np.ndarray:
        return (np.exp(1j * self.phase)
                * kron(self.k1a, self.k1b)
                @ self.canonical_matrix()
                @ kron(self.k2a, self.k2b))


def canonical_gate(c1: float, c2: float, c3: float) -> np.ndarray:
    """exp(i (c1 XX + c2 YY + c3 ZZ)), evaluated diagonally in the magic basis."""
    theta = _W @ np.array([c1, c2, c3])
    return (MAGIC * np.exp(1j * theta)) @ dagger(MAGIC)


def _eigh_real_symmetric(a: np.ndarray):
    """np.linalg.eigh plus the package's deterministic sign convention."""
    w, v = np.linalg.eigh(a)
    for k in range(v.shape[1]):
        idx = int(np.argmax(np.abs(v[:, k])))
        if v[idx, k] < 0.0:
            v[:, k] = -v[:, k]
    return w, v


def _simultaneous_diagonalize_symmetric(m: np.ndarray, tol: float = 1e-6):
    """Orthogonal P and angles 2*theta with m = P diag(e^{2 i theta}) P^T.

    m must be complex symmetric and unitary; then Re(m) and Im(m) are
    commuting real symmetric matrices sharing a real eigenbasis.  Clusters of
    Re(m) eigenvalues are resolved by diagonalizing Im(m) within the cluster;
    remaining ties are harmless (any orthonormal basis of the joint eigenspace
    works) and the ordering/sign conventions keep the result deterministic.
    """
    re, im = np.real(m), np.imag(m)
    w_re, p = _eigh_real_symmetric(re)
    # Refine within clusters of equal Re eigenvalues.
    start = 0
    n = m.shape[0]
    while start < n:
        end = start + 1
        while end < n and abs(w_re[end] - w_re[start]) < tol:
            end += 1
        if end - start > 1:
            block = p[:, start:end]
            sub = block.T @ im @ block
            _, q = _eigh_real_symmetric((sub + sub.T) / 2.0)
            p[:, start:end] = block @ q
        start = end
    d = np.diag(p.T @ m @ p)
    return p, np.angle(d)


def _su2_factors(m: np.ndarray, atol: float = 1e-7):
    """Split m = a (x) b (up to the simultaneous sign of a and b), m in SU(4)."""
    c1, c2 = m[0:2, 0:2], m[0:2, 2:4]
    c3, c4 = m[2:4, 0:2], m[2:4, 2:4]
    # For a = [[a1, a2], [-conj(a2), conj(a1)]]: c1 c4^dag = a1^2 I, -c2 c3^dag = a2^2 I.
    a1 = np.sqrt(0j + (c1 @ dagger(c4))[0, 0])
    a2 = np.sqrt(0j - (c2 @ dagger(c3))[0, 0])
    # Fix the relative sign via c1 c2^dag = a1 conj(a2) I.
    ref = (c1 @ dagger(c2))[0, 0]
    if abs(a1 * np.conj(a2) - ref) > abs(a1 * np.conj(-a2) - ref):
        a2 = -a2
    b = c1 / a1 if abs(a1) >= abs(a2) else c2 / a2
    a = np.array([[a1, a2], [-np.conj(a2), np.conj(a1)]], dtype=complex)
    if np.max(np.abs(kron(a, b) - m)) > atol:
        raise ArithmeticError("failed to split a local unitary into single-qubit factors")
    return a, b


def _canonicalize(coords, k1a, k1b, k2a, k2b, phase_factor):
    """Move coordinates into the Weyl chamber, absorbing fixups into locals."""
    v = list(coords)
    left = [np.eye(2, dtype=complex), np.eye(2, dtype=complex)]
    right = [np.eye(2, dtype=complex), np.eye(2, dtype=complex)]
    phase = [complex(phase_factor)]

    def shift(k, step):
        # exp(i (pi/2) PP) = i P (x) P, so a half-pi shift is local.
        v[k] += step * np.pi / 2
        phase[0] *= 1j ** (step % 4)
        f = np.linalg.matrix_power(_FLIPPERS[k], step % 4)
        right[0] = f @ right[0]
        right[1] = f @ right[1]

    def negate(k1, k2):
        # Flipping the remaining axis on one qubit negates the other two coords.
        v[k1] *= -1
        v[k2] *= -1
        f = _FLIPPERS[3 - k1 - k2]
        left[1] = left[1] @ f
        right[1] = dagger(f) @ right[1]

    def swap(k1, k2):
        s = _SWAPPERS[3 - k1 - k2]
        v[k1], v[k2] = v[k2], v[k1]
        left[0] = left[0] @ s
        left[1] = left[1] @ s
        right[0] = dagger(s) @ right[0]
        right[1] = dagger(s) @ right[1]

    for k in range(3):
        while v[k] <= -np.pi / 4:
            shift(k, 1)
        while v[k] > np.pi / 4:
            shift(k, -1)
    if abs(v[0]) < abs(v[1]):
        swap(0, 1)
    if abs(v[1]) < abs(v[2]):
        swap(1, 2)
    if abs(v[0]) < abs(v[1]):
        swap(0, 1)
    if v[0] < 0:
        negate(0, 2)
    if v[1] < 0:
        negate(1, 2)
    while v[2] <= -np.pi / 4:
        shift(2, 1)
    while v[2] > np.pi / 4:
        shift(2, -1)
    if v[2] < 0 and v[0] > np.pi / 4 - 1e-9:
        # Representative uniqueness on the c1 = pi/4 face: force c3 >= 0.
        shift(0, -1)
        negate(0, 2)

    return ((v[0], v[1], v[2]),
            k1a @ left[0], k1b @ left[1],
            right[0] @ k2a, right[1] @ k2b,
            float(np.angle(phase[0])))


def kak_decompose(u: np.ndarray, atol: float = 1e-8) -> KakDecomposition:
    """Decompose a 4x4 unitary; rejects non-unitary input with the deviation."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {u.shape}")
    defect = unitarity_defect(u)
    if defect >= atol:
        raise ValueError(f"matrix is not unitary: max |u^dagger u - 1| = {defect:.3e}")

    det = np.linalg.det(u)
    alpha0 = np.angle(det) / 4.0
    u_su = u * np.exp(-1j * alpha0)

    m = dagger(MAGIC) @ u_su @ MAGIC
    p, angles2 = _simultaneous_diagonalize_symmetric(m.T @ m)
    if np.linalg.det(p) < 0:
        p[:, 0] = -p[:, 0]
    theta = angles2 / 2.0

    w = m @ p  # columns e^{i theta_k} * (real vector)
    ell = np.real(w * np.exp(-1j * theta)[np.newaxis, :])
    if np.linalg.det(ell) < 0:
        theta[0] += np.pi
        ell[:, 0] = -ell[:, 0]
    residual = float(np.max(np.abs(w - ell * np.exp(1j * theta)[np.newaxis, :])))
    if residual > 1e-7:
        raise ArithmeticError(f"magic-basis factorization failed (residual {residual:.3e})")

    c0 = float(np.sum(theta)) / 4.0
    c = np.array([
        theta @ _W[:, 0],
        theta @ _W[:, 1],
        theta @ _W[:, 2],
    ]) / 4.0

    k1a, k1b = _su2_factors(MAGIC @ ell @ dagger(MAGIC))
    k2a, k2b = _su2_factors(MAGIC @ p.T.astype(complex) @ dagger(MAGIC))

    coords, k1a, k1b, k2a, k2b, extra = _canonicalize(
        c, k1a, k1b, k2a, k2b, np.exp(1j * (alpha0 + c0)))
    dec = KakDecomposition(k1a=k1a, k1b=k1b, k2a=k2a, k2b=k2b,
                           coords=coords, phase=extra)
    err = float(np.max(np.abs(dec.reconstruct() - u)))
    if err > 1e-9:
        raise ArithmeticError(f"KAK reconstruction error {err:.3e}")
    return dec
