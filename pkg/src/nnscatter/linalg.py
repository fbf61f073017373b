"""Dense complex linear algebra for small (2x2 .. 8x8) operators.

Everything downstream (spin Hamiltonians, propagators, gate unitaries,
density matrices) is built from the handful of primitives here.  Matrices
are plain complex ndarrays; the tolerance constants below are the single
source of truth for Hermiticity/unitarity checks across the package.
"""

from __future__ import annotations

import numpy as np

# Centralized tolerances (used by every module).
ATOL_HERMITIAN = 1e-10
ATOL_UNITARY = 1e-12
ATOL_NORM = 1e-10

# Jacobi eigensolver is meant for the small operators of this problem only.
MAX_EIG_DIM = 8

_JACOBI_SWEEPS = 60


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(m.T)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, (a (x) b)[2i+k, 2j+l] = a[i,j] * b[k,l]."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def hermiticity_defect(m: np.ndarray) -> float:
    """max |m - m^dagger|, the quantity the Hermitian checks gate on."""
    return float(np.max(np.abs(m - dagger(m))))


def unitarity_defect(m: np.ndarray) -> float:
    """max |m^dagger m - 1|."""
    eye = np.eye(m.shape[0], dtype=complex)
    return float(np.max(np.abs(dagger(m) @ m - eye)))


def is_hermitian(m: np.ndarray, atol: float = ATOL_HERMITIAN) -> bool:
    return hermiticity_defect(m) < atol


def is_unitary(m: np.ndarray, atol: float = ATOL_UNITARY) -> bool:
    return unitarity_defect(m) < atol


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """One cyclic-Jacobi rotation zeroing a[p, q] (and a[q, p]) in place."""
    apq = a[p, q]
    mag = abs(apq)
    if mag == 0.0:
        return
    phase = apq / mag
    app = a[p, p].real
    aqq = a[q, q].real
    tau = (aqq - app) / (2.0 * mag)
    if tau >= 0.0:
        t = -1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = 1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    # J is the identity with the (p,q) block [[c, -s*phase], [s*conj(phase), c]].
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p + s * np.conjugate(phase) * col_q
    a[:, q] = -s * phase * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p + s * phase * row_q
    a[q, :] = -s * np.conjugate(phase) * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0

    vcol_p = v[:, p].copy()
    vcol_q = v[:, q].copy()
    v[:, p] = c * vcol_p + s * np.conjugate(phase) * vcol_q
    v[:, q] = -s * phase * vcol_p + c * vcol_q


def eig_hermitian(h: np.ndarray, atol: float = ATOL_HERMITIAN):
    """Eigendecomposition of a small Hermitian matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues ascending, unitary eigenvector matrix V) with
    h @ V = V @ diag(w).  Deterministic ordering: eigenvalues ascending and
    each eigenvector rephased so its largest-magnitude component is real
    and positive.

    Raises ValueError for non-Hermitian input (reporting the max asymmetry)
    or for dimensions beyond the small-matrix bound.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    n = h.shape[0]
    if n > MAX_EIG_DIM:
        raise ValueError(f"dimension {n} exceeds small-matrix bound {MAX_EIG_DIM}")
    defect = hermiticity_defect(h)
    if defect >= atol:
        raise ValueError(f"matrix is not Hermitian: max |h - h^dagger| = {defect:.3e}")

    a = h.copy()
    v = np.eye(n, dtype=complex)
    scale = max(float(np.max(np.abs(a))), 1.0)
    for _ in range(_JACOBI_SWEEPS):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
        if off < 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > 1e-18 * scale:
                    _jacobi_rotate(a, v, p, q)

    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    # Sign convention: largest-magnitude component of each vector made real-positive.
    for k in range(n):
        idx = int(np.argmax(np.abs(v[:, k])))
        piv = v[idx, k]
        if abs(piv) > 0.0:
            v[:, k] *= np.conjugate(piv) / abs(piv)
    return w, v


def hermitian_exp(h: np.ndarray, theta: float, atol: float = ATOL_HERMITIAN) -> np.ndarray:
    """exp(-i * theta * h) for Hermitian h, via V diag(e^{-i theta w}) V^dagger."""
    w, v = eig_hermitian(h, atol=atol)
    return (v * np.exp(-1j * theta * w)) @ dagger(v)
