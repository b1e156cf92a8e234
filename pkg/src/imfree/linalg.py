"""Dense complex linear algebra used throughout the package.

All matrices are plain ``numpy`` arrays of dtype ``complex128``.  The
Hermitian eigensolver defers to LAPACK (through :func:`numpy.linalg.eigh`);
the Takagi factorization of symmetric unitaries is implemented here.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITIAN_RTOL = 1e-10
TAKAGI_CLUSTER_RTOL = 1e-9
TAKAGI_RTOL = 1e-9


class NonHermitian(ValueError):
    """Raised when a matrix expected to be Hermitian is not."""


class NotSymmetricUnitary(ValueError):
    """Raised when Takagi factorization is requested for a bad input."""


class EigenSystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


class Takagi(NamedTuple):
    """``matrix == factor @ factor.T`` with ``factor`` unitary."""

    factor: np.ndarray
    phases: np.ndarray


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitian_defect(a: np.ndarray) -> float:
    """Largest entry of ``a - a^dagger``."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    a = as_matrix(a)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return hermitian_defect(a) <= rtol * max(scale, 1.0)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _normalize_columns(vectors: np.ndarray) -> np.ndarray:
    # Fix the phase so that the first significant component is real positive.
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300)))
        if abs(col[idx]) > 0:
            out[:, k] = col * (abs(col[idx]) / col[idx])
    return out


def hermitian_eig(a, rtol: float = HERMITIAN_RTOL, tie_tol: float = 1e-12) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues are ascending.  Each eigenvector is phase-fixed so that its
    first significant component is real and positive; eigenvalues equal
    within ``tie_tol`` (relative to the spectral radius) are ordered by
    decreasing real part, then increasing imaginary part, of their first
    component.

    Raises
    ------
    NonHermitian
        If ``max|a - a^dagger| > rtol * max(1, max|a|)``.
    """
    a = as_matrix(a)
    if not is_hermitian(a, rtol):
        raise NonHermitian(f"Hermiticity defect {hermitian_defect(a):.3e}")
    if a.shape[0] == 0:
        return EigenSystem(np.zeros(0), np.zeros((0, 0), dtype=complex))
    values, vectors = np.linalg.eigh(hermitian_part(a))
    vectors = _normalize_columns(vectors)
    scale = max(float(np.max(np.abs(values))), 1e-300)
    order = list(range(len(values)))
    start = 0
    while start < len(values):
        stop = start + 1
        while stop < len(values) and values[stop] - values[start] <= tie_tol * scale:
            stop += 1
        if stop - start > 1:
            block = order[start:stop]
            block.sort(key=lambda k: (-round(vectors[0, k].real, 12), round(vectors[0, k].imag, 12)))
            order[start:stop] = block
        start = stop
    return EigenSystem(values[order], vectors[:, order])


def trace_norm(a) -> float:
    """Sum of singular values."""
    a = as_matrix(a)
    if is_hermitian(a, 1e-13):
        return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(a)))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def kron(*mats) -> np.ndarray:
    """Kronecker product with ``(a (x) b)[(i,k),(j,l)] = a[i,j] b[k,l]``."""
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def is_unitary(u, atol: float = 1e-10) -> bool:
    u = as_matrix(u)
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0))


def _simultaneous_real_basis(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Real orthogonal ``q`` diagonalizing the commuting symmetric pair ``a``, ``b``."""
    d = a.shape[0]
    values, q = np.linalg.eigh(a)
    thresh = TAKAGI_CLUSTER_RTOL * max(np.linalg.norm(a), 1e-300)
    start = 0
    while start < d:
        stop = start + 1
        while stop < d and values[stop] - values[stop - 1] <= thresh:
            stop += 1
        if stop - start > 1:
            block = q[:, start:stop]
            sub = block.T @ b @ block
            _, rot = np.linalg.eigh(0.5 * (sub + sub.T))
            q[:, start:stop] = block @ rot
        start = stop
    return q


def _off_diagonal(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - np.diag(np.diag(m))))) if m.size else 0.0


def takagi_factorize(s, atol: float = TAKAGI_RTOL) -> Takagi:
    """Factor a symmetric unitary as ``s = w @ w.T`` with ``w`` unitary.

    Writes ``s = a + i b``.  For a symmetric unitary, ``a`` and ``b`` are
    real symmetric and commute, so one real orthogonal ``q`` diagonalizes
    both: ``s = q diag(exp(i lam)) q^T`` and ``w = q diag(exp(i lam / 2))``.

    Raises
    ------
    NotSymmetricUnitary
        If ``s`` is not symmetric or not unitary within ``atol``.
    """
    s = as_matrix(s)
    d = s.shape[0]
    if not np.allclose(s, s.T, atol=atol, rtol=0):
        raise NotSymmetricUnitary(f"asymmetry {np.max(np.abs(s - s.T)):.3e}")
    if not is_unitary(s, atol):
        raise NotSymmetricUnitary("matrix is not unitary")
    if d == 0:
        return Takagi(np.zeros((0, 0), dtype=complex), np.zeros(0))
    s = 0.5 * (s + s.T)
    a, b = s.real.copy(), s.imag.copy()
    q = _simultaneous_real_basis(a, b)
    best = (_off_diagonal(q.T @ s @ q), q)
    # Nearly clustered spectra can leave cross terms; a generic real
    # combination of a and b separates them instead.
    for t in (0.6180339887498949, -1.4142135623730951, 2.718281828459045):
        if best[0] <= 1e-13:
            break
        _, q2 = np.linalg.eigh(a + t * b)
        cand = (_off_diagonal(q2.T @ s @ q2), q2)
        if cand[0] < best[0]:
            best = cand
    q = best[1]
    diag = np.diag(q.T @ s @ q)
    phases = np.angle(diag)
    w = q * np.exp(0.5j * phases)[None, :]
    return Takagi(w, phases)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random real orthogonal matrix."""
    z = rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * np.sign(np.diag(r))[None, :]


def random_symmetric_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    u = random_unitary(d, rng)
    return u @ u.T


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)


def swap(d: int = 2) -> np.ndarray:
    """Swap operator on ``C^d (x) C^d``."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s
