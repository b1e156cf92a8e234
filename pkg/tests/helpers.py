"""Random test data shared by the module tests and the acceptance suite."""

import numpy as np

from imfree.linalg import random_density, random_unitary
from imfree.model import point_from_matrices
from imfree.povm import Povm
from imfree.symmetry import Antiunitary


def random_point(d, n, rng, rank=None):
    """State with ``n`` random traceless partials; tangent to fixed rank when ``rank < d``."""
    rho = random_density(d, rng, rank)
    parts = []
    for _ in range(n):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = g + g.conj().T
        if rank is not None and rank < d:
            h = 1j * (h @ rho - rho @ h)
        else:
            h -= np.trace(h) / d * np.eye(d)
        parts.append(h)
    return point_from_matrices(rho, parts)


def random_povm(d, k, rng):
    """Full-rank random POVM with ``k`` outcomes."""
    g = rng.standard_normal((k, d, d)) + 1j * rng.standard_normal((k, d, d))
    a = [m @ m.conj().T for m in g]
    w, v = np.linalg.eigh(sum(a))
    t = v @ np.diag(w ** -0.5) @ v.conj().T
    return Povm([t @ m @ t for m in a])


def planted_point(d, n, rng):
    """Mixed state and partials averaged over a random conjugation.

    Random data ``A`` become ``(A + Theta A Theta^dagger) / 2`` with
    ``Theta = U U^T`` composed with complex conjugation, so ``Theta`` fixes
    the result.  Returns the point and ``Theta``.
    """
    u = random_unitary(d, rng)
    theta = Antiunitary(u @ u.T)
    rho = random_density(d, rng)
    rho = 0.5 * (rho + theta.adjoint(rho))
    parts = []
    for _ in range(n):
        g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = g + g.conj().T
        h -= np.trace(h) / d * np.eye(d)
        parts.append(0.5 * (h + theta.adjoint(h)))
    return point_from_matrices(rho, parts), theta
