"""Independent reference computations used by the tests.

Nothing here imports the package's solvers; closed forms are written out
by hand and generic quantities use different numerical routes (Lyapunov
solver, polar decomposition, brute-force grids).
"""

import numpy as np
from scipy.linalg import polar, solve_continuous_lyapunov

SQ2, SQ3, SQ6 = np.sqrt(2), np.sqrt(3), np.sqrt(6)


def gisin_amplitudes(eta, phi):
    """A_k and their (eta, phi) derivatives for the four tetrahedral outcomes."""
    a, b_eta, b_phi = [], [], []
    for k in range(3):
        ang = phi - k * 2 * np.pi / 3
        a.append(np.sin(eta) * np.cos(ang) - SQ2 / 4 * np.cos(eta) + SQ6 / 4)
        b_eta.append(np.cos(eta) * np.cos(ang) + SQ2 / 4 * np.sin(eta))
        b_phi.append(-np.sin(eta) * np.sin(ang))
    # the fourth vertex is the north pole
    a.append(3 * SQ2 / 4 * np.cos(eta) + SQ6 / 4)
    b_eta.append(-3 * SQ2 / 4 * np.sin(eta))
    b_phi.append(0.0)
    return np.array(a), np.array(b_eta), np.array(b_phi)


def gisin_cfim(eta, phi, delta):
    a, be, bp = gisin_amplitudes(eta, phi)
    b = np.stack([be, bp])
    w = a ** 2 / (a ** 2 + 3 * delta / (4 * (1 - delta)))
    return 4 * (1 - delta) / 3 * np.einsum("k,ik,jk->ij", w, b, b)


def antiparallel_product_cfim(eta, phi, delta):
    s, c = np.sin(eta), np.cos(eta)
    c2, s2 = np.cos(2 * phi), np.sin(2 * phi)
    dd = delta / (1 - delta)
    ee = (s ** 2 * (1 + c) ** 2 / ((1 + c) ** 2 + dd) + s ** 2 * (1 - c) ** 2 / ((1 - c) ** 2 + dd)
          + s ** 2 * c ** 2 * (1 + c2) ** 2 / (s ** 2 * (1 + c2) + dd)
          + s ** 2 * c ** 2 * (1 - c2) ** 2 / (s ** 2 * (1 - c2) + dd))
    ep = (s ** 3 * c * s2 * (1 - c2) / (s ** 2 * (1 - c2) + dd)
          - s ** 3 * c * s2 * (1 + c2) / (s ** 2 * (1 + c2) + dd))
    pp = s ** 4 * s2 ** 2 / (s ** 2 * (1 + c2) + dd) + s ** 4 * s2 ** 2 / (s ** 2 * (1 - c2) + dd)
    return (1 - delta) * np.array([[ee, ep], [ep, pp]])


def antiparallel_product_probabilities(eta, phi):
    c = np.cos(eta)
    return np.array([(1 + c) ** 2 / 4, (1 - c) ** 2 / 4,
                     np.sin(eta) ** 2 * (1 - np.cos(2 * phi)) / 4, np.sin(eta) ** 2 * (1 + np.cos(2 * phi)) / 4])


def white_noise_qfim(f_pure, delta, dim):
    """QFIM of (1 - delta) |psi><psi| + delta I / dim given the pure-state QFIM.

    On the span of psi and its derivative the mixed state has eigenvalues
    p + q and q with p = 1 - delta, q = delta / dim; the SLD formula in that
    eigenbasis gives p^2 / (p + 2 q) times the pure value.
    """
    p, q = 1 - delta, delta / dim
    return p ** 2 / (p + 2 * q) * np.asarray(f_pure)


def spin_slds(eta, phi):
    l_eta = np.array([[-np.sin(eta), np.exp(-1j * phi) * np.cos(eta)],
                      [np.exp(1j * phi) * np.cos(eta), np.sin(eta)]])
    l_phi = np.array([[0, -1j * np.exp(-1j * phi) * np.sin(eta)],
                      [1j * np.exp(1j * phi) * np.sin(eta), 0]])
    return l_eta, l_phi


def lyapunov_sld(rho, drho):
    """Full-rank SLD from the Lyapunov equation rho L + L rho = 2 drho."""
    return solve_continuous_lyapunov(rho, 2 * drho)


def polar_trace_norm(a):
    _, p = polar(a, side="left")
    return float(np.trace(p).real)


def qutrit_asymmetry_exact(w12, w13, w23):
    """Minimum squared asymmetry of the qutrit example at x = 0.

    Each of the three edges contributes 4 (1 - cos e) and the edge angles
    must sum to the cycle defect; the minimum spreads it evenly.
    """
    defect = 2 * (w12 + w23 - w13)
    best = min(abs(defect - 2 * np.pi * k) for k in range(-3, 4))
    return 12 * (1 - np.cos(best / 3))


def torus_grid_lower_bound(rotated, step=0.01):
    """Certified lower bound on min_alpha of the squared asymmetry for d = 3.

    ``rotated`` are the partials in the eigenbasis of rho.  The objective is
    evaluated on a grid of spacing ``step`` over the two free phases; the
    global minimum is interior with zero gradient, so it is at least the
    grid minimum minus half a global Hessian bound times the squared
    distance to the nearest grid node.
    """
    n = len(rotated)
    w = np.zeros((3, 3))
    z = np.zeros((3, 3), dtype=complex)
    for a in rotated:
        w += 2 * np.abs(a) ** 2 / n
        z += 2 * np.conj(a) ** 2 / n
    np.fill_diagonal(w, 0)
    np.fill_diagonal(z, 0)
    g = np.arange(0, 2 * np.pi, step)
    a1, a2 = np.meshgrid(g, g, indexing="ij")
    alpha = [np.zeros_like(a1), a1, a2]
    val = np.full(a1.shape, w.sum())
    for j in range(3):
        for k in range(3):
            if j != k:
                val -= np.real(np.exp(1j * (alpha[j] - alpha[k])) * z[j, k])
    grid_min = float(val.min())
    hess_bound = 2 * np.abs(z).sum()
    radius_sq = 2 * (step / 2) ** 2
    return grid_min - 0.5 * hess_bound * radius_sq, grid_min
