"""Symmetric logarithmic derivatives, quantum and classical Fisher matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import commutator, hermitian_eig
from .model import StatePoint

SUPPORT_RTOL = 1e-12
COMPAT_RTOL = 1e-8
PROB_EPS = 1e-12
RANGE_RTOL = 1e-10


class SingularQfim(ValueError):
    """The quantum Fisher matrix has no range; ``null_directions`` spans its kernel."""

    def __init__(self, msg, null_directions=None):
        super().__init__(msg)
        self.null_directions = null_directions


@dataclass
class SldSet:
    operators: list
    support_projector: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.support_projector).real))


@dataclass
class FisherReport:
    qfim: np.ndarray
    uhlmann: np.ndarray
    weakly_commutative: bool
    quasi_classical: bool
    partially_commutative: bool
    tolerance: float
    max_uhlmann: float
    max_commutator: float
    max_partial_commutator: float
    rank: int
    slds: SldSet = field(repr=False)


@dataclass
class ClassicalFisher:
    matrix: np.ndarray
    divergent: bool = False
    divergent_outcomes: list = field(default_factory=list)
    dropped_outcomes: list = field(default_factory=list)


@dataclass
class Efficiency:
    efficiency: float
    raw_min_eigenvalue: float
    diagonal_ratios: np.ndarray
    null_directions: np.ndarray
    range_dimension: int


def compute_sld(point: StatePoint) -> SldSet:
    """Solve ``2 d_i rho = L_i rho + rho L_i`` in the eigenbasis of ``rho``.

    Entries whose eigenvalue sum is below ``1e-12 * lambda_max`` are set to
    zero, which fixes the gauge freedom on the kernel of ``rho``.
    """
    eig = hermitian_eig(point.rho)
    lam, v = eig.values, eig.vectors
    tau = SUPPORT_RTOL * max(float(lam.max()), 0.0)
    sums = lam[:, None] + lam[None, :]
    mask = sums > tau
    inv = np.zeros_like(sums)
    inv[mask] = 2.0 / sums[mask]
    ops = []
    for d in point.partials:
        a = v.conj().T @ d @ v
        lo = v @ (a * inv) @ v.conj().T
        ops.append(0.5 * (lo + lo.conj().T))
    sup = v[:, lam > tau]
    return SldSet(ops, sup @ sup.conj().T, lam, v)


def qfim_from_slds(rho, operators) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Re Tr[rho L_i L_j], Im Tr[rho L_i L_j] / 2)``."""
    n = len(operators)
    q = np.zeros((n, n), dtype=complex)
    rl = [rho @ op for op in operators]
    for i in range(n):
        for j in range(n):
            q[i, j] = np.trace(rl[i] @ operators[j])
    return q.real.copy(), q.imag / 2.0


def fisher_report(point: StatePoint, slds: SldSet | None = None) -> FisherReport:
    """QFIM, Uhlmann curvature and compatibility flags at a point.

    The flags use the tolerance ``1e-8 * (1 + max|QFIM|)`` for the curvature
    and ``1e-8 * (1 + max ||L_i||_F^2)`` for commutators; raw maxima are
    stored so callers can re-threshold.

    For pure states ``quasi_classical`` equals ``weakly_commutative``
    because the kernel gauge can always be chosen to make the SLDs commute
    then.  For other rank-deficient states the flag tests the zero-gauge
    SLDs, which is sufficient but not necessary.
    """
    slds = compute_sld(point) if slds is None else slds
    qfim, uhl = qfim_from_slds(point.rho, slds.operators)
    n = len(slds.operators)
    tol = COMPAT_RTOL * (1.0 + (float(np.max(np.abs(qfim))) if n else 0.0))
    max_u = float(np.max(np.abs(uhl))) if n else 0.0
    lnorm = max((float(np.linalg.norm(op) ** 2) for op in slds.operators), default=0.0)
    ctol = COMPAT_RTOL * (1.0 + lnorm)
    p = slds.support_projector
    max_c = max_pc = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            c = commutator(slds.operators[i], slds.operators[j])
            max_c = max(max_c, float(np.linalg.norm(c)))
            max_pc = max(max_pc, float(np.linalg.norm(p @ c @ p)))
    weak = max_u <= tol
    rank = slds.rank
    quasi = weak if rank == 1 else max_c <= ctol
    return FisherReport(qfim, uhl, weak, quasi, max_pc <= ctol, tol, max_u, max_c, max_pc, rank, slds)


def cfim(point: StatePoint, povm) -> ClassicalFisher:
    """Classical Fisher matrix ``sum_k d_i p_k d_j p_k / p_k`` of a measurement.

    Outcomes with ``p <= 1e-12`` are dropped when every ``|d p| <= 1e-6``;
    otherwise they are dropped and the result is flagged ``divergent``.
    """
    from .povm import outcome_distribution

    dist = outcome_distribution(point, povm)
    n = point.n_params
    f = np.zeros((n, n))
    divergent, dropped = [], []
    for k, label in enumerate(dist.labels):
        p, g = dist.probabilities[k], dist.gradients[k]
        if p <= PROB_EPS:
            if np.any(np.abs(g) > np.sqrt(PROB_EPS)):
                divergent.append(label)
            else:
                dropped.append(label)
            continue
        f += np.outer(g, g) / p
    return ClassicalFisher(0.5 * (f + f.T), bool(divergent), divergent, dropped)


def qcrb_efficiency(f_classical, f_quantum) -> Efficiency:
    """Smallest generalized eigenvalue of ``(F_C, F_Q)`` on the range of ``F_Q``.

    Raises
    ------
    SingularQfim
        If ``F_Q`` vanishes identically.
    """
    fc = np.atleast_2d(np.asarray(f_classical, dtype=float))
    fq = np.atleast_2d(np.asarray(f_quantum, dtype=float))
    q, u = np.linalg.eigh(0.5 * (fq + fq.T))
    top = float(q.max()) if q.size else 0.0
    keep = q > RANGE_RTOL * max(top, 0.0)
    null = u[:, ~keep]
    if top <= 0.0 or not np.any(keep):
        raise SingularQfim("quantum Fisher matrix is zero", u)
    ur = u[:, keep] / np.sqrt(q[keep])[None, :]
    m = ur.T @ fc @ ur
    raw = float(np.linalg.eigvalsh(0.5 * (m + m.T)).min())
    dq = np.diag(fq)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(dq > RANGE_RTOL * top, np.diag(fc) / np.where(dq == 0, 1, dq), np.nan)
    return Efficiency(float(min(max(raw, 0.0), 1.0)), raw, ratios, null, int(keep.sum()))
