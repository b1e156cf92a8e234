"""Antiunitary symmetries of state families.

An antiunitary ``Theta`` is stored through its unitary part ``m`` with
``Theta v = m @ conj(v)``.  Its adjoint action on operators is
``A -> m @ conj(A) @ m^dagger``.  ``Theta`` is a conjugation
(``Theta^2 = 1``) exactly when ``m`` is symmetric.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .linalg import (
    as_matrix,
    hermitian_eig,
    is_unitary,
    kron,
    random_orthogonal,
    takagi_factorize,
    trace_norm,
)
from .model import Model, StatePoint, evaluate
from .povm import Povm

GAS_TOL = 1e-8
EDGE_RTOL = 1e-10
CYCLE_TOL = 1e-7
GAP_TOL = 1e-9
COMBO_GAP_RTOL = 1e-6
SYMMETRIC_TOL = 1e-10
PURE_RTOL = 1e-10


class NotConjugation(ValueError):
    pass


class DegenerateState(ValueError):
    def __init__(self, msg, gap=None):
        super().__init__(msg)
        self.gap = gap


@dataclass(frozen=True)
class Antiunitary:
    m: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.m)
        if not is_unitary(m, 1e-8):
            raise ValueError("antiunitary requires a unitary matrix part")
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def is_conjugation(self, tol: float = SYMMETRIC_TOL) -> bool:
        return bool(np.max(np.abs(self.m - self.m.T)) <= tol)

    def square(self) -> np.ndarray:
        """The linear operator ``Theta^2 = m conj(m)``."""
        return self.m @ self.m.conj()

    def apply(self, v) -> np.ndarray:
        return self.m @ np.conj(v)

    def adjoint(self, a) -> np.ndarray:
        return self.m @ np.conj(a) @ self.m.conj().T

    def after(self, unitary) -> "Antiunitary":
        """``U Theta`` for a unitary ``U``."""
        return Antiunitary(np.asarray(unitary, dtype=complex) @ self.m)


def conjugation(dim: int) -> Antiunitary:
    """Complex conjugation in the computational basis."""
    return Antiunitary(np.eye(dim, dtype=complex))


def apply_antiunitary(theta: Antiunitary, a) -> np.ndarray:
    return theta.adjoint(a)


def compose_tensor(*thetas: Antiunitary) -> Antiunitary:
    return Antiunitary(kron(*[t.m for t in thetas]))


@dataclass
class PhaseCycle:
    """Closed walk in the phase graph whose phase constraints disagree."""

    nodes: tuple
    matrix_index: int
    defect: float


@dataclass
class SymmetryVerdict:
    status: str  # "found", "not_found" or "inconclusive"
    witness: Antiunitary | None = None
    residual: float | None = None
    tolerance: float = GAS_TOL
    certificate: object = None
    gap: float | None = None
    method: str = ""
    phases: np.ndarray | None = None

    @property
    def found(self) -> bool:
        return self.status == "found"


def _as_points(model: Model, sample: Iterable) -> list:
    pts = []
    for s in sample:
        pts.append(s if isinstance(s, StatePoint) else evaluate(model, s))
    return pts


def verify_gas(model: Model, theta: Antiunitary, sample: Iterable, tol: float = GAS_TOL) -> SymmetryVerdict:
    """Check ``Theta rho(x) Theta^dagger = rho(x)`` on sample points.

    The residual is the largest trace distance over the sample.
    """
    worst = 0.0
    for pt in _as_points(model, sample):
        rho = pt.rho
        worst = max(worst, 0.5 * trace_norm(theta.adjoint(rho) - rho))
    status = "found" if worst <= tol else "not_found"
    return SymmetryVerdict(status, theta, worst, tol, method="verify")


def _wrap_half_pi(a):
    return (np.asarray(a) + np.pi / 2) % np.pi - np.pi / 2


@dataclass
class _PhaseSolution:
    consistent: bool
    phases: np.ndarray
    certificate: PhaseCycle | None
    max_defect: float


def _tree_path(parent: dict, node: int) -> list:
    path = [node]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path


def solve_phase_graph(mats: Sequence[np.ndarray], edge_rtol: float = EDGE_RTOL,
                      cycle_tol: float = CYCLE_TOL) -> _PhaseSolution:
    """Find phases making ``exp(i(psi_k - psi_j)) A_jk`` real for all matrices.

    Every significant entry ``A_jk`` asks ``psi_j - psi_k = arg A_jk`` modulo
    pi.  Phases are propagated along a breadth-first spanning forest and
    every other edge is checked.  When one fails, the tree paths of its end
    points close a cycle whose constraints cannot all hold.
    """
    d = mats[0].shape[0]
    edges = []
    adj = [[] for _ in range(d)]
    for idx, a in enumerate(mats):
        thresh = edge_rtol * max(np.linalg.norm(a), 1e-300)
        for j in range(d):
            for k in range(j + 1, d):
                if abs(a[j, k]) > thresh:
                    t = float(np.angle(a[j, k]))
                    edges.append((j, k, t, idx))
                    adj[j].append((k, t))
                    adj[k].append((j, -t))
    psi = np.zeros(d)
    parent: dict = {}
    for root in range(d):
        if root in parent:
            continue
        parent[root] = None
        queue = deque([root])
        while queue:
            j = queue.popleft()
            for k, t in adj[j]:
                if k not in parent:
                    parent[k] = j
                    psi[k] = psi[j] - t
                    queue.append(k)
    worst, cert = 0.0, None
    for j, k, t, idx in edges:
        defect = abs(float(_wrap_half_pi(psi[j] - psi[k] - t)))
        if defect > worst:
            worst = defect
            if defect > cycle_tol:
                pj, pk = _tree_path(parent, j), _tree_path(parent, k)
                common = next(n for n in pj if n in pk)
                loop = pj[: pj.index(common) + 1] + list(reversed(pk[: pk.index(common)]))
                cert = PhaseCycle(tuple(int(n) for n in loop), idx, defect)
    return _PhaseSolution(worst <= cycle_tol, psi, cert, worst)


def _spectral_gap(values: np.ndarray) -> float:
    return float(np.min(np.diff(values))) if len(values) > 1 else np.inf


def _residual(theta: Antiunitary, mats) -> float:
    return max(0.5 * trace_norm(theta.adjoint(a) - a) / max(1.0, trace_norm(a)) for a in mats)


def _las_pure(point: StatePoint, tol: float) -> SymmetryVerdict:
    # A conjugation fixing psi and every (d_i rho) psi fixes rho and all
    # d_i rho; it exists iff the Gram matrix of those vectors is real.
    eig = hermitian_eig(point.rho)
    psi = eig.vectors[:, -1]
    vecs = [psi] + [d @ psi for d in point.partials]
    b = np.column_stack(vecs)
    gram = b.conj().T @ b
    scale = 1.0 + float(np.max(np.abs(gram)))
    imag = float(np.max(np.abs(gram.imag)))
    if imag > 1e-8 * scale:
        i, j = np.unravel_index(int(np.argmax(np.abs(gram.imag))), gram.shape)
        return SymmetryVerdict("not_found", None, imag, tol, certificate=("imaginary_overlap", int(i), int(j)),
                               method="pure_lift")
    g, q = np.linalg.eigh(gram.real)
    keep = g > 1e-10 * g.max()
    e = b @ (q[:, keep] / np.sqrt(g[keep])[None, :])
    # complete to an orthonormal basis
    d = point.dim
    proj = np.eye(d) - e @ e.conj().T
    u_, s_, _ = np.linalg.svd(proj)
    basis = np.column_stack([e, u_[:, : d - e.shape[1]]])
    theta = Antiunitary(basis @ basis.T)
    res = _residual(theta, [point.rho] + list(point.partials))
    status = "found" if res <= tol else "not_found"
    return SymmetryVerdict(status, theta, res, tol, method="pure_lift")


def _las_in_basis(v: np.ndarray, mats, tol: float, gap: float, method: str) -> SymmetryVerdict:
    rotated = [v.conj().T @ a @ v for a in mats]
    sol = solve_phase_graph(rotated)
    u = v * np.exp(1j * sol.phases)[None, :]
    theta = Antiunitary(u @ u.T)
    res = _residual(theta, mats)
    if sol.consistent and res <= tol:
        return SymmetryVerdict("found", theta, res, tol, gap=gap, method=method, phases=sol.phases)
    return SymmetryVerdict("not_found", None, res, tol, certificate=sol.certificate, gap=gap,
                           method=method, phases=sol.phases)


def find_las(point: StatePoint, tol: float = GAS_TOL, seed: int = 0) -> SymmetryVerdict:
    """Decide whether a conjugation fixes ``rho`` and every ``d_i rho``.

    Pure states use the state-vector construction.  Mixed states with a
    non-degenerate spectrum are solved exactly by the phase graph in the
    eigenbasis of ``rho``.  For degenerate spectra a random real
    combination of ``rho`` and its partials (fixed by any such conjugation)
    is tried as the basis instead; if that is also degenerate the verdict
    is ``inconclusive``.
    """
    mats = [point.rho] + list(point.partials)
    eig = hermitian_eig(point.rho)
    lam = eig.values
    if len(lam) == 1:
        return SymmetryVerdict("found", conjugation(1), 0.0, tol, method="trivial")
    if lam[-2] <= PURE_RTOL * lam[-1]:
        return _las_pure(point, tol)
    gap = _spectral_gap(lam)
    if gap > GAP_TOL:
        return _las_in_basis(eig.vectors, mats, tol, gap, "phase_graph")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(4):
        w = rng.standard_normal(len(mats))
        h = sum(wi * a / max(np.linalg.norm(a), 1e-300) for wi, a in zip(w, mats))
        e2 = hermitian_eig(h)
        g2 = _spectral_gap(e2.values) / max(np.linalg.norm(h), 1e-300)
        if best is None or g2 > best[0]:
            best = (g2, e2.vectors)
    if best[0] > COMBO_GAP_RTOL:
        return _las_in_basis(best[1], mats, tol, gap, "phase_graph_combination")
    return SymmetryVerdict("inconclusive", None, None, tol, gap=gap, method="degenerate")


def search_gas(model: Model, sample: Iterable, tol: float = GAS_TOL, seed: int = 0) -> SymmetryVerdict:
    """Look for a conjugation fixing ``rho(x)`` at every sample point.

    Any such conjugation fixes every real combination of the sampled states,
    so the phase graph is solved in the eigenbasis of a random combination.
    A positive answer is re-verified on the sample.  Degenerate combinations
    give ``inconclusive``; a negative answer is exact for the sample only.
    """
    pts = _as_points(model, sample)
    mats = [p.rho for p in pts]
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(4):
        w = rng.standard_normal(len(mats))
        h = sum(wi * a for wi, a in zip(w, mats))
        e = hermitian_eig(h)
        g = _spectral_gap(e.values) / max(np.linalg.norm(h), 1e-300)
        if best is None or g > best[0]:
            best = (g, e.vectors)
    if best[0] <= COMBO_GAP_RTOL:
        return SymmetryVerdict("inconclusive", None, None, tol, gap=best[0], method="degenerate")
    verdict = _las_in_basis(best[1], mats, tol, best[0], "sample_phase_graph")
    if verdict.found:
        check = verify_gas(model, verdict.witness, pts, tol)
        verdict.residual = check.residual
        if not check.found:
            verdict.status = "not_found"
    return verdict


def reference_basis(theta: Antiunitary) -> np.ndarray:
    """Orthonormal basis (columns) of vectors fixed by a conjugation."""
    if not theta.is_conjugation():
        raise NotConjugation("antiunitary is not a conjugation (its matrix is not symmetric)")
    return takagi_factorize(theta.m).factor


def invariant_povm(theta: Antiunitary, rotations: int = 1, seed: int = 0,
                   include_reference: bool = True) -> Povm:
    """Union of real-orthogonally rotated reference bases, each weighted ``1/m``.

    Every element ``|v><v|`` has ``Theta v = v``, so the POVM commutes with
    ``Theta``.  With ``include_reference`` the first copy is the unrotated
    Takagi basis; all other copies use seeded random real rotations.
    """
    if rotations < 1:
        raise ValueError("rotations must be at least 1")
    w = reference_basis(theta)
    d = w.shape[0]
    rng = np.random.default_rng(seed)
    elems, labels = [], []
    for r in range(rotations):
        o = np.eye(d) if (r == 0 and include_reference) else random_orthogonal(d, rng)
        basis = w @ o
        for k in range(d):
            v = basis[:, k]
            elems.append(np.outer(v, v.conj()) / rotations)
            labels.append(f"r{r}_{k}")
    return Povm(elems, labels)


@dataclass
class AsymmetryReport:
    m_sq: float
    m1_max: float
    m1_mean: float
    minimizer: np.ndarray
    witness: Antiunitary
    start_values: np.ndarray = field(repr=False)
    m1_candidates: dict = field(default_factory=dict)


class _Objective:
    """Mean squared Frobenius asymmetry as a function of eigenbasis phases."""

    def __init__(self, rotated):
        n = len(rotated)
        d = rotated[0].shape[0]
        off = ~np.eye(d, dtype=bool)
        self.const = sum(2.0 * np.sum(np.abs(a[off]) ** 2) for a in rotated) / n
        z = sum(np.conj(a) ** 2 for a in rotated) * (2.0 / n)
        z[~off] = 0.0
        self.z = z

    def full(self, free):
        return np.concatenate([[0.0], free])

    def __call__(self, free):
        u = np.exp(1j * self.full(free))
        t = (u[:, None] * self.z) * u.conj()[None, :]
        val = self.const - float(np.sum(t).real)
        grad = 2.0 * np.sum(t, axis=1).imag
        return val, grad[1:]


def _theta_from_phases(v: np.ndarray, alpha: np.ndarray) -> Antiunitary:
    u = v * np.exp(0.5j * alpha)[None, :]
    return Antiunitary(u @ u.T)


def asymmetry_measures(point: StatePoint, n_starts: int = 16, seed: int = 0) -> AsymmetryReport:
    """Distance of the partials from the nearest conjugation-symmetric set.

    Only conjugations fixing ``rho`` are considered.  For a non-degenerate
    ``rho`` they are ``V diag(exp(i alpha)) V^T``; the squared Frobenius
    objective is minimized over the phases ``alpha`` by multi-start L-BFGS
    with an analytic gradient (one phase is fixed since a global phase acts
    trivially).  Trace-norm variants are minimized by Nelder-Mead started at
    the Frobenius minimizer and at independent starts; the smaller value is
    kept.

    Raises
    ------
    DegenerateState
        If the spectrum of ``rho`` has a gap below ``1e-9``.
    """
    eig = hermitian_eig(point.rho)
    gap = _spectral_gap(eig.values)
    if gap <= GAP_TOL:
        raise DegenerateState(f"spectral gap {gap:.3e} too small", gap)
    v = eig.vectors
    d = point.dim
    rotated = [v.conj().T @ p @ v for p in point.partials]
    n = len(rotated)
    if d == 1 or n == 0:
        theta = _theta_from_phases(v, np.zeros(d))
        return AsymmetryReport(0.0, 0.0, 0.0, np.zeros(d), theta, np.zeros(1))
    obj = _Objective(rotated)
    rng = np.random.default_rng(seed)
    starts = [np.zeros(d - 1)] + [rng.uniform(0, 2 * np.pi, d - 1) for _ in range(max(n_starts, 8) - 1)]
    results = []
    for s in starts:
        r = minimize(obj, s, jac=True, method="L-BFGS-B",
                     options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 2000})
        results.append((max(float(r.fun), 0.0), r.x))
    values = np.array([r[0] for r in results])
    k = int(np.argmin(values))
    m_sq, best = results[k]
    alpha = obj.full(best)

    def tn(free):
        w = obj.full(free)
        ph = np.exp(1j * w)
        out = []
        for a in rotated:
            sym = (ph[:, None] * np.conj(a)) * ph.conj()[None, :]
            out.append(0.5 * trace_norm(a - sym))
        return np.array(out)

    cands: dict = {}
    for tag, agg in (("max", np.max), ("mean", np.mean)):
        at_frob = float(agg(tn(best)))
        f = lambda x: float(agg(tn(x)))
        seeds = [best] + [results[i][1] for i in np.argsort(values)[1:4]]
        refined = []
        for s in seeds:
            r = minimize(f, s, method="Nelder-Mead",
                         options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400 * d})
            refined.append(float(r.fun))
        cands[tag] = {"at_frobenius_minimizer": at_frob, "multistart": min(refined)}
    m1_max = min(cands["max"].values())
    m1_mean = min(cands["mean"].values())
    return AsymmetryReport(m_sq, m1_max, m1_mean, alpha, _theta_from_phases(v, alpha), values, cands)
