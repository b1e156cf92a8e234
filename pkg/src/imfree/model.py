"""Parametric families of quantum states and their derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .linalg import hermitian_defect, hermitian_part

TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10


class OutOfDomain(ValueError):
    pass


class InvalidState(ValueError):
    pass


@dataclass(frozen=True)
class Model:
    """A family ``x -> rho(x)`` of density matrices.

    ``state_rule`` maps a parameter vector to a ``dim x dim`` density
    matrix.  ``derivative_rule``, when given, returns the list of partial
    derivatives; otherwise finite differences are used.  Pure families may
    also expose a state-vector lift through ``vector_rule``.
    """

    name: str
    dim: int
    domain: tuple
    state_rule: Callable[[np.ndarray], np.ndarray]
    derivative_rule: Optional[Callable[[np.ndarray], Sequence[np.ndarray]]] = None
    vector_rule: Optional[Callable[[np.ndarray], np.ndarray]] = None
    vector_derivative_rule: Optional[Callable[[np.ndarray], Sequence[np.ndarray]]] = None
    param_names: tuple = ()
    periodic: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        dom = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        if any(hi <= lo for lo, hi in dom):
            raise ValueError(f"empty domain interval in {dom}")
        object.__setattr__(self, "domain", dom)
        n = len(dom)
        if not self.param_names:
            object.__setattr__(self, "param_names", tuple(f"x{i}" for i in range(n)))
        if not self.periodic:
            object.__setattr__(self, "periodic", (False,) * n)
        if len(self.param_names) != n or len(self.periodic) != n:
            raise ValueError("param_names/periodic must match the domain length")

    @property
    def n_params(self) -> int:
        return len(self.domain)

    @property
    def is_pure(self) -> bool:
        return self.vector_rule is not None

    @property
    def widths(self) -> np.ndarray:
        return np.array([hi - lo for lo, hi in self.domain])

    def contains(self, x, atol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return all(lo - atol <= xi <= hi + atol for xi, (lo, hi) in zip(x, self.domain))

    def state(self, x) -> np.ndarray:
        return np.asarray(self.state_rule(np.asarray(x, dtype=float)), dtype=complex)

    def with_domain(self, domain) -> "Model":
        """Copy of the model on a sub-domain; periodicity survives only full circles."""
        domain = tuple((float(lo), float(hi)) for lo, hi in domain)
        periodic = tuple(
            p and abs((hi - lo) - (ohi - olo)) < 1e-12
            for p, (lo, hi), (olo, ohi) in zip(self.periodic, domain, self.domain)
        )
        return Model(
            self.name, self.dim, domain, self.state_rule, self.derivative_rule,
            self.vector_rule, self.vector_derivative_rule, self.param_names, periodic, dict(self.params),
        )


@dataclass
class StatePoint:
    """A model evaluated at one parameter value."""

    x: np.ndarray
    rho: np.ndarray
    partials: list
    boundary: bool = False
    analytic: bool = False
    model_name: str = ""

    @property
    def n_params(self) -> int:
        return len(self.partials)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


@dataclass
class DensityReport:
    trace_defect: float
    hermiticity_defect: float
    min_eigenvalue: float
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_density(rho, trace_tol=TRACE_TOL, herm_tol=HERMITIAN_TOL, psd_tol=PSD_TOL) -> DensityReport:
    rho = np.asarray(rho, dtype=complex)
    failures = []
    tr = abs(np.trace(rho) - 1.0)
    herm = hermitian_defect(rho)
    lam = float(np.min(np.linalg.eigvalsh(hermitian_part(rho)))) if rho.size else 0.0
    if tr > trace_tol:
        failures.append(f"trace differs from 1 by {tr:.3e}")
    if herm > herm_tol:
        failures.append(f"Hermiticity defect {herm:.3e}")
    if lam < -psd_tol:
        failures.append(f"negative eigenvalue {lam:.3e}")
    return DensityReport(float(tr), herm, lam, failures)


def default_step(model: Model) -> np.ndarray:
    return 1e-4 * np.minimum(model.widths, 1.0)


# Fourth-order first-derivative stencils: offsets (in units of h) and weights.
_CENTRAL = (np.array([-2, -1, 1, 2]), np.array([1, -8, 8, -1]) / 12.0)
_FORWARD = (np.array([0, 1, 2, 3, 4]), np.array([-25, 48, -36, 16, -3]) / 12.0)
_BACKWARD = (-_FORWARD[0], -_FORWARD[1])


def numeric_partials(model: Model, x, h=None) -> tuple[list, bool]:
    """Fourth-order finite-difference partials of ``rho``.

    Near a domain edge the central stencil is replaced by a one-sided
    fourth-order stencil that stays inside the domain.  Returns the list of
    Hermitian-symmetrized partials and whether any stencil was shifted.
    """
    x = np.asarray(x, dtype=float)
    steps = default_step(model) if h is None else np.broadcast_to(np.asarray(h, float), x.shape)
    partials, shifted = [], False
    for i, (lo, hi) in enumerate(model.domain):
        hi_ = float(min(steps[i], (hi - lo) / 4.0))
        offsets, weights = _CENTRAL
        if not model.periodic[i]:
            if x[i] - 2 * hi_ < lo:
                offsets, weights = _FORWARD
                shifted = True
            elif x[i] + 2 * hi_ > hi:
                offsets, weights = _BACKWARD
                shifted = True
        acc = np.zeros((model.dim, model.dim), dtype=complex)
        for o, w in zip(offsets, weights):
            if w == 0:
                continue
            xs = x.copy()
            xs[i] += o * hi_
            acc += w * model.state(xs)
        partials.append(hermitian_part(acc / hi_))
    return partials, shifted


def evaluate(model: Model, x, h=None, analytic: bool = True, validate: bool = True) -> StatePoint:
    """Evaluate ``rho`` and its partials at ``x``.

    Raises
    ------
    OutOfDomain
        If ``x`` lies outside the parameter domain.
    InvalidState
        If ``rho(x)`` is not a density matrix within tolerance.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.n_params:
        raise OutOfDomain(f"expected {model.n_params} parameters, got {x.shape[0]}")
    if not np.all(np.isfinite(x)) or not model.contains(x):
        raise OutOfDomain(f"point {x.tolist()} outside domain {list(model.domain)}")
    x = np.array([min(max(xi, lo), hi) for xi, (lo, hi) in zip(x, model.domain)])
    rho = model.state(x)
    if validate:
        rep = validate_density(rho)
        if not rep.ok:
            raise InvalidState("; ".join(rep.failures))
    rho = hermitian_part(rho)
    if analytic and model.derivative_rule is not None and h is None:
        partials = [hermitian_part(np.asarray(p, dtype=complex)) for p in model.derivative_rule(x)]
        return StatePoint(x, rho, partials, False, True, model.name)
    partials, shifted = numeric_partials(model, x, h)
    return StatePoint(x, rho, partials, shifted, False, model.name)


def point_from_matrices(rho, partials, x=None) -> StatePoint:
    """Wrap explicit matrices as a :class:`StatePoint`."""
    rho = np.asarray(rho, dtype=complex)
    partials = [np.asarray(p, dtype=complex) for p in partials]
    x = np.zeros(len(partials)) if x is None else np.asarray(x, dtype=float)
    return StatePoint(x, rho, partials, False, True, "explicit")


def pure_model(name, dim, domain, vector, dvector=None, **kw) -> Model:
    """Build a pure-state model from a normalized state-vector rule."""

    def state(x):
        v = vector(x)
        return np.outer(v, v.conj())

    deriv = None
    if dvector is not None:
        def deriv(x):
            v = vector(x)
            out = []
            for dv in dvector(x):
                t = np.outer(dv, v.conj())
                out.append(t + t.conj().T)
            return out

    return Model(name, dim, domain, state, deriv, vector, dvector, **kw)


def rotate_point(point: StatePoint, rotation) -> StatePoint:
    """Re-express partials in rotated coordinates ``y = R x``."""
    r = np.asarray(rotation, dtype=float)
    # d/dy_i = sum_j (R^{-T})_{ij} d/dx_j; for orthogonal R that is R_{ij}.
    mix = np.linalg.inv(r).T
    parts = [sum(mix[i, j] * point.partials[j] for j in range(point.n_params)) for i in range(point.n_params)]
    return StatePoint(r @ point.x, point.rho, parts, point.boundary, point.analytic, point.model_name)
