"""Measurements: validation, outcome statistics and optimality conditions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import hermitian_defect, hermitian_eig, hermitian_part
from .model import StatePoint

COMPLETENESS_TOL = 1e-9
PSD_TOL = 1e-10
CLAMP_TOL = 1e-12
SUPPORT_EPS = 1e-10
COLLINEAR_TOL = 1e-7
PURE_TOL = 1e-10
ROUNDOFF = 64 * np.finfo(float).eps
SCHEMA_VERSION = 1


class InvalidPovm(ValueError):
    pass


class NotPure(ValueError):
    pass


@dataclass
class Povm:
    elements: list
    labels: list = field(default_factory=list)
    _spectra: list | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.elements = [np.asarray(e, dtype=complex) for e in self.elements]
        if not self.labels:
            self.labels = [str(k) for k in range(len(self.elements))]
        self.labels = [str(lab) for lab in self.labels]
        if len(self.labels) != len(self.elements):
            raise InvalidPovm("one label per element is required")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidPovm("labels must be unique")
        dims = {e.shape for e in self.elements}
        if len(dims) > 1 or any(len(s) != 2 or s[0] != s[1] for s in dims):
            raise InvalidPovm(f"inconsistent element shapes {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def spectra(self) -> list:
        """Cached ``(eigenvalues, eigenvectors)`` of every element."""
        if self._spectra is None:
            spectra = []
            for e in self.elements:
                w, v = np.linalg.eigh(hermitian_part(e))
                w = np.where(np.abs(w) <= ROUNDOFF * max(np.abs(w).max(), 1e-300), 0.0, w)
                spectra.append((w, v))
            self._spectra = spectra
        return self._spectra

    @classmethod
    def from_vectors(cls, vectors, labels=None, weights=None) -> "Povm":
        """Rank-one POVM ``w_k |v_k><v_k|`` from the columns of ``vectors``."""
        v = np.asarray(vectors, dtype=complex)
        w = np.ones(v.shape[1]) if weights is None else np.asarray(weights, dtype=float)
        elems = [w[k] * np.outer(v[:, k], v[:, k].conj()) for k in range(v.shape[1])]
        return cls(elems, list(labels) if labels is not None else [])

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "dim": self.dim,
            "elements": [
                {"label": lab, "entries": [[float(z.real), float(z.imag)] for z in e.reshape(-1)]}
                for lab, e in zip(self.labels, self.elements)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Povm":
        d = int(data["dim"])
        elems, labels = [], []
        for item in data["elements"]:
            ent = np.asarray(item["entries"], dtype=float)
            if ent.shape != (d * d, 2):
                raise InvalidPovm(f"element {item.get('label')!r}: expected {d * d} [re, im] pairs")
            elems.append((ent[:, 0] + 1j * ent[:, 1]).reshape(d, d))
            labels.append(item["label"])
        return cls(elems, labels)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Povm":
        return cls.from_dict(json.loads(text))


@dataclass
class PovmReport:
    completeness_defect: float
    min_eigenvalue: float
    hermiticity_defect: float
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_povm(povm: Povm, tol: float = COMPLETENESS_TOL, psd_tol: float = PSD_TOL) -> PovmReport:
    total = sum(povm.elements)
    comp = float(np.max(np.abs(total - np.eye(povm.dim))))
    herm = max(hermitian_defect(e) for e in povm.elements)
    lam = min(float(np.linalg.eigvalsh(hermitian_part(e)).min()) for e in povm.elements)
    failures = []
    if comp > tol:
        failures.append(f"elements sum to identity only within {comp:.3e}")
    if herm > psd_tol:
        failures.append(f"Hermiticity defect {herm:.3e}")
    if lam < -psd_tol:
        failures.append(f"element eigenvalue {lam:.3e} below zero")
    return PovmReport(comp, lam, herm, failures)


@dataclass
class OutcomeDistribution:
    labels: list
    probabilities: np.ndarray
    gradients: np.ndarray  # shape (n_outcomes, n_params)


def outcome_distribution(point: StatePoint, povm: Povm) -> OutcomeDistribution:
    """Born probabilities and their parameter gradients."""
    if povm.dim != point.dim:
        raise InvalidPovm(f"POVM dimension {povm.dim} does not match state dimension {point.dim}")
    # Tr[E rho] as a double sum over both spectra: the terms are nonnegative
    # up to roundoff, so small probabilities keep full relative precision.
    lam, u = np.linalg.eigh(hermitian_part(point.rho))
    lam = np.where(np.abs(lam) <= ROUNDOFF * lam.max(), 0.0, lam)
    probs = np.array([w @ (np.abs(v.conj().T @ u) ** 2) @ lam for w, v in povm.spectra()])
    probs = np.where((probs < 0) & (probs >= -CLAMP_TOL), 0.0, probs)
    # vdot(a^dagger, b) = Tr[a b] for square matrices.
    grads = np.array(
        [[np.vdot(e.conj().T, d).real for d in point.partials] for e in povm.elements]
    ).reshape(len(povm), point.n_params)
    return OutcomeDistribution(list(povm.labels), probs, grads)


def probabilities(rho: np.ndarray, povm: Povm) -> np.ndarray:
    p = np.array([np.vdot(e.conj().T, rho).real for e in povm.elements])
    return np.where((p < 0) & (p >= -CLAMP_TOL), 0.0, p)


@dataclass
class ElementVerdict:
    label: str
    branch: str  # "support" when <psi|E|psi> > eps, else "null"
    passed: bool
    defect: float
    xi: np.ndarray | None = None
    eta: np.ndarray | None = None


@dataclass
class YangVerdict:
    passed: bool
    elements: list

    def failures(self) -> list:
        return [e.label for e in self.elements if not e.passed]


def _real_multiple(ref: np.ndarray, vec: np.ndarray) -> tuple[float, float]:
    """Best real ``c`` with ``vec ~ c ref`` and the relative residual."""
    nr = float(np.vdot(ref, ref).real)
    c = float(np.vdot(ref, vec).real / nr)
    scale = max(np.linalg.norm(ref), np.linalg.norm(vec))
    return c, float(np.linalg.norm(vec - c * ref) / scale)


def pure_vector(rho: np.ndarray, tol: float = PURE_TOL) -> np.ndarray:
    eig = hermitian_eig(rho)
    lam = eig.values
    if len(lam) > 1 and lam[-2] > tol * max(lam[-1], 1e-300):
        raise NotPure(f"second eigenvalue {lam[-2]:.3e} exceeds the purity tolerance")
    return eig.vectors[:, -1]


def yang_optimality_check(point: StatePoint, slds, povm: Povm, eps: float = SUPPORT_EPS,
                          tol: float = COLLINEAR_TOL) -> YangVerdict:
    """Per-element test of the saturation conditions for pure states.

    An element with ``<psi|E|psi> > eps`` passes when every ``E L_i psi`` is
    a real multiple of ``E psi``.  Otherwise it passes when the vectors
    ``E L_i psi`` are pairwise real-proportional.  Vectors below a small
    absolute threshold count as zero.

    Raises
    ------
    NotPure
        If ``rho`` has rank greater than one.
    """
    if povm.dim != point.dim:
        raise InvalidPovm(f"POVM dimension {povm.dim} does not match state dimension {point.dim}")
    psi = pure_vector(point.rho)
    ops = slds.operators if hasattr(slds, "operators") else list(slds)
    lnorm = max((np.linalg.norm(op, 2) for op in ops), default=1.0)
    verdicts = []
    for lab, e in zip(povm.labels, povm.elements):
        zero = 1e-9 * (1.0 + lnorm) * max(np.linalg.norm(e, 2), 1e-300)
        v0 = e @ psi
        vs = [e @ (op @ psi) for op in ops]
        weight = float(np.vdot(psi, v0).real)
        if weight > eps:
            xi = np.zeros(len(vs))
            worst = 0.0
            for i, v in enumerate(vs):
                if np.linalg.norm(v) <= zero:
                    continue
                xi[i], res = _real_multiple(v0, v)
                worst = max(worst, res)
            verdicts.append(ElementVerdict(lab, "support", worst <= tol, worst, xi=xi))
            continue
        norms = np.array([np.linalg.norm(v) for v in vs])
        n = len(vs)
        eta = np.full((n, n), np.nan)
        if n == 0 or norms.max() <= zero:
            verdicts.append(ElementVerdict(lab, "null", True, 0.0, eta=eta))
            continue
        ref = vs[int(np.argmax(norms))]
        coef = np.zeros(n)
        worst = 0.0
        for i, v in enumerate(vs):
            if norms[i] <= zero:
                continue
            coef[i], res = _real_multiple(ref, v)
            worst = max(worst, res)
        with np.errstate(divide="ignore", invalid="ignore"):
            eta = np.where(coef[None, :] != 0, coef[:, None] / coef[None, :], np.inf)
        verdicts.append(ElementVerdict(lab, "null", worst <= tol, worst, eta=eta))
    return YangVerdict(all(v.passed for v in verdicts), verdicts)
