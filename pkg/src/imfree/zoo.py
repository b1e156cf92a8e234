"""Catalogue of parametric models, their known global symmetries and bases."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm, expm_frechet

from .linalg import PAULI_I, PAULI_X, PAULI_Y, PAULIS, kron, random_unitary, swap
from .model import Model, pure_model
from .povm import Povm
from .symmetry import Antiunitary

TWO_PI = 2.0 * np.pi


class UnknownName(KeyError):
    pass


class NoKnownGas(ValueError):
    pass


class BadParams(ValueError):
    pass


# --- single spin -----------------------------------------------------------

def spin_ket(eta, phi):
    return np.array([np.cos(eta / 2), np.exp(1j * phi) * np.sin(eta / 2)])


def spin_ket_partials(eta, phi):
    d_eta = np.array([-0.5 * np.sin(eta / 2), 0.5 * np.exp(1j * phi) * np.cos(eta / 2)])
    d_phi = np.array([0.0, 1j * np.exp(1j * phi) * np.sin(eta / 2)])
    return d_eta, d_phi


def bloch_state(n) -> np.ndarray:
    return 0.5 * (PAULI_I + sum(c * s for c, s in zip(n, PAULIS)))


def spin_flip(v):
    """Spin flip ``sigma_Y conj(v)``."""
    return PAULI_Y @ np.conj(v)


SPIN_FLIP = Antiunitary(PAULI_Y)


def _spin() -> Model:
    return pure_model(
        "spin", 2, ((0.0, np.pi), (0.0, TWO_PI)),
        lambda x: spin_ket(*x), lambda x: spin_ket_partials(*x),
        param_names=("eta", "phi"), periodic=(False, True),
    )


def _off_equator_spin(c=np.pi / 3) -> Model:
    c = float(c)
    return pure_model(
        "off_equator_spin", 2, ((0.0, TWO_PI),),
        lambda x: spin_ket(c, x[0]), lambda x: [spin_ket_partials(c, x[0])[1]],
        param_names=("phi",), periodic=(True,), params={"c": c},
    )


def _noon(N=2) -> Model:
    N = int(N)
    if N < 1:
        raise BadParams("N must be a positive integer")
    s = 1 / np.sqrt(2)
    return pure_model(
        "noon", 2, ((0.0, TWO_PI),),
        lambda x: s * np.array([1.0, np.exp(-1j * N * x[0])]),
        lambda x: [s * np.array([0.0, -1j * N * np.exp(-1j * N * x[0])])],
        param_names=("phi",), periodic=(True,), params={"N": N},
    )


# --- SU(2) encodings ---------------------------------------------------------

def _su2(x):
    gen = -1j * sum(c * s for c, s in zip(x, PAULIS))
    u = expm(gen)
    du = [expm_frechet(gen, -1j * s, compute_expm=False) for s in PAULIS]
    return u, du


def _superdense(r=0.5) -> Model:
    r = float(r)
    if not 0 <= r <= 1:
        raise BadParams("r must lie in [0, 1]")
    psi0 = np.array([np.sqrt(r), 0, 0, np.sqrt(1 - r)], dtype=complex)

    def vec(x):
        u, _ = _su2(x)
        return kron(u, PAULI_I) @ psi0

    def dvec(x):
        _, du = _su2(x)
        return [kron(d, PAULI_I) @ psi0 for d in du]

    return pure_model("superdense", 4, ((-1.5, 1.5),) * 3, vec, dvec,
                      param_names=("x", "y", "z"), params={"r": r})


PSI_PM = {
    "X": (np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)),
    "Y": (np.array([1, 1j]) / np.sqrt(2), np.array([1j, 1]) / np.sqrt(2)),
    "Z": (np.array([1, 0]), np.array([0, 1])),
}


def magnetometry_initial_state(N, delta_y, delta_z) -> np.ndarray:
    def ghz(k):
        plus, minus = PSI_PM[k]
        return (kron(*[plus[:, None]] * N) + kron(*[minus[:, None]] * N)).ravel() / np.sqrt(2)

    psi = ghz("X") + np.exp(1j * delta_y) * ghz("Y") + np.exp(1j * delta_z) * ghz("Z")
    return psi / np.linalg.norm(psi)


def _apply_local(ops, psi, N):
    t = psi.reshape((2,) * N)
    for axis, op in enumerate(ops):
        t = np.moveaxis(np.tensordot(op, t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def _magnetometry(N=2, delta_y=0.0, delta_z=0.0) -> Model:
    N = int(N)
    if not 1 <= N <= 8:
        raise BadParams("N must be between 1 and 8")
    psi0 = magnetometry_initial_state(N, float(delta_y), float(delta_z))

    def vec(x):
        u, _ = _su2(x)
        return _apply_local([u] * N, psi0, N)

    def dvec(x):
        u, du = _su2(x)
        out = []
        for d in du:
            acc = np.zeros(2 ** N, dtype=complex)
            for site in range(N):
                ops = [u] * N
                ops[site] = d
                acc += _apply_local(ops, psi0, N)
            out.append(acc)
        return out

    return pure_model("magnetometry", 2 ** N, ((-1.5, 1.5),) * 3, vec, dvec,
                      param_names=("phi_x", "phi_y", "phi_z"),
                      params={"N": N, "delta_y": float(delta_y), "delta_z": float(delta_z)})


# --- antiparallel spins ------------------------------------------------------

def _antiparallel() -> Model:
    def vec(x):
        k = spin_ket(*x)
        return np.kron(k, spin_flip(k))

    def dvec(x):
        k = spin_ket(*x)
        return [np.kron(d, spin_flip(k)) + np.kron(k, spin_flip(d)) for d in spin_ket_partials(*x)]

    return pure_model("antiparallel", 4, ((0.0, np.pi), (0.0, TWO_PI)), vec, dvec,
                      param_names=("eta", "phi"), periodic=(False, True))


def depolarize(model: Model, delta: float, name: str | None = None) -> Model:
    """``(1 - delta) rho + delta I / d``."""
    delta = float(delta)
    if not 0 <= delta <= 1:
        raise BadParams("delta must lie in [0, 1]")
    d = model.dim
    mix = np.eye(d) / d

    def state(x):
        return (1 - delta) * model.state_rule(x) + delta * mix

    deriv = None
    if model.derivative_rule is not None:
        def deriv(x):
            return [(1 - delta) * p for p in model.derivative_rule(x)]

    params = dict(model.params, delta=delta)
    return Model(name or f"{model.name}_depolarized", d, model.domain, state, deriv,
                 param_names=model.param_names, periodic=model.periodic, params=params)


def _antiparallel_depolarized(delta=0.1) -> Model:
    return depolarize(_antiparallel(), delta, "antiparallel_depolarized")


# --- qubit inside a disc ------------------------------------------------------

def _unit(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or np.linalg.norm(v) == 0:
        raise BadParams(f"{name} must be a nonzero 3-vector")
    return v / np.linalg.norm(v)


def _disc(n1=(1.0, 0.0, 0.0), n2=(0.6, 0.0, 0.8), f1=(0.1, 0.5, 0.1), f2=(-0.2, 0.1, 0.4),
          bound=0.5) -> Model:
    n1, n2 = _unit(n1, "n1"), _unit(n2, "n2")
    c1, c2 = np.asarray(f1, dtype=float), np.asarray(f2, dtype=float)
    if c1.shape != c2.shape or c1.ndim != 1 or len(c1) < 2:
        raise BadParams("f1 and f2 must be affine coefficient lists [c0, c1, ...] of equal length")
    n = len(c1) - 1
    domain = ((-float(bound), float(bound)),) * n
    corners = np.array(np.meshgrid(*[[lo, hi] for lo, hi in domain])).reshape(n, -1).T
    for x in corners:
        r = np.linalg.norm((c1[0] + c1[1:] @ x) * n1 + (c2[0] + c2[1:] @ x) * n2)
        if r > 1:
            raise BadParams(f"Bloch vector leaves the ball (|n|={r:.3f}) on the domain")

    def bloch(x):
        return (c1[0] + c1[1:] @ x) * n1 + (c2[0] + c2[1:] @ x) * n2

    return Model(
        "disc", 2, domain, lambda x: bloch_state(bloch(x)),
        lambda x: [0.5 * sum(c * s for c, s in zip(c1[i + 1] * n1 + c2[i + 1] * n2, PAULIS)) for i in range(n)],
        params={"n1": n1.tolist(), "n2": n2.tolist(), "f1": c1.tolist(), "f2": c2.tolist()},
    )


# --- embeddings ----------------------------------------------------------------

def _eqs(inner=None) -> Model:
    base = make_model(**_spec(inner)) if not isinstance(inner, Model) else inner
    if base.vector_rule is None:
        raise BadParams("eqs needs a pure inner model with a state-vector rule")
    e0, e1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    s = 1 / np.sqrt(2)

    def vec(x):
        v = base.vector_rule(x)
        return s * (np.kron(v, e0) + np.kron(np.conj(v), e1))

    dvec = None
    if base.vector_derivative_rule is not None:
        def dvec(x):
            return [s * (np.kron(d, e0) + np.kron(np.conj(d), e1)) for d in base.vector_derivative_rule(x)]

    return pure_model("eqs", 2 * base.dim, base.domain, vec, dvec, param_names=base.param_names,
                      periodic=base.periodic, params={"inner": base.name, "inner_dim": base.dim})


def _antiparallel_of(inner=None) -> Model:
    base = make_model(**_spec(inner)) if not isinstance(inner, Model) else inner

    def state(x):
        r = base.state_rule(x)
        return np.kron(r, np.conj(r))

    deriv = None
    if base.derivative_rule is not None:
        def deriv(x):
            r = base.state_rule(x)
            return [np.kron(d, np.conj(r)) + np.kron(r, np.conj(d)) for d in base.derivative_rule(x)]

    return Model("antiparallel_of", base.dim ** 2, base.domain, state, deriv, param_names=base.param_names,
                 periodic=base.periodic, params={"inner": base.name, "inner_dim": base.dim})


# --- counterexamples and generic families -------------------------------------

def _qutrit_las(a=0.5, b=0.3, c=0.2, w12=0.3, w13=0.5, w23=1.4) -> Model:
    diag = np.diag([a, b, c]).astype(complex)
    if abs(a + b + c - 1) > 1e-12 or min(a, b, c) <= 0:
        raise BadParams("a, b, c must be positive and sum to 1")
    om = np.zeros((3, 3), dtype=complex)
    for (j, k), w in {(0, 1): w12, (0, 2): w13, (1, 2): w23}.items():
        om[j, k] = np.exp(1j * w)
        om[k, j] = np.exp(-1j * w)
    xmax = min(a, b, c) / 3
    return Model("qutrit_las", 3, ((-xmax, xmax),), lambda x: diag + x[0] * om, lambda x: [om],
                 param_names=("x",), params={"a": a, "b": b, "c": c, "w12": w12, "w13": w13, "w23": w23})


def parse_matrix(m) -> np.ndarray:
    """Accept complex arrays or nested lists whose leaves are numbers or ``[re, im]``."""
    arr = np.asarray(m)
    if np.iscomplexobj(arr):
        return arr.astype(complex)
    arr = arr.astype(float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def _affine(rho0=None, generators=None, domain=None) -> Model:
    if rho0 is None or generators is None:
        raise BadParams("affine needs rho0 and generators")
    r0 = parse_matrix(rho0)
    gens = [parse_matrix(g) for g in generators]
    if domain is None:
        domain = ((-0.1, 0.1),) * len(gens)
    return Model("affine", r0.shape[0], tuple(tuple(d) for d in domain),
                 lambda x: r0 + sum(xi * g for xi, g in zip(x, gens)), lambda x: list(gens),
                 params={"n": len(gens)})


def _skew_phase(spectrum=(1.0, 0.0, -1.0), phase=0.0, seed=None) -> Model:
    lam = np.sort(np.asarray(spectrum, dtype=float))
    if not np.allclose(lam, -lam[::-1], atol=1e-12):
        raise BadParams("spectrum must be symmetric about zero")
    d = len(lam)
    v = np.eye(d, dtype=complex) if seed is None else random_unitary(d, np.random.default_rng(int(seed)))
    psi0 = (v[:, -1] + np.exp(1j * phase) * v[:, 0]) / np.sqrt(2)
    coeff = v.conj().T @ psi0

    def vec(x):
        return v @ (np.exp(-1j * lam * x[0]) * coeff)

    def dvec(x):
        return [v @ (-1j * lam * np.exp(-1j * lam * x[0]) * coeff)]

    return pure_model("skew_phase", d, ((0.0, TWO_PI),), vec, dvec, param_names=("t",),
                      params={"spectrum": lam.tolist(), "phase": float(phase), "seed": seed,
                              "eigenvectors": v})


# --- registry -------------------------------------------------------------------

@dataclass(frozen=True)
class ZooEntry:
    builder: Callable
    summary: str
    params: tuple
    has_gas: str


ZOO = {
    "spin": ZooEntry(_spin, "qubit pure state on the Bloch sphere, (eta, phi)", (), "never"),
    "off_equator_spin": ZooEntry(_off_equator_spin, "spin phase estimation at fixed polar angle c", ("c",),
                                 "only for c = pi/2"),
    "noon": ZooEntry(_noon, "N00N phase model in the span of |N,0>, |0,N>", ("N",), "always"),
    "superdense": ZooEntry(_superdense, "SU(2) on one half of sqrt(r)|00> + sqrt(1-r)|11>", ("r",),
                           "only for r = 1/2"),
    "magnetometry": ZooEntry(_magnetometry, "3D field on N spins prepared in a GHZ superposition",
                             ("N", "delta_y", "delta_z"),
                             "even N with delta_y, delta_z in {0, pi}"),
    "antiparallel": ZooEntry(_antiparallel, "spin and its spin flip, (eta, phi)", (), "always"),
    "antiparallel_depolarized": ZooEntry(_antiparallel_depolarized, "depolarized antiparallel spins",
                                         ("delta",), "always"),
    "disc": ZooEntry(_disc, "qubit with Bloch vector f1(x) n1 + f2(x) n2, affine f",
                     ("n1", "n2", "f1", "f2", "bound"), "always"),
    "eqs": ZooEntry(_eqs, "embedding of a pure model with an ancilla qubit", ("inner",), "always"),
    "qutrit_las": ZooEntry(_qutrit_las, "diag(a, b, c) + x * (phased off-diagonal ones)",
                           ("a", "b", "c", "w12", "w13", "w23"), "when w12 + w23 - w13 is a multiple of pi"),
    "antiparallel_of": ZooEntry(_antiparallel_of, "rho (x) conj(rho) for an inner model", ("inner",), "always"),
    "affine": ZooEntry(_affine, "rho0 + sum_i x_i H_i from explicit matrices", ("rho0", "generators", "domain"),
                       "never (not searched)"),
    "skew_phase": ZooEntry(_skew_phase, "exp(-iHt) on an extremal superposition, symmetric spectrum",
                           ("spectrum", "phase", "seed"), "always"),
}


def _spec(inner) -> dict:
    if inner is None:
        return {"name": "spin"}
    if isinstance(inner, str):
        return {"name": inner}
    return {"name": inner["name"], "params": inner.get("params", {})}


def make_model(name: str, params: dict | None = None, domain=None) -> Model:
    """Instantiate a catalogue model.  ``domain`` optionally restricts the parameter box."""
    if name not in ZOO:
        raise UnknownName(name)
    params = dict(params or {})
    try:
        model = ZOO[name].builder(**params)
    except TypeError as exc:
        raise BadParams(f"{name}: {exc}") from None
    if domain is not None:
        if len(domain) != model.n_params:
            raise BadParams(f"{name}: domain needs {model.n_params} intervals")
        model = model.with_domain(domain)
    return model


def _is_multiple(x, period, tol=1e-12) -> bool:
    r = np.mod(x, period)
    return min(r, period - r) <= tol


def canonical_gas(name: str, params: dict | None = None) -> Antiunitary:
    """Known global symmetry of a catalogue model.

    Raises
    ------
    NoKnownGas
        When no symmetry is known for the model or these parameters.
    """
    if name not in ZOO:
        raise UnknownName(name)
    model = make_model(name, params)
    p = model.params
    if name == "off_equator_spin":
        if abs(p["c"] - np.pi / 2) > 1e-12:
            raise NoKnownGas("off-equator spin phase model has no global symmetry unless c = pi/2")
        return Antiunitary(PAULI_X)
    if name == "noon":
        return Antiunitary(PAULI_X)
    if name == "superdense":
        if abs(p["r"] - 0.5) > 1e-12:
            raise NoKnownGas("superdense model is symmetric only for r = 1/2")
        return Antiunitary(kron(PAULI_Y, PAULI_Y))
    if name == "magnetometry":
        # With the fixed single-spin phases every GHZ component picks up the
        # same factor under the N-fold spin flip, so the relative phases must
        # be real for every even N.
        N = p["N"]
        if N % 2:
            raise NoKnownGas("magnetometry needs an even number of spins")
        for key in ("delta_y", "delta_z"):
            if not _is_multiple(p[key], np.pi, 1e-10):
                raise NoKnownGas(f"magnetometry needs {key} in {{0, pi}}")
        return Antiunitary(kron(*[PAULI_Y] * N))
    if name in ("antiparallel", "antiparallel_depolarized"):
        return Antiunitary(swap(2) @ kron(PAULI_Y, PAULI_Y))
    if name == "disc":
        n1, n2 = np.array(p["n1"]), np.array(p["n2"])
        m = np.cross(n1, n2)
        if np.linalg.norm(m) < 1e-12:
            m = np.cross(n1, [1.0, 0, 0]) if abs(n1[0]) < 0.9 else np.cross(n1, [0, 1.0, 0])
        m = m / np.linalg.norm(m)
        return Antiunitary(sum(c * s for c, s in zip(m, PAULIS)) @ PAULI_Y)
    if name == "eqs":
        return Antiunitary(kron(np.eye(p["inner_dim"]), PAULI_X))
    if name == "antiparallel_of":
        return Antiunitary(swap(p["inner_dim"]))
    if name == "qutrit_las":
        if not _is_multiple(p["w12"] + p["w23"] - p["w13"], np.pi, 1e-10):
            raise NoKnownGas("qutrit phases are not consistent around the cycle")
        psi = np.array([0.0, -p["w12"], -p["w13"]])
        return Antiunitary(np.diag(np.exp(2j * psi)))
    if name == "skew_phase":
        v = p["eigenvectors"]
        return Antiunitary(v[:, ::-1] @ v.T)
    raise NoKnownGas(f"no global symmetry known for {name}")


# --- canonical bases --------------------------------------------------------------

def tetrahedron() -> np.ndarray:
    """Unit vectors: three at polar cosine -1/3 (azimuths 0, 2pi/3, 4pi/3) and the north pole."""
    s = 2 * np.sqrt(2) / 3
    rows = [[s * np.cos(k * TWO_PI / 3), s * np.sin(k * TWO_PI / 3), -1 / 3] for k in range(3)]
    return np.array(rows + [[0.0, 0.0, 1.0]])


def _ket_from_bloch(n):
    eta = np.arccos(np.clip(n[2], -1, 1))
    return spin_ket(eta, np.arctan2(n[1], n[0]))


def gisin_basis() -> np.ndarray:
    a = (np.sqrt(3) + 1) / (2 * np.sqrt(2))
    b = (np.sqrt(3) - 1) / (2 * np.sqrt(2))
    cols = []
    for n in tetrahedron():
        k = _ket_from_bloch(n)
        cols.append(a * np.kron(k, spin_flip(k)) + b * np.kron(spin_flip(k), k))
    return np.column_stack(cols)


def antiparallel_product_basis() -> np.ndarray:
    s = 1 / np.sqrt(2)
    return np.array([
        [0, 0, s, -1j * s],
        [1j, 0, 0, 0],
        [0, 1j, 0, 0],
        [0, 0, s, 1j * s],
    ], dtype=complex)


def bell_basis() -> np.ndarray:
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.column_stack([psi] + [kron(1j * s, PAULI_I) @ psi for s in PAULIS])


def noon_pm_basis() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def bipartite_basis(axis: str = "X") -> np.ndarray:
    plus, minus = PSI_PM[axis.upper()]
    pp, mm = np.kron(plus, plus), np.kron(minus, minus)
    pm, mp = np.kron(plus, minus), np.kron(minus, plus)
    c = -np.sqrt(2) * 1j
    return np.column_stack([(mm + pp) / c, (mm - pp) / c, (mp + pm) / np.sqrt(2), (mp - pm) / np.sqrt(2)])


def canonical_basis(name: str, **params) -> Povm:
    """Named measurement from the catalogue.

    Raises
    ------
    UnknownName
        For names not in the catalogue.
    """
    if name == "gisin":
        return Povm.from_vectors(gisin_basis(), ["1", "2", "3", "4"])
    if name == "antiparallel_product":
        return Povm.from_vectors(antiparallel_product_basis(), ["01", "10", "plus", "minus"])
    if name == "bell":
        return Povm.from_vectors(bell_basis(), ["psi", "x", "y", "z"])
    if name == "noon_pm":
        return Povm.from_vectors(noon_pm_basis(), ["plus", "minus"])
    if name == "magnetometry_bipartite":
        N = int(params.get("N", 2))
        if N % 2:
            raise BadParams("bipartite basis needs an even number of spins")
        pair = bipartite_basis(params.get("axis", "X"))
        full = kron(*[pair] * (N // 2))
        labels = ["".join(str(d) for d in np.unravel_index(k, (4,) * (N // 2))) for k in range(4 ** (N // 2))]
        return Povm.from_vectors(full, labels)
    if name == "magnetometry_pauli":
        N = int(params.get("N", 2))
        d = 2 ** N
        elems, labels = [], []
        for axis, s in zip("XYZ", PAULIS):
            t = kron(*[s] * N)
            for sign, tag in ((1, "+"), (-1, "-")):
                elems.append((np.eye(d) + sign * t) / 6)
                labels.append(axis + tag)
        return Povm(elems, labels)
    if name == "eqs_product":
        dim = int(params.get("inner_dim", 2))
        anc = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        anc[:, 1] /= 1j
        return Povm.from_vectors(np.kron(np.eye(dim), anc))
    if name == "computational":
        dim = int(params.get("dim", 2))
        return Povm.from_vectors(np.eye(dim))
    raise UnknownName(name)


BASES = ("gisin", "antiparallel_product", "bell", "noon_pm", "magnetometry_bipartite",
         "magnetometry_pauli", "eqs_product", "computational")
