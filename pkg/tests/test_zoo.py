import numpy as np
import pytest

from imfree.fisher import fisher_report
from imfree.model import evaluate
from imfree.povm import validate_povm
from imfree.zoo import (
    BASES,
    ZOO,
    BadParams,
    NoKnownGas,
    UnknownName,
    canonical_basis,
    canonical_gas,
    make_model,
)

BASIS_PARAMS = {"magnetometry_bipartite": {"N": 4, "axis": "Y"}, "magnetometry_pauli": {"N": 2},
                "eqs_product": {"inner_dim": 2}, "computational": {"dim": 3}}


@pytest.mark.parametrize("name", BASES)
def test_bases_are_complete(name):
    assert validate_povm(canonical_basis(name, **BASIS_PARAMS.get(name, {})), tol=1e-12).ok


@pytest.mark.parametrize("basis,model,mparams,bparams", [
    ("gisin", "antiparallel", {}, {}),
    ("antiparallel_product", "antiparallel", {}, {}),
    ("bell", "antiparallel", {}, {}),
    ("noon_pm", "noon", {}, {}),
    ("magnetometry_bipartite", "magnetometry", {"N": 2}, {"N": 2, "axis": "X"}),
    ("magnetometry_bipartite", "magnetometry", {"N": 4}, {"N": 4, "axis": "Z"}),
    ("magnetometry_pauli", "magnetometry", {"N": 2}, {"N": 2}),
    ("eqs_product", "eqs", {"inner": "spin"}, {"inner_dim": 2}),
])
def test_bases_fixed_by_model_symmetry(basis, model, mparams, bparams):
    theta = canonical_gas(model, mparams)
    for e in canonical_basis(basis, **bparams).elements:
        assert np.max(np.abs(theta.adjoint(e) - e)) <= 1e-12


@pytest.mark.parametrize("name,params", [
    ("spin", {}), ("off_equator_spin", {}), ("superdense", {"r": 0.3}), ("magnetometry", {"N": 3}),
    ("magnetometry", {"N": 2, "delta_y": np.pi / 2, "delta_z": np.pi / 2}), ("qutrit_las", {}),
])
def test_no_known_gas(name, params):
    with pytest.raises(NoKnownGas):
        canonical_gas(name, params)


def test_unknown_names_and_bad_params():
    with pytest.raises(UnknownName):
        make_model("nope")
    with pytest.raises(UnknownName):
        canonical_basis("nope")
    with pytest.raises(BadParams):
        make_model("spin", {"bogus": 1})
    with pytest.raises(BadParams):
        make_model("disc", {"f1": [0.9, 0.5], "f2": [0.9, 0.5]})
    with pytest.raises(BadParams):
        canonical_basis("magnetometry_bipartite", N=3)


def test_every_model_is_a_valid_state_family():
    rng = np.random.default_rng(0)
    for name in ZOO:
        if name == "affine":
            model = make_model(name, {"rho0": np.eye(2) / 2, "generators": [np.diag([1.0, -1.0])]})
        else:
            model = make_model(name)
        lo, hi = np.array(model.domain).T
        pt = evaluate(model, lo + rng.random(model.n_params) * (hi - lo))
        assert abs(np.trace(pt.rho) - 1) <= 1e-10
        for d in pt.partials:
            assert abs(np.trace(d)) <= 1e-10


def test_noon_qfim_heisenberg():
    for n in range(1, 6):
        rep = fisher_report(evaluate(make_model("noon", {"N": n}), [0.3]))
        assert rep.qfim[0, 0] == pytest.approx(n ** 2)


def test_eqs_adds_connection_term():
    # ancilla embedding turns Re<dv|dv> - A A^T into Re<dv|dv>
    for eta, phi in [(0.4, 1.0), (2.0, 3.0)]:
        q = fisher_report(evaluate(make_model("eqs", {"inner": "spin"}), [eta, phi])).qfim
        assert np.allclose(q, np.diag([1.0, np.sin(eta) ** 2 + 4 * np.sin(eta / 2) ** 4]), atol=1e-10)


def test_superdense_qfim_at_half():
    rep = fisher_report(evaluate(make_model("superdense"), [0.2, -0.4, 0.7]))
    assert rep.weakly_commutative
    assert np.linalg.matrix_rank(rep.qfim, tol=1e-8) == 3


def test_restricted_domain_keeps_model():
    model = make_model("noon", {"N": 3}, domain=[[0.0, np.pi / 3]])
    assert model.domain == ((0.0, np.pi / 3),) and model.periodic == (False,)
