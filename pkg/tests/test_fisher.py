import numpy as np
import pytest
from hypothesis import given, strategies as st

from imfree.fisher import (
    SingularQfim,
    cfim,
    compute_sld,
    fisher_report,
    qcrb_efficiency,
)
from imfree.linalg import random_unitary
from imfree.model import evaluate, point_from_matrices
from imfree.povm import Povm
from imfree.zoo import canonical_basis, make_model
from helpers import random_point, random_povm
from oracles import lyapunov_sld, spin_slds


@given(st.integers(2, 5), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_sld_residual_full_rank(d, n, seed):
    pt = random_point(d, n, np.random.default_rng(seed))
    slds = compute_sld(pt)
    for lop, dr in zip(slds.operators, pt.partials):
        assert np.max(np.abs(lop @ pt.rho + pt.rho @ lop - 2 * dr)) <= 1e-8
        assert np.allclose(lop, lop.conj().T)


def test_sld_matches_lyapunov_oracle():
    rng = np.random.default_rng(4)
    for _ in range(10):
        pt = random_point(4, 2, rng)
        for lop, dr in zip(compute_sld(pt).operators, pt.partials):
            assert np.max(np.abs(lop - lyapunov_sld(pt.rho, dr))) <= 1e-8


@given(st.integers(0, 2 ** 32 - 1))
def test_sld_residual_rank_deficient(seed):
    pt = random_point(4, 2, np.random.default_rng(seed), rank=2)
    for lop, dr in zip(compute_sld(pt).operators, pt.partials):
        assert np.max(np.abs(lop @ pt.rho + pt.rho @ lop - 2 * dr)) <= 1e-8


def test_spin_sld_closed_form():
    model = make_model("spin")
    for eta, phi in [(0.3, 0.1), (1.2, 2.0), (2.5, 5.0)]:
        slds = compute_sld(evaluate(model, [eta, phi])).operators
        for got, want in zip(slds, spin_slds(eta, phi)):
            # differ only on the kernel, so compare through the state
            rho = evaluate(model, [eta, phi]).rho
            assert np.allclose(got @ rho, want @ rho, atol=1e-10)


def test_qfim_gauge_invariant():
    pt = evaluate(make_model("spin"), [0.9, 0.4])
    slds = compute_sld(pt)
    base = fisher_report(pt, slds)
    ker = np.eye(2) - slds.support_projector
    shifted = [lop + 3.7 * ker for lop in slds.operators]
    rho = pt.rho
    from imfree.fisher import qfim_from_slds
    q, u = qfim_from_slds(rho, shifted)
    assert np.allclose(q, base.qfim, atol=1e-12)
    assert np.allclose(u, base.uhlmann, atol=1e-12)


def test_spin_fisher_frozen():
    eta = 0.7
    rep = fisher_report(evaluate(make_model("spin"), [eta, 1.0]))
    assert np.allclose(rep.qfim, np.diag([1, np.sin(eta) ** 2]), atol=1e-10)
    assert abs(rep.uhlmann[0, 1] - np.sin(eta) / 2) <= 1e-10
    assert not rep.weakly_commutative and not rep.quasi_classical


def test_noon_is_quasi_classical():
    rep = fisher_report(evaluate(make_model("noon", {"N": 3}), [0.4]))
    assert rep.qfim[0, 0] == pytest.approx(9)
    assert rep.weakly_commutative and rep.quasi_classical


def test_cfim_below_qfim_500_pairs():
    rng = np.random.default_rng(11)
    worst = np.inf
    for i in range(500):
        d = int(rng.integers(2, 5))
        pt = random_point(d, int(rng.integers(1, 4)), rng, rank=None if i % 3 else int(rng.integers(1, d + 1)))
        fq = fisher_report(pt).qfim
        fc = cfim(pt, random_povm(d, int(rng.integers(2, 2 * d + 2)), rng)).matrix
        worst = min(worst, np.linalg.eigvalsh(fq - fc).min())
    assert worst >= -1e-8


def test_cfim_divergent_flag():
    # outcome with p = 0 but nonzero derivative
    rho = np.diag([1.0, 0.0])
    pt = point_from_matrices(rho, [np.diag([-1.0, 1.0])])
    res = cfim(pt, Povm([np.diag([1.0, 0]), np.diag([0, 1.0])], ["a", "b"]))
    assert res.divergent and res.divergent_outcomes == ["b"]


def test_efficiency_bounds_and_singular():
    eff = qcrb_efficiency(np.diag([0.5, 2.0]), np.diag([1.0, 2.0]))
    assert eff.efficiency == pytest.approx(0.5)
    eff = qcrb_efficiency(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
    assert eff.efficiency == pytest.approx(1.0) and eff.null_directions.shape[1] == 1
    with pytest.raises(SingularQfim):
        qcrb_efficiency(np.zeros((2, 2)), np.zeros((2, 2)))


def test_antiparallel_product_basis_not_efficient_for_mixed():
    model = make_model("antiparallel_depolarized", {"delta": 0.3})
    pt = evaluate(model, [1.0, 0.3])
    fc = cfim(pt, canonical_basis("antiparallel_product")).matrix
    fq = fisher_report(pt).qfim
    assert qcrb_efficiency(fc, fq).efficiency < 1 - 1e-3


def test_unitary_covariance_of_qfim():
    rng = np.random.default_rng(2)
    pt = random_point(3, 2, rng)
    u = random_unitary(3, rng)
    moved = point_from_matrices(u @ pt.rho @ u.conj().T, [u @ a @ u.conj().T for a in pt.partials])
    a, b = fisher_report(pt), fisher_report(moved)
    assert np.allclose(a.qfim, b.qfim, atol=1e-10) and np.allclose(a.uhlmann, b.uhlmann, atol=1e-10)


@given(st.integers(2, 5), st.integers(1, 3), st.integers(2, 8), st.integers(0, 2 ** 32 - 1), st.booleans())
def test_cfim_below_qfim_property(d, n, k, seed, full_rank):
    rng = np.random.default_rng(seed)
    pt = random_point(d, n, rng, rank=None if full_rank else 1)
    fc = cfim(pt, random_povm(d, k, rng)).matrix
    assert np.linalg.eigvalsh(fisher_report(pt).qfim - fc).min() >= -1e-8
