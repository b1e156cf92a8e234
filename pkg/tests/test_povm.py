import numpy as np
import pytest

from imfree.fisher import cfim, compute_sld, fisher_report, qcrb_efficiency
from imfree.linalg import random_unitary
from imfree.model import evaluate, point_from_matrices
from imfree.povm import (
    InvalidPovm,
    NotPure,
    Povm,
    outcome_distribution,
    validate_povm,
    yang_optimality_check,
)
from imfree.symmetry import invariant_povm
from imfree.zoo import canonical_basis, canonical_gas, make_model


def test_validate_projective_and_incomplete():
    assert validate_povm(canonical_basis("bell")).ok
    rep = validate_povm(Povm([np.diag([1.0, 0.0])]))
    assert not rep.ok
    rep = validate_povm(Povm([np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])]))
    assert not rep.ok


def test_povm_rejects_bad_shapes_and_labels():
    with pytest.raises(InvalidPovm):
        Povm([np.eye(2), np.eye(3)])
    with pytest.raises(InvalidPovm):
        Povm([np.eye(2) / 2, np.eye(2) / 2], ["a", "a"])


def test_json_round_trip_exact():
    povm = invariant_povm(canonical_gas("antiparallel"), rotations=3, seed=7)
    back = Povm.from_json(povm.to_json())
    assert back.labels == povm.labels
    for a, b in zip(povm.elements, back.elements):
        assert np.array_equal(a, b)


def test_dimension_mismatch():
    pt = evaluate(make_model("spin"), [1.0, 1.0])
    with pytest.raises(InvalidPovm):
        outcome_distribution(pt, canonical_basis("bell"))
    with pytest.raises(InvalidPovm):
        yang_optimality_check(pt, compute_sld(pt), canonical_basis("gisin"))


def test_tiny_negative_probability_clamped():
    rho = np.diag([1.0, 0.0]).astype(complex)
    povm = Povm([np.diag([1.0, -5e-13]), np.diag([0.0, 1.0 + 5e-13])])
    dist = outcome_distribution(point_from_matrices(rho, [np.zeros((2, 2))]), povm)
    assert np.all(dist.probabilities >= 0)


def test_yang_rejects_mixed():
    pt = evaluate(make_model("antiparallel_depolarized"), [1.0, 0.5])
    with pytest.raises(NotPure):
        yang_optimality_check(pt, compute_sld(pt), canonical_basis("bell"))


def test_yang_null_branch():
    # at phi = 0 the "plus" outcome of the product basis has zero probability
    pt = evaluate(make_model("antiparallel"), [1.0, 0.0])
    verdict = yang_optimality_check(pt, compute_sld(pt), canonical_basis("antiparallel_product"))
    branches = {e.label: e.branch for e in verdict.elements}
    assert branches["plus"] == "null" and branches["01"] == "support"
    assert verdict.passed


def test_yang_fails_for_spin():
    pt = evaluate(make_model("spin"), [1.0, 0.5])
    verdict = yang_optimality_check(pt, compute_sld(pt), canonical_basis("computational", dim=2))
    assert not verdict.passed and verdict.failures()


def _pure_cases():
    rng = np.random.default_rng(3)
    cases = []
    for name, params in [("noon", {"N": 3}), ("antiparallel", {}), ("superdense", {}),
                         ("eqs", {"inner": "spin"}), ("spin", {})]:
        model = make_model(name, params)
        try:
            theta = canonical_gas(name, params)
        except Exception:
            theta = None
        lo, hi = np.array(model.domain).T
        for _ in range(6):
            x = lo + (0.1 + 0.8 * rng.random(model.n_params)) * (hi - lo)
            pt = evaluate(model, x)
            if theta is not None:
                cases.append((name, pt, invariant_povm(theta, 2, seed=int(rng.integers(1 << 30)))))
            u = random_unitary(model.dim, rng)
            cases.append((name, pt, Povm.from_vectors(u)))
    return cases


def test_yang_agrees_with_efficiency():
    saw = set()
    for name, pt, povm in _pure_cases():
        slds = compute_sld(pt)
        eff = qcrb_efficiency(cfim(pt, povm).matrix, fisher_report(pt, slds).qfim).efficiency
        verdict = yang_optimality_check(pt, slds, povm)
        assert verdict.passed == (eff >= 1 - 1e-6), (name, eff)
        saw.add(verdict.passed)
    assert saw == {True, False}


def test_small_probabilities_keep_relative_precision():
    # an outcome nearly orthogonal to a pure state
    eps = 1e-7
    psi = np.array([np.cos(eps), np.sin(eps)])
    rho = np.outer(psi, psi).astype(complex)
    povm = Povm.from_vectors(np.array([[0.0, 1.0], [1.0, 0.0]]))
    p = outcome_distribution(point_from_matrices(rho, [np.zeros((2, 2))]), povm).probabilities
    assert p[0] == pytest.approx(np.sin(eps) ** 2, rel=1e-9)
