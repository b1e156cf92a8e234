import numpy as np
import pytest

from imfree.model import (
    InvalidState,
    Model,
    OutOfDomain,
    evaluate,
    numeric_partials,
    point_from_matrices,
    rotate_point,
    validate_density,
)
from imfree.zoo import make_model


def test_numeric_partials_match_analytic():
    for name in ("spin", "noon", "superdense", "antiparallel", "magnetometry"):
        model = make_model(name)
        rng = np.random.default_rng(1)
        lo, hi = np.array(model.domain).T
        x = lo + (0.2 + 0.6 * rng.random(model.n_params)) * (hi - lo)
        exact = evaluate(model, x).partials
        approx, _ = numeric_partials(model, x)
        for a, b in zip(exact, approx):
            assert np.max(np.abs(a - b)) <= 1e-8, name


def test_stencil_is_fourth_order():
    model = make_model("spin")
    x = np.array([1.1, 0.4])
    exact = evaluate(model, x).partials
    errs = []
    for h in (0.05, 0.025):
        approx, _ = numeric_partials(model, x, h=h)
        errs.append(max(np.max(np.abs(a - b)) for a, b in zip(exact, approx)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.15)


def test_one_sided_stencil_near_edge():
    model = make_model("superdense")
    x = np.array([1.5 - 1e-6, 0.2, -0.3])
    pt = evaluate(model, x, analytic=False)
    assert pt.boundary
    for a, b in zip(pt.partials, evaluate(model, x).partials):
        assert np.max(np.abs(a - b)) <= 1e-7


def test_out_of_domain():
    with pytest.raises(OutOfDomain):
        evaluate(make_model("spin"), [4.0, 0.0])


def test_invalid_state_detected():
    bad = Model("bad", 2, ((0.0, 1.0),), lambda x: np.diag([1.0 + x[0], -x[0]]))
    with pytest.raises(InvalidState):
        evaluate(bad, [0.5])
    assert not validate_density(np.diag([0.5, 0.6])).ok
    assert validate_density(np.eye(2) / 2).ok


def test_rotate_point_orthogonal():
    pt = evaluate(make_model("spin"), [0.8, 0.3])
    c, s = np.cos(0.4), np.sin(0.4)
    r = np.array([[c, -s], [s, c]])
    rot = rotate_point(pt, r)
    # partials transform like a covector: d/dy = R d/dx for orthogonal R
    assert np.allclose(rot.partials[0], c * pt.partials[0] - s * pt.partials[1])
    assert np.allclose(rot.x, r @ pt.x)


def test_point_from_matrices():
    pt = point_from_matrices(np.eye(2) / 2, [np.diag([1.0, -1.0])])
    assert pt.n_params == 1 and pt.dim == 2
