import numpy as np
import pytest

from twinpeaks import reduce as red
from twinpeaks.bubble import Bubble, bubble_value
from twinpeaks.peaks import symmetric_model
from twinpeaks.sphere import (
    SpherePoint,
    conformal_factor,
    project,
    project_many,
    random_sphere_points,
    transfer_solution,
    unproject,
    unproject_many,
)


def test_south_pole_projects_to_origin():
    np.testing.assert_array_equal(project(SpherePoint.south(6)), np.zeros(6))


def test_equator_point_fixed():
    e1 = SpherePoint((1.0,) + (0.0,) * 6)
    np.testing.assert_array_equal(project(e1), np.eye(6)[0])


def test_north_pole_rejected():
    with pytest.raises(ValueError, match="north pole"):
        project(SpherePoint.north(6))
    with pytest.raises(ValueError):
        transfer_solution(lambda y: 1.0, SpherePoint.north(6))


def test_off_sphere_point_rejected():
    with pytest.raises(ValueError):
        SpherePoint((1.0, 1.0, 0.0))


def test_round_trips():
    rng = np.random.default_rng(0)
    X = random_sphere_points(6, 1000, rng, cap=1 - 1e-6)
    np.testing.assert_allclose(unproject_many(project_many(X)), X, atol=1e-12)
    Y = rng.normal(size=(1000, 6)) * 10 ** rng.uniform(-3, 2, size=(1000, 1))
    np.testing.assert_allclose(project_many(unproject_many(Y)), Y, rtol=1e-12, atol=1e-12)
    x = SpherePoint.normalized(rng.normal(size=7))
    np.testing.assert_allclose(unproject(project(x)).coords, x.coords, atol=1e-12)


def test_unproject_origin_and_far_field():
    assert unproject(np.zeros(5)).coords == (0.0,) * 5 + (-1.0,)
    far = unproject(np.full(5, 1e8))
    assert far.coords[-1] == pytest.approx(1.0, abs=1e-12)


def test_conformal_factor_matches_pullback_metric():
    # |d unproject . v|^2 = factor * |v|^2 for any tangent vector v
    rng = np.random.default_rng(1)
    for _ in range(20):
        y = rng.normal(size=6)
        v = rng.normal(size=6)
        h = 1e-6
        dx = (unproject_many(y + h * v) - unproject_many(y - h * v)) / (2 * h)
        assert np.dot(dx, dx) == pytest.approx(conformal_factor(y) * np.dot(v, v), rel=1e-8)


def test_transfer_of_round_profile_is_one():
    n = 6
    rng = np.random.default_rng(2)
    v = lambda y: (2 / (1 + np.dot(y, y))) ** ((n - 2) / 2)
    for x in random_sphere_points(n, 200, rng, cap=0.999):
        assert transfer_solution(v, SpherePoint(tuple(x))) == pytest.approx(1.0, rel=1e-12)


def test_transfer_of_zero():
    x = SpherePoint.normalized(np.arange(1.0, 8.0))
    assert transfer_solution(lambda y: 0.0, x) == 0.0


def test_transfer_of_constructed_two_bubble_profile():
    model = symmetric_model(n=6, ell=2, gamma=0.05)
    k = red.compute_constants(6, 2)
    p = red.solve_tau(model, k)
    b1 = Bubble(6, p.lambda1, p.xi1)
    b2 = Bubble(6, p.lambda2, p.xi2)
    v = lambda y: float(bubble_value(b1, y) + bubble_value(b2, y))
    e = (6 - 2) / 2
    bound = p.lambda1**-e + p.lambda2**-e
    rng = np.random.default_rng(3)
    U = np.array([transfer_solution(v, SpherePoint(tuple(x))) for x in random_sphere_points(6, 1000, rng, cap=0.99)])
    assert np.all(np.isfinite(U)) and np.all(U > 0) and np.all(U <= bound)
