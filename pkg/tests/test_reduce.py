import dataclasses
import math

import numpy as np
import pytest

from twinpeaks import reduce as red
from twinpeaks.peaks import TwinPeakModel, random_model, symmetric_model
from twinpeaks.polyalg import HomogeneousPoly
from twinpeaks.quad import j_moment, unit_sphere_area

PI3 = math.pi**3


@pytest.fixture(scope="module")
def sym():
    m = symmetric_model(n=6, ell=2, gamma=0.05)
    return m, red.compute_constants(6, 2)


# -- constants -----------------------------------------------------------------------


def test_constants_n6_ell2():
    k = red.compute_constants(6, 2)
    assert k.Ca == pytest.approx(PI3 / 720, rel=1e-13)
    assert k.Ca == pytest.approx(2 * (j_moment(6, 1, 6) - 2 * j_moment(6, 1, 7)) / 2, rel=1e-13)
    assert k.Cb == pytest.approx(8 * PI3, rel=1e-13)
    assert k.omega_n == pytest.approx(unit_sphere_area(6))


@pytest.mark.parametrize("n,ell", [(6, 2), (7, 2), (7, 4), (8, 2), (8, 4), (9, 2), (9, 4), (9, 6)])
def test_constants_positive(n, ell):
    k = red.compute_constants(n, ell)
    assert min(k.Ca, k.Cb, k.Cc, k.Cd, k.C1, k.C2, k.C3) > 0


def test_constants_reject_invalid_flatness():
    with pytest.raises(ValueError):
        red.compute_constants(6, 4)


def test_cd_equals_xi_pairing_constant():
    for n in (6, 7, 8, 9):
        k = red.compute_constants(n, 2)
        assert k.Cd == pytest.approx((n - 2) ** 2 * unit_sphere_area(n), rel=1e-12)


# -- the map T ------------------------------------------------------------------------


def test_t_vanishes_at_explicit_zero():
    rng = np.random.default_rng(0)
    for _ in range(10):
        m = random_model(rng)
        k = red.compute_constants(m.n, m.ell)
        p = red.solve_tau(m, k)
        T = red.t_map(p, m, k)
        scale = k.C1 * abs(m.varpi(1)) * p.lambda1**m.ell
        assert abs(T[0]) <= 1e-12 * scale and abs(T[1]) <= 1e-12 * scale * 50


def test_t_full_symmetry(sym):
    m, k = sym
    lam = 1e-4
    p = red.ReducedPoint(lam, lam, tuple(m.q1), tuple(m.q2))
    T = red.t_map(p, m, k)
    n = m.n
    assert T[0] == T[1]
    # curvature parts of the xi rows vanish; the coupling terms are equal and opposite
    coupling = k.C3 * lam**n / m.gamma**n / lam * m.gamma
    assert T[2] == pytest.approx(-coupling, rel=1e-12)
    np.testing.assert_allclose(T[2:2 + n], -T[2 + n:], rtol=1e-12)
    assert np.all(T[3:2 + n] == 0) and np.all(T[3 + n:] == 0)


def test_t_homogeneity(sym):
    m, k = sym
    n, ell = m.n, m.ell
    p = red.ReducedPoint(2e-4, 3e-4, tuple(m.q1), tuple(m.q2))
    q = red.ReducedPoint(4e-4, 6e-4, tuple(m.q1), tuple(m.q2))
    first = lambda pt: k.C1 * abs(m.varpi(1)) * pt.lambda1**ell
    second = lambda pt: first(pt) - red.t_map(pt, m, k)[0]
    assert first(q) / first(p) == pytest.approx(2**ell)
    assert second(q) / second(p) == pytest.approx(2 ** (n - 2))


def test_reduced_gradient_is_cb_times_t(sym):
    m, k = sym
    p = red.ReducedPoint(2e-4, 1e-4, (1e-6,) + (0.0,) * 5, tuple(np.array(m.q2) + 2e-6))
    np.testing.assert_allclose(red.reduced_gradient_model(p, m, k), k.Cb * red.t_map(p, m, k), rtol=1e-15)


def test_reduced_gradient_coupling_term(sym):
    m, k = sym
    n = m.n
    l1, l2 = 2e-4, 1e-4
    p = red.ReducedPoint(l1, l2, tuple(m.q1), tuple(m.q2))
    second = k.Cb * k.C1 * abs(m.varpi(1)) * l1**2 - red.reduced_gradient_model(p, m, k)[0]
    expected = unit_sphere_area(n) * (n - 2) ** 2 / 2 * (l1 * l2) ** ((n - 2) / 2) / m.gamma ** (n - 2)
    assert second == pytest.approx(expected, rel=1e-12)


# -- explicit zero ----------------------------------------------------------------------


def test_equal_varpi_gives_equal_scales(sym):
    m, k = sym
    sol = red.solve_tau_full(m, k)
    assert sol.alpha == 1.0
    assert sol.point.lambda1 == pytest.approx(sol.point.lambda2, rel=1e-15)


def test_closed_form_lambda_with_prescribed_constants():
    P = HomogeneousPoly(6, 2, {(2, 0, 0, 0, 0, 0): -0.5})  # varpi = -1
    m = TwinPeakModel(n=6, ell=2, gamma=0.1, q2=(0.1,) + (0.0,) * 5, P1=P, P2=P)
    k = dataclasses.replace(red.compute_constants(6, 2), C1=2.0)
    p = red.solve_tau(m, k)
    assert p.lambda1 == pytest.approx((0.1**4 * 2) ** 0.5, rel=1e-14)
    assert p.lambda1 == pytest.approx(1.41421e-2, rel=1e-5)


def test_closed_form_agrees_with_newton_from_perturbed_start():
    rng = np.random.default_rng(1)
    m = random_model(rng, n=8, ell=2)
    k = red.compute_constants(m.n, m.ell)
    G = red.ScaledT(m, k, mu=0.1)
    U0 = 0.6 * rng.uniform(-1, 1, size=(1, G.N))
    U, ok = red.damped_newton_batch(G, G.jac, U0, tol=1e-12)
    assert ok[0]
    np.testing.assert_allclose(G.to_point(U[0]), red.solve_tau(m, k).to_vector(), rtol=1e-9, atol=1e-12 * m.gamma)


def test_offsets_small_relative_to_scale():
    rng = np.random.default_rng(2)
    for _ in range(10):
        m = random_model(rng)
        k = red.compute_constants(m.n, m.ell)
        sol = red.solve_tau_full(m, k)
        off = np.linalg.norm(sol.point.xi1)
        assert off <= 10 * sol.point.lambda1 / sol.D_tau


def test_lambda_homogeneity_in_gamma(sym):
    m, k = sym
    n, ell = m.n, m.ell
    a = red.solve_tau(m, k).lambda1
    b = red.solve_tau(m.with_gamma(2 * m.gamma), k).lambda1
    assert b / a == pytest.approx(2 ** ((n - 2) / (n - 2 - ell)), rel=1e-12)


def test_rotation_equivariance():
    rng = np.random.default_rng(3)
    base = symmetric_model(n=7, ell=2, gamma=0.08, scale=1.3)
    k = red.compute_constants(7, 2)
    Q, _ = np.linalg.qr(rng.normal(size=(7, 7)))
    rot = TwinPeakModel(n=7, ell=2, gamma=0.08, q2=tuple(Q @ np.array(base.q2)), P1=base.P1, P2=base.P2)
    a, b = red.solve_tau(base, k), red.solve_tau(rot, k)
    assert b.lambda1 == pytest.approx(a.lambda1) and b.lambda2 == pytest.approx(a.lambda2)
    np.testing.assert_allclose(b.xi1, Q @ np.array(a.xi1), atol=1e-15)
    np.testing.assert_allclose(b.xi2, Q @ np.array(a.xi2), atol=1e-15)
    assert red.det_sign_at_tau(base, k) == red.det_sign_at_tau(rot, k) == -1
    assert red.degree_of_t(rot, k, n_starts=40).degree == -1


# -- Jacobian -----------------------------------------------------------------------------


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(4)
    for _ in range(10):
        m = random_model(rng)
        k = red.compute_constants(m.n, m.ell)
        G = red.ScaledT(m, k)
        U = rng.uniform(-1, 1, size=(5, G.N))
        J = G.jac(U)
        Jfd = red.fd_jacobian_batch(G, U, step=1e-5)
        for a, b in zip(J, Jfd):
            assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(a))


def test_jacobian_entries_at_tau():
    m = symmetric_model(n=8, ell=2, gamma=0.1, scale=1.0)
    w2 = HomogeneousPoly(8, 2, {a: 4 * c for a, c in m.P2.terms.items()})
    m = TwinPeakModel(n=8, ell=2, gamma=0.1, q2=m.q2, P1=m.P1, P2=w2)
    k = red.compute_constants(8, 2)
    sol = red.solve_tau_full(m, k)
    p = sol.point
    J = red.jacobian(p, m, k)
    n, ell = 8, 2
    l1 = p.lambda1
    assert J[0, 0] == pytest.approx((ell - (n - 2) / 2) * k.C1 * abs(m.varpi(1)) * l1 ** (ell - 1), rel=1e-10)
    assert J[0, 1] == pytest.approx(-(n - 2) / 2 * k.C1 * abs(m.varpi(2)) * sol.alpha ** (ell - 1) * l1 ** (ell - 1),
                                    rel=1e-10)
    # lambda rows do not depend on xi; xi-lambda couplings are small against the diagonal blocks
    assert np.all(J[:2, 2:] == 0)
    diag = abs(J[2, 2])
    assert np.max(np.abs(J[2:, :2])) * p.lambda1 <= diag * p.lambda1 / sol.D_tau * 10


def test_det_sign_negative_cases(sym):
    m, k = sym
    assert red.det_sign_at_tau(m, k) == -1
    base = symmetric_model(n=8, ell=2, gamma=0.1)
    m4 = TwinPeakModel(n=8, ell=2, gamma=0.1, q2=base.q2, P1=base.P1, P2=base.P2.scale(4.0), Cp=4.0)
    assert red.det_sign_at_tau(m4, red.compute_constants(8, 2)) == -1


@pytest.mark.parametrize("n", [6, 7, 8, 9])
def test_structural_factor_negative(n):
    for ell in range(2, n - 2, 2):
        assert ell * (ell - (n - 2)) < 0


# -- degree ------------------------------------------------------------------------------------


def test_degree_of_identity():
    res = red.degree_on_box(lambda U: U.copy(), 4, lambda U: np.broadcast_to(np.eye(4), (U.shape[0], 4, 4)).copy(),
                            n_starts=20)
    assert res.degree == 1 and len(res.roots) == 1


def test_degree_of_reflection():
    D = np.diag([-1.0, 1.0, 1.0])
    res = red.degree_on_box(lambda U: U @ D.T, 3, lambda U: np.broadcast_to(D, (U.shape[0], 3, 3)).copy(), n_starts=20)
    assert res.degree == -1


def test_degree_counts_two_roots_with_signs():
    # F(u) = (u1^2 - 0.25, u2): roots at u1 = +-1/2 with opposite signs, degree 0
    F = lambda U: np.stack([U[:, 0] ** 2 - 0.25, U[:, 1]], axis=1)

    def JF(U):
        J = np.zeros((U.shape[0], 2, 2))
        J[:, 0, 0] = 2 * U[:, 0]
        J[:, 1, 1] = 1.0
        return J

    res = red.degree_on_box(F, 2, JF, n_starts=100)
    assert len(res.roots) == 2 and sorted(res.signs) == [-1, 1] and res.degree == 0


def test_degree_refuses_root_on_boundary():
    F = lambda U: U - np.array([1.0, 0.0])
    J = lambda U: np.broadcast_to(np.eye(2), (U.shape[0], 2, 2)).copy()
    with pytest.raises(red.NumericalFailure):
        red.degree_on_box(F, 2, J, n_starts=10)


def test_degree_of_t_symmetric(sym):
    m, k = sym
    res = red.degree_of_t(m, k, n_starts=200)
    assert res.degree == -1 and len(res.roots) == 1
    assert res.converged_starts > 0


def test_degree_robust_under_admissible_perturbations(sym):
    m, k = sym
    out = red.robustness_check(m, k, n_perturb=5, seed=1, n_starts=40)
    assert [o["degree"] for o in out] == [-1] * 5
    assert all(o["perturbation_bound"] < o["min_boundary_norm_T"] for o in out)


def test_perturbation_field_jacobian():
    rng = np.random.default_rng(5)
    pert = red.SmoothPerturbation.random(6, 0.3, rng)
    U = rng.uniform(-1, 1, size=(4, 6))
    np.testing.assert_allclose(pert.jac(U), red.fd_jacobian_batch(pert, U, 1e-6), atol=1e-8)
    assert np.all(np.linalg.norm(pert(rng.uniform(-1, 1, size=(100, 6))), axis=1) <= 0.3 + 1e-15)


# -- gamma_o ------------------------------------------------------------------------------------


def test_gamma_o_inverts_threshold():
    rng = np.random.default_rng(6)
    for _ in range(5):
        m = random_model(rng)
        k = red.compute_constants(m.n, m.ell)
        g = red.gamma_o_estimate(m, k, 40.0)
        assert red.solve_tau_full(m.with_gamma(g), k).D_tau == pytest.approx(40.0, rel=1e-8)
        assert red.solve_tau_full(m.with_gamma(0.5 * g), k).D_tau > 40.0


def test_gamma_o_doubling_varpi_quadratic():
    k = red.compute_constants(6, 2)
    a = red.gamma_o_estimate(symmetric_model(scale=1.0), k, 20.0)
    b = red.gamma_o_estimate(symmetric_model(scale=2.0), k, 20.0)
    assert b / a == pytest.approx(1 / math.sqrt(2), rel=1e-12)


def test_gamma_o_decreasing_in_c1(sym):
    # a larger C1 pushes lambda_tau up and D_tau down, so the admissible gap shrinks
    m, k = sym
    bigger = dataclasses.replace(k, C1=2 * k.C1)
    assert red.gamma_o_estimate(m, bigger, 20.0) < red.gamma_o_estimate(m, k, 20.0)


# -- construct ----------------------------------------------------------------------------------


def test_construct_symmetric(sym):
    m, _ = sym
    out = red.construct(m)
    assert out["degree"] == -1 and out["det_sign"] == -1 and out["n_root_clusters"] == 1
    assert out["T_residual_scaled"] <= 1e-10
    assert {"model", "constants", "P_tau", "gamma_o", "D_tau"} <= set(out)


def test_construct_rejects_invalid_model(sym):
    m, _ = sym
    bad = TwinPeakModel(n=6, ell=2, gamma=m.gamma, q2=m.q2, P1=m.P1.scale(-1), P2=m.P2)
    with pytest.raises(ValueError, match="pseudo-peak"):
        red.construct(bad)
