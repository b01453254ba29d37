"""Integral engines and the numeric verification suites built on them.

Single-center integrals of monomials against (1+|y|^2)^(-p) are done in
closed form (angular moment times a radial Beta function). Two-center
integrals of axially symmetric integrands are reduced to two dimensions and
computed with Gauss-Legendre panels; the mass integral of the curvature
perturbation uses Monte Carlo with a two-component proposal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np
from scipy import integrate

from . import _kernels
from .bubble import Bubble, BubbleConfig, bubble_dlambda, bubble_dxi, bubble_value
from .peaks import TwinPeakModel, h_eval_many, smooth_step
from .polyalg import HomogeneousPoly, even_double_factorial, evaluate_many, iterated_laplacian_value


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    abs_error: float
    method: str  # "exact-reduction" | "quad2d" | "monte-carlo"
    samples_or_nodes: int
    seed: int | None = None

    def __post_init__(self):
        if not self.abs_error >= 0:
            raise ValueError("abs_error must be non-negative")
        if self.method == "monte-carlo" and self.seed is None:
            raise ValueError("monte-carlo estimates must record their seed")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "abs_error": self.abs_error,
            "method": self.method,
            "samples_or_nodes": self.samples_or_nodes,
            "seed": self.seed,
        }


# ---------------------------------------------------------------------------
# closed-form moments


def unit_sphere_area(n: int) -> float:
    """|S^(n-1)|, the surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def sphere_moment(alpha: Iterable[int]) -> float:
    """Integral of u^alpha over the unit sphere S^(n-1)."""
    alpha = tuple(int(a) for a in alpha)
    if any(a % 2 for a in alpha):
        return 0.0
    n = len(alpha)
    logv = sum(math.lgamma((a + 1) / 2) for a in alpha) - math.lgamma((n + sum(alpha)) / 2)
    return 2.0 * math.exp(logv)


def radial_beta(n: int, k: float, p: float) -> float:
    """Integral over (0, inf) of r^(k+n-1) (1+r^2)^(-p) dr."""
    a = (n + k) / 2
    b = p - a
    if b <= 0:
        raise ValueError(f"radial integral diverges: n={n}, degree={k}, p={p}")
    return 0.5 * math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def monomial_moment(alpha: Iterable[int], p: float) -> float:
    """Integral over R^n of y^alpha (1+|y|^2)^(-p)."""
    alpha = tuple(int(a) for a in alpha)
    k = sum(alpha)
    rad = radial_beta(len(alpha), k, p)
    return sphere_moment(alpha) * rad


def j_moment(n: int, h: int, p: float) -> float:
    """J = integral over R^n of y_1^2 ... y_h^2 (1+|y|^2)^(-p)."""
    if h < 0 or h > n:
        raise ValueError("need 0 <= h <= n")
    if not 2 * p > 2 * h + n:
        raise ValueError(f"J-moment diverges for n={n}, h={h}, p={p}")
    return monomial_moment([2] * h + [0] * (n - h), p)


def positivity_check(n: int, h: int) -> float:
    """J_n - 2 J_{n+1}; the reduction constant is proportional to it."""
    return j_moment(n, h, n) - 2.0 * j_moment(n, h, n + 1)


def exact_poly_integral(poly: HomogeneousPoly, p: float) -> float:
    """Integral of poly(y) (1+|y|^2)^(-p) over R^n, term by term."""
    if poly.is_zero():
        return 0.0
    return float(sum(float(c) * monomial_moment(a, p) for a, c in poly.terms.items()))


def mc_poly_integral(poly: HomogeneousPoly, p: float, n_samples: int, seed: int) -> IntegralEstimate:
    """Importance-sampled estimate of the same integral.

    The proposal has density proportional to (1+|y|^2)^(-a) with
    a = p - degree/2, which keeps the weight variance finite; samples are
    drawn as g / sqrt(W) with g standard normal and W chi-square with
    2a - n degrees of freedom.
    """
    n, ell = poly.n, poly.degree
    a = p - ell / 2
    nu = 2 * a - n
    if nu <= 0:
        raise ValueError("integral does not converge for this degree and power")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_samples, n))
    w = rng.chisquare(nu, size=n_samples)
    y = g / np.sqrt(w)[:, None]
    r2 = np.sum(y * y, axis=1)
    log_norm = (n / 2) * math.log(math.pi) + math.lgamma(a - n / 2) - math.lgamma(a)
    weights = evaluate_many(poly, y) * (1.0 + r2) ** (a - p) * math.exp(log_norm)
    return IntegralEstimate(
        value=float(np.mean(weights)),
        abs_error=float(np.std(weights, ddof=1) / math.sqrt(n_samples)),
        method="monte-carlo",
        samples_or_nodes=n_samples,
        seed=seed,
    )


def reduction_lemma_check(
    poly: HomogeneousPoly, p: float | None = None, mc_samples: int = 0, seed: int = 0
) -> tuple[IntegralEstimate, float, IntegralEstimate | None]:
    """Both sides of the reduction identity for an even-degree polynomial.

    Returns (lhs, rhs, mc): lhs is the exact term-by-term integral, rhs is
    J / (ell (ell-2) ... 2) times the iterated Laplacian, and mc is an
    optional Monte-Carlo estimate of the left side.
    """
    if poly.degree % 2:
        raise ValueError("reduction identity needs an even degree")
    n, ell = poly.n, poly.degree
    if p is None:
        p = n
    lhs = IntegralEstimate(exact_poly_integral(poly, p), 0.0, "exact-reduction", len(poly.terms))
    rhs = j_moment(n, ell // 2, p) * float(iterated_laplacian_value(poly)) / even_double_factorial(ell)
    mc = mc_poly_integral(poly, p, mc_samples, seed) if mc_samples else None
    return lhs, rhs, mc


# ---------------------------------------------------------------------------
# pairing constants


def pairing_constant_lambda(n: int) -> float:
    """Leading constant of the lambda pairing: n(n-2) omega_n (n-2)/(2n)."""
    return n * (n - 2) * unit_sphere_area(n) * (n - 2) / (2 * n)


def radial_moment_a135(n: int) -> float:
    """(n+2)(n-2) * integral of Y_1^2 (1+|Y|^2)^(-(n/2+2)); equals (n-2) omega_n / n."""
    return (n + 2) * (n - 2) * j_moment(n, 1, n / 2 + 2)


def pairing_constant_xi(n: int) -> float:
    """Leading constant of the xi pairing, n(n-2) times the radial moment above."""
    return n * (n - 2) * radial_moment_a135(n)


def predicted_lambda_pairing(cfg: BubbleConfig) -> float:
    n = cfg.n
    l1, l2 = cfg.b1.lam, cfg.b2.lam
    return -pairing_constant_lambda(n) / l1 * (l1 * l2) ** ((n - 2) / 2) / cfg.gamma ** (n - 2)


def predicted_xi_pairing(cfg: BubbleConfig, j: int) -> float:
    n = cfg.n
    l1, l2 = cfg.b1.lam, cfg.b2.lam
    dxi = cfg.b1.xi[j - 1] - cfg.b2.xi[j - 1]
    return pairing_constant_xi(n) * dxi / (l1 * l2 * cfg.d**n)


# ---------------------------------------------------------------------------
# axially symmetric two-center quadrature


@lru_cache(maxsize=None)
def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def _panel_nodes(a: np.ndarray, b: np.ndarray, n_panels: int, order: int):
    """Composite GL nodes on [a_i, b_i] for each i (vectorized over i)."""
    x, w = _gauss(order)
    t = (np.arange(n_panels)[:, None] + (x[None, :] + 1) / 2) / n_panels  # (panels, order)
    t = t.ravel()
    wt = np.tile(w / (2 * n_panels), n_panels)
    a = np.asarray(a)[:, None]
    b = np.asarray(b)[:, None]
    nodes = a + (b - a) * t[None, :]
    weights = (b - a) * wt[None, :]
    return nodes, weights


def _theta_nodes(breaks: list[float], per_panel: int, order: int):
    xs, ws = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        nodes, weights = _panel_nodes(np.array([lo]), np.array([hi]), per_panel, order)
        xs.append(nodes[0])
        ws.append(weights[0])
    return np.concatenate(xs), np.concatenate(ws)


def _half_space_grid(n: int, scale: float, m: float | None, r_out: float, order: int,
                     s_width: float = 0.35, theta_panels: int = 8):
    """Spherical (rho, theta) grid around a center, restricted to rho cos(theta) < m.

    rho = scale * sinh(s) with s on composite GL panels; the half-space cut
    makes the radial limit theta-dependent. ``m=None`` means all of R^n.
    Returns (rho, theta, weight) with the volume element folded into weight.
    """
    if m is None:
        breaks = list(np.linspace(0.0, math.pi, 2 * theta_panels + 1))
    else:
        theta_c = math.acos(min(m / r_out, 1.0))
        breaks = list(np.linspace(0.0, theta_c, theta_panels + 1)) + list(
            np.linspace(theta_c, math.pi, theta_panels + 1)[1:]
        )
    th, wth = _theta_nodes(breaks, 1, order)
    cos_t = np.cos(th)
    rho_max = np.full(th.shape, r_out)
    if m is not None:
        with np.errstate(divide="ignore"):
            lim = np.where(cos_t > 0, m / np.maximum(cos_t, 1e-300), np.inf)
        rho_max = np.minimum(rho_max, lim)
    s_max = np.arcsinh(rho_max / scale)
    n_panels = max(4, int(math.ceil(float(np.max(s_max)) / s_width)))
    s, ws = _panel_nodes(np.zeros_like(s_max), s_max, n_panels, order)
    rho = scale * np.sinh(s)
    drho = scale * np.cosh(s) * ws
    theta = np.broadcast_to(th[:, None], rho.shape)
    area = unit_sphere_area(n - 1)
    weight = area * rho ** (n - 1) * np.sin(theta) ** (n - 2) * drho * wth[:, None]
    return rho.ravel(), theta.ravel(), weight.ravel()


def _axial_integral(n, lam1, lam2, dist, mode, P=0.0, Q=0.0, order=12, theta_panels=8):
    """Integral over R^n of an axially symmetric two-center integrand (kernel ``mode``)."""
    r_out = 200.0 * (dist + lam1 + lam2)
    if dist == 0.0:
        rho, th, w = _half_space_grid(n, min(lam1, lam2), None, r_out, order, theta_panels=theta_panels)
        x, r = rho * np.cos(th), rho * np.sin(th)
        return _kernels.axial_sum(x, r, w, n, lam1, lam2, 0.0, mode, P, Q), w.size
    m = 0.5 * dist
    rho, th, w = _half_space_grid(n, lam1, m, r_out, order, theta_panels=theta_panels)
    total = _kernels.axial_sum(rho * np.cos(th), rho * np.sin(th), w, n, lam1, lam2, dist, mode, P, Q)
    count = w.size
    rho, th, w = _half_space_grid(n, lam2, m, r_out, order, theta_panels=theta_panels)
    total += _kernels.axial_sum(dist - rho * np.cos(th), rho * np.sin(th), w, n, lam1, lam2, dist, mode, P, Q)
    return total, count + w.size


def _axial_estimate(n, lam1, lam2, dist, mode, P=0.0, Q=0.0) -> IntegralEstimate:
    fine, count = _axial_integral(n, lam1, lam2, dist, mode, P, Q, order=12, theta_panels=8)
    coarse, _ = _axial_integral(n, lam1, lam2, dist, mode, P, Q, order=8, theta_panels=6)
    return IntegralEstimate(fine, abs(fine - coarse), "quad2d", count)


def _axis(cfg: BubbleConfig) -> tuple[np.ndarray, float]:
    delta = cfg.b2.center - cfg.b1.center
    dist = float(np.linalg.norm(delta))
    if dist == 0.0:
        e = np.zeros(cfg.n)
        e[0] = 1.0
        return e, 0.0
    return delta / dist, dist


def interaction_s(cfg: BubbleConfig, P: float, Q: float) -> IntegralEstimate:
    """S = integral of (l1/(l1^2+|y-xi1|^2))^P (l2/(l2^2+|y-xi2|^2))^Q with P + Q = n."""
    n = cfg.n
    if not (P > 0 and Q > 0):
        raise ValueError("P and Q must be positive")
    if not math.isclose(P + Q, n, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"P + Q must equal n = {n}")
    _, dist = _axis(cfg)
    return _axial_estimate(n, cfg.b1.lam, cfg.b2.lam, dist, _kernels.MODE_S, P, Q)


DIRECTIONS = ("dlambda1", "dlambda2", "dxi1", "dxi2")


def io_prime_pairing(cfg: BubbleConfig, direction: str, j: int = 1) -> IntegralEstimate:
    """n(n-2) * integral of I * (dV) for one approximate-kernel direction.

    ``j`` (1-based) selects the center coordinate for the xi directions.
    The bracket I is axially symmetric, so a xi pairing equals the axial
    pairing times the j-th component of the unit axis; transverse
    components vanish identically.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    n = cfg.n
    e, dist = _axis(cfg)
    mode = {
        "dlambda1": _kernels.MODE_DLAMBDA1,
        "dlambda2": _kernels.MODE_DLAMBDA2,
        "dxi1": _kernels.MODE_DXI1,
        "dxi2": _kernels.MODE_DXI2,
    }[direction]
    if direction.startswith("dxi"):
        if not 1 <= j <= n:
            raise ValueError(f"coordinate index {j} outside 1..{n}")
        if dist == 0.0:
            # radial bracket against an odd direction field
            return IntegralEstimate(0.0, 0.0, "quad2d", 0)
        factor = float(e[j - 1])
    else:
        factor = 1.0
    est = _axial_estimate(n, cfg.b1.lam, cfg.b2.lam, dist, mode)
    scale = n * (n - 2) * factor
    return IntegralEstimate(scale * est.value, abs(scale) * est.abs_error, est.method, est.samples_or_nodes)


@lru_cache(maxsize=None)
def direction_norm_constants(n: int) -> tuple[float, float]:
    """(c_lambda, c_xi) with ||grad dV/dlambda||_2 = c_lambda / lambda, same for xi_j."""
    e = (n - 2) / 2
    area = unit_sphere_area(n)

    def fl_prime(r):
        return e * 2 * r * (1 + r * r) ** (-n / 2 - 1) * ((1 + r * r) + (n / 2) * (1 - r * r))

    def xi_density(r):
        phi = (1 + r * r) ** (-n / 2)
        dphi = -n * r * (1 + r * r) ** (-n / 2 - 1)
        return (phi * phi + (r * r / n) * (2 * phi * dphi / r + dphi * dphi)) if r > 0 else phi * phi

    cl2 = area * integrate.quad(lambda r: fl_prime(r) ** 2 * r ** (n - 1), 0, np.inf, limit=200)[0]
    cx2 = (n - 2) ** 2 * area * integrate.quad(lambda r: xi_density(r) * r ** (n - 1), 0, np.inf, limit=200)[0]
    return math.sqrt(cl2), math.sqrt(cx2)


def weak_interaction_norm_proxy(cfg: BubbleConfig) -> float:
    """Max over the 2(n+1) kernel directions of |pairing| / ||direction||."""
    n = cfg.n
    c_lam, c_xi = direction_norm_constants(n)
    e, dist = _axis(cfg)
    l1, l2 = cfg.b1.lam, cfg.b2.lam
    vals = [
        abs(io_prime_pairing(cfg, "dlambda1").value) * l1 / c_lam,
        abs(io_prime_pairing(cfg, "dlambda2").value) * l2 / c_lam,
    ]
    if dist > 0:
        jmax = int(np.argmax(np.abs(e))) + 1
        vals.append(abs(io_prime_pairing(cfg, "dxi1", jmax).value) * l1 / c_xi)
        vals.append(abs(io_prime_pairing(cfg, "dxi2", jmax).value) * l2 / c_xi)
    return max(vals)


def coincident_lambda_pairing_radial(n: int, lam1: float, lam2: float, which: int = 1) -> float:
    """1-D radial reference for the lambda pairing of two concentric bubbles."""
    b1 = Bubble(n, lam1, (0.0,) * n)
    b2 = Bubble(n, lam2, (0.0,) * n)
    p = (n + 2) / (n - 2)
    area = unit_sphere_area(n)
    target = b1 if which == 1 else b2

    def f(r):
        y = np.zeros(n)
        y[0] = r
        v1, v2 = float(bubble_value(b1, y)), float(bubble_value(b2, y))
        brk = float(_kernels.bracket_np(np.array([v1]), np.array([v2]), p)[0])
        return brk * float(bubble_dlambda(target, y)) * r ** (n - 1)

    scale = min(lam1, lam2)
    pts = [0.0, scale, 10 * scale, 100 * max(lam1, lam2)]
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(f, a, b, limit=400, epsabs=0, epsrel=1e-12)[0]
    total += integrate.quad(f, pts[-1], np.inf, limit=400)[0]
    return n * (n - 2) * area * total


# ---------------------------------------------------------------------------
# peak (curvature) pairings


def peak_lambda_pairing(model: TwinPeakModel, lam: float, j: int = 1) -> float:
    """-lambda * integral of h(y) V^p dV/dlambda for a bubble sitting on peak j.

    h is the model's local expansion times its cutoff. With the bubble
    centered on the peak every factor except the polynomial is radial, so
    the integral splits exactly into sphere moments and one radial integral.
    """
    n, ell = model.n, model.ell
    P = model.P1 if j == 1 else model.P2
    c_rem = model.remainder[j - 1]
    rho = model.rho
    p = (n + 2) / (n - 2)
    e = (n - 2) / 2

    def radial(r, k):
        v = (lam / (lam * lam + r * r)) ** e
        dv = -e * lam ** ((n - 4) / 2) * (lam * lam - r * r) / (lam * lam + r * r) ** (n / 2)
        cut = float(smooth_step((rho - r) / (0.5 * rho))) if r > 0.5 * rho else 1.0
        return r ** (k + n - 1) * v**p * dv * cut

    def rint(k):
        pts = [0.0, lam, 10 * lam, 0.5 * rho, rho]
        pts = sorted(set(min(x, rho) for x in pts))
        return sum(integrate.quad(radial, a, b, args=(k,), limit=400, epsabs=0, epsrel=1e-11)[0]
                   for a, b in zip(pts[:-1], pts[1:]))

    total = sum(float(c) * sphere_moment(a) for a, c in P.terms.items()) * rint(ell)
    if c_rem:
        total += c_rem * unit_sphere_area(n) * rint(ell + 1)
    return -lam * total


def axisymmetric_integral(func, n: int, center_scale: float, r_out: float, order: int = 16,
                          theta_panels: int = 8) -> float:
    """Integral over R^n of func(x, r) for an integrand symmetric about the x-axis.

    Spherical grid centered at the origin with the sinh radial map; meant
    for integrands concentrated near the origin.
    """
    rho, th, w = _half_space_grid(n, center_scale, None, r_out, order, theta_panels=theta_panels)
    return float(np.sum(w * func(rho * np.cos(th), rho * np.sin(th))))


def peak_xi_pairing(model: TwinPeakModel, lam: float, offset: float) -> float:
    """-lambda * integral of h V^p dV/dxi_1 for a bubble at offset * e_1 from peak 1.

    Only defined for peaks whose polynomial is radial about the origin (so
    the integrand is axially symmetric about e_1).
    """
    n = model.n
    p = (n + 2) / (n - 2)
    b = Bubble(n, lam, (offset,) + (0.0,) * (n - 1))

    def f(x, r):
        pts = np.zeros((x.size, n))
        pts[:, 0] = x
        pts[:, 1] = r
        hv = h_eval_many(model, pts)
        return hv * bubble_value(b, pts) ** p * bubble_dxi(b, pts, 1)

    return -lam * axisymmetric_integral(f, n, lam, model.rho, order=16)


# ---------------------------------------------------------------------------
# Monte Carlo mass integral


@dataclass(frozen=True)
class MassBoundResult:
    estimate: IntegralEstimate
    prediction: float
    regime: str

    @property
    def ratio(self) -> float:
        return self.estimate.value / self.prediction


def mass_regime_prediction(lam: float, m: float, ell: int, n: int, cr: float = 0.0) -> tuple[float, str]:
    def one(k):
        if k < n:
            return lam**k, "m*ell<n"
        if k == n:
            return lam**n * math.log(1.0 / lam), "m*ell=n"
        return lam**n, "m*ell>n"

    main, regime = one(m * ell)
    if cr:
        main += cr**m * one(m * (ell + 1))[0]
    return main, regime


MC_BLOCK = 1 << 15


def mass_bound_check(model: TwinPeakModel, cfg: BubbleConfig, m: float, n_samples: int = 200_000,
                     seed: int = 0) -> MassBoundResult:
    """Monte-Carlo estimate of the integral of |H|^m (V1+V2)^(2n/(n-2)).

    Proposal: equal mixture of two radial densities, one per peak, with
    radius r = lambda_j sinh(u), u uniform on [0, asinh(rho/lambda_j)] and a
    uniform direction. Samples come in fixed blocks, each with its own child
    seed, so the estimate does not depend on how blocks are scheduled.
    """
    if not m * model.ell > 2:
        raise ValueError("need m * ell > 2")
    n = model.n
    rho = model.rho
    centers = [model.q1, np.array(model.q2)]
    scales = [cfg.b1.lam, cfg.b2.lam]
    u_max = [math.asinh(rho / s) for s in scales]
    area = unit_sphere_area(n)
    power = 2 * n / (n - 2)
    n_blocks = max(1, int(math.ceil(n_samples / MC_BLOCK)))
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    c1 = cfg.b1.center
    c2 = cfg.b2.center

    def log_density(pts):
        dens = np.zeros(pts.shape[0])
        for c, s, um in zip(centers, scales, u_max):
            r = np.linalg.norm(pts - c, axis=1)
            inside = (r < rho) & (r > 0)
            val = np.zeros_like(r)
            val[inside] = 1.0 / (um * np.sqrt(s * s + r[inside] ** 2) * area * r[inside] ** (n - 1))
            dens += 0.5 * val
        return dens

    sums = np.zeros(2)
    total = 0
    for b, child in enumerate(children):
        size = min(MC_BLOCK, n_samples - b * MC_BLOCK)
        rng = np.random.default_rng(child)
        comp = rng.integers(0, 2, size=size)
        u = rng.uniform(0.0, 1.0, size=size) * np.where(comp == 0, u_max[0], u_max[1])
        s = np.where(comp == 0, scales[0], scales[1])
        r = s * np.sinh(u)
        d = rng.normal(size=(size, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        pts = np.where(comp[:, None] == 0, centers[0], centers[1]) + r[:, None] * d
        f = np.abs(h_eval_many(model, pts)) ** m * _kernels.pair_power(pts, c1, scales[0], c2, scales[1], n, power)
        q = log_density(pts)
        wgt = np.where(q > 0, f / np.where(q > 0, q, 1.0), 0.0)
        sums += (wgt.sum(), (wgt * wgt).sum())
        total += size
    mean = sums[0] / total
    var = max(sums[1] / total - mean * mean, 0.0)
    est = IntegralEstimate(float(mean), float(math.sqrt(var / total)), "monte-carlo", total, seed)
    cr = max(model.CR1, model.CR2) if any(model.remainder) else 0.0
    pred, regime = mass_regime_prediction(cfg.lam, m, model.ell, n, cr)
    return MassBoundResult(est, pred, regime)


# ---------------------------------------------------------------------------
# elementary inequalities


@dataclass
class InequalityReport:
    beta_constants: dict[float, float] = field(default_factory=dict)
    beta_grid_sup: dict[float, float] = field(default_factory=dict)
    m_constants: dict[float, float] = field(default_factory=dict)
    m_grid_sup: dict[float, float] = field(default_factory=dict)
    tau_max_excess: dict[float, float] = field(default_factory=dict)
    n_samples: int = 0
    ok: bool = True
    failures: list[str] = field(default_factory=list)


def _min_over_max(a, b):
    return np.minimum(a, b) / np.maximum(a, b)


def _beta_ratio(t, beta):
    """|(a+b)^beta - a^beta - b^beta| / (ab)^(beta/2) written in t = min/max."""
    return np.abs(np.expm1(beta * np.log1p(t)) - t**beta) / t ** (beta / 2)


def _m_ratio(t, M):
    """|(a+b)^M - a^M - b^M| / (a^(M-1) b + b^(M-1) a) written in t = min/max."""
    return np.abs(np.expm1(M * np.log1p(t)) - t**M) / (t + t ** (M - 1))


def elementary_inequality_suite(seed: int = 0, n_samples: int = 10_000,
                                betas=(0.25, 0.5, 1.0, 1.5, 2.0), ms=(2.0, 2.5, 3.0, 4.0),
                                taus=(0.1, 0.5, 0.9, 1.0)) -> InequalityReport:
    """Sample positive (a, b) and check the three elementary power inequalities.

    For each exponent the smallest constant fitting the samples is reported
    next to a fine-grid supremum over t = a/b (both sides are homogeneous).
    A sample fails if it needs a constant above the grid supremum.
    """
    rng = np.random.default_rng(seed)
    a = np.exp(rng.uniform(-12, 12, size=n_samples))
    b = np.exp(rng.uniform(-12, 12, size=n_samples))
    ts = _min_over_max(a, b)
    grid = np.exp(np.linspace(-60, 0, 300_001))
    rep = InequalityReport(n_samples=n_samples)
    for beta in betas:
        fit = float(np.max(_beta_ratio(ts, beta)))
        sup = float(np.max(_beta_ratio(grid, beta)))
        rep.beta_constants[beta] = fit
        rep.beta_grid_sup[beta] = sup
        if fit > sup * (1 + 1e-6) + 1e-14:
            rep.ok = False
            rep.failures.append(f"beta={beta}: sample constant {fit} above supremum {sup}")
    for M in ms:
        fit = float(np.max(_m_ratio(ts, M)))
        sup = float(np.max(_m_ratio(grid, M)))
        rep.m_constants[M] = fit
        rep.m_grid_sup[M] = sup
        if fit > sup * (1 + 1e-6) + 1e-14:
            rep.ok = False
            rep.failures.append(f"M={M}: sample constant {fit} above supremum {sup}")
    for tau in taus:
        lhs = (a + b) ** tau
        rhs = a**tau + b**tau
        excess = float(np.max((lhs - rhs) / rhs))
        rep.tau_max_excess[tau] = excess
        if excess > 1e-12:
            rep.ok = False
            rep.failures.append(f"tau={tau}: (a+b)^tau exceeds a^tau + b^tau by {excess}")
    return rep
