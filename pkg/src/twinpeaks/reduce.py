"""The reduced map T, its explicit zero P_tau, Jacobian, and Brouwer degree.

Coordinates of the reduced space are ordered as
(lambda_1, lambda_2; xi_11 ... xi_1n; xi_21 ... xi_2n), and T's components
as (T_10, T_20; T_11 ... T_1n; T_21 ... T_2n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .peaks import TwinPeakModel, validate
from .polyalg import even_double_factorial
from .quad import j_moment, radial_moment_a135, unit_sphere_area


class NumericalFailure(RuntimeError):
    """A numerical certificate could not be established."""


@dataclass(frozen=True)
class ReductionConstants:
    n: int
    ell: int
    omega_n: float
    Jn: float
    Jn1: float
    Ca: float
    Cb: float
    Cc: float
    Cd: float
    C1: float
    C2: float
    C3: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def compute_constants(n: int, ell: int) -> ReductionConstants:
    if ell % 2 or not 2 <= ell < n - 2:
        raise ValueError(f"need even ell with 2 <= ell < n-2, got n={n}, ell={ell}")
    h = ell // 2
    omega = unit_sphere_area(n)
    Jn = j_moment(n, h, n)
    Jn1 = j_moment(n, h, n + 1)
    ff = even_double_factorial(ell)
    Ca = (n - 2) / 2 * (Jn - 2 * Jn1) / ff
    Cb = omega * (n - 2) ** 2 / 2
    Cc = (n - 2) * Jn1 / ff
    Cd = n * (n - 2) * radial_moment_a135(n)
    return ReductionConstants(n, ell, omega, Jn, Jn1, Ca, Cb, Cc, Cd, Ca / Cb, Cc / Cb, Cd / Cb)


@dataclass(frozen=True)
class ReducedPoint:
    lambda1: float
    lambda2: float
    xi1: tuple[float, ...]
    xi2: tuple[float, ...]

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValueError("lambda1 and lambda2 must be positive")
        object.__setattr__(self, "xi1", tuple(float(v) for v in self.xi1))
        object.__setattr__(self, "xi2", tuple(float(v) for v in self.xi2))
        if len(self.xi1) != len(self.xi2):
            raise ValueError("centers must have equal length")

    @property
    def n(self) -> int:
        return len(self.xi1)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.lambda1, self.lambda2], self.xi1, self.xi2])

    @classmethod
    def from_vector(cls, v) -> "ReducedPoint":
        v = np.asarray(v, dtype=float)
        n = (v.size - 2) // 2
        return cls(float(v[0]), float(v[1]), tuple(v[2:2 + n]), tuple(v[2 + n:]))

    def to_dict(self) -> dict:
        return {"lambda1": self.lambda1, "lambda2": self.lambda2, "xi1": list(self.xi1), "xi2": list(self.xi2)}


# ---------------------------------------------------------------------------
# the map T


def _t_batch(X: np.ndarray, model: TwinPeakModel, k: ReductionConstants, offset: bool = False) -> np.ndarray:
    """T at each row of X, shape (B, 2n+2).

    With ``offset`` the last n columns hold xi_2 - q_2 instead of xi_2, which
    keeps full relative precision when the box around P_tau is tiny
    compared with |q_2|.
    """
    n, ell, g = model.n, model.ell, model.gamma
    w1, w2 = model.varpi(1), model.varpi(2)
    q2 = np.array(model.q2)
    l1, l2 = X[:, 0], X[:, 1]
    if offset:
        d2 = X[:, 2 + n:]
        xi1, xi2 = X[:, 2:2 + n], q2 + d2
    else:
        xi1, xi2 = X[:, 2:2 + n], X[:, 2 + n:]
        d2 = xi2 - q2
    coupling = (l1 * l2) ** ((n - 2) / 2) / g ** (n - 2)
    kk = k.C3 * (l1 * l2) ** (n / 2) / g**n
    out = np.empty_like(X)
    out[:, 0] = k.C1 * abs(w1) * l1**ell - coupling
    out[:, 1] = k.C1 * abs(w2) * l2**ell - coupling
    out[:, 2:2 + n] = (k.C2 * w1 * l1 ** (ell - 1))[:, None] * xi1 + (kk / l2)[:, None] * (xi1 - xi2)
    out[:, 2 + n:] = (k.C2 * w2 * l2 ** (ell - 1))[:, None] * d2 + (kk / l1)[:, None] * (xi2 - xi1)
    return out


def _jac_batch(X: np.ndarray, model: TwinPeakModel, k: ReductionConstants, offset: bool = False) -> np.ndarray:
    n, ell, g = model.n, model.ell, model.gamma
    w1, w2 = model.varpi(1), model.varpi(2)
    q2 = np.array(model.q2)
    B = X.shape[0]
    N = 2 * n + 2
    l1, l2 = X[:, 0], X[:, 1]
    if offset:
        d2 = X[:, 2 + n:]
        xi1, xi2 = X[:, 2:2 + n], q2 + d2
    else:
        xi1, xi2 = X[:, 2:2 + n], X[:, 2 + n:]
        d2 = xi2 - q2
    coupling = (l1 * l2) ** ((n - 2) / 2) / g ** (n - 2)
    kk = k.C3 * (l1 * l2) ** (n / 2) / g**n
    J = np.zeros((B, N, N))
    e = (n - 2) / 2
    J[:, 0, 0] = ell * k.C1 * abs(w1) * l1 ** (ell - 1) - e * coupling / l1
    J[:, 0, 1] = -e * coupling / l2
    J[:, 1, 0] = -e * coupling / l1
    J[:, 1, 1] = ell * k.C1 * abs(w2) * l2 ** (ell - 1) - e * coupling / l2
    a1 = k.C2 * w1 * l1 ** (ell - 1)
    a2 = k.C2 * w2 * l2 ** (ell - 1)
    da1 = k.C2 * w1 * (ell - 1) * l1 ** (ell - 2)
    da2 = k.C2 * w2 * (ell - 1) * l2 ** (ell - 2)
    b1 = kk / l2  # = C3 l1^(n/2) l2^(n/2-1) / g^n
    b2 = kk / l1
    db1_dl1 = (n / 2) * b1 / l1
    db1_dl2 = (n / 2 - 1) * b1 / l2
    db2_dl1 = (n / 2 - 1) * b2 / l1
    db2_dl2 = (n / 2) * b2 / l2
    d12 = xi1 - xi2
    r1 = slice(2, 2 + n)
    r2 = slice(2 + n, N)
    J[:, r1, 0] = da1[:, None] * xi1 + db1_dl1[:, None] * d12
    J[:, r1, 1] = db1_dl2[:, None] * d12
    J[:, r2, 0] = db2_dl1[:, None] * (-d12)
    J[:, r2, 1] = da2[:, None] * d2 + db2_dl2[:, None] * (-d12)
    idx = np.arange(n)
    J[:, 2 + idx, 2 + idx] = (a1 + b1)[:, None]
    J[:, 2 + idx, 2 + n + idx] = (-b1)[:, None]
    J[:, 2 + n + idx, 2 + idx] = (-b2)[:, None]
    J[:, 2 + n + idx, 2 + n + idx] = (a2 + b2)[:, None]
    return J


def t_map(p: ReducedPoint, model: TwinPeakModel, k: ReductionConstants) -> np.ndarray:
    return _t_batch(p.to_vector()[None, :], model, k)[0]


def jacobian(p: ReducedPoint, model: TwinPeakModel, k: ReductionConstants) -> np.ndarray:
    return _jac_batch(p.to_vector()[None, :], model, k)[0]


def reduced_gradient_model(p: ReducedPoint, model: TwinPeakModel, k: ReductionConstants) -> np.ndarray:
    """Leading-order model of the rescaled reduced gradient: Cb * T."""
    return k.Cb * t_map(p, model, k)


# ---------------------------------------------------------------------------
# the explicit zero


@dataclass(frozen=True)
class TauSolution:
    point: ReducedPoint
    alpha: float
    beta: float
    D_tau: float


def solve_tau_full(model: TwinPeakModel, k: ReductionConstants) -> TauSolution:
    n, ell, g = model.n, model.ell, model.gamma
    w1, w2 = model.varpi(1), model.varpi(2)
    if w2 == 0:
        raise ValueError("varpi_2 vanishes")
    if n - 2 == ell:
        raise ValueError("ell = n - 2 makes the lambda exponent blow up")
    if not w1 / w2 > 0:
        raise ValueError("varpi_1 and varpi_2 must have the same sign")
    alpha = (w1 / w2) ** (1.0 / ell)
    l1 = (g ** (n - 2) * k.C1 * abs(w1) / alpha ** ((n - 2) / 2)) ** (1.0 / (n - 2 - ell))
    l2 = alpha * l1
    # Each coordinate j solves a 2x2 linear system; transverse ones give 0.
    kk = k.C3 * (l1 * l2) ** (n / 2) / g**n
    a1 = k.C2 * w1 * l1 ** (ell - 1)
    a2 = k.C2 * w2 * l2 ** (ell - 1)
    b1, b2 = kk / l2, kk / l1
    det = a1 * a2 + a1 * b2 + a2 * b1
    q2 = np.array(model.q2)
    xi1 = b1 * a2 * q2 / det
    xi2 = (a1 + b1) * a2 * q2 / det
    beta = w2 * l2**ell * l1**2 / (w1 * l1**ell * l2**2)
    D_tau = g / math.sqrt(l1 * l2)
    return TauSolution(ReducedPoint(l1, l2, tuple(xi1), tuple(xi2)), alpha, beta, D_tau)


def _xi2_offset(sol: TauSolution, model: TwinPeakModel, k: ReductionConstants) -> np.ndarray:
    """xi_2 - q_2 at P_tau computed without cancellation: equals -xi_1 / beta."""
    return -np.array(sol.point.xi1) / sol.beta


def solve_tau(model: TwinPeakModel, k: ReductionConstants) -> ReducedPoint:
    return solve_tau_full(model, k).point


def det_sign_at_tau(model: TwinPeakModel, k: ReductionConstants) -> int:
    sign, _ = np.linalg.slogdet(jacobian(solve_tau(model, k), model, k))
    return int(sign)


def gamma_o_estimate(model: TwinPeakModel, k: ReductionConstants, D_threshold: float) -> float:
    """Largest gap gamma for which the explicit zero has D_tau >= D_threshold.

    From the closed form of P_tau, D_tau^(n-2-ell) = gamma^(-ell) alpha^(ell/2) / (C1 |varpi_1|),
    so gamma_o = sqrt(alpha) (C1 |varpi_1|)^(-1/ell) D_threshold^(-(n-2-ell)/ell).
    """
    n, ell = model.n, model.ell
    w1, w2 = model.varpi(1), model.varpi(2)
    alpha = (w1 / w2) ** (1.0 / ell)
    return math.sqrt(alpha) * (k.C1 * abs(w1)) ** (-1.0 / ell) * D_threshold ** (-(n - 2 - ell) / ell)


# ---------------------------------------------------------------------------
# Brouwer degree by root enumeration


@dataclass
class DegreeResult:
    degree: int
    roots: list[np.ndarray]
    signs: list[int]
    min_boundary_norm: float
    n_starts: int
    converged_starts: int
    extra: dict = field(default_factory=dict)


BatchMap = Callable[[np.ndarray], np.ndarray]


def fd_jacobian_batch(F: BatchMap, U: np.ndarray, step: float = 1e-7) -> np.ndarray:
    B, N = U.shape
    J = np.empty((B, N, N))
    for i in range(N):
        e = np.zeros(N)
        e[i] = step
        J[:, :, i] = (F(U + e) - F(U - e)) / (2 * step)
    return J


def damped_newton_batch(F: BatchMap, JF: BatchMap, U0: np.ndarray, tol: float = 1e-12,
                        max_iter: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Newton with Armijo backtracking on |F|^2, run on a batch of starts.

    Returns (U, converged) where converged marks rows with |F| <= tol.
    """
    U = U0.copy()
    FU = F(U)
    norm2 = np.sum(FU * FU, axis=1)
    active = norm2 > tol * tol
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        J = JF(U[idx])
        try:
            step = -np.linalg.solve(J, FU[idx][:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = -np.stack([np.linalg.lstsq(Ji, fi, rcond=None)[0] for Ji, fi in zip(J, FU[idx])])
        t = np.ones(idx.size)
        base = norm2[idx]
        accepted = np.zeros(idx.size, dtype=bool)
        newU = U[idx].copy()
        newF = FU[idx].copy()
        newN = base.copy()
        for _ls in range(40):
            pending = ~accepted
            if not pending.any():
                break
            trial = U[idx][pending] + t[pending, None] * step[pending]
            Ft = F(trial)
            nt = np.sum(Ft * Ft, axis=1)
            ok = nt <= (1 - 1e-4 * t[pending]) * base[pending]
            sel = np.nonzero(pending)[0]
            good = sel[ok]
            newU[good] = trial[ok]
            newF[good] = Ft[ok]
            newN[good] = nt[ok]
            accepted[good] = True
            t[sel[~ok]] *= 0.5
        U[idx] = newU
        FU[idx] = newF
        norm2[idx] = newN
        stalled = idx[~accepted]
        active[idx] = norm2[idx] > tol * tol
        active[stalled] = False
    return U, norm2 <= tol * tol


def _boundary_samples(N: int, n_random: int, rng: np.random.Generator) -> np.ndarray:
    """Points on the surface of [-1, 1]^N: face centers, random face points, corners."""
    pts = [np.vstack([np.eye(N), -np.eye(N)])]
    R = rng.uniform(-1, 1, size=(n_random, N))
    face = rng.integers(0, N, size=n_random)
    R[np.arange(n_random), face] = rng.choice([-1.0, 1.0], size=n_random)
    pts.append(R)
    pts.append(rng.choice([-1.0, 1.0], size=(min(n_random, 2**N), N)))
    return np.vstack(pts)


def min_boundary_norm(G: BatchMap, N: int, rng: np.random.Generator, n_random: int = 20000) -> float:
    """Sampled minimum of |G| over the boundary of the unit box, refined by local search."""
    P = _boundary_samples(N, n_random, rng)
    vals = np.linalg.norm(G(P), axis=1)
    best = P[np.argsort(vals)[:20]]
    best_val = float(np.min(vals))
    # Local refinement: random perturbations kept on the face of the best points.
    scale = 0.2
    for _ in range(30):
        trial = best[:, None, :] + scale * rng.normal(size=(best.shape[0], 16, N))
        trial = trial.reshape(-1, N)
        trial = np.clip(trial, -1, 1)
        # project onto the boundary: push the largest coordinate to +-1
        i = np.argmax(np.abs(trial), axis=1)
        trial[np.arange(trial.shape[0]), i] = np.sign(trial[np.arange(trial.shape[0]), i])
        tv = np.linalg.norm(G(trial), axis=1)
        allp = np.vstack([best, trial])
        allv = np.concatenate([np.linalg.norm(G(best), axis=1), tv])
        order = np.argsort(allv)[: best.shape[0]]
        best = allp[order]
        best_val = min(best_val, float(allv[order[0]]))
        scale *= 0.85
    return best_val


def degree_on_box(G: BatchMap, N: int, JG: BatchMap | None = None, n_starts: int = 200, seed: int = 0,
                  root_tol: float = 1e-11, cluster_tol: float = 1e-7, boundary_samples: int = 20000
                  ) -> DegreeResult:
    """Brouwer degree of G on [-1, 1]^N at 0 by enumerating and signing its roots.

    G and JG act on batches (rows). Roots are found by damped Newton from
    the box center plus ``n_starts`` uniform starts, kept if inside the box,
    and clustered; the degree is the sum of sign det JG over clusters.
    """
    rng = np.random.default_rng(seed)
    if JG is None:
        JG = lambda U: fd_jacobian_batch(G, U)  # noqa: E731
    bnorm = min_boundary_norm(G, N, rng, boundary_samples)
    if bnorm < 1e3 * root_tol:
        raise NumericalFailure(f"map nearly vanishes on the boundary (min |G| = {bnorm:.3e})")
    starts = np.vstack([np.zeros((1, N)), rng.uniform(-1, 1, size=(n_starts, N))])
    U, conv = damped_newton_batch(G, JG, starts, tol=root_tol)
    inside = conv & (np.max(np.abs(U), axis=1) <= 1.0)
    roots: list[np.ndarray] = []
    for u in U[inside]:
        if not any(np.max(np.abs(u - r)) <= cluster_tol for r in roots):
            roots.append(u)
    signs = []
    for r in roots:
        J = JG(r[None, :])[0]
        if np.linalg.cond(J) > 1e12:
            raise NumericalFailure("singular Jacobian at a root")
        signs.append(int(np.linalg.slogdet(J)[0]))
    return DegreeResult(int(sum(signs)), roots, signs, bnorm, starts.shape[0], int(np.count_nonzero(conv)))


@dataclass
class ScaledT:
    """T in box coordinates around P_tau, with components rescaled to O(1).

    X = P_tau + mu * lambda1_tau * U and G(U) = S * T(X) with S a positive
    diagonal, so G has the same degree as T on the box.
    """

    model: TwinPeakModel
    k: ReductionConstants
    mu: float = 0.1

    def __post_init__(self):
        sol = solve_tau_full(self.model, self.k)
        self.tau = sol
        self.center = sol.point.to_vector()
        # xi_2 is carried as an offset from q_2 (see _t_batch)
        self.center[2 + self.model.n:] = _xi2_offset(sol, self.model, self.k)
        self.h = self.mu * sol.point.lambda1
        n, ell = self.model.n, self.model.ell
        l1, l2 = sol.point.lambda1, sol.point.lambda2
        w1, w2 = abs(self.model.varpi(1)), abs(self.model.varpi(2))
        s = np.empty(2 * n + 2)
        s[0] = 1.0 / (self.k.C1 * w1 * l1**ell)
        s[1] = 1.0 / (self.k.C1 * w2 * l2**ell)
        s[2:2 + n] = 1.0 / (self.k.C2 * w1 * l1 ** (ell - 1) * self.h)
        s[2 + n:] = 1.0 / (self.k.C2 * w2 * l2 ** (ell - 1) * self.h)
        self.scale = s
        self.N = 2 * n + 2

    def _internal(self, U: np.ndarray) -> np.ndarray:
        return self.center + self.h * U

    def to_point(self, U: np.ndarray) -> np.ndarray:
        """Physical coordinates (xi_2 absolute) of box coordinates U."""
        X = self._internal(np.atleast_2d(U)).copy()
        X[:, 2 + self.model.n:] += np.array(self.model.q2)
        return X[0] if np.ndim(U) == 1 else X

    def __call__(self, U: np.ndarray) -> np.ndarray:
        return self.scale * _t_batch(self._internal(U), self.model, self.k, offset=True)

    def jac(self, U: np.ndarray) -> np.ndarray:
        J = _jac_batch(self._internal(U), self.model, self.k, offset=True)
        return self.scale[None, :, None] * J * self.h


def degree_of_t(model: TwinPeakModel, k: ReductionConstants, mu: float = 0.1, n_starts: int = 200,
                seed: int = 0) -> DegreeResult:
    G = ScaledT(model, k, mu)
    res = degree_on_box(G, G.N, G.jac, n_starts=n_starts, seed=seed)
    res.extra["roots_physical"] = [G.to_point(r) for r in res.roots]
    return res


@dataclass
class SmoothPerturbation:
    """eps_i * sin(a_i . U + b_i): a bounded, smooth vector field on the box."""

    amplitude: np.ndarray
    freq: np.ndarray
    phase: np.ndarray

    @classmethod
    def random(cls, N: int, bound: float, rng: np.random.Generator, max_freq: float = 1.5):
        """Field with Euclidean norm <= bound everywhere."""
        amp = rng.uniform(-1, 1, size=N)
        amp *= bound / np.linalg.norm(amp)
        freq = rng.uniform(-max_freq, max_freq, size=(N, N)) / math.sqrt(N)
        phase = rng.uniform(0, 2 * math.pi, size=N)
        return cls(amp, freq, phase)

    def __call__(self, U: np.ndarray) -> np.ndarray:
        return self.amplitude * np.sin(U @ self.freq.T + self.phase)

    def jac(self, U: np.ndarray) -> np.ndarray:
        c = np.cos(U @ self.freq.T + self.phase)  # (B, N)
        return (self.amplitude * c)[:, :, None] * self.freq[None, :, :]


def robustness_check(model: TwinPeakModel, k: ReductionConstants, n_perturb: int = 20, seed: int = 0,
                     mu: float = 0.1, fraction: float = 0.5, n_starts: int = 100) -> list[dict]:
    """Degrees of T + (bounded perturbation) for random boundary-dominated perturbations.

    Each perturbation has sup-norm at most ``fraction`` times the sampled
    minimum of |T| on the boundary, which is the admissibility condition of
    the homotopy-invariance argument.
    """
    G = ScaledT(model, k, mu)
    rng = np.random.default_rng(seed)
    base = degree_on_box(G, G.N, G.jac, n_starts=n_starts, seed=seed)
    out = []
    for i in range(n_perturb):
        pert = SmoothPerturbation.random(G.N, fraction * base.min_boundary_norm, rng)

        def H(U, pert=pert):
            return G(U) + pert(U)

        def JH(U, pert=pert):
            return G.jac(U) + pert.jac(U)

        res = degree_on_box(H, G.N, JH, n_starts=n_starts, seed=seed + 1 + i)
        out.append({
            "degree": res.degree,
            "n_roots": len(res.roots),
            "perturbation_bound": float(np.linalg.norm(pert.amplitude)),
            "min_boundary_norm_T": base.min_boundary_norm,
            "min_boundary_norm_G": res.min_boundary_norm,
        })
    return out


def construct(model: TwinPeakModel, D_threshold: float = 20.0, mu: float = 0.1, n_starts: int = 200,
              seed: int = 0) -> dict:
    """Full finite-dimensional certificate for one model, as a JSON-ready dict."""
    violations = validate(model)
    if violations:
        raise ValueError("; ".join(str(v) for v in violations))
    k = compute_constants(model.n, model.ell)
    sol = solve_tau_full(model, k)
    G = ScaledT(model, k, mu)
    residual = float(np.linalg.norm(G(np.zeros((1, G.N)))[0]))
    deg = degree_of_t(model, k, mu=mu, n_starts=n_starts, seed=seed)
    return {
        "model": model.to_dict(),
        "constants": k.to_dict(),
        "P_tau": sol.point.to_dict(),
        "alpha": sol.alpha,
        "beta": sol.beta,
        "D_tau": sol.D_tau,
        "T_residual_scaled": residual,
        "det_sign": det_sign_at_tau(model, k),
        "degree": deg.degree,
        "n_root_clusters": len(deg.roots),
        "min_boundary_norm": deg.min_boundary_norm,
        "box_mu": mu,
        "gamma_o": gamma_o_estimate(model, k, D_threshold),
        "D_threshold": D_threshold,
        "seed": seed,
    }
