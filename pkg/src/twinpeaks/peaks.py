"""Twin pseudo-peak model of the prescribed curvature K.

Inside the ball of radius rho = hbar * gamma around each peak q_j the
function c_n K - n(n-2) equals P_j(y - q_j) plus an optional remainder.
Away from the peaks K is left unspecified by the construction; here the
local expansion is switched off by a smooth cutoff that is 1 on
B(q_j, rho/2) and 0 outside B(q_j, rho).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .polyalg import HomogeneousPoly, evaluate_many, iterated_laplacian_value


def c_tilde(n: int) -> float:
    return (n - 2) / (4 * (n - 1))


def _mollifier(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    a = _mollifier(t)
    b = _mollifier(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str

    def __str__(self):
        return f"[{self.condition}] {self.message}"


@dataclass(frozen=True)
class TwinPeakModel:
    n: int
    ell: int
    gamma: float
    q2: tuple[float, ...]
    P1: HomogeneousPoly
    P2: HomogeneousPoly
    hbar: float = 0.4
    remainder: tuple[float, float] = (0.0, 0.0)
    CR1: float | None = None
    CR2: float | None = None
    CP1: float | None = None
    CP2: float | None = None
    Cp: float | None = None
    Comega: float | None = None
    Cb: float | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "q2", tuple(float(v) for v in np.ravel(self.q2)))
        object.__setattr__(self, "remainder", tuple(float(c) for c in self.remainder))
        # Unset constants default to the tightest values the model itself admits.
        defaults = {
            "CR1": abs(self.remainder[0]),
            "CR2": abs(self.remainder[1]),
            "CP1": poly_sphere_bound(self.P1),
            "CP2": poly_sphere_bound(self.P2),
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if self.Cp is None or self.Comega is None:
            try:
                w1, w2 = self.varpi(1), self.varpi(2)
            except ValueError:
                w1 = w2 = float("nan")
            if self.Cp is None:
                cp = max(abs(w1) / abs(w2), abs(w2) / abs(w1)) if w1 and w2 else float("inf")
                object.__setattr__(self, "Cp", float(cp) if math.isfinite(cp) else float("inf"))
            if self.Comega is None:
                object.__setattr__(self, "Comega", abs(w1) if math.isfinite(w1) else float("inf"))
        if self.Cb is None:
            object.__setattr__(self, "Cb", self.k_sup_bound())

    # derived quantities ---------------------------------------------------
    @property
    def rho(self) -> float:
        return self.hbar * self.gamma

    @property
    def q1(self) -> np.ndarray:
        return np.zeros(self.n)

    @property
    def peaks(self) -> tuple[np.ndarray, np.ndarray]:
        return self.q1, np.array(self.q2)

    def varpi(self, j: int) -> float:
        key = ("varpi", j)
        if key not in self._cache:
            poly = self.P1 if j == 1 else self.P2
            self._cache[key] = float(iterated_laplacian_value(poly))
        return self._cache[key]

    def k_sup_bound(self) -> float:
        """Upper bound for |K| implied by the polynomial and remainder constants."""
        n = self.n
        rho = self.rho
        hmax = max(self.CP1 * rho**self.ell + self.CR1 * rho ** (self.ell + 1),
                   self.CP2 * rho**self.ell + self.CR2 * rho ** (self.ell + 1))
        return (n * (n - 2) + hmax) / c_tilde(n)

    # serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "ell": self.ell,
            "gamma": self.gamma,
            "q2": list(self.q2),
            "P1": self.P1.to_dict(),
            "P2": self.P2.to_dict(),
            "hbar": self.hbar,
            "remainder": list(self.remainder),
            "CR1": self.CR1,
            "CR2": self.CR2,
            "CP1": self.CP1,
            "CP2": self.CP2,
            "Cp": self.Cp,
            "Comega": self.Comega,
            "Cb": self.Cb,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TwinPeakModel":
        n = int(d["n"])
        gamma = float(d["gamma"])
        q2 = d.get("q2")
        if q2 is None:
            q2 = [gamma] + [0.0] * (n - 1)
        kwargs = {}
        for name in ("hbar", "CR1", "CR2", "CP1", "CP2", "Cp", "Comega", "Cb"):
            if d.get(name) is not None:
                kwargs[name] = float(d[name])
        if d.get("remainder") is not None:
            kwargs["remainder"] = tuple(float(c) for c in d["remainder"])
        return cls(
            n=n,
            ell=int(d["ell"]),
            gamma=gamma,
            q2=tuple(float(v) for v in q2),
            P1=HomogeneousPoly.from_dict(d["P1"]),
            P2=HomogeneousPoly.from_dict(d["P2"]),
            **kwargs,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, s: str) -> "TwinPeakModel":
        return cls.from_dict(json.loads(s))

    def with_gamma(self, gamma: float) -> "TwinPeakModel":
        """Same peaks, gap rescaled along the current q2 direction."""
        q2 = np.array(self.q2)
        q2 = q2 / np.linalg.norm(q2) * gamma
        return replace(self, gamma=float(gamma), q2=tuple(q2), Cb=None, _cache={})


def poly_sphere_bound(poly: HomogeneousPoly, samples: int = 4000) -> float:
    """Estimate of max |P| on the unit sphere (sampled, deterministic).

    The sampled maximum is raised by 1% and capped by sum |c_alpha|, which is
    always a valid bound since |y^alpha| <= |y|^degree.
    """
    if poly.is_zero():
        return 0.0
    sampled = _sampled_sphere_max(poly, samples)
    return min(1.01 * sampled, float(sum(abs(c) for c in poly.terms.values())))


def _sampled_sphere_max(poly: HomogeneousPoly, samples: int = 4000) -> float:
    if poly.is_zero():
        return 0.0
    rng = np.random.default_rng(12345)
    u = rng.normal(size=(samples, poly.n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    axes = np.vstack([np.eye(poly.n), -np.eye(poly.n)])
    return float(np.max(np.abs(evaluate_many(poly, np.vstack([u, axes])))))


def symmetric_model(n: int = 6, ell: int = 2, gamma: float = 0.05, scale: float = 1.0, **kw) -> TwinPeakModel:
    """P1 = P2 = -scale * |y|^ell (as a polynomial), q2 = gamma e1."""
    P = _neg_power_of_norm(n, ell, scale)
    q2 = (gamma,) + (0.0,) * (n - 1)
    return TwinPeakModel(n=n, ell=ell, gamma=gamma, q2=q2, P1=P, P2=P, **kw)


def _neg_power_of_norm(n: int, ell: int, scale: float) -> HomogeneousPoly:
    base = HomogeneousPoly.norm_squared(n)
    terms = {(0,) * n: 1.0}
    for _ in range(ell // 2):
        new: dict = {}
        for a, c in terms.items():
            for b, d in base.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                new[key] = new.get(key, 0.0) + c * d
        terms = new
    return HomogeneousPoly(n, ell, {a: -scale * c for a, c in terms.items()})


def random_model(rng: np.random.Generator, n: int | None = None, ell: int | None = None,
                 gamma: float | None = None) -> TwinPeakModel:
    """A random model satisfying every hypothesis, with q2 in a random direction."""
    from .polyalg import even_double_factorial, random_even_poly

    if n is None:
        n = int(rng.integers(6, 10))
    if ell is None:
        ell = int(rng.choice([e for e in range(2, n - 2, 2)]))
    if gamma is None:
        gamma = float(rng.uniform(0.02, 0.2))
    h = ell // 2
    anchor = HomogeneousPoly.monomial([2] * h + [0] * (n - h))
    polys = []
    for _ in range(2):
        R = random_even_poly(n, ell, rng, n_terms=4)
        target = -float(rng.uniform(0.5, 3.0)) * even_double_factorial(ell)
        s = (target - iterated_laplacian_value(R)) / even_double_factorial(ell)
        polys.append(R + anchor.scale(s))
    direction = rng.normal(size=n)
    direction /= np.linalg.norm(direction)
    return TwinPeakModel(n=n, ell=ell, gamma=gamma, q2=tuple(gamma * direction), P1=polys[0], P2=polys[1])


def validate(model: TwinPeakModel) -> list[Violation]:
    out: list[Violation] = []
    n, ell = model.n, model.ell
    if not 6 <= n < 10:
        out.append(Violation("dimension", f"the construction is established only for 6 <= n < 10, got n = {n}"))
    if ell % 2 or not 2 <= ell < n - 2:
        out.append(Violation("flatness", f"flatness must be even with 2 <= ell < n-2, got ell = {ell}, n = {n}"))
    for j, P in ((1, model.P1), (2, model.P2)):
        if P.n != n or P.degree != ell:
            out.append(Violation("expansion", f"P{j} must be homogeneous of degree {ell} on R^{n}"))
    if len(model.q2) != n:
        out.append(Violation("gap", f"q2 must have length {n}"))
    elif not math.isclose(float(np.linalg.norm(model.q2)), model.gamma, rel_tol=1e-9):
        out.append(Violation("gap", "gamma must equal |q2|"))
    if not model.gamma > 0:
        out.append(Violation("gap", "gamma must be positive"))
    if not 0 < model.hbar < 0.5:
        out.append(Violation("cutoff", f"hbar must lie in (0, 1/2), got {model.hbar}"))
    if ell % 2 or any(v.condition == "expansion" for v in out):
        return out
    w1, w2 = model.varpi(1), model.varpi(2)
    for j, w in ((1, w1), (2, w2)):
        if not w < 0:
            out.append(Violation("pseudo-peak", f"varpi_{j} = {w:g} must be negative"))
    if w1 < 0 and w2 < 0:
        if not (abs(w1) / model.Cp <= abs(w2) * (1 + 1e-12) and abs(w2) <= model.Cp * abs(w1) * (1 + 1e-12)):
            out.append(Violation("comparable-peaks", f"|varpi_2|/|varpi_1| = {abs(w2) / abs(w1):g} outside [1/Cp, Cp], Cp = {model.Cp:g}"))
    if w1 < -model.Comega * (1 + 1e-12):
        out.append(Violation("varpi-bound", f"varpi_1 = {w1:g} below -Comega = {-model.Comega:g}"))
    for j, P, CP in ((1, model.P1, model.CP1), (2, model.P2, model.CP2)):
        if _sampled_sphere_max(P) > CP * (1 + 1e-9):
            out.append(Violation("poly-bound", f"|P{j}(y)| <= CP{j} |y|^ell fails for CP{j} = {CP:g}"))
    for j, c, CR in ((1, model.remainder[0], model.CR1), (2, model.remainder[1], model.CR2)):
        if abs(c) > CR * (1 + 1e-12):
            out.append(Violation("remainder-bound", f"remainder coefficient {c:g} exceeds CR{j} = {CR:g}"))
    if model.Cb < model.k_sup_bound() * (1 - 1e-12):
        out.append(Violation("curvature-bound", f"Cb = {model.Cb:g} is below the supremum bound {model.k_sup_bound():g} of |K|"))
    return out


def _local_terms(model: TwinPeakModel, pts: np.ndarray, j: int) -> np.ndarray:
    center = model.q1 if j == 1 else np.array(model.q2)
    P = model.P1 if j == 1 else model.P2
    c = model.remainder[j - 1]
    z = pts - center
    dist = np.linalg.norm(z, axis=1)
    val = evaluate_many(P, z)
    if c:
        val = val + c * dist ** (model.ell + 1)
    rho = model.rho
    weight = smooth_step((rho - dist) / (0.5 * rho))
    return np.where(dist < rho, weight * val, 0.0)


def h_eval_many(model: TwinPeakModel, pts) -> np.ndarray:
    """c_n H at each row of ``pts``: local expansion around each peak times the cutoff."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != model.n:
        raise ValueError(f"points must have {model.n} columns")
    return _local_terms(model, pts, 1) + _local_terms(model, pts, 2)


def h_eval(model: TwinPeakModel, y) -> float:
    y = np.asarray(y, dtype=float)
    if y.shape != (model.n,):
        raise ValueError(f"point must have length {model.n}")
    return float(h_eval_many(model, y[None, :])[0])


def k_eval_many(model: TwinPeakModel, pts) -> np.ndarray:
    n = model.n
    return (n * (n - 2) + h_eval_many(model, pts)) / c_tilde(n)


def varpi(model: TwinPeakModel, j: int) -> float:
    if j not in (1, 2):
        raise ValueError("peak index must be 1 or 2")
    return model.varpi(j)
