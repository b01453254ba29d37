"""Homogeneous polynomials on R^n stored as sparse multi-index tables.

Coefficients are kept as Python floats (or anything supporting + and *,
e.g. ``fractions.Fraction``), so the algebra is exact whenever the inputs
are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

MultiIndex = tuple[int, ...]


def _check_alpha(alpha: Iterable[int], n: int) -> MultiIndex:
    a = tuple(int(x) for x in alpha)
    if len(a) != n:
        raise ValueError(f"multi-index {a} has length {len(a)}, expected {n}")
    if any(x < 0 for x in a):
        raise ValueError(f"multi-index {a} has a negative exponent")
    return a


@dataclass(frozen=True)
class HomogeneousPoly:
    """A homogeneous polynomial sum_alpha c_alpha y^alpha of fixed degree."""

    n: int
    degree: int
    terms: Mapping[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        clean: dict[MultiIndex, float] = {}
        for alpha, c in dict(self.terms).items():
            a = _check_alpha(alpha, self.n)
            if sum(a) != self.degree:
                raise ValueError(f"term {a} has degree {sum(a)}, expected {self.degree}")
            if c != 0:
                clean[a] = clean.get(a, 0) + c
                if clean[a] == 0:
                    del clean[a]
        object.__setattr__(self, "terms", clean)

    # construction helpers -------------------------------------------------
    @classmethod
    def monomial(cls, alpha: Iterable[int], c: float = 1.0) -> "HomogeneousPoly":
        a = tuple(int(x) for x in alpha)
        return cls(len(a), sum(a), {a: c})

    @classmethod
    def constant(cls, n: int, c: float) -> "HomogeneousPoly":
        return cls(n, 0, {(0,) * n: c})

    @classmethod
    def norm_squared(cls, n: int, c: float = 1.0) -> "HomogeneousPoly":
        """c * (y_1^2 + ... + y_n^2)."""
        terms = {}
        for i in range(n):
            a = [0] * n
            a[i] = 2
            terms[tuple(a)] = c
        return cls(n, 2, terms)

    # arithmetic -----------------------------------------------------------
    def _same_space(self, other: "HomogeneousPoly"):
        if self.n != other.n or self.degree != other.degree:
            raise ValueError("polynomials live in different spaces")

    def __add__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        self._same_space(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0) + c
        return HomogeneousPoly(self.n, self.degree, out)

    def __neg__(self) -> "HomogeneousPoly":
        return self.scale(-1)

    def __sub__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        return self + (-other)

    def scale(self, s) -> "HomogeneousPoly":
        return HomogeneousPoly(self.n, self.degree, {a: s * c for a, c in self.terms.items()})

    __rmul__ = scale

    def reflect(self, i: int) -> "HomogeneousPoly":
        """Substitute y_i -> -y_i."""
        return HomogeneousPoly(
            self.n, self.degree, {a: (-c if a[i] % 2 else c) for a, c in self.terms.items()}
        )

    def is_zero(self) -> bool:
        return not self.terms

    # serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "degree": self.degree,
            "terms": [{"alpha": list(a), "c": float(c)} for a, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "HomogeneousPoly":
        terms: dict[MultiIndex, float] = {}
        for t in d.get("terms", []):
            a = tuple(int(x) for x in t["alpha"])
            terms[a] = terms.get(a, 0.0) + float(t["c"])
        return cls(int(d["n"]), int(d["degree"]), terms)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "HomogeneousPoly":
        return cls.from_dict(json.loads(s))

    def exponent_array(self) -> tuple[np.ndarray, np.ndarray]:
        """(alphas, coeffs) as arrays of shape (m, n) and (m,) for vectorized use."""
        if not self.terms:
            return np.zeros((0, self.n), dtype=np.int64), np.zeros(0)
        items = sorted(self.terms.items())
        alphas = np.array([a for a, _ in items], dtype=np.int64)
        coeffs = np.array([float(c) for _, c in items])
        return alphas, coeffs


def evaluate(poly: HomogeneousPoly, point) -> float:
    """Sum of c * prod(y_i ** alpha_i) at a single point."""
    y = np.asarray(point, dtype=float)
    if y.shape != (poly.n,):
        raise ValueError(f"point has shape {y.shape}, polynomial lives in R^{poly.n}")
    total = 0.0
    for alpha, c in poly.terms.items():
        term = float(c)
        for yi, ai in zip(y, alpha):
            if ai:
                term *= yi**ai
        total += term
    return total


def evaluate_many(poly: HomogeneousPoly, points: np.ndarray) -> np.ndarray:
    """Vectorized evaluation at rows of ``points`` (shape (N, n))."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != poly.n:
        raise ValueError(f"points must have shape (N, {poly.n})")
    alphas, coeffs = poly.exponent_array()
    out = np.zeros(pts.shape[0])
    for alpha, c in zip(alphas, coeffs):
        term = np.full(pts.shape[0], c)
        for i in np.nonzero(alpha)[0]:
            term *= pts[:, i] ** alpha[i]
        out += term
    return out


def laplacian(poly: HomogeneousPoly) -> HomogeneousPoly:
    if poly.degree < 2:
        raise ValueError("Laplacian of a degree < 2 homogeneous polynomial is not homogeneous")
    out: dict[MultiIndex, float] = {}
    for alpha, c in poly.terms.items():
        for i, ai in enumerate(alpha):
            if ai >= 2:
                b = list(alpha)
                b[i] -= 2
                b = tuple(b)
                out[b] = out.get(b, 0) + c * ai * (ai - 1)
    return HomogeneousPoly(poly.n, poly.degree - 2, out)


def iterated_laplacian_value(poly: HomogeneousPoly):
    """Apply the Laplacian degree/2 times and return the resulting constant."""
    if poly.degree % 2:
        raise ValueError("iterated Laplacian value needs an even degree")
    p = poly
    while p.degree > 0:
        p = laplacian(p)
    return p.terms.get((0,) * p.n, 0)


def double_factorial_minus2(m: int) -> int:
    """(m-1)(m-3)...3*1 for even m (1 for m = 0, 2) and 0 for odd m."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m % 2:
        return 0
    return math.prod(range(m - 1, 0, -2))


def reduction_coefficient(alpha: Iterable[int]) -> int:
    return math.prod(double_factorial_minus2(int(a)) for a in alpha)


def even_double_factorial(ell: int) -> int:
    """ell * (ell - 2) * ... * 2 for even ell (1 for ell = 0)."""
    if ell < 0 or ell % 2:
        raise ValueError("ell must be a non-negative even integer")
    return math.prod(range(ell, 0, -2))


def random_even_poly(
    n: int, degree: int, rng: np.random.Generator, n_terms: int = 6, even_only: bool = False
) -> HomogeneousPoly:
    """Random homogeneous polynomial; with ``even_only`` every exponent is even."""
    terms: dict[MultiIndex, float] = {}
    for _ in range(50 * n_terms):
        if len(terms) >= n_terms:
            break
        if even_only:
            a = rng.multinomial(degree // 2, np.ones(n) / n) * 2
        else:
            a = rng.multinomial(degree, np.ones(n) / n)
        terms[tuple(int(x) for x in a)] = float(rng.normal())
    return HomogeneousPoly(n, degree, terms)
