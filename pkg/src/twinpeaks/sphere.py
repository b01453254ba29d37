"""Stereographic projection from the north pole of S^n onto R^n.

The projection sends x = (x_1, ..., x_{n+1}) on the unit sphere to
y_i = x_i / (1 - x_{n+1}); the south pole lands on the origin. A solution v
of the flat problem on R^n lifts to the sphere through the conformal weight
((1 + |y|^2) / 2)^((n-2)/2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

# Below this gap the quotient x_i / (1 - x_{n+1}) has lost double precision.
NORTH_POLE_GUARD = 1e-12
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpherePoint:
    coords: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in np.ravel(self.coords))
        if len(c) < 2:
            raise ValueError("a sphere point needs at least two coordinates")
        if abs(sum(v * v for v in c) - 1.0) > UNIT_TOL:
            raise ValueError("coordinates are not on the unit sphere")
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)

    @classmethod
    def normalized(cls, v) -> "SpherePoint":
        v = np.asarray(v, dtype=float)
        return cls(tuple(v / np.linalg.norm(v)))

    @classmethod
    def north(cls, n: int) -> "SpherePoint":
        return cls(tuple([0.0] * n + [1.0]))

    @classmethod
    def south(cls, n: int) -> "SpherePoint":
        return cls(tuple([0.0] * n + [-1.0]))


def _coords(x) -> np.ndarray:
    if isinstance(x, SpherePoint):
        return x.as_array()
    return np.asarray(x, dtype=float)


def project(x) -> np.ndarray:
    c = _coords(x)
    last = c[..., -1]
    # on the sphere 1 - x_{n+1} = |x'|^2 / (1 + x_{n+1}); that form keeps full
    # relative precision in the northern hemisphere where the difference cancels
    gap = np.where(last > 0, np.sum(c[..., :-1] ** 2, axis=-1) / np.maximum(1.0 + last, 1.0), 1.0 - last)
    if np.any(gap < NORTH_POLE_GUARD):
        raise ValueError("stereographic projection sends the north pole to infinity")
    return c[..., :-1] / gap[..., None] if c.ndim > 1 else c[:-1] / gap


def project_many(X: np.ndarray) -> np.ndarray:
    """Row-wise ``project`` for an (m, n+1) array of unit vectors."""
    return project(np.asarray(X, dtype=float).reshape(-1, np.shape(X)[-1]))


def _unproject_array(y: np.ndarray) -> np.ndarray:
    r2 = np.sum(y * y, axis=-1, keepdims=True)
    top = 2.0 * y / (1.0 + r2)
    last = (r2 - 1.0) / (r2 + 1.0)
    return np.concatenate([top, last], axis=-1)


def unproject(y) -> SpherePoint:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("unproject takes a single point; use unproject_many for batches")
    return SpherePoint(tuple(_unproject_array(y)))


def unproject_many(Y: np.ndarray) -> np.ndarray:
    return _unproject_array(np.asarray(Y, dtype=float))


def conformal_factor(y) -> np.ndarray:
    """Pullback of the round metric: g_sphere = 4 / (1 + |y|^2)^2 * g_flat."""
    y = np.asarray(y, dtype=float)
    return 4.0 / (1.0 + np.sum(y * y, axis=-1)) ** 2


def transfer_solution(v: Callable, x) -> float:
    """U(x) = v(y) * ((1 + |y|^2)/2)^((n-2)/2) with y the projection of x."""
    y = project(x)
    n = y.shape[-1]
    w = ((1.0 + float(np.dot(y, y))) / 2.0) ** ((n - 2) / 2)
    return float(v(y)) * w


def random_sphere_points(n: int, m: int, rng: np.random.Generator, cap: float | None = None) -> np.ndarray:
    """m uniform points on S^n, optionally restricted to x_{n+1} <= cap."""
    out = np.empty((0, n + 1))
    while out.shape[0] < m:
        g = rng.standard_normal((2 * m, n + 1))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        if cap is not None:
            g = g[g[:, -1] <= cap]
        out = np.vstack([out, g])
    return out[:m]
