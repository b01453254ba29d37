"""Standard bubbles V_{lambda,xi}(y) = (lambda / (lambda^2 + |y - xi|^2))^((n-2)/2)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np


@dataclass(frozen=True)
class Bubble:
    n: int
    lam: float
    xi: tuple[float, ...]

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("bubble scale lambda must be positive")
        xi = tuple(float(v) for v in np.ravel(self.xi))
        if len(xi) != self.n:
            raise ValueError(f"center has length {len(xi)}, expected {self.n}")
        object.__setattr__(self, "xi", xi)

    @property
    def center(self) -> np.ndarray:
        return np.array(self.xi)


def _sq_dist(b: Bubble, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != b.n:
        raise ValueError(f"point has length {y.shape[-1]}, expected {b.n}")
    return np.sum((y - b.center) ** 2, axis=-1)


def bubble_value(b: Bubble, y):
    r2 = _sq_dist(b, y)
    return (b.lam / (b.lam**2 + r2)) ** ((b.n - 2) / 2)


def bubble_dlambda(b: Bubble, y):
    n, lam = b.n, b.lam
    r2 = _sq_dist(b, y)
    return -((n - 2) / 2) * lam ** ((n - 4) / 2) * (lam**2 - r2) / (lam**2 + r2) ** (n / 2)


def bubble_dxi(b: Bubble, y, j: int):
    """Derivative in the j-th center coordinate; j is 1-based."""
    if not 1 <= j <= b.n:
        raise ValueError(f"coordinate index {j} outside 1..{b.n}")
    n, lam = b.n, b.lam
    y = np.asarray(y, dtype=float)
    r2 = _sq_dist(b, y)
    return -(n - 2) * lam ** ((n - 2) / 2) * (b.xi[j - 1] - y[..., j - 1]) / (lam**2 + r2) ** (n / 2)


def laplacian_fd(f, y: np.ndarray, h: float) -> float:
    """Fourth-order central-difference Laplacian of a scalar function."""
    y = np.asarray(y, dtype=float)
    f0 = f(y)
    total = 0.0
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = h
        total += (-f(y + 2 * e) + 16 * f(y + e) - 30 * f0 + 16 * f(y - e) - f(y - 2 * e)) / (12 * h * h)
    return total


def pde_residual(b: Bubble, y, relative: bool = False) -> float:
    """Delta V + n(n-2) V^((n+2)/(n-2)) at y, Laplacian by finite differences.

    With ``relative`` the residual is divided by the local scale
    n(n-2) V^((n+2)/(n-2)), which equals |Delta V| for an exact bubble.
    """
    y = np.asarray(y, dtype=float)
    n = b.n
    h = 1e-3 * max(b.lam, float(np.sqrt(_sq_dist(b, y))))
    lap = laplacian_fd(lambda z: float(bubble_value(b, z)), y, h)
    source = n * (n - 2) * float(bubble_value(b, y)) ** ((n + 2) / (n - 2))
    res = lap + source
    return res / source if relative else res


@dataclass(frozen=True)
class BubbleConfig:
    b1: Bubble
    b2: Bubble
    gamma: float

    def __post_init__(self):
        if self.b1.n != self.b2.n:
            raise ValueError("bubbles live in different dimensions")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @classmethod
    def make(cls, n, lambda1, lambda2, xi1, xi2, gamma) -> "BubbleConfig":
        return cls(Bubble(n, lambda1, tuple(xi1)), Bubble(n, lambda2, tuple(xi2)), float(gamma))

    @property
    def n(self) -> int:
        return self.b1.n

    @property
    def lam(self) -> float:
        return math.sqrt(self.b1.lam * self.b2.lam)

    @property
    def D(self) -> float:
        return self.gamma / self.lam

    @property
    def d(self) -> float:
        return float(np.linalg.norm(self.b1.center - self.b2.center)) / self.lam

    def swapped(self) -> "BubbleConfig":
        return BubbleConfig(self.b2, self.b1, self.gamma)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "lambda1": self.b1.lam,
            "lambda2": self.b2.lam,
            "xi1": list(self.b1.xi),
            "xi2": list(self.b2.xi),
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BubbleConfig":
        return cls.make(int(d["n"]), float(d["lambda1"]), float(d["lambda2"]), d["xi1"], d["xi2"], d["gamma"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "BubbleConfig":
        return cls.from_dict(json.loads(s))
