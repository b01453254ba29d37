"""Hot loops for the two-center quadrature and the Monte-Carlo mass integral.

Every kernel exists twice: a pure-numpy version and a numba ``@njit``
version with the same signature. The numba versions are used when numba
imports cleanly and ``TWINPEAKS_DISABLE_NUMBA`` is unset (or "0"). Both
produce the same numbers up to floating-point summation order.

Kernel modes for ``axial_sum`` (points given as axial coordinate x measured
from xi_1 toward xi_2 and transverse radius r):

    0  I * dV1/dlambda1
    1  I * dV2/dlambda2
    2  I * dV1/dxi1   (component along the axis)
    3  I * dV2/dxi2   (component along the axis)
    4  S-integrand (lam1/(lam1^2+r1^2))^P (lam2/(lam2^2+r2^2))^Q
    5  I alone

where I = V1^p + V2^p - (V1 + V2)^p with p = (n+2)/(n-2).
"""

from __future__ import annotations

import os

import numpy as np

MODE_DLAMBDA1 = 0
MODE_DLAMBDA2 = 1
MODE_DXI1 = 2
MODE_DXI2 = 3
MODE_S = 4
MODE_BRACKET = 5


def _numba_requested() -> bool:
    return os.environ.get("TWINPEAKS_DISABLE_NUMBA", "0").strip().lower() in ("", "0", "false", "no")


try:
    if not _numba_requested():
        raise ImportError("numba disabled by TWINPEAKS_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy implementations


def bracket_np(v1, v2, p):
    """V1^p + V2^p - (V1+V2)^p without catastrophic cancellation."""
    a = np.maximum(v1, v2)
    b = np.minimum(v1, v2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(a > 0, b / a, 0.0)
    return b**p - a**p * np.expm1(p * np.log1p(ratio))


def axial_sum_np(x, r, w, n, lam1, lam2, dist, mode, P, Q):
    n = float(n)
    p = (n + 2.0) / (n - 2.0)
    r1s = x * x + r * r
    xd = x - dist
    r2s = xd * xd + r * r
    d1 = lam1 * lam1 + r1s
    d2 = lam2 * lam2 + r2s
    if mode == MODE_S:
        f = (lam1 / d1) ** P * (lam2 / d2) ** Q
        return float(np.sum(w * f))
    v1 = (lam1 / d1) ** ((n - 2.0) / 2.0)
    v2 = (lam2 / d2) ** ((n - 2.0) / 2.0)
    brk = bracket_np(v1, v2, p)
    if mode == MODE_DLAMBDA1:
        g = -((n - 2.0) / 2.0) * lam1 ** ((n - 4.0) / 2.0) * (lam1 * lam1 - r1s) / d1 ** (n / 2.0)
    elif mode == MODE_DLAMBDA2:
        g = -((n - 2.0) / 2.0) * lam2 ** ((n - 4.0) / 2.0) * (lam2 * lam2 - r2s) / d2 ** (n / 2.0)
    elif mode == MODE_DXI1:
        g = (n - 2.0) * lam1 ** ((n - 2.0) / 2.0) * x / d1 ** (n / 2.0)
    elif mode == MODE_DXI2:
        g = (n - 2.0) * lam2 ** ((n - 2.0) / 2.0) * xd / d2 ** (n / 2.0)
    elif mode == MODE_BRACKET:
        g = 1.0
    else:
        raise ValueError(f"unknown kernel mode {mode}")
    return float(np.sum(w * brk * g))


def pair_power_np(pts, c1, lam1, c2, lam2, n, power):
    """(V1 + V2)^power at each row of ``pts``."""
    e = (n - 2.0) / 2.0
    d1 = lam1 * lam1 + np.sum((pts - c1) ** 2, axis=1)
    d2 = lam2 * lam2 + np.sum((pts - c2) ** 2, axis=1)
    return ((lam1 / d1) ** e + (lam2 / d2) ** e) ** power


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _bracket_scalar(v1, v2, p):
        if v1 >= v2:
            a, b = v1, v2
        else:
            a, b = v2, v1
        if a <= 0.0:
            return 0.0
        return b**p - a**p * np.expm1(p * np.log1p(b / a))

    @njit(cache=True, nogil=True)
    def bracket_nb(v1, v2, p):
        out = np.empty(v1.shape[0])
        for i in range(v1.shape[0]):
            out[i] = _bracket_scalar(v1[i], v2[i], p)
        return out

    @njit(cache=True, nogil=True)
    def axial_sum_nb(x, r, w, n, lam1, lam2, dist, mode, P, Q):
        nf = float(n)
        p = (nf + 2.0) / (nf - 2.0)
        e = (nf - 2.0) / 2.0
        total = 0.0
        for i in range(x.shape[0]):
            r1s = x[i] * x[i] + r[i] * r[i]
            xd = x[i] - dist
            r2s = xd * xd + r[i] * r[i]
            d1 = lam1 * lam1 + r1s
            d2 = lam2 * lam2 + r2s
            if mode == 4:
                total += w[i] * (lam1 / d1) ** P * (lam2 / d2) ** Q
                continue
            v1 = (lam1 / d1) ** e
            v2 = (lam2 / d2) ** e
            brk = _bracket_scalar(v1, v2, p)
            if mode == 0:
                g = -e * lam1 ** ((nf - 4.0) / 2.0) * (lam1 * lam1 - r1s) / d1 ** (nf / 2.0)
            elif mode == 1:
                g = -e * lam2 ** ((nf - 4.0) / 2.0) * (lam2 * lam2 - r2s) / d2 ** (nf / 2.0)
            elif mode == 2:
                g = (nf - 2.0) * lam1**e * x[i] / d1 ** (nf / 2.0)
            elif mode == 3:
                g = (nf - 2.0) * lam2**e * xd / d2 ** (nf / 2.0)
            else:
                g = 1.0
            total += w[i] * brk * g
        return total

    @njit(cache=True, nogil=True)
    def pair_power_nb(pts, c1, lam1, c2, lam2, n, power):
        e = (n - 2.0) / 2.0
        m = pts.shape[0]
        dim = pts.shape[1]
        out = np.empty(m)
        for i in range(m):
            s1 = 0.0
            s2 = 0.0
            for k in range(dim):
                t1 = pts[i, k] - c1[k]
                t2 = pts[i, k] - c2[k]
                s1 += t1 * t1
                s2 += t2 * t2
            v = (lam1 / (lam1 * lam1 + s1)) ** e + (lam2 / (lam2 * lam2 + s2)) ** e
            out[i] = v**power
        return out


def _axial_sum_nb_wrapper(x, r, w, n, lam1, lam2, dist, mode, P, Q):
    if mode not in (0, 1, 2, 3, 4, 5):
        raise ValueError(f"unknown kernel mode {mode}")
    return float(
        axial_sum_nb(
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(r, dtype=np.float64),
            np.ascontiguousarray(w, dtype=np.float64),
            int(n), float(lam1), float(lam2), float(dist), int(mode), float(P), float(Q),
        )
    )


def _pair_power_nb_wrapper(pts, c1, lam1, c2, lam2, n, power):
    return pair_power_nb(
        np.ascontiguousarray(pts, dtype=np.float64),
        np.ascontiguousarray(c1, dtype=np.float64),
        float(lam1),
        np.ascontiguousarray(c2, dtype=np.float64),
        float(lam2),
        float(n),
        float(power),
    )


def _bracket_nb_wrapper(v1, v2, p):
    v1 = np.ascontiguousarray(np.ravel(v1), dtype=np.float64)
    v2 = np.ascontiguousarray(np.ravel(v2), dtype=np.float64)
    return bracket_nb(v1, v2, float(p))


IMPLEMENTATIONS = {"numpy": {"axial_sum": axial_sum_np, "pair_power": pair_power_np, "bracket": bracket_np}}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "axial_sum": _axial_sum_nb_wrapper,
        "pair_power": _pair_power_nb_wrapper,
        "bracket": _bracket_nb_wrapper,
    }

BACKEND = "numba" if HAVE_NUMBA else "numpy"
axial_sum = IMPLEMENTATIONS[BACKEND]["axial_sum"]
pair_power = IMPLEMENTATIONS[BACKEND]["pair_power"]
bracket = IMPLEMENTATIONS[BACKEND]["bracket"]
