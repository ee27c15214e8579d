"""Adaptive numerical integration and the integral cross-checks.

The workhorse is an adaptive bisection scheme built on the 15-point
Gauss-Kronrod rule (all nodes interior, so integrable endpoint features are
never evaluated exactly at an endpoint).  On top of it sit the integrals
that verify the closed forms independently: the inner x-integral of the
bubble decomposition, the two outer 1-D integrals, and the full 2-D
decomposition integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError, NonConvergenceError
from .geometry import Mass, UpperHalfPoint, sigma
from .loopmeasure import g_connect
from .specialfn import DEFAULT_OPTIONS, EvalOptions, hyp2f1

__all__ = [
    "QuadResult",
    "integrate_1d",
    "inner_integral_f",
    "inner_integral_closed",
    "a_integral",
    "b_integral",
    "mass_via_double_integral",
    "double_integral_result",
    "mass_via_reduced_integral",
    "reduced_integral_result",
]


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self) -> None:
        if self.abs_error_estimate < 0.0:
            raise DomainError("abs_error_estimate must be non-negative")


# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
_KRONROD_NODES = (
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
)
_KRONROD_WEIGHTS = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
)
# Gauss weights attach to Kronrod nodes with odd index.
_GAUSS_WEIGHTS = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    kronrod = 0.0
    gauss = 0.0
    for i in range(15):
        fx = f(mid + half * _KRONROD_NODES[i])
        kronrod += _KRONROD_WEIGHTS[i] * fx
        if i % 2 == 1:
            gauss += _GAUSS_WEIGHTS[i // 2] * fx
    kronrod *= half
    gauss *= half
    return kronrod, abs(kronrod - gauss)


def integrate_1d(f: Callable[[float], float], a: float, b: float,
                 tol: float = 1e-9, max_depth: int = 48) -> QuadResult:
    """Adaptive Gauss-Kronrod integration of f over the finite interval [a, b].

    Bisection recurses until the local Kronrod-Gauss discrepancy falls under
    the local tolerance share; the discrepancy is a conservative bound for
    the Kronrod value's error on resolved panels.  Raises
    NonConvergenceError when the depth limit is hit on a still-unresolved
    panel.  Evaluation order is fixed (left panel first), so results are
    deterministic.
    """
    if not (a < b):
        if a == b:
            return QuadResult(0.0, 0.0, 0)
        raise DomainError(f"integrate_1d requires a < b, got [{a}, {b}]")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("integrate_1d requires finite bounds")

    evaluations = 0

    def recurse(lo: float, hi: float, tol_local: float, depth: int) -> tuple[float, float]:
        nonlocal evaluations
        value, err = _gk15(f, lo, hi)
        evaluations += 15
        if err <= tol_local or err <= 1e-16 * abs(value):
            return value, err
        if depth >= max_depth:
            raise NonConvergenceError(
                f"integrate_1d: depth {max_depth} exhausted on [{lo}, {hi}] "
                f"(panel error {err:.3e} > {tol_local:.3e})"
            )
        mid = 0.5 * (lo + hi)
        lv, le = recurse(lo, mid, 0.5 * tol_local, depth + 1)
        rv, re = recurse(mid, hi, 0.5 * tol_local, depth + 1)
        return lv + rv, le + re

    value, err = recurse(a, b, tol, 0)
    return QuadResult(value, err, evaluations)


def _integrate_pieces(f: Callable[[float], float], points: list[float],
                      tol: float, max_depth: int = 48) -> QuadResult:
    total = 0.0
    err = 0.0
    evals = 0
    share = tol / max(1, len(points) - 1)
    for lo, hi in zip(points[:-1], points[1:]):
        res = integrate_1d(f, lo, hi, tol=share, max_depth=max_depth)
        total += res.value
        err += res.abs_error_estimate
        evals += res.evaluations
    return QuadResult(total, err, evals)


def _oriented(z0: UpperHalfPoint, w0: UpperHalfPoint) -> tuple[UpperHalfPoint, UpperHalfPoint]:
    """Swap so the first point is the lower one (the decomposition integrates
    the bubble root height below both points)."""
    if z0.y <= w0.y:
        return z0, w0
    return w0, z0


def inner_integral_closed(y: float, z0: UpperHalfPoint, w0: UpperHalfPoint) -> float:
    """Closed form of the inner x-integral:
    pi * (2a + d) / (c^2 + (2a + d)^2) with a = y0 - y, d = v0 - y0, c = u0 - x0."""
    z0, w0 = _oriented(z0, w0)
    a = z0.y - y
    d = w0.y - z0.y
    c = w0.x - z0.x
    s = 2.0 * a + d
    return math.pi * s / (c * c + s * s)


def inner_integral_f(y: float, z0: UpperHalfPoint, w0: UpperHalfPoint,
                     tol: float = 1e-11) -> QuadResult:
    """Quadrature of integral_R f(x, y) dx where

        f(x, y) = (y0-y)(v0-y) / ([(x0-x)^2+(y0-y)^2][(u0-x)^2+(v0-y)^2]),

    using the substitution x = tan(theta) to fold the infinite x-range onto
    (-pi/2, pi/2).  Valid for 0 < y < min(y0, v0)."""
    z0, w0 = _oriented(z0, w0)
    if not (0.0 < y < z0.y):
        raise DomainError(f"inner_integral_f requires 0 < y < min heights, got y={y}")
    ay = z0.y - y
    by = w0.y - y
    x0, u0 = z0.x, w0.x

    def integrand(theta: float) -> float:
        t = math.tan(theta)
        sec2 = 1.0 + t * t
        num = ay * by * sec2
        d1 = (x0 - t) ** 2 + ay * ay
        d2 = (u0 - t) ** 2 + by * by
        return num / (d1 * d2)

    # split at the two Lorentzian peaks so the adaptive rule locks onto them
    breaks = sorted({-0.5 * math.pi, math.atan(x0), math.atan(u0), 0.5 * math.pi})
    return _integrate_pieces(integrand, breaks, tol)


def a_integral(z0: UpperHalfPoint, w0: UpperHalfPoint, tol: float = 1e-10) -> QuadResult:
    """Quadrature of A = integral_0^{y0} (2(y0-y)+d) / (c^2 + (2(y0-y)+d)^2) dy."""
    z0, w0 = _oriented(z0, w0)
    d = w0.y - z0.y
    c = w0.x - z0.x
    y0 = z0.y

    def integrand(y: float) -> float:
        s = 2.0 * (y0 - y) + d
        return s / (c * c + s * s)

    return integrate_1d(integrand, 0.0, y0, tol=tol)


def _g_factor(y: float, z0: UpperHalfPoint, w0: UpperHalfPoint, opts: EvalOptions) -> float:
    """g(y) = sigma_shift(y) * 2F1(1, 4/3; 5/3; 1 - sigma_shift(y)); equals
    1 - G(sigma of the points shifted down by iy)."""
    c = w0.x - z0.x
    d = w0.y - z0.y
    denom = c * c + (z0.y + w0.y - 2.0 * y) ** 2
    sig = (c * c + d * d) / denom
    arg = 4.0 * (z0.y - y) * (w0.y - y) / denom
    return sig * hyp2f1(1.0, 4.0 / 3.0, 5.0 / 3.0, arg, opts)


def b_integral(z0: UpperHalfPoint, w0: UpperHalfPoint, tol: float = 1e-10,
               opts: EvalOptions = DEFAULT_OPTIONS) -> QuadResult:
    """Quadrature of B, the g(y)-weighted companion of A."""
    z0, w0 = _oriented(z0, w0)
    d = w0.y - z0.y
    c = w0.x - z0.x
    y0 = z0.y

    def integrand(y: float) -> float:
        s = 2.0 * (y0 - y) + d
        return s / (c * c + s * s) * _g_factor(y, z0, w0, opts)

    return integrate_1d(integrand, 0.0, y0, tol=tol)


def double_integral_result(z0: UpperHalfPoint, w0: UpperHalfPoint,
                           tol: float = 1e-7,
                           opts: EvalOptions = DEFAULT_OPTIONS) -> QuadResult:
    """Full 2-D bubble-decomposition integral

        (8 / 5 pi) integral_0^{y0} integral_R (1/4) f(x, y) G(sigma_shift(y)) dx dy,

    with the inner x-integral done by inner_integral_f.  The shifted-pair
    sigma does not depend on x, so G is evaluated once per outer node."""
    if z0 == w0:
        raise DomainError("degenerate pair")
    z0, w0 = _oriented(z0, w0)
    y0 = z0.y
    inner_tol = max(1e-13, 0.02 * tol / y0)
    evals = 0

    def outer_integrand(y: float) -> float:
        nonlocal evals
        inner = inner_integral_f(y, z0, w0, tol=inner_tol)
        evals += inner.evaluations
        c = w0.x - z0.x
        d = w0.y - z0.y
        sig = (c * c + d * d) / (c * c + (z0.y + w0.y - 2.0 * y) ** 2)
        return inner.value * g_connect(sig, opts)

    outer = integrate_1d(outer_integrand, 0.0, y0, tol=0.5 * tol * (5.0 * math.pi / 2.0))
    scale = 2.0 / (5.0 * math.pi)
    value = scale * outer.value
    err = scale * outer.abs_error_estimate + scale * inner_tol * y0
    return QuadResult(value, err, evals + outer.evaluations)


def mass_via_double_integral(z0: UpperHalfPoint, w0: UpperHalfPoint,
                             tol: float = 1e-7,
                             opts: EvalOptions = DEFAULT_OPTIONS) -> Mass:
    res = double_integral_result(z0, w0, tol=tol, opts=opts)
    return Mass(res.value, "quadrature")


def reduced_integral_result(z0: UpperHalfPoint, w0: UpperHalfPoint,
                            tol: float = 1e-9,
                            opts: EvalOptions = DEFAULT_OPTIONS) -> QuadResult:
    """1-D reduction of the decomposition integral: the inner x-integral is
    replaced by its closed form, leaving (2/5 pi) integral of
    inner_closed(y) * (1 - g(y)) dy."""
    if z0 == w0:
        raise DomainError("degenerate pair")
    z0, w0 = _oriented(z0, w0)
    y0 = z0.y

    def integrand(y: float) -> float:
        return inner_integral_closed(y, z0, w0) * (1.0 - _g_factor(y, z0, w0, opts))

    res = integrate_1d(integrand, 0.0, y0, tol=tol * (5.0 * math.pi / 2.0))
    scale = 2.0 / (5.0 * math.pi)
    return QuadResult(scale * res.value, scale * res.abs_error_estimate, res.evaluations)


def mass_via_reduced_integral(z0: UpperHalfPoint, w0: UpperHalfPoint,
                              tol: float = 1e-9,
                              opts: EvalOptions = DEFAULT_OPTIONS) -> Mass:
    res = reduced_integral_result(z0, w0, tol=tol, opts=opts)
    return Mass(res.value, "quadrature")
