"""Special-function kernel: Gamma, digamma, Gauss 2F1, generalized 3F2.

Everything here is real-valued double precision.  The Gauss function is
evaluated through a region map built from the classical linear
transformations (Pfaff map for negative argument, the two-term connection
formula on (1/2, 1)), so that every series actually summed has argument in
[0, 1/2] and converges geometrically.  The generalized 3F2 is summed
directly inside the unit interval, Richardson-accelerated at unit argument,
and continued to arguments below -1 through its integral representation in
terms of 2F1 (available whenever an upper parameter equals 1 and a lower
parameter equals 2, which covers every parameter set this package needs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DivergenceError,
    DomainError,
    NonConvergenceError,
    PoleError,
    UnsupportedParametersError,
)

__all__ = [
    "EvalOptions",
    "DEFAULT_OPTIONS",
    "gamma_fn",
    "digamma",
    "hyp2f1",
    "hyp3f2",
    "hyp3f2_unit_11a",
    "thomae_transform",
    "integral_2f1",
]


@dataclass(frozen=True)
class EvalOptions:
    """Numeric policy knobs shared by the evaluators.

    series_tol : relative tolerance for series termination
    max_terms  : cap on the number of series terms before switching
                 strategy or giving up
    quad_tol   : absolute tolerance for integral fallback routes
    """

    series_tol: float = 1e-14
    max_terms: int = 4096
    quad_tol: float = 1e-13

    def __post_init__(self) -> None:
        if not self.series_tol > 0.0:
            raise DomainError("series_tol must be positive")
        if self.max_terms < 64:
            raise DomainError("max_terms must be at least 64")
        if not self.quad_tol > 0.0:
            raise DomainError("quad_tol must be positive")


DEFAULT_OPTIONS = EvalOptions()


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def gamma_fn(x: float, opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Gamma function on the real line (poles at 0, -1, -2, ... rejected)."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma_fn pole at x={x}")
    return math.gamma(x)


def _reciprocal_gamma(x: float) -> float:
    """1/Gamma(x); exactly zero at the poles of Gamma."""
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / math.gamma(x)


# Asymptotic expansion psi(x) ~ ln x - 1/(2x) - sum B_{2k}/(2k x^{2k}),
# applied after shifting x above _DIGAMMA_SHIFT with psi(x) = psi(x+1) - 1/x.
_DIGAMMA_SHIFT = 10.0
_DIGAMMA_ASYMP = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float, opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Digamma function psi(x) = Gamma'(x)/Gamma(x) for real x."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma pole at x={x}")
    if x < 0.0:
        # reflection: psi(x) = psi(1-x) - pi/tan(pi x)
        return digamma(1.0 - x, opts) - math.pi / math.tan(math.pi * x)
    acc = 0.0
    while x < _DIGAMMA_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    power = inv2
    for coeff in _DIGAMMA_ASYMP:
        tail += coeff * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - tail


def _series_2f1(a: float, b: float, c: float, x: float, opts: EvalOptions) -> float:
    """Raw Gauss series; caller guarantees |x| small enough to converge."""
    total = 1.0
    term = 1.0
    for n in range(opts.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (1.0 + n)) * x
        total += term
        if n > 2 and abs(term) <= opts.series_tol * abs(total):
            return total
    raise NonConvergenceError(
        f"2F1 series did not converge in {opts.max_terms} terms at x={x}"
    )


def hyp2f1(a: float, b: float, c: float, x: float,
           opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Gauss hypergeometric 2F1(a, b; c; x) for real x < 1 (or x = 1 when
    c - a - b > 0).

    Region map: direct series on [0, 1/2]; Pfaff transformation
    F = (1-x)^(-b) F(c-a, b; c; x/(x-1)) for x < 0; the two-term connection
    formula in 1-x on (1/2, 1).  Logarithmic connection cases (integer
    c - a - b) are not implemented and raise UnsupportedParametersError.
    """
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 lower parameter c={c} is a non-positive integer")
    if x > 1.0:
        raise DomainError(f"2F1 argument x={x} > 1 not supported")
    if x == 0.0:
        return 1.0
    if x == 1.0:
        if c - a - b <= 0.0:
            raise DivergenceError(
                f"2F1 diverges at x=1 for c-a-b={c - a - b:g} <= 0"
            )
        return (
            math.gamma(c) * math.gamma(c - a - b)
            * _reciprocal_gamma(c - a) * _reciprocal_gamma(c - b)
        )
    if x < 0.0:
        return (1.0 - x) ** (-b) * hyp2f1(c - a, b, c, x / (x - 1.0), opts)
    if x <= 0.5:
        return _series_2f1(a, b, c, x, opts)
    # connection formula on (1/2, 1); both mapped series run at 1-x < 1/2
    if (c - a - b) == math.floor(c - a - b):
        raise UnsupportedParametersError(
            f"logarithmic connection case c-a-b={c - a - b:g} not implemented"
        )
    y = 1.0 - x
    coeff1 = (
        math.gamma(c) * math.gamma(c - a - b)
        * _reciprocal_gamma(c - a) * _reciprocal_gamma(c - b)
    )
    coeff2 = (
        math.gamma(c) * math.gamma(a + b - c)
        * _reciprocal_gamma(a) * _reciprocal_gamma(b)
    )
    out = 0.0
    if coeff1 != 0.0:
        out += coeff1 * _series_2f1(a, b, a + b + 1.0 - c, y, opts)
    if coeff2 != 0.0:
        out += coeff2 * y ** (c - a - b) * _series_2f1(c - a, c - b, c + 1.0 - a - b, y, opts)
    return out


def _series_3f2(uppers: tuple[float, float, float],
                lowers: tuple[float, float],
                x: float, opts: EvalOptions) -> float:
    a1, a2, a3 = uppers
    b1, b2 = lowers
    total = 1.0
    term = 1.0
    for n in range(opts.max_terms):
        term *= (a1 + n) * (a2 + n) * (a3 + n) / ((b1 + n) * (b2 + n) * (1.0 + n)) * x
        total += term
        if n > 2 and abs(term) <= opts.series_tol * abs(total):
            return total
    raise NonConvergenceError(
        f"3F2 series did not converge in {opts.max_terms} terms at x={x}"
    )


def _unit_3f2_accelerated(uppers: tuple[float, float, float],
                          lowers: tuple[float, float],
                          opts: EvalOptions) -> float:
    """3F2 at x=1 with positive parameter excess s.

    The terms behave like n^{-1-s}, so partial sums S_N approach the limit
    with an asymptotic tail c1 N^{-s} + c2 N^{-s-1} + ...; Richardson
    extrapolation on S_N at N, 2N, 4N, ... removes those powers in turn.
    """
    s = sum(lowers) - sum(uppers)  # parameter excess (b1+b2) - (a1+a2+a3)
    n0, levels = 256, 7
    nmax = n0 * (1 << levels)
    n = np.arange(nmax, dtype=float)
    ratio = 1.0 / (n + 1.0)
    for u in uppers:
        ratio *= u + n
    for l in lowers:
        ratio /= l + n
    terms = np.empty(nmax + 1)
    terms[0] = 1.0
    np.cumprod(ratio, out=terms[1:])
    partial = np.cumsum(terms)
    stages = [partial[n0 * (1 << j) - 1] for j in range(levels + 1)]
    previous = stages[-1]
    for k in range(levels):
        factor = 2.0 ** (s + k) - 1.0
        previous = stages[-1]
        stages = [
            stages[j + 1] + (stages[j + 1] - stages[j]) / factor
            for j in range(len(stages) - 1)
        ]
    value = stages[0]
    if not math.isfinite(value) or abs(value - previous) > 1e-8 * max(1.0, abs(value)):
        raise NonConvergenceError("3F2 unit-argument acceleration failed")
    return value


def _pattern_reduction(uppers: tuple[float, float, float],
                       lowers: tuple[float, float]) -> tuple[float, float, float] | None:
    """Find the (a, b; c) left after removing an upper 1 and a lower 2.

    The reduction backs the integral representation
    x * 3F2(a, b, 1; c, 2; x) = integral_0^x 2F1(a, b; c; y) dy.
    Returns None when the pattern is absent.
    """
    ups = list(uppers)
    lows = list(lowers)
    if 1.0 not in ups or 2.0 not in lows:
        return None
    ups.remove(1.0)
    lows.remove(2.0)
    return (ups[0], ups[1], lows[0])


def hyp3f2(a1: float, a2: float, a3: float, b1: float, b2: float, x: float,
           opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Generalized hypergeometric 3F2(a1, a2, a3; b1, b2; x).

    Direct series inside the unit interval; Richardson-accelerated series at
    x = 1 (requires positive parameter excess); for x <= -1 the value is
    continued through the 2F1 integral representation when an upper
    parameter equals 1 and a lower equals 2.
    """
    for b in (b1, b2):
        if _is_nonpositive_integer(b):
            raise PoleError(f"3F2 lower parameter {b} is a non-positive integer")
    if x == 0.0:
        return 1.0
    uppers = (a1, a2, a3)
    lowers = (b1, b2)
    if x == 1.0:
        excess = b1 + b2 - a1 - a2 - a3
        if excess <= 0.0:
            raise DivergenceError(
                f"3F2 diverges at x=1 for parameter excess {excess:g} <= 0"
            )
        return _unit_3f2_accelerated(uppers, lowers, opts)
    if abs(x) < 1.0:
        # geometric tail estimate: |x|^n below series_tol within max_terms?
        needed = math.log(opts.series_tol) / math.log(abs(x)) if abs(x) > 0 else 1.0
        if needed <= opts.max_terms:
            return _series_3f2(uppers, lowers, x, opts)
        reduction = _pattern_reduction(uppers, lowers)
        if reduction is None:
            raise NonConvergenceError(
                f"3F2 series at x={x} needs ~{needed:.0f} terms "
                f"(max_terms={opts.max_terms}) and no integral route applies"
            )
        a, b, c = reduction
        return integral_2f1(a, b, c, x, opts) / x
    if x > 1.0:
        raise DomainError(f"3F2 argument x={x} > 1 not supported")
    # x <= -1: analytic continuation via the integral representation
    reduction = _pattern_reduction(uppers, lowers)
    if reduction is None:
        raise DomainError(
            f"3F2 at x={x} <= -1 is only continued for parameter sets with "
            "an upper 1 and a lower 2"
        )
    a, b, c = reduction
    return integral_2f1(a, b, c, x, opts) / x


def hyp3f2_unit_11a(a: float, b: float,
                    opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Closed form 3F2(1, 1, a; 2, b; 1) = (b-1)/(a-1) * (psi(b-1) - psi(b-a))
    for b > a > 0, a != 1."""
    if not (b > a > 0.0):
        raise DomainError(f"hyp3f2_unit_11a requires b > a > 0, got a={a}, b={b}")
    if a == 1.0:
        raise DomainError("hyp3f2_unit_11a: a=1 is a removable singularity, "
                          "outside this closed form's contract")
    if _is_nonpositive_integer(b - 1.0) or _is_nonpositive_integer(b - a):
        raise DomainError("hyp3f2_unit_11a: digamma pole in b-1 or b-a")
    return (b - 1.0) / (a - 1.0) * (digamma(b - 1.0, opts) - digamma(b - a, opts))


def thomae_transform(a: float, b: float, c: float, e: float, f: float,
                     opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Evaluate 3F2(a, b, c; e, f; 1) through its Thomae relation:

        Gamma(e)Gamma(f)Gamma(s) / (Gamma(a)Gamma(s+b)Gamma(s+c))
            * 3F2(e-a, f-a, s; s+b, s+c; 1),     s = e + f - a - b - c,

    valid for a > 0 and s > 0.  The transformed series has parameter excess
    a, so the right-hand side converges whenever a > 0.
    """
    s = e + f - a - b - c
    if a <= 0.0:
        raise DomainError(f"thomae_transform requires a > 0, got {a}")
    if s <= 0.0:
        raise DomainError(f"thomae_transform requires positive excess, got s={s:g}")
    prefactor = (
        math.gamma(e) * math.gamma(f) * math.gamma(s)
        / (math.gamma(a) * math.gamma(s + b) * math.gamma(s + c))
    )
    return prefactor * hyp3f2(e - a, f - a, s, s + b, s + c, 1.0, opts)


def _integral_2f1_on_unit(a: float, b: float, c: float, x: float,
                          opts: EvalOptions) -> float:
    """integral_0^x 2F1(a,b;c;y) dy for 0 < x <= 1.

    The integrand can blow up like (1-y)^(c-a-b) near y=1; substituting
    y = 1 - u^3 turns that endpoint algebraic singularity into a smooth
    (or milder) factor u^(2+3(c-a-b)), which the adaptive rule handles.
    """
    from .quadrature import integrate_1d

    tol = opts.quad_tol
    if x <= 0.5:
        res = integrate_1d(lambda y: hyp2f1(a, b, c, y, opts), 0.0, x, tol=tol)
        return res.value
    if x == 1.0 and c - a - b <= -1.0:
        raise DivergenceError(
            f"integral of 2F1 up to 1 diverges for c-a-b={c - a - b:g} <= -1"
        )
    head = integrate_1d(lambda y: hyp2f1(a, b, c, y, opts), 0.0, 0.5, tol=0.5 * tol)
    u_hi = 0.5 ** (1.0 / 3.0)
    u_lo = (1.0 - x) ** (1.0 / 3.0)

    def transformed(u: float) -> float:
        return 3.0 * u * u * hyp2f1(a, b, c, 1.0 - u ** 3, opts)

    tail = integrate_1d(transformed, u_lo, u_hi, tol=0.5 * tol)
    return head.value + tail.value


def integral_2f1(a: float, b: float, c: float, x: float,
                 opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """integral_0^x 2F1(a, b; c; y) dy, equal to x * 3F2(a, b, 1; c, 2; x).

    Supported for x <= 1 (x = 1 requires c - a - b > -1).  For x < 0 the
    Pfaff map turns the integral into one over w = y/(y-1) in (0, 1):

        integral_0^x F dy = -integral_0^{x/(x-1)} (1-w)^(b-2) 2F1(c-a, b; c; w) dw.
    """
    if x > 1.0:
        raise DomainError(f"integral_2f1 argument x={x} > 1 not supported")
    if x == 0.0:
        return 0.0
    if x > 0.0:
        return _integral_2f1_on_unit(a, b, c, x, opts)
    return -_integral_2f1_on_unit_weighted(c - a, b, c, x / (x - 1.0), b - 2.0, opts)


def _integral_2f1_on_unit_weighted(a: float, b: float, c: float, w_max: float,
                                   weight_pow: float, opts: EvalOptions) -> float:
    """integral_0^{w_max} (1-w)^p 2F1(a,b;c;w) dw with p = weight_pow,
    0 < w_max < 1; same u = (1-w)^(1/3) endpoint treatment as above."""
    from .quadrature import integrate_1d

    tol = opts.quad_tol

    def plain(w: float) -> float:
        return (1.0 - w) ** weight_pow * hyp2f1(a, b, c, w, opts)

    if w_max <= 0.5:
        return integrate_1d(plain, 0.0, w_max, tol=tol).value
    head = integrate_1d(plain, 0.0, 0.5, tol=0.5 * tol).value
    u_hi = 0.5 ** (1.0 / 3.0)
    u_lo = (1.0 - w_max) ** (1.0 / 3.0)

    def transformed(u: float) -> float:
        return 3.0 * u ** (2.0 + 3.0 * weight_pow) * hyp2f1(a, b, c, 1.0 - u ** 3, opts)

    tail = integrate_1d(transformed, u_lo, u_hi, tol=0.5 * tol).value
    return head + tail
