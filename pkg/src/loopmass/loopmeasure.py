"""Closed-form masses and probabilities.

Central objects:

* the total mass of Brownian loops in the upper half-plane whose hull
  contains two given interior points, in three equivalent evaluations
  (the sigma form, the eta form with its hypergeometric constant, and the
  A - B reduction);
* the connectivity factor G(t) = 1 - t 2F1(1, 4/3; 5/3; 1-t);
* SLE(8/3) bubble masses (one point, two points, one-sided variants) and
  the left/right passage probability combinations of chordal SLE;
* the radius-r restriction check behind the 8/5 bubble normalization.

Infinite totals (the one-sided "neither" event) are returned as Mass(+inf),
never raised.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegeneratePairError, DomainError
from .geometry import (
    Mass,
    UnitDiskPoint,
    UpperHalfPoint,
    disk_to_half,
    eta,
    sigma,
    sigma_complement,
    sigma_disk_complement,
)
from .specialfn import DEFAULT_OPTIONS, EvalOptions, hyp2f1, hyp3f2

__all__ = [
    "Side",
    "PassageSide",
    "g_connect",
    "mass_disconnect_two_han",
    "mass_disconnect_two_cardy",
    "mass_disconnect_two_disk",
    "schramm_left_pass",
    "sle_bubble_one_point",
    "sle_bubble_two_point",
    "brownian_bubble_two_point",
    "sle_pass_combo",
    "bubble_one_sided",
    "a_term",
    "b_term",
    "mass_via_ab",
    "phi_fn",
    "restriction_radius_mass",
]

_THIRD = 1.0 / 3.0
_F43 = 4.0 / 3.0
_F53 = 5.0 / 3.0
# Gamma(2/3)^2 / Gamma(4/3), the constant of the eta-form cube-root term
_GAMMA_RATIO = math.gamma(2.0 / 3.0) ** 2 / math.gamma(4.0 / 3.0)
_PI_OVER_5SQRT3 = math.pi / (5.0 * math.sqrt(3.0))
_TWO_PI_OVER_SQRT3 = 2.0 * math.pi / math.sqrt(3.0)


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class PassageSide:
    """Requested passage side of the curve relative to each of two points."""

    side_z: Side
    side_w: Side


def _clamp_tiny_negative(value: float, scale: float = 1.0) -> float:
    """Round-off guard for quantities that are non-negative in exact
    arithmetic but are assembled from cancelling terms."""
    if value < 0.0:
        if value > -1e-11 * max(1.0, scale):
            return 0.0
        raise DomainError(f"expected non-negative value, got {value}")
    return value


def g_connect(t: float, opts: EvalOptions = DEFAULT_OPTIONS,
              allow_limit: bool = False) -> float:
    """Two-point connectivity factor G(t) = 1 - t * 2F1(1, 4/3; 5/3; 1-t)
    on (0, 1].  G(1) = 0; the continuous extension G(0+) = 1 is available
    with allow_limit=True."""
    if t == 0.0 and allow_limit:
        return 1.0
    if not (0.0 < t <= 1.0):
        raise DomainError(f"g_connect requires t in (0, 1], got {t}")
    if t == 1.0:
        return 0.0
    return 1.0 - t * hyp2f1(1.0, _F43, _F53, 1.0 - t, opts)


def _mass_han_from_sigma_complement(oms: float, opts: EvalOptions) -> float:
    """-(1/10) [log(sigma) + (1-sigma) 3F2(1, 4/3, 1; 5/3, 2; 1-sigma)]
    with oms = 1 - sigma passed directly for precision near sigma = 1."""
    return -0.1 * (math.log1p(-oms) + oms * hyp3f2(1.0, _F43, 1.0, _F53, 2.0, oms, opts))


def mass_disconnect_two_han(z: UpperHalfPoint, w: UpperHalfPoint,
                            opts: EvalOptions = DEFAULT_OPTIONS) -> Mass:
    """Total loop mass disconnecting both z and w from the boundary
    (sigma form).  Diverges as w -> z and vanishes as sigma -> 1."""
    oms = sigma_complement(z, w)
    return Mass(_clamp_tiny_negative(_mass_han_from_sigma_complement(oms, opts)),
                "closed_form")


def mass_disconnect_two_cardy(z: UpperHalfPoint, w: UpperHalfPoint,
                              opts: EvalOptions = DEFAULT_OPTIONS) -> Mass:
    """The same total mass in its eta form:

        -pi/(5 sqrt 3) - (1/10) eta 3F2(1,4/3,1;5/3,2;eta)
        - (1/10) log(eta(eta-1))
        + Gamma(2/3)^2/(5 Gamma(4/3)) (eta(eta-1))^(1/3) 2F1(1,2/3;4/3;eta).

    eta < 0, so eta(eta-1) > 0 and the real positive cube root applies; the
    hypergeometrics at negative arguments go through the Pfaff route."""
    e = eta(z, w)
    ee1 = e * (e - 1.0)
    value = (
        -_PI_OVER_5SQRT3
        - 0.1 * e * hyp3f2(1.0, _F43, 1.0, _F53, 2.0, e, opts)
        - 0.1 * math.log(ee1)
        + (_GAMMA_RATIO / 5.0) * ee1 ** _THIRD * hyp2f1(1.0, 2.0 / 3.0, _F43, e, opts)
    )
    return Mass(_clamp_tiny_negative(value), "closed_form")


def mass_disconnect_two_disk(z: UnitDiskPoint, w: UnitDiskPoint,
                             opts: EvalOptions = DEFAULT_OPTIONS) -> Mass:
    """Total loop mass in the unit disk disconnecting z and w from the unit
    circle: the sigma form evaluated on the disk cross-ratio."""
    oms = sigma_disk_complement(z, w)
    return Mass(_clamp_tiny_negative(_mass_han_from_sigma_complement(oms, opts)),
                "closed_form")


def schramm_left_pass(z: UpperHalfPoint, kappa: float,
                      opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Probability that the chordal SLE(kappa) curve from 0 to infinity
    passes to the left of z:

        C(kappa) * integral_{-inf}^{x/y} (1 + t^2)^(-4/kappa) dt,

    normalized to total mass 1.  At kappa = 8/3 this reduces to
    (1 + x/|z|)/2."""
    if not (0.0 < kappa <= 4.0):
        raise DomainError(f"schramm_left_pass requires kappa in (0, 4], got {kappa}")
    from .quadrature import integrate_1d  # local import to avoid module cycle

    p = 4.0 / kappa
    # total integral of (1+t^2)^(-p) over R is the Beta value below
    total = math.sqrt(math.pi) * math.gamma(p - 0.5) / math.gamma(p)
    theta_hi = math.atan(z.x / z.y)
    power = 2.0 * p - 2.0

    def integrand(theta: float) -> float:
        return math.cos(theta) ** power

    res = integrate_1d(integrand, -0.5 * math.pi, theta_hi, tol=1e-13)
    return res.value / total


def _im_inverse(z: UpperHalfPoint) -> float:
    """|Im(1/z)| = y / (x^2 + y^2)."""
    return z.y / (z.x * z.x + z.y * z.y)


def sle_bubble_one_point(z: UpperHalfPoint) -> Mass:
    """SLE(8/3)-bubble mass of loops at 0 whose hull contains z:
    (1/4) (y/(x^2+y^2))^2."""
    return Mass(0.25 * _im_inverse(z) ** 2, "closed_form")


def sle_bubble_two_point(z: UpperHalfPoint, w: UpperHalfPoint,
                         opts: EvalOptions = DEFAULT_OPTIONS) -> Mass:
    """SLE(8/3)-bubble mass of loops at 0 whose hull contains both points:
    (1/4) Im(1/z) Im(1/w) G(sigma)."""
    value = 0.25 * _im_inverse(z) * _im_inverse(w) * g_connect(sigma(z, w), opts)
    return Mass(value, "closed_form")


def brownian_bubble_two_point(z: UpperHalfPoint, w: UpperHalfPoint,
                              opts: EvalOptions = DEFAULT_OPTIONS) -> Mass:
    """Brownian-bubble counterpart, 8/5 times the SLE(8/3) value."""
    return Mass(1.6 * sle_bubble_two_point(z, w, opts).value, "closed_form")


def sle_pass_combo(z: UpperHalfPoint, w: UpperHalfPoint, sides: PassageSide,
                   opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """Joint passage probability of chordal SLE(8/3) relative to two points.

    The three independent closed forms (left/right, right/left, right/right)
    carry a G(sigma)-correction on top of the product of one-point Schramm
    probabilities; left/left is the complement of the other three.  Each
    mixed pair is suppressed by the correction, each same-side pair
    enhanced, and the marginals reduce exactly to the one-point formula
    (1 + x/|z|)/2 for any value of G.  The ratio y/(|z|-x) is evaluated as
    (|z|+x)/y, which is exact algebraically and avoids cancellation for
    points far to the right."""
    if z.x == w.x and z.y == w.y:
        raise DegeneratePairError("sle_pass_combo undefined for coincident points")
    G = g_connect(sigma(z, w), opts)
    rz, rw = z.modulus(), w.modulus()
    # y/(|z|-x) == (|z|+x)/y and y/(|z|+x) == (|z|-x)/y
    lz_m = (rz + z.x) / z.y     # y/(|z|-x)
    lz_p = (rz - z.x) / z.y     # y/(|z|+x)
    lw_m = (rw + w.x) / w.y
    lw_p = (rw - w.x) / w.y

    def combo(side_z: Side, side_w: Side) -> float:
        if side_z is Side.LEFT and side_w is Side.RIGHT:
            return 0.25 * (1.0 + z.x / rz) * (1.0 - w.x / rw) * (1.0 - lz_p * lw_m * G)
        if side_z is Side.RIGHT and side_w is Side.LEFT:
            return 0.25 * (1.0 - z.x / rz) * (1.0 + w.x / rw) * (1.0 - lz_m * lw_p * G)
        if side_z is Side.RIGHT and side_w is Side.RIGHT:
            return 0.25 * (1.0 - z.x / rz) * (1.0 - w.x / rw) * (1.0 + lz_m * lw_m * G)
        others = (
            combo(Side.LEFT, Side.RIGHT)
            + combo(Side.RIGHT, Side.LEFT)
            + combo(Side.RIGHT, Side.RIGHT)
        )
        return 1.0 - others

    return combo(sides.side_z, sides.side_w)


def bubble_one_sided(z: UpperHalfPoint, w: UpperHalfPoint, which: str,
                     opts: EvalOptions = DEFAULT_OPTIONS,
                     paper_literal: bool = False) -> Mass:
    """Brownian-bubble mass of the one-sided events: hull contains z but not
    w ("z_only"), w but not z ("w_only"), or neither ("neither", which has
    infinite total mass and returns Mass(+inf)).

    The finite cases evaluate (2/5) [Im(1/p)^2 - Im(1/z) Im(1/w) G(sigma)],
    the 8/5 bubble normalization applied to the SLE(8/3) coefficient 1/4.
    paper_literal=True rescales by 1/4 to the printed 1/10 coefficient."""
    if which == "neither":
        return Mass(math.inf, "closed_form")
    if which not in ("z_only", "w_only"):
        raise DomainError(f"unknown one-sided event {which!r}")
    iz = _im_inverse(z)
    iw = _im_inverse(w)
    G = g_connect(sigma(z, w), opts)
    lead = iz if which == "z_only" else iw
    coeff = 0.1 if paper_literal else 0.4
    value = coeff * (lead * lead - iz * iw * G)
    return Mass(_clamp_tiny_negative(value, scale=lead * lead), "closed_form")


def a_term(z: UpperHalfPoint, w: UpperHalfPoint) -> float:
    """A = (1/4) log(1/sigma) > 0."""
    return -0.25 * math.log1p(-sigma_complement(z, w))


def b_term(z: UpperHalfPoint, w: UpperHalfPoint,
           opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """B = (1/4) (1-sigma) 3F2(1, 4/3, 1; 5/3, 2; 1-sigma) > 0."""
    oms = sigma_complement(z, w)
    return 0.25 * oms * hyp3f2(1.0, _F43, 1.0, _F53, 2.0, oms, opts)


def mass_via_ab(z: UpperHalfPoint, w: UpperHalfPoint,
                opts: EvalOptions = DEFAULT_OPTIONS) -> Mass:
    """(2/5) (A - B), the reduction of the bubble-decomposition integral."""
    value = 0.4 * (a_term(z, w) - b_term(z, w, opts))
    return Mass(_clamp_tiny_negative(value), "closed_form")


def phi_fn(t: float, opts: EvalOptions = DEFAULT_OPTIONS) -> float:
    """The function whose identical vanishing makes the eta form and the
    sigma form agree:

        phi(t) = 2 pi / sqrt 3
                 + (t/(t-1)) 3F2(1,4/3,1;5/3,2; t/(t-1))
                 - (1-t) 3F2(1,4/3,1;5/3,2; 1-t)
                 - 2 log(1-t)
                 - 2 Gamma(2/3)^2/Gamma(4/3) (t/(t-1)^2)^(1/3)
                     2F1(1,2/3;4/3; t/(t-1)),

    for t in (0, 1).  Its value is 0 up to numerical tolerance."""
    if not (0.0 < t < 1.0):
        raise DomainError(f"phi_fn requires t in (0, 1), got {t}")
    e = t / (t - 1.0)
    return (
        _TWO_PI_OVER_SQRT3
        + e * hyp3f2(1.0, _F43, 1.0, _F53, 2.0, e, opts)
        - (1.0 - t) * hyp3f2(1.0, _F43, 1.0, _F53, 2.0, 1.0 - t, opts)
        - 2.0 * math.log1p(-t)
        - 2.0 * _GAMMA_RATIO * (t / (1.0 - t) ** 2) ** _THIRD
        * hyp2f1(1.0, 2.0 / 3.0, _F43, e, opts)
    )


def restriction_radius_mass(r: float, eps: float) -> float:
    """Finite-eps version of the bubble normalization check.

    Maps the circle |z| = r under z -> z/(eps - z) to the disk with center
    c0 = -r^2/(r^2 - eps^2) and radius rho = eps r/(r^2 - eps^2), removes it
    with phi(z) = z - c0 + rho^2/(z - c0), and returns

        (1 - phi'(0)^(5/8)) / eps^2,   phi'(0) = 1 - rho^2/c0^2,

    which converges to 5/(8 r^2) as eps -> 0."""
    if not (r > 0.0):
        raise DomainError(f"restriction_radius_mass requires r > 0, got {r}")
    if not (0.0 < eps < r):
        raise DomainError(f"restriction_radius_mass requires 0 < eps < r, got eps={eps}")
    c0 = -r * r / (r * r - eps * eps)
    rho = eps * r / (r * r - eps * eps)
    dphi0 = 1.0 - (rho * rho) / (c0 * c0)
    return (1.0 - dphi0 ** 0.625) / (eps * eps)


def _sle_bubble_norm_const(kappa: float) -> float:
    """Prefactor Gamma(4/kappa) / (sqrt(pi) Gamma((8-kappa)/(2 kappa)) (8/kappa - 1))
    of the one-point bubble scaling limit; equals 1/4 at kappa = 8/3.
    Internal: only used by the consistency test."""
    return math.gamma(4.0 / kappa) / (
        math.sqrt(math.pi) * math.gamma((8.0 - kappa) / (2.0 * kappa)) * (8.0 / kappa - 1.0)
    )
