"""loopmass: total mass of Brownian loops in the upper half-plane whose
hull contains two given interior points, with quadrature and Monte Carlo
cross-checks for every closed form."""

from .errors import (
    DegeneratePairError,
    DivergenceError,
    DomainError,
    IndeterminatePointError,
    LoopmassError,
    NonConvergenceError,
    PoleError,
    UnsupportedParametersError,
)
from .geometry import (
    Mass,
    UnitDiskPoint,
    UpperHalfPoint,
    disk_to_half,
    eta,
    sigma,
    sigma_disk,
)
from .loopmeasure import (
    PassageSide,
    Side,
    a_term,
    b_term,
    brownian_bubble_two_point,
    bubble_one_sided,
    g_connect,
    mass_disconnect_two_cardy,
    mass_disconnect_two_disk,
    mass_disconnect_two_han,
    mass_via_ab,
    phi_fn,
    restriction_radius_mass,
    schramm_left_pass,
    sle_bubble_one_point,
    sle_bubble_two_point,
    sle_pass_combo,
)
from .quadrature import (
    QuadResult,
    integrate_1d,
    inner_integral_closed,
    inner_integral_f,
    mass_via_double_integral,
    mass_via_reduced_integral,
)
from .specialfn import (
    DEFAULT_OPTIONS,
    EvalOptions,
    digamma,
    gamma_fn,
    hyp2f1,
    hyp3f2,
    hyp3f2_unit_11a,
    integral_2f1,
    thomae_transform,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_OPTIONS",
    "DegeneratePairError",
    "DivergenceError",
    "DomainError",
    "EvalOptions",
    "IndeterminatePointError",
    "LoopmassError",
    "Mass",
    "NonConvergenceError",
    "PassageSide",
    "PoleError",
    "QuadResult",
    "Side",
    "UnitDiskPoint",
    "UnsupportedParametersError",
    "UpperHalfPoint",
    "a_term",
    "b_term",
    "brownian_bubble_two_point",
    "bubble_one_sided",
    "digamma",
    "disk_to_half",
    "eta",
    "g_connect",
    "gamma_fn",
    "hyp2f1",
    "hyp3f2",
    "hyp3f2_unit_11a",
    "integral_2f1",
    "integrate_1d",
    "inner_integral_closed",
    "inner_integral_f",
    "mass_disconnect_two_cardy",
    "mass_disconnect_two_disk",
    "mass_disconnect_two_han",
    "mass_via_ab",
    "mass_via_double_integral",
    "mass_via_reduced_integral",
    "phi_fn",
    "restriction_radius_mass",
    "schramm_left_pass",
    "sigma",
    "sigma_disk",
    "sle_bubble_one_point",
    "sle_bubble_two_point",
    "sle_pass_combo",
    "thomae_transform",
]
