"""Hull and double-McCormick relaxations of trilinear monomials on boxes.

Closed-form relaxation volumes, an independent Monte-Carlo volume check,
a small LP layer, and the box-cubic width experiments that tie volume to
LP relaxation quality.
"""

from .trilinear import (
    Bounds3,
    InequalitySystem,
    Labeling,
    LinearInequality,
    canonical_labeling,
    double_mccormick_system,
    hull_formulation,
    is_canonically_labeled,
    mccormick_bilinear,
    membership,
    mixed_corner_sums,
)
from .volumes import (
    McEstimate,
    idealized_radial_distance,
    idealized_radius,
    mc_volume_estimate,
    vol_double_mccormick,
    vol_excess,
    vol_hull,
)
from .lp import CompiledRegion, LinearProgram, LpError, Solution, directional_width, solve
from .instances import (
    BoundsSet,
    Hypergraph,
    assemble_relaxation,
    gen_bounds,
    gen_directions,
    make_hypergraph,
)
from .experiment import (
    ProfileCurve,
    RegressionResult,
    WidthRecord,
    aggregated_idealized_radius,
    direction_widths,
    linear_fit,
    performance_profile,
    quasi_mean_width,
    width_difference_report,
    worst_case_sweep,
)

__version__ = "0.1.0"
