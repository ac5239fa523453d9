"""Numerical MTW (A3) checks for distance-based costs on round spheres."""

from .analytic import (
    OrientationCase,
    PCoefficients,
    e_jet,
    gradient_bound,
    mtw_general,
    o_value,
    p_coefficients,
    small_d_limit,
)
from .classifier import (
    ClassificationReport,
    ScanReport,
    classify,
    eq4_numerator,
    example_suite,
    mstar_cubic,
    mstar_positive,
    refine_root,
    scan,
)
from .chart import SphereConfig, chart_cost, geodesic_distance, radius_from_distance, target_from_case
from .costjet import CostModel, Family, Jet4, jet_eval
from .errors import *  # noqa: F401,F403
from .oracle import StencilConfig, invariance_check, mixed_partial, mtw_tensor_fd

__version__ = "0.1.0"
