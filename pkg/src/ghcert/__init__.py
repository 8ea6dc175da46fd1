"""Certified Gromov-Hausdorff bounds, packing and covering numbers, Bishop
dimension fits and foliated-sample tools on finite metric spaces."""

__version__ = "0.1.0"

from .bishop import BishopFit, EmpiricalMeasure, bishop_fit, cap_bounds_check
from .foliation import (FoliatedSample, LeafSpace, check_broader, check_class_conditions, leaf_space,
                        metric_comparability, sample_hopf, sample_torus_fibration)
from .gh import (GhBoundCertificate, gh_scan, lower_bound_capcov, lower_bound_net_distortion, replay,
                 upper_bound_via_nets)
from .metric import FiniteMetricSpace, MetricValidationError, gh_oracle_exact, hausdorff_distance, validate
from .nets import covering_number, farthest_point_net, greedy_net, packing_number
from .separation import SeparationReport, separation_certificate, separation_scan

__all__ = [
    "BishopFit",
    "EmpiricalMeasure",
    "FiniteMetricSpace",
    "FoliatedSample",
    "GhBoundCertificate",
    "LeafSpace",
    "MetricValidationError",
    "SeparationReport",
    "bishop_fit",
    "cap_bounds_check",
    "check_broader",
    "check_class_conditions",
    "covering_number",
    "farthest_point_net",
    "gh_oracle_exact",
    "gh_scan",
    "greedy_net",
    "hausdorff_distance",
    "leaf_space",
    "lower_bound_capcov",
    "lower_bound_net_distortion",
    "metric_comparability",
    "packing_number",
    "replay",
    "sample_hopf",
    "sample_torus_fibration",
    "separation_certificate",
    "separation_scan",
    "upper_bound_via_nets",
    "validate",
]
