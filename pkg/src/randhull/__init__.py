"""Convex hulls of random boundary points: exact face statistics,
combinatorial types, stabilization radii, and reproducible experiments."""

__version__ = "0.1.0"

from .body import (AreaEstimate, Ball, BlaschkeRadii, Cap, CapacityError,
                   CapPacking, Ellipsoid, blaschke_radii, boundary_ball_area,
                   boundary_normal, cap_area, cap_contains,
                   cap_from_direction, make_cap, pack_disjoint_caps,
                   sample_surface, support, surface_area)
from .combinatorics import (TypeLabel, beyond_count, classify_d_plus_2,
                            region_of, type_f_count)
from .experiments import (CltReport, ConfigError, ExperimentConfig,
                          ReplicationRecord, ReplicationTable, SummaryStats,
                          clt_report, fit_power_law, ks_to_normal, normal_cdf,
                          run_binomial, run_poisson, summarize)
from .geometry import (GeneralPositionError, Hyperplane, Side,
                       SupportingPlane, facet_hyperplane, orientation,
                       side_of)
from .hull import (Facet, HullComplex, brute_force_hull,
                   dehn_sommerville_check, enumerate_k_faces, euler_check,
                   f_vector, incremental_hull, validate_complex)
from .rng import Stream, derive_seed, mix64
from .stabilization import (InsufficientDataError, MomentResult, ScoreTable,
                            StabilizationRecord, TailResult,
                            moment_experiment, radius_tail_experiment,
                            scores, stabilization_radius,
                            vertex_score_count)

__all__ = [name for name in dir() if not name.startswith("_")]
