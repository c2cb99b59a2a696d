"""Intrinsic diameters of centrally symmetric convex polyhedral surfaces.

The surface is a closed triangle mesh; distances are exact shortest paths
along it. The antipodal diameter (largest distance between a point and its
image under a fixed-point-free involutive isometry) is compared against the
full intrinsic diameter.
"""

from .config import DEFAULT_TOLERANCES, Tolerances
from .diameter import (DiameterReport, Sampler, antipodal_diameter, brute_force_diameter,
                       farthest_point, refine_local_max)
from .errors import (BudgetExceeded, GeodiamError, InvalidArgument, InvalidSpace,
                     NotConvex, NotSymmetric)
from .geodesic import (DistanceField, GeodesicPath, distance, distances_from, exact_distance,
                       graph_distance)
from .involution import Involution, central_symmetry, check_involution, vertex_permutation
from .surface import (SurfacePoint, TriSurface, build_box, build_symmetric_hull, locate_point,
                      parse_obj, read_obj, validate_sphere_topology)
from .theorem import (DiscreteLengthSpace, discrete_theorem_check, equality_chain_check,
                      run_proof, verify_theorem)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "DEFAULT_TOLERANCES", "DiameterReport", "DiscreteLengthSpace",
    "DistanceField", "GeodesicPath", "GeodiamError", "InvalidArgument", "InvalidSpace",
    "Involution", "NotConvex", "NotSymmetric", "Sampler", "SurfacePoint", "Tolerances",
    "TriSurface", "antipodal_diameter", "brute_force_diameter", "build_box",
    "build_symmetric_hull", "central_symmetry", "check_involution", "discrete_theorem_check",
    "distance", "distances_from", "equality_chain_check", "exact_distance", "farthest_point",
    "graph_distance", "locate_point", "parse_obj", "read_obj", "refine_local_max", "run_proof",
    "validate_sphere_topology", "verify_theorem", "vertex_permutation",
]
