"""Capacity of products of convex polytopes via shortest pinned curves.

The headline entry point is :func:`ehz_capacity`, which returns the value
together with the cross-checking quantities, the minimizing curve, and a
verified billiard trajectory realizing it.  The supporting geometry, curve,
and billiard primitives are exported alongside for direct use.
"""

from .billiards import (
    BilliardPair,
    BounceRecord,
    WeakBounceRecord,
    WeakVerification,
    extract_dual,
    verify_strong,
    verify_weak,
)
from .bodies import (
    BodySpec,
    generate_body,
    named_body,
    named_body_names,
    perturbed_body,
    random_polygon,
)
from .capacity import (
    AssignmentSolution,
    CapacityResult,
    CrossCheckQuantities,
    FacetAssignment,
    IdentityReport,
    boundary_grid,
    brute_force_oracle,
    capacity_identities,
    ehz_capacity,
    enumerate_assignments,
    solve_assignment,
)
from .curves import (
    ClosedPolygonalCurve,
    TranslationCertificate,
    canonicalize,
    discrete_action,
    minkowski_length,
    reduce_vertex_count,
    translation_margin,
)
from .errors import (
    CurveCollapseError,
    DimensionMismatchError,
    EhzcapError,
    GridTooCoarseError,
    InvalidBodyError,
    LpNumericalError,
    NoValidSubselectionError,
    NotABilliardError,
    OriginNotInteriorError,
    PointOffBoundaryError,
    PointOutsideBodyError,
)
from .geometry import (
    Cone,
    ConeMembership,
    ConvexPolytope,
    affine_image,
    chebyshev_center,
    hausdorff_distance,
    minkowski_functional,
    negate,
    normal_cone,
    polar,
    project_point,
    support_function,
    translate,
)

__all__ = [
    "AssignmentSolution",
    "BilliardPair",
    "BodySpec",
    "BounceRecord",
    "CapacityResult",
    "ClosedPolygonalCurve",
    "Cone",
    "ConeMembership",
    "ConvexPolytope",
    "CrossCheckQuantities",
    "CurveCollapseError",
    "DimensionMismatchError",
    "EhzcapError",
    "FacetAssignment",
    "GridTooCoarseError",
    "IdentityReport",
    "InvalidBodyError",
    "LpNumericalError",
    "NoValidSubselectionError",
    "NotABilliardError",
    "OriginNotInteriorError",
    "PointOffBoundaryError",
    "PointOutsideBodyError",
    "TranslationCertificate",
    "WeakBounceRecord",
    "WeakVerification",
    "affine_image",
    "boundary_grid",
    "brute_force_oracle",
    "canonicalize",
    "capacity_identities",
    "chebyshev_center",
    "discrete_action",
    "ehz_capacity",
    "enumerate_assignments",
    "extract_dual",
    "generate_body",
    "hausdorff_distance",
    "minkowski_functional",
    "minkowski_length",
    "named_body",
    "named_body_names",
    "negate",
    "normal_cone",
    "perturbed_body",
    "polar",
    "project_point",
    "random_polygon",
    "reduce_vertex_count",
    "solve_assignment",
    "support_function",
    "translate",
    "translation_margin",
    "verify_strong",
    "verify_weak",
]

__version__ = "0.1.0"
