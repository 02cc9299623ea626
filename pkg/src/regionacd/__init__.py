"""Region-aware approximate convex decomposition for collision geometry.

Given a watertight triangle mesh and a set of axis-aligned selection boxes
with per-box error tolerances, produce a set of convex parts that satisfies
each box's tolerance, evaluate per-box approximation error, and benchmark
collision-query throughput of the result.
"""

__version__ = "0.1.0"

from .errors import (
    BudgetExhausted,
    CapFailure,
    ClearanceViolation,
    DegenerateInput,
    EmptyInput,
    EmptyMesh,
    EmptyRegion,
    IoError,
    NoConvergence,
    NoSamplesInRegion,
    NotWatertight,
    NoValidPlane,
    OverlappingRegions,
    ParseError,
    RegionAcdError,
)
from .mesh import Aabb, SurfaceSampleCloud, TriangleMesh, ValidationReport
from .mesh import load_mesh, mesh_aabb, mesh_volume, sample_surface, save_mesh, validate
from .convex import (
    ConvexPart,
    Plane,
    RigidTransform,
    contains_point,
    contains_points,
    convex_hull,
    fully_inside_box,
    gjk_distance,
    intersection_volume,
    merge_pair,
    split_by_plane,
)
from .boolean import (
    bool_difference_convex,
    boolean_difference_boxes,
    boolean_intersect_box,
    box_planes,
    clip_mesh_by_plane,
)
from .acd import AcdParams, ConcavityMeasure, concavity, convex_decompose, pick_split_plane
from .pipeline import (
    Decomposition,
    ExactRegionMesh,
    PipelineParams,
    RegionBox,
    decomp_remainder,
    interactive_decomposition,
    load_decomposition,
    load_regions_file,
    merge_neighbors,
    process_box,
    save_decomposition,
    validate_regions,
    verify_decomposition,
)
from .metrics import (
    ErrorSampleSet,
    MeshDistanceIndex,
    ObjectiveReport,
    RegionError,
    RegionErrorReport,
    error_samples,
    evaluate_decomposition,
    objective_report,
    overall_error,
    region_hausdorff,
)
from .bench import BenchScene, PerfReport, build_scene, run_bench

__all__ = [name for name in dir() if not name.startswith("_")]
