"""blender-forge: simulator and certified verifier for cu-blenders.

Constructs co-index-one heterodimensional cycles in volume-preserving
block-affine normal form, unfolds them through the one-parameter family
f_t, solves the two-itinerary coincidence conditions, builds the periodic
points with strong homoclinic intersections, and certifies the resulting
cu-blender's covering property with robustness margins.
"""

from .blender import (
    BlenderCertificate,
    BlenderRegion,
    IntersectionWitness,
    RobustnessReport,
    Strip,
    build_blender,
    is_well_placed,
    random_well_placed_strip,
    robustness_test,
    strip_intersect_ws,
    verify_covering,
)
from .center_dynamics import (
    CenterFixedPoint,
    CenterItinerary,
    ParameterSolution,
    psi,
    psi_fixed_point,
    solve_parameters,
    unfolded_model,
)
from .config import RunConfig, parse_config
from .core_affine import (
    BlockAffineMap,
    Box,
    ChartPoint,
    SplittingDims,
    apply_map,
    compose,
    compose_chain,
    identity_map,
    invert,
    iterate,
    map_box,
    volume_defect,
)
from .cycle_model import (
    Itinerary,
    SimpleCycle,
    cycle_itinerary,
    manifold_slice,
    orbit,
    quasi_transverse_check,
    reference_cycle,
    validate,
)
from .errors import (
    BlenderForgeError,
    ChartMismatchError,
    ConfigError,
    ConvergenceError,
    DimensionMismatchError,
    DomainEscapeError,
    ModelInvariantError,
    NoSolutionError,
    SingularBlockError,
)
from .periodic_orbits import (
    PeriodicOrbitRecord,
    ReturnMap,
    StrongHomoclinicCertificate,
    build_return_map,
    find_periodic,
    homoclinic_relation,
    strong_homoclinic_certificate,
)
from .perturbation import (
    UnfoldedCycle,
    perturb_map_conservative,
    retune_center,
    shift_family,
)

__version__ = "0.1.0"

__all__ = [
    "BlenderCertificate",
    "BlenderForgeError",
    "BlenderRegion",
    "BlockAffineMap",
    "Box",
    "CenterFixedPoint",
    "CenterItinerary",
    "ChartMismatchError",
    "ChartPoint",
    "ConfigError",
    "ConvergenceError",
    "DimensionMismatchError",
    "DomainEscapeError",
    "IntersectionWitness",
    "Itinerary",
    "ModelInvariantError",
    "NoSolutionError",
    "ParameterSolution",
    "PeriodicOrbitRecord",
    "ReturnMap",
    "RobustnessReport",
    "RunConfig",
    "SimpleCycle",
    "SingularBlockError",
    "SplittingDims",
    "Strip",
    "StrongHomoclinicCertificate",
    "UnfoldedCycle",
    "apply_map",
    "build_blender",
    "build_return_map",
    "compose",
    "compose_chain",
    "cycle_itinerary",
    "find_periodic",
    "homoclinic_relation",
    "identity_map",
    "invert",
    "is_well_placed",
    "iterate",
    "manifold_slice",
    "map_box",
    "orbit",
    "parse_config",
    "perturb_map_conservative",
    "psi",
    "psi_fixed_point",
    "quasi_transverse_check",
    "random_well_placed_strip",
    "reference_cycle",
    "retune_center",
    "robustness_test",
    "shift_family",
    "solve_parameters",
    "strip_intersect_ws",
    "strong_homoclinic_certificate",
    "unfolded_model",
    "validate",
    "verify_covering",
    "volume_defect",
]
