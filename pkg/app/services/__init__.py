"""
Services Package.

Tree arithmetic, lattice homomorphisms, Kirszbraun extension, the chains,
exact enumeration, continuum profiles and the experiment drivers.
"""
from app.services.enumeration import (
    CountResult,
    SurfaceTensionTable,
    count_region_homomorphisms,
    enumerate_fixed_boundary,
    enumerate_invariant,
    surface_tension_table,
)
from app.services.glauber import (
    ChainState,
    CoupledState,
    ExtremumKind,
    adapted_step,
    classify,
    coupled_step,
    glauber_step,
    make_rng,
    min_probability,
    pivot,
    resample_excursion,
)
from app.services.kirszbraun import (
    PartialHeight,
    check_extension_condition,
    kirszbraun_extend,
    maximal_homomorphism,
    periodic_from_slope,
)
from app.services.lattice import (
    HeightFunction,
    PeriodicConfig,
    Region,
    Slope,
    slope_of,
    supporting_geodesic,
    validate_homomorphism,
)
from app.services.profiles import (
    AsymptoticProfile,
    BoundaryProfile,
    MeetingHeights,
    ProfileGrid,
    extend_boundary_profile,
    macroscopic_entropy,
    minimize_entropy,
    path_property_check,
)
from app.services.tree import (
    Geodesic,
    TreeEnd,
    TreeVertex,
    busemann_depth,
    depth,
    meeting_height,
    tree_distance,
)

__all__ = [
    "AsymptoticProfile",
    "BoundaryProfile",
    "ChainState",
    "CountResult",
    "CoupledState",
    "ExtremumKind",
    "Geodesic",
    "HeightFunction",
    "MeetingHeights",
    "PartialHeight",
    "PeriodicConfig",
    "ProfileGrid",
    "Region",
    "Slope",
    "SurfaceTensionTable",
    "TreeEnd",
    "TreeVertex",
    "adapted_step",
    "busemann_depth",
    "check_extension_condition",
    "classify",
    "count_region_homomorphisms",
    "coupled_step",
    "depth",
    "enumerate_fixed_boundary",
    "enumerate_invariant",
    "extend_boundary_profile",
    "glauber_step",
    "kirszbraun_extend",
    "macroscopic_entropy",
    "make_rng",
    "maximal_homomorphism",
    "meeting_height",
    "min_probability",
    "minimize_entropy",
    "path_property_check",
    "periodic_from_slope",
    "pivot",
    "resample_excursion",
    "slope_of",
    "supporting_geodesic",
    "surface_tension_table",
    "tree_distance",
    "validate_homomorphism",
]
