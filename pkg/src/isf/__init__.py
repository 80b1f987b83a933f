"""Iterative Spanning Forest superpixel and supervoxel segmentation."""
from .connectivity import PathCostSpec, Variant, extend_cost, trivial_cost
from .forest import (
    PRESETS,
    ForestState,
    IsfConfig,
    IsfDiagnostics,
    functional_F,
    ift_pass,
    isf_run,
    verify_forest,
)
from .gradient import GradientMap, MinimaSet, closest_minimum, gradient_map, regional_minima
from .lattice import Adjacency, Lattice, neighbors, rgb_to_lab, to_grayscale_lab
from .seeding import (
    SeedSet,
    grid_sample,
    mixed_sample,
    nse,
    recompute_seeds,
    regmin_seeds,
)

__all__ = [
    "Adjacency",
    "ForestState",
    "GradientMap",
    "IsfConfig",
    "IsfDiagnostics",
    "Lattice",
    "MinimaSet",
    "PRESETS",
    "PathCostSpec",
    "SeedSet",
    "Variant",
    "closest_minimum",
    "extend_cost",
    "functional_F",
    "gradient_map",
    "grid_sample",
    "ift_pass",
    "isf_run",
    "mixed_sample",
    "neighbors",
    "nse",
    "recompute_seeds",
    "regional_minima",
    "regmin_seeds",
    "rgb_to_lab",
    "to_grayscale_lab",
    "trivial_cost",
    "verify_forest",
]
