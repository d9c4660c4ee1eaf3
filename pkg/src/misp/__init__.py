"""Secretary algorithms for matroids and matroid intersections."""

from .errors import ResourceLimitError
from .matroids import (
    DirectSumMatroid,
    DualMatroid,
    GraphicMatroid,
    LaminarMatroid,
    LinearMatroid,
    Matroid,
    PartitionMatroid,
    RestrictionMatroid,
    TransversalMatroid,
    UniformMatroid,
    matroid_from_dict,
)
from .offline import IntersectionConstraint, brute_force_opt, greedy_intersection, greedy_single, imp_set

__version__ = "0.1.0"
