"""Top-k point-of-interest detection from field-of-view metadata."""
from .detectors import (CisParams, Query, StopCriterion, TopKResult, detect_cis, detect_naive,
                        detect_optimized, detect_single_sampling, kmeans, rms_radius)
from .geometry import FoV, GeoPoint, Mbr, angular_difference, bearing, fov_mbr, geo_distance
from .grid import CapacityError, CellRef, CiMatrix, GridSpec, top_k
from .metrics import correct_fraction, sum_min_distances
from .model import ModelParams, ci, ci_angular, ci_distance, normalize
from .store import FovStore, TimeInterval, get_fovs_in_range, load

__all__ = [
    "CapacityError", "CellRef", "CiMatrix", "CisParams", "FoV", "FovStore", "GeoPoint",
    "GridSpec", "Mbr", "ModelParams", "Query", "StopCriterion", "TimeInterval", "TopKResult",
    "angular_difference", "bearing", "ci", "ci_angular", "ci_distance", "correct_fraction",
    "detect_cis", "detect_naive", "detect_optimized", "detect_single_sampling", "fov_mbr",
    "geo_distance", "get_fovs_in_range", "kmeans", "load", "normalize", "rms_radius",
    "sum_min_distances", "top_k",
]
