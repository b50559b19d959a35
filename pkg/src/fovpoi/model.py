"""Gaussian capture-intention model.

An FoV's intention to capture a target is the product of an angular
Gaussian (deviation from the shooting direction, degrees) and a distance
Gaussian (meters from the camera). Both are truncated to the FoV support:
the angular term to ``alpha / 2`` and the distance term to ``r``. A
circular FoV (``alpha == 360``) has constant angular intention 1.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .geometry import FoV, GeoPoint, angular_difference, bearing, geo_distance

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ModelParams:
    sigma_a: float = 15.0  # degrees
    sigma_d: float = 25.0  # meters

    def __post_init__(self):
        for name in ("sigma_a", "sigma_d"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")


def gaussian_peak(sigma: float) -> float:
    return 1.0 / (_SQRT_2PI * sigma)


def ci_angular(fov: FoV, target: GeoPoint, params: ModelParams) -> float:
    if fov.alpha == 360.0:
        return 1.0
    delta = angular_difference(fov.theta, bearing(fov.p, target))
    if delta > 0.5 * fov.alpha:
        return 0.0
    s = params.sigma_a
    return math.exp(-delta * delta / (2.0 * s * s)) / (_SQRT_2PI * s)


def ci_distance(fov: FoV, target: GeoPoint, params: ModelParams) -> float:
    d = geo_distance(fov.p, target)
    if d > fov.r:
        return 0.0
    s = params.sigma_d
    return math.exp(-d * d / (2.0 * s * s)) / (_SQRT_2PI * s)


def ci(fov: FoV, target: GeoPoint, params: ModelParams) -> float:
    """Contribution of ``fov`` to the capture intention of ``target``."""
    dist = ci_distance(fov, target, params)
    if fov.alpha == 360.0 or dist == 0.0:
        return dist
    return ci_angular(fov, target, params) * dist


def normalize(matrix):
    """Scale a CiMatrix so its maximum entry is 1. All-zero input is returned as is."""
    peak = float(np.max(matrix.values)) if matrix.values.size else 0.0
    if peak <= 0.0:
        return matrix
    return dataclasses.replace(matrix, values=matrix.values / peak)
