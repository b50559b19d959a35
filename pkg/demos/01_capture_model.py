"""
The capture-intention model for a single field of view
=======================================================

A field of view (FoV) is a camera position, a heading, a visible distance
and a visible angle. Here we look at one FoV's bounding rectangle and at how
its capture intention falls off with angle and distance.
"""
import math

import numpy as np

from fovpoi import FoV, GeoPoint, ModelParams, ci, ci_angular, ci_distance
from fovpoi.geometry import M_PER_DEG_LAT

params = ModelParams()           # sigma_a = 15 degrees, sigma_d = 25 m
camera = GeoPoint(34.05, -118.25)

# a camera facing north-east, seeing 120 m within a 60 degree wedge
f = FoV("demo", 0, camera, theta=45.0, r=120.0, alpha=60.0)
print("bounding rectangle:", f.mbr)


def offset(bearing_deg, dist_m):
    # target point at a bearing and distance from the camera
    rad = math.radians(bearing_deg)
    lat = camera.lat + dist_m * math.cos(rad) / M_PER_DEG_LAT
    kx = M_PER_DEG_LAT * math.cos(math.radians(0.5 * (camera.lat + lat)))
    return GeoPoint(lat, camera.lon + dist_m * math.sin(rad) / kx)


# along the heading, intention is highest at the camera and fades with distance
for d in (0.0, 10.0, 25.0, 50.0, 100.0, 119.0, 121.0):
    print(f"distance {d:6.1f} m   ci_d = {ci_distance(f, offset(45.0, d), params):.6f}")

# across the wedge at 20 m, intention fades with the deviation from the heading
for dev in (0.0, 10.0, 20.0, 30.0, 31.0):
    q = offset(45.0 + dev, 20.0)
    print(f"deviation {dev:5.1f} deg  ci_a = {ci_angular(f, q, params):.6f}  ci = {ci(f, q, params):.3e}")

# a 360 degree camera has no preferred direction: only distance matters
pano = FoV("pano", 0, camera, theta=0.0, r=120.0, alpha=360.0)
values = [ci(pano, offset(b, 20.0), params) for b in np.linspace(0, 350, 8)]
print("360 degree FoV at 20 m, any bearing:", np.round(values, 8))
