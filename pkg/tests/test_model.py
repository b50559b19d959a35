import math

import numpy as np
import pytest

from fovpoi import CiMatrix, FoV, GeoPoint, GridSpec, Mbr, ModelParams, ci, ci_angular, ci_distance
from fovpoi import normalize
from fovpoi.geometry import M_PER_DEG_LAT
from fovpoi.model import gaussian_peak

P = ModelParams()
ORIGIN = GeoPoint(0.0, 0.0)


def north(m):
    return GeoPoint(m / M_PER_DEG_LAT, 0.0)


def east(m):
    return GeoPoint(0.0, m / M_PER_DEG_LAT)


def test_defaults():
    assert (P.sigma_a, P.sigma_d) == (15.0, 25.0)


@pytest.mark.parametrize("sa,sd", [(0.0, 25.0), (15.0, -1.0), (float("inf"), 25.0)])
def test_params_validated(sa, sd):
    with pytest.raises(ValueError):
        ModelParams(sa, sd)


def test_gaussian_peak_closed_form():
    assert gaussian_peak(15.0) == pytest.approx(1 / (math.sqrt(2 * math.pi) * 15), rel=1e-15)


def test_ci_straight_ahead():
    f = FoV("v", 0, ORIGIN, 0.0, 100.0, 60.0)
    q = north(10.0)
    d = 10.0
    expected = (1 / (math.sqrt(2 * math.pi) * 15.0)
                * math.exp(-d * d / (2 * 25.0**2)) / (math.sqrt(2 * math.pi) * 25.0))
    assert ci(f, q, P) == pytest.approx(expected, rel=1e-9)


def test_ci_off_axis_value():
    # target due east, camera facing 60: deviation 30 degrees
    f = FoV("v", 0, ORIGIN, 60.0, 100.0, 90.0)
    q = east(20.0)
    ca = math.exp(-30.0**2 / (2 * 15.0**2)) / (math.sqrt(2 * math.pi) * 15.0)
    cd = math.exp(-20.0**2 / (2 * 25.0**2)) / (math.sqrt(2 * math.pi) * 25.0)
    assert ci_angular(f, q, P) == pytest.approx(ca, rel=1e-9)
    assert ci_distance(f, q, P) == pytest.approx(cd, rel=1e-9)
    assert ci(f, q, P) == pytest.approx(ca * cd, rel=1e-9)


def test_angular_support_boundary_is_inclusive():
    # due east is exactly 45 degrees off a 45 heading; half angle is 45
    f = FoV("v", 0, ORIGIN, 45.0, 100.0, 90.0)
    assert ci_angular(f, east(10.0), P) > 0.0
    g = FoV("v", 0, ORIGIN, 45.0, 100.0, 89.0)
    assert ci_angular(g, east(10.0), P) == 0.0
    assert ci(g, east(10.0), P) == 0.0


def test_distance_support():
    f = FoV("v", 0, ORIGIN, 0.0, 50.0, 60.0)
    assert ci_distance(f, north(49.0), P) > 0.0
    assert ci_distance(f, north(51.0), P) == 0.0


def test_circular_fov_angular_is_one():
    f = FoV("v", 0, ORIGIN, 0.0, 100.0, 360.0)
    for q in (north(10.0), east(-30.0), GeoPoint(-0.0001, 0.0002)):
        assert ci_angular(f, q, P) == 1.0
        assert ci(f, q, P) == ci_distance(f, q, P)


def test_camera_location_itself():
    f = FoV("v", 0, ORIGIN, 200.0, 100.0, 60.0)
    # bearing to itself is 0, outside a 60 degree span centered on 200
    assert ci(f, ORIGIN, P) == 0.0
    g = FoV("v", 0, ORIGIN, 10.0, 100.0, 60.0)
    assert ci(g, ORIGIN, P) == pytest.approx(gaussian_peak(25.0) * ci_angular(g, ORIGIN, P))


def test_normalize():
    spec = GridSpec(Mbr(0.0, 0.0003, 0.0, 0.0002))
    m = CiMatrix(spec, np.array([[0.0, 2.0], [4.0, 1.0], [0.5, 0.0]]))
    n = normalize(m)
    assert n.values.max() == 1.0
    np.testing.assert_array_equal(n.values, m.values / 4.0)
    assert m.values.max() == 4.0  # input untouched
    z = CiMatrix.zeros(spec)
    assert normalize(z) is z
