import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from starisac.geometry import (
    AngularDirection,
    ArrayGeometry,
    HalfSpace,
    element_gain,
    half_space_of,
    mirror_direction,
    steering_matrix,
    steering_vector,
)

# directions safely away from the half-space boundary at az = pi/2
_az_off_boundary = st.floats(
    min_value=-1.5, max_value=4.6, allow_nan=False, allow_infinity=False
).filter(lambda a: abs(a - math.pi / 2) > 1e-3)
_el = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False, allow_infinity=False)


class TestAngularDirection:
    def test_from_degrees(self):
        d = AngularDirection.from_degrees(160.0, 0.0)
        assert d.az == pytest.approx(math.radians(160.0), abs=0.0)
        assert d.el == 0.0

    @pytest.mark.parametrize("az,el", [(-math.pi / 2, 0.0), (3 * math.pi / 2, 0.0),
                                       (0.0, math.pi / 2), (0.0, -math.pi / 2), (5.0, 0.0)])
    def test_rejects_out_of_domain(self, az, el):
        with pytest.raises(ValueError):
            AngularDirection(az, el)


class TestHalfSpace:
    @pytest.mark.parametrize("az_deg,expected", [
        (0.0, HalfSpace.REFLECTIVE),
        (89.0, HalfSpace.REFLECTIVE),
        (90.0, HalfSpace.REFLECTIVE),  # boundary pinned to reflective
        (91.0, HalfSpace.TRANSMISSIVE),
        (180.0, HalfSpace.TRANSMISSIVE),
        (-45.0, HalfSpace.REFLECTIVE),
    ])
    def test_classification(self, az_deg, expected):
        assert half_space_of(AngularDirection.from_degrees(az_deg, 10.0)) is expected

    def test_str_values(self):
        assert str(HalfSpace.TRANSMISSIVE) == "transmissive"
        assert str(HalfSpace.REFLECTIVE) == "reflective"


class TestMirror:
    @given(az=_az_off_boundary, el=_el)
    def test_involution(self, az, el):
        d = AngularDirection(az, el)
        back = mirror_direction(mirror_direction(d))
        assert back.az == pytest.approx(az, abs=1e-12)
        assert back.el == el

    @given(az=_az_off_boundary, el=_el)
    def test_flips_half_space(self, az, el):
        d = AngularDirection(az, el)
        assert half_space_of(mirror_direction(d)) is not half_space_of(d)

    @given(az=_az_off_boundary, el=_el)
    def test_steering_identity(self, az, el):
        # both sides of the surface see the same phase profile
        geom = ArrayGeometry(16)
        d = AngularDirection(az, el)
        np.testing.assert_allclose(
            steering_vector(geom, mirror_direction(d)),
            steering_vector(geom, d),
            rtol=0.0, atol=1e-12,
        )

    @given(az=_az_off_boundary, el=_el)
    def test_gain_is_mirror_symmetric(self, az, el):
        d = AngularDirection(az, el)
        assert element_gain(mirror_direction(d)) == pytest.approx(element_gain(d), rel=1e-12)


class TestElementGain:
    def test_boresight(self):
        assert element_gain(AngularDirection(0.0, 0.0)) == pytest.approx(math.pi / 4, rel=1e-15)

    def test_oblique_value(self):
        d = AngularDirection.from_degrees(20.0, 0.0)
        assert element_gain(d) == pytest.approx(0.6935240310519574, rel=1e-12)

    def test_array_form_matches_scalar(self):
        az = np.array([0.1, 2.0, -0.4])
        el = np.array([0.0, 0.3, -0.2])
        batch = element_gain(az, el)
        singles = [element_gain(AngularDirection(a, e)) for a, e in zip(az, el)]
        np.testing.assert_allclose(batch, singles, rtol=1e-15)


class TestArrayGeometry:
    def test_side(self):
        assert ArrayGeometry(256).side == 16
        assert ArrayGeometry(4).side == 2

    @pytest.mark.parametrize("n", [0, -4, 12, 30])
    def test_rejects_non_square(self, n):
        with pytest.raises(ValueError):
            ArrayGeometry(n)


class TestSteering:
    def test_unit_modulus(self):
        geom = ArrayGeometry(64)
        u = steering_vector(geom, AngularDirection(0.7, -0.3))
        np.testing.assert_allclose(np.abs(u), 1.0, atol=1e-14)

    def test_four_element_example(self):
        # 2x2 array towards az=30 deg, el=0: phase pi*m*sin(30deg) = pi*m/2
        geom = ArrayGeometry(4)
        u = steering_vector(geom, AngularDirection.from_degrees(30.0, 0.0))
        np.testing.assert_allclose(u, [1.0, 1.0, 1j, 1j], atol=1e-12)

    def test_boresight_is_all_ones(self):
        geom = ArrayGeometry(16)
        u = steering_vector(geom, AngularDirection(0.0, 0.0))
        np.testing.assert_allclose(u, np.ones(16), atol=0.0)

    def test_matrix_matches_vector(self):
        geom = ArrayGeometry(25)
        az = np.array([0.3, 1.9, 2.5])
        el = np.array([-0.2, 0.1, 0.4])
        mat = steering_matrix(geom, az, el)
        assert mat.shape == (3, 25)
        for k in range(3):
            np.testing.assert_allclose(
                mat[k], steering_vector(geom, AngularDirection(az[k], el[k])), atol=1e-14
            )

    def test_wavelength_argument_is_inert(self):
        geom = ArrayGeometry(16)
        d = AngularDirection(0.5, 0.2)
        np.testing.assert_array_equal(
            steering_vector(geom, d), steering_vector(geom, d, wavelength=0.01)
        )
