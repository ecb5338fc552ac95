"""Angular conventions, element gains and steering vectors for uniform square arrays.

Both the reconfigurable surface and the radar receive array are uniform square
arrays in the y-z plane with half-wavelength element spacing and array normal
along +x.  Azimuth is measured from the +x axis in the x-y plane, elevation
towards +z.  Directions with azimuth in (-pi/2, pi/2) lie in front of the
surface (reflective half-space); azimuth in (pi/2, 3*pi/2) lies behind it
(transmissive half-space).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HalfSpace",
    "AngularDirection",
    "ArrayGeometry",
    "half_space_of",
    "mirror_direction",
    "element_gain",
    "steering_vector",
    "steering_matrix",
]


class HalfSpace(enum.Enum):
    """Side of the surface a far-field direction belongs to."""

    TRANSMISSIVE = "transmissive"
    REFLECTIVE = "reflective"

    def __str__(self) -> str:  # used in CSV columns and config keys
        return self.value


@dataclass(frozen=True)
class AngularDirection:
    """Far-field direction in radians: azimuth in (-pi/2, 3*pi/2), elevation in (-pi/2, pi/2).

    Both bounds are strict; the azimuth domain wraps the full sphere once so
    every direction has a unique representation.
    """

    az: float
    el: float

    def __post_init__(self) -> None:
        if not -math.pi / 2 < self.az < 3 * math.pi / 2:
            raise ValueError(f"azimuth {self.az!r} rad outside (-pi/2, 3*pi/2)")
        if not -math.pi / 2 < self.el < math.pi / 2:
            raise ValueError(f"elevation {self.el!r} rad outside (-pi/2, pi/2)")

    @classmethod
    def from_degrees(cls, az_deg: float, el_deg: float) -> "AngularDirection":
        """Build a direction from degrees; conversion to radians happens once, here."""
        return cls(math.radians(az_deg), math.radians(el_deg))


def half_space_of(direction: AngularDirection) -> HalfSpace:
    """Classify a direction; azimuth exactly at pi/2 (array plane) counts as reflective."""
    if math.pi / 2 < direction.az < 3 * math.pi / 2:
        return HalfSpace.TRANSMISSIVE
    return HalfSpace.REFLECTIVE


def mirror_direction(direction: AngularDirection) -> AngularDirection:
    """Mirror image through the array plane: azimuth az -> pi - az, elevation kept.

    An involution that flips the half-space (except on the array plane itself).
    """
    return AngularDirection(math.pi - direction.az, direction.el)


def element_gain(direction: AngularDirection | np.ndarray, el: np.ndarray | None = None):
    """Element power gain (pi/4) * cos(az)^2 * cos(el)^2, identical on both sides.

    Accepts a single direction, or two arrays (az, el) in radians for batch use.
    """
    if el is None:
        az_v, el_v = direction.az, direction.el
    else:
        az_v, el_v = np.asarray(direction), np.asarray(el)
    return (np.pi / 4) * np.cos(az_v) ** 2 * np.cos(el_v) ** 2


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform square array with n_elements = side^2 elements at (y, z) = (m, n) * lambda/2.

    Element (m, n) sits at flat index m * side + n (row-major).
    """

    n_elements: int

    def __post_init__(self) -> None:
        side = math.isqrt(self.n_elements)
        if self.n_elements <= 0 or side * side != self.n_elements:
            raise ValueError(f"n_elements {self.n_elements} is not a positive perfect square")

    @property
    def side(self) -> int:
        return math.isqrt(self.n_elements)


def steering_vector(
    geom: ArrayGeometry, direction: AngularDirection, wavelength: float | None = None
) -> np.ndarray:
    """Unit-modulus steering vector of the array towards `direction`.

    Entry at flat index m*side+n is exp(1j*pi*(m*cos(el)*sin(az) + n*sin(el))).
    The element spacing is half a wavelength, so the phase profile does not
    depend on the carrier; `wavelength` is accepted for call-site symmetry.
    """
    return steering_matrix(geom, np.asarray([direction.az]), np.asarray([direction.el]))[0]


def steering_matrix(geom: ArrayGeometry, az: np.ndarray, el: np.ndarray) -> np.ndarray:
    """Steering vectors for arrays of azimuth/elevation (radians); shape (n_dirs, n_elements)."""
    az = np.atleast_1d(np.asarray(az, dtype=float))
    el = np.atleast_1d(np.asarray(el, dtype=float))
    side = geom.side
    idx = np.arange(side)
    # phase/pi contributions of the two lattice axes at each direction
    y_comp = np.cos(el) * np.sin(az)  # (n_dirs,)
    z_comp = np.sin(el)
    phase = np.pi * (
        y_comp[:, None, None] * idx[None, :, None] + z_comp[:, None, None] * idx[None, None, :]
    )
    return np.exp(1j * phase).reshape(az.shape[0], geom.n_elements)
