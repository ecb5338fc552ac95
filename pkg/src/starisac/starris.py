"""Surface beamforming: per-side phase profiles and the radar two-hop gain.

The surface applies one unit-modulus weight per element and side.  Pointing a
side at a direction means cancelling, element by element, the phase of the
feeder channel plus the phase of the surface steering vector towards that
direction, which makes the beampattern value at the design direction real,
positive and as large as the feeder magnitudes allow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import SystemParams
from .geometry import (
    AngularDirection,
    ArrayGeometry,
    HalfSpace,
    element_gain,
    half_space_of,
    steering_vector,
)

__all__ = [
    "SpatialBeamformer",
    "design_spatial_beamformer",
    "ris_beampattern_gain",
    "radar_gain_coefficient",
]


@dataclass(frozen=True)
class SpatialBeamformer:
    """Unit-modulus surface weights serving one half-space."""

    side: HalfSpace
    weights: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        mags = np.abs(self.weights)
        if not np.allclose(mags, 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("beamformer weights must be unit modulus")


def design_spatial_beamformer(
    g: np.ndarray,
    target_dir: AngularDirection,
    ris: ArrayGeometry,
    side: HalfSpace | None = None,
) -> SpatialBeamformer:
    """Phase-conjugating weights pointing one side of the surface at `target_dir`.

    weight_n = exp(-1j * (angle(g_n) + angle(u_n(target_dir)))); no further
    normalisation is applied.  If `side` is given it must match the half-space
    of the target direction.
    """
    inferred = half_space_of(target_dir)
    if side is not None and side is not inferred:
        raise ValueError(
            f"target direction lies in the {inferred.value} half-space,"
            f" not {side.value}"
        )
    u = steering_vector(ris, target_dir)
    weights = np.exp(-1j * (np.angle(g) + np.angle(u)))
    return SpatialBeamformer(side=inferred, weights=weights)


def ris_beampattern_gain(
    beamformer: SpatialBeamformer,
    g: np.ndarray,
    direction: AngularDirection,
    ris: ArrayGeometry,
) -> complex:
    """Surface response towards `direction`: u(direction)^T diag(g) weights."""
    u = steering_vector(ris, direction)
    return complex(np.sum(u * g * beamformer.weights))


def radar_gain_coefficient(
    direction: AngularDirection,
    beamformer: SpatialBeamformer,
    s_rad: np.ndarray,
    g: np.ndarray,
    params: SystemParams,
    ris: ArrayGeometry,
    rad: ArrayGeometry,
) -> complex:
    """Deterministic two-hop gain of a target return from `direction`.

    Chains transmit power and pulse width, the element gains of surface and
    receive array towards the target, the free-space factor wavelength^2/(4*pi),
    the receive combiner response and the surface beampattern:

        sqrt(power * width * gain^2 * wavelength^2 / (4*pi))
        * (s_rad^H u_rad(direction)) * (u_ris(direction)^T diag(g) weights)
    """
    if half_space_of(direction) is not beamformer.side:
        raise ValueError(
            f"target direction lies in the {half_space_of(direction).value}"
            f" half-space but the beamformer serves the {beamformer.side.value} side"
        )
    gain = element_gain(direction)
    scale = math.sqrt(
        params.pulse_power
        * params.pulse_width
        * gain
        * gain
        * params.wavelength**2
        / (4 * math.pi)
    )
    rx = complex(np.vdot(s_rad, steering_vector(rad, direction)))
    tx = ris_beampattern_gain(beamformer, g, direction, ris)
    return scale * rx * tx
