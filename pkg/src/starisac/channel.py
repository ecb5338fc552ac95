"""Propagation model: feeder link, fluctuating target returns and user multipath.

Power quantities are in watts, times in seconds, angles in radians.  Complex
noise and amplitudes follow the circular convention: CN(0, v) has variance v/2
per real component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AngularDirection,
    ArrayGeometry,
    HalfSpace,
    element_gain,
    half_space_of,
    steering_matrix,
    steering_vector,
)

__all__ = [
    "SPEED_OF_LIGHT",
    "SystemParams",
    "UserPath",
    "UserSideConfig",
    "feeder_ris_channel",
    "draw_target_amplitude",
    "pulse_autocorr",
    "draw_user_paths",
    "user_channel_taps",
]

SPEED_OF_LIGHT = 299792458.0  # m/s, exact by definition


@dataclass(frozen=True)
class SystemParams:
    """Waveform and front-end constants shared by every experiment.

    The pulse occupies the full signal bandwidth, so its width is exactly
    1/bandwidth; the burst repeats every `pri` seconds for `pulses_per_cpi`
    pulses.  Noise variances are per complex sample, in watts.
    """

    carrier_freq: float
    bandwidth: float
    pri: float
    pulses_per_cpi: int
    pulse_power: float
    feeder_gain: float
    feeder_distance: float
    feeder_direction: AngularDirection
    radar_noise_var: float
    comm_noise_var: float = 1.0

    def __post_init__(self) -> None:
        for name in ("carrier_freq", "bandwidth", "pri", "pulse_power", "feeder_gain",
                     "feeder_distance", "radar_noise_var"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.comm_noise_var < 0:
            raise ValueError(f"comm_noise_var must be >= 0, got {self.comm_noise_var!r}")
        if self.pulses_per_cpi < 1:
            raise ValueError(f"pulses_per_cpi must be >= 1, got {self.pulses_per_cpi}")
        # low duty cycle keeps fast-time and slow-time processing separable
        if self.pulse_width > self.pri / 10:
            raise ValueError(
                f"pulse width {self.pulse_width:.3e} s exceeds a tenth of the"
                f" pulse repetition interval {self.pri:.3e} s"
            )

    @property
    def pulse_width(self) -> float:
        """Pulse width in seconds; pulse_width * bandwidth == 1 by construction."""
        return 1.0 / self.bandwidth

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def unambiguous_doppler(self) -> float:
        """Half-width of the open unambiguous Doppler interval, 1/(2*pri)."""
        return 0.5 / self.pri


def feeder_ris_channel(params: SystemParams, ris: ArrayGeometry) -> np.ndarray:
    """Feeder-to-surface channel vector; every entry has the same magnitude.

    The feeder illuminates the whole surface from one far-field direction, so
    the channel is a scaled steering vector:
    sqrt(feeder_gain * element_gain) * wavelength / (4*pi*distance) * u(dir).
    """
    amp = (
        math.sqrt(params.feeder_gain * element_gain(params.feeder_direction))
        * params.wavelength
        / (4 * math.pi * params.feeder_distance)
    )
    return amp * steering_vector(ris, params.feeder_direction)


def draw_target_amplitude(rcs: float, target_range: float, rng: np.random.Generator, size=None):
    """Slowly fluctuating target amplitude: CN(0, rcs / ((4*pi)^2 * range^4)).

    Constant within a burst, independent across bursts.  rcs = 0 yields an
    exact zero (target absent) while still consuming the same draws.
    """
    if rcs < 0:
        raise ValueError(f"radar cross-section must be >= 0, got {rcs!r}")
    if target_range <= 0:
        raise ValueError(f"target range must be positive, got {target_range!r}")
    std = math.sqrt(rcs / ((4 * math.pi) ** 2 * target_range**4) / 2.0)
    # fixed draw order: real parts first, imaginary parts second
    if size is None:
        re, im = rng.standard_normal(2)
        return std * complex(re, im)
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return std * (re + 1j * im)


def pulse_autocorr(t, params: SystemParams):
    """Autocorrelation of the unit-energy rectangular pulse: max(0, 1 - |t|/width)."""
    t = np.asarray(t, dtype=float)
    out = np.maximum(0.0, 1.0 - np.abs(t) / params.pulse_width)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class UserSideConfig:
    """Scatterer statistics for the users served in one half-space.

    Path delays live on the receiver tap grid {delay_min + l/bandwidth}; the
    departure angles are uniform over the [az_window] x [el_window] rectangle,
    which must lie inside the half-space being served.
    """

    side: HalfSpace
    n_paths: int
    n_taps: int
    delay_min: float
    delay_max: float
    az_window: tuple[float, float]
    el_window: tuple[float, float]
    amp_var: float = 1.0

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.n_taps < 1:
            raise ValueError(f"n_taps must be >= 1, got {self.n_taps}")
        if not 0 <= self.delay_min < self.delay_max:
            raise ValueError(
                f"delay window [{self.delay_min!r}, {self.delay_max!r}] must satisfy"
                " 0 <= min < max"
            )
        if self.amp_var <= 0:
            raise ValueError(f"amp_var must be positive, got {self.amp_var!r}")
        for lo, hi, name in (
            (*self.az_window, "az_window"),
            (*self.el_window, "el_window"),
        ):
            if not lo < hi:
                raise ValueError(f"{name} ({lo!r}, {hi!r}) must have lo < hi")
        # rectangle corners must classify to the side being served
        for az in self.az_window:
            for el in self.el_window:
                if half_space_of(AngularDirection(az, el)) is not self.side:
                    raise ValueError(
                        f"angle window corner (az={az!r}, el={el!r}) lies outside"
                        f" the {self.side.value} half-space"
                    )

    @property
    def central_direction(self) -> AngularDirection:
        return AngularDirection(
            0.5 * (self.az_window[0] + self.az_window[1]),
            0.5 * (self.el_window[0] + self.el_window[1]),
        )

    def validate_against(self, params: SystemParams) -> None:
        """Cross checks that need waveform constants."""
        expected = math.ceil(
            (self.delay_max - self.delay_min + 2 * params.pulse_width) * params.bandwidth
        )
        if self.n_taps != expected:
            raise ValueError(
                f"n_taps {self.n_taps} inconsistent with delay window: expected {expected}"
            )
        if self.delay_max > params.pri - 2 * params.pulse_width:
            raise ValueError(
                f"delay_max {self.delay_max!r} exceeds pri - 2*pulse_width"
                f" = {params.pri - 2 * params.pulse_width!r}"
            )


@dataclass(frozen=True)
class UserPath:
    """One downlink scatterer: complex gain, delay and departure direction."""

    amplitude: complex
    delay: float
    departure: AngularDirection


def _draw_path_arrays(cfg: UserSideConfig, params: SystemParams, n_slots: int,
                      rng: np.random.Generator):
    """Vectorised path draws for a block of slots; fixed draw order.

    Returns (delays, az, el, amplitudes), each of shape (n_slots, n_paths).
    """
    shape = (n_slots, cfg.n_paths)
    # delays are uniform over the tap grid, so draw grid indices
    delays = cfg.delay_min + rng.integers(0, cfg.n_taps, size=shape) / params.bandwidth
    az = rng.uniform(cfg.az_window[0], cfg.az_window[1], size=shape)
    el = rng.uniform(cfg.el_window[0], cfg.el_window[1], size=shape)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    amps = math.sqrt(cfg.amp_var / 2.0) * (re + 1j * im)
    return delays, az, el, amps


def draw_user_paths(cfg: UserSideConfig, params: SystemParams,
                    rng: np.random.Generator) -> list[UserPath]:
    """Draw one slot's worth of independent scatterers."""
    delays, az, el, amps = _draw_path_arrays(cfg, params, 1, rng)
    return [
        UserPath(amplitude=complex(amps[0, k]), delay=float(delays[0, k]),
                 departure=AngularDirection(float(az[0, k]), float(el[0, k])))
        for k in range(cfg.n_paths)
    ]


def _taps_from_arrays(delays, az, el, amps, weights: np.ndarray, g: np.ndarray,
                      params: SystemParams, cfg: UserSideConfig,
                      ris: ArrayGeometry) -> np.ndarray:
    """Discrete-time channel taps for a block of slots; shape (n_slots, n_taps).

    Tap l collects every path through the pulse autocorrelation evaluated at
    the lag between the tap epoch and the path delay, weighted by the surface
    response u(departure)^T diag(g) weights and the per-path link budget.
    """
    n_slots, n_paths = delays.shape
    sv = steering_matrix(ris, az.reshape(-1), el.reshape(-1))
    response = (sv @ (g * weights)).reshape(n_slots, n_paths)
    link = np.sqrt(params.pulse_power * params.pulse_width * element_gain(az, el))
    path_weight = amps * link * response
    tap_times = cfg.delay_min + np.arange(cfg.n_taps) / params.bandwidth
    lags = tap_times[None, :, None] - delays[:, None, :]  # (n_slots, n_taps, n_paths)
    overlap = pulse_autocorr(lags, params)
    return np.einsum("sp,slp->sl", path_weight, overlap)


def user_channel_taps(paths, weights: np.ndarray, g: np.ndarray, params: SystemParams,
                      cfg: UserSideConfig, ris: ArrayGeometry) -> np.ndarray:
    """Channel taps seen by a user for one slot, given its drawn paths.

    `weights` is the surface beamforming vector serving this half-space.
    """
    delays = np.asarray([[p.delay for p in paths]])
    az = np.asarray([[p.departure.az for p in paths]])
    el = np.asarray([[p.departure.el for p in paths]])
    amps = np.asarray([[p.amplitude for p in paths]])
    return _taps_from_arrays(delays, az, el, amps, weights, g, params, cfg, ris)[0]
