"""Downlink slot synthesis and noncoherent maximum-likelihood decoding.

A user observes each slot through an unknown multipath channel, collecting an
(m pulses) x (n_taps) sample matrix.  Because codewords are equal-energy and
the channel is unknown, the likelihood profiled over the channel reduces to
the correlation energy ||c^H Y||^2 / ||c||^2, so decoding needs no channel
state information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import SystemParams, UserSideConfig
from .codebook import Codebook
from .geometry import ArrayGeometry, element_gain
from .starris import SpatialBeamformer, ris_beampattern_gain

__all__ = [
    "UserSlotObservation",
    "synth_user_slot",
    "ml_decode_slot",
    "decode_metrics",
    "reference_snr_to_noise",
]


@dataclass(frozen=True)
class UserSlotObservation:
    """Matched-filter samples of one slot plus the message that generated them."""

    samples: np.ndarray = field(repr=False)  # (m, n_taps) complex
    truth_index: int | None = None


def synth_user_slot(
    taps: np.ndarray,
    codeword: np.ndarray,
    noise_var: float,
    rng: np.random.Generator,
    truth_index: int | None = None,
) -> UserSlotObservation:
    """One noisy slot: Y = codeword taps^T + noise, noise iid CN(0, noise_var)."""
    if noise_var < 0:
        raise ValueError(f"noise_var must be >= 0, got {noise_var!r}")
    taps = np.asarray(taps)
    codeword = np.asarray(codeword)
    shape = (codeword.shape[0], taps.shape[0])
    scale = math.sqrt(noise_var / 2.0)
    noise = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return UserSlotObservation(
        samples=np.outer(codeword, taps) + noise, truth_index=truth_index
    )


def decode_metrics(samples: np.ndarray, book: Codebook) -> np.ndarray:
    """Per-codeword decoding metrics ||c^H Y||^2 / ||c||^2 for a slot (or block).

    samples: (m, n_taps) or (n_slots, m, n_taps).  Returns metrics with shape
    (n_codewords,) or (n_slots, n_codewords).
    """
    samples = np.asarray(samples)
    corr = np.tensordot(samples, np.conj(book.codewords), axes=([samples.ndim - 2], [1]))
    # tensordot leaves the codeword axis last: (..., n_taps, n_codewords)
    energy = np.sum(np.abs(book.codewords) ** 2, axis=1)
    return np.sum(np.abs(corr) ** 2, axis=samples.ndim - 2) / energy


def ml_decode_slot(obs, book: Codebook) -> tuple[int, tuple[int, ...]]:
    """Most likely message of one slot; ties resolve to the lowest index.

    Returns (codeword index, decoded bits MSB first).
    """
    samples = obs.samples if isinstance(obs, UserSlotObservation) else np.asarray(obs)
    metrics = decode_metrics(samples, book)
    index = int(np.argmax(metrics))  # first maximum: lowest index wins ties
    return index, book.index_to_bits(index)


def reference_snr_to_noise(
    target_snr: float,
    params: SystemParams,
    g: np.ndarray,
    beamformer: SpatialBeamformer,
    ris: ArrayGeometry,
    cfg: UserSideConfig,
) -> float:
    """Noise variance that realises a target reference SNR for one served side.

    The reference point is the centre of the side's angle rectangle: the SNR
    is the mean per-tap received signal power of a single path departing
    there, split over the tap window, divided by the noise variance.
    """
    if target_snr <= 0:
        raise ValueError(f"target_snr must be positive, got {target_snr!r}")
    centre = cfg.central_direction
    response = ris_beampattern_gain(beamformer, g, centre, ris)
    signal = (
        params.pulse_power
        * params.pulse_width
        * element_gain(centre)
        * abs(response) ** 2
        * cfg.amp_var
    )
    return signal / (cfg.n_taps * target_snr)
