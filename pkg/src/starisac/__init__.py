"""Simulator for a dual-sided reconfigurable-surface transceiver that senses
while it communicates.

A feeder illuminates a surface whose elements split each pulse's energy
between a transmissive and a reflective half-space.  Per-pulse code sequences
(orthogonal Hadamard columns) are steered to both sides at once: a radar
receiver detects up to one moving target per side and estimates its radial
velocity, while a user on each side decodes the message riding on its side's
code sequence without channel knowledge.  The package provides the physical
model, the detector and decoder, and deterministic Monte Carlo experiment
drivers with a command-line front end.
"""

from ._version import __version__
from .channel import SystemParams, UserSideConfig, feeder_ris_channel
from .codebook import Codebook, CodeSequence, assemble_code_sequence, build_codebooks
from .comm import ml_decode_slot, reference_snr_to_noise, synth_user_slot
from .config import ConfigError, ScenarioConfig, load_scenario
from .geometry import AngularDirection, ArrayGeometry, HalfSpace, mirror_direction
from .radar import (
    DetectionResult,
    Hypothesis,
    calibrate_penalty,
    gic_detect,
    make_doppler_grids,
    synth_radar_observation,
)
from .starris import design_spatial_beamformer, ris_beampattern_gain
from .experiments import (
    MetricsRecord,
    build_scene,
    calibrate_scenario,
    run_comm_mc,
    run_radar_mc,
)
from .results import emit_plots, read_results, write_results

__all__ = [
    "__version__",
    "AngularDirection",
    "ArrayGeometry",
    "HalfSpace",
    "mirror_direction",
    "Codebook",
    "CodeSequence",
    "build_codebooks",
    "assemble_code_sequence",
    "SystemParams",
    "UserSideConfig",
    "feeder_ris_channel",
    "design_spatial_beamformer",
    "ris_beampattern_gain",
    "Hypothesis",
    "DetectionResult",
    "make_doppler_grids",
    "synth_radar_observation",
    "gic_detect",
    "calibrate_penalty",
    "synth_user_slot",
    "ml_decode_slot",
    "reference_snr_to_noise",
    "ConfigError",
    "ScenarioConfig",
    "load_scenario",
    "MetricsRecord",
    "build_scene",
    "calibrate_scenario",
    "run_radar_mc",
    "run_comm_mc",
    "write_results",
    "read_results",
    "emit_plots",
]
