"""Scenario configuration: JSON schema, unit conversion and cross validation.

Config files carry human units in their key names (GHz, dBm, ms, degrees);
everything is converted to SI floats and radians once, at load time.  Any
unknown key or inconsistent value raises ConfigError with the dotted path of
the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .channel import SystemParams, UserSideConfig
from .codebook import COLUMN_ORDERS, build_codebooks
from .geometry import AngularDirection, ArrayGeometry, HalfSpace, half_space_of, mirror_direction

__all__ = ["ConfigError", "DetectorConfig", "ScenarioConfig", "load_scenario", "DEFAULT_CONFIG"]

MIRROR_ATOL = 1e-12


class ConfigError(ValueError):
    """Configuration rejected; message starts with the dotted field path."""


DEFAULT_CONFIG: dict = {
    "seed": 20260822,
    "system": {
        "carrier_freq_ghz": 28.0,
        "bandwidth_mhz": 50.0,
        "pulse_power_dbm": 30.0,
        "pri_ms": 0.25,
        "n_ris": 256,
        "n_rad": 256,
        "feeder_gain_db": 20.0,
        "feeder_distance_m": 3.0,
        "feeder_direction_deg": [-45.0, 0.0],
        "radar_noise_dbm_per_hz": -164.0,
    },
    "target": {
        "range_m": 10.0,
        "direction_tr_deg": [160.0, 0.0],
        "direction_re_deg": None,  # defaults to the mirror image of direction_tr_deg
        "doppler_window_tr_khz": [1.75, 2.0],
        "doppler_window_re_khz": [1.75, 2.0],
        "rcs_grid_m2": [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
    },
    "code": {
        "pulses_per_slot": 4,
        "bits_per_slot": 1,
        "column_order": "reversed_tr",
        "p_grid": [8, 16, 32],
    },
    "users": {
        "transmissive": {
            "n_paths": 3,
            "n_taps": 15,
            "delay_min_us": 0.0,
            "delay_max_us": 0.26,
            "az_window_deg": [170.0, 180.0],
            "el_window_deg": [-25.0, -15.0],
            "amp_var": 1.0,
        },
        "reflective": {
            "n_paths": 3,
            "n_taps": 15,
            "delay_min_us": 0.0,
            "delay_max_us": 0.26,
            "az_window_deg": [15.0, 25.0],
            "el_window_deg": [-25.0, -15.0],
            "amp_var": 1.0,
        },
    },
    "comm": {
        "snr_grid_db": [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
        "mb_pairs": [[4, 1], [8, 1], [8, 2], [16, 2]],
        "slots_per_cell": 100000,
    },
    "radar": {
        "trials_per_cell": 10000,
    },
    "detector": {
        "oversampling": 16,
        "fa_target": 1.0e-4,
        "fa_counting": "event",
        "penalty": "calibrate",
        "calibration_trials": 1000000,
    },
}


@dataclass(frozen=True)
class DetectorConfig:
    """Detector knobs: grid density, false-alarm budget and penalty policy."""

    oversampling: int
    fa_target: float
    fa_counting: str
    penalty: float | None  # None means "calibrate"
    calibration_trials: int


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario in SI units; the single input every runner takes."""

    seed: int
    params: SystemParams
    ris: ArrayGeometry
    rad: ArrayGeometry
    target_range: float
    target_dir_tr: AngularDirection
    target_dir_re: AngularDirection
    doppler_window_tr: tuple[float, float]
    doppler_window_re: tuple[float, float]
    rcs_grid: tuple[float, ...]
    pulses_per_slot: int
    bits_per_slot: int
    column_order: str
    p_grid: tuple[int, ...]
    users: dict
    snr_grid_db: tuple[float, ...]
    mb_pairs: tuple[tuple[int, int], ...]
    slots_per_cell: int
    radar_trials_per_cell: int
    detector: DetectorConfig
    raw: dict = field(repr=False)  # merged config dict as loaded

    def params_for(self, n_pulses: int) -> SystemParams:
        """Waveform constants with the burst length of one radar cell."""
        return replace(self.params, pulses_per_cpi=n_pulses)


def _merge(base: dict, override: dict, path: str) -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"{where}: unknown key")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}: expected an object")
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def _number(cfg: dict, section: str, key: str, *, minimum=None) -> float:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}: expected a number, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{section}.{key}: {value!r} below minimum {minimum!r}")
    return float(value)


def _integer(cfg: dict, section: str, key: str, *, minimum=None) -> int:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}.{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{section}.{key}: {value!r} below minimum {minimum!r}")
    return value


def _pair(cfg: dict, section: str, key: str) -> tuple[float, float]:
    value = cfg[key]
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(f"{section}.{key}: expected a pair of numbers, got {value!r}")
    return float(value[0]), float(value[1])


def _direction(cfg: dict, section: str, key: str) -> AngularDirection:
    az, el = _pair(cfg, section, key)
    try:
        return AngularDirection.from_degrees(az, el)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from exc


def _grid(cfg: dict, section: str, key: str, *, minimum=None) -> tuple[float, ...]:
    value = cfg[key]
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{section}.{key}: expected a non-empty list of numbers")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{section}.{key}[{i}]: expected a number, got {v!r}")
        if minimum is not None and v < minimum:
            raise ConfigError(f"{section}.{key}[{i}]: {v!r} below minimum {minimum!r}")
        out.append(float(v))
    return tuple(out)


def _user_side(cfg: dict, section: str, side: HalfSpace, params: SystemParams) -> UserSideConfig:
    try:
        side_cfg = UserSideConfig(
            side=side,
            n_paths=_integer(cfg, section, "n_paths", minimum=1),
            n_taps=_integer(cfg, section, "n_taps", minimum=1),
            delay_min=_number(cfg, section, "delay_min_us", minimum=0.0) * 1e-6,
            delay_max=_number(cfg, section, "delay_max_us", minimum=0.0) * 1e-6,
            az_window=tuple(math.radians(v) for v in _pair(cfg, section, "az_window_deg")),
            el_window=tuple(math.radians(v) for v in _pair(cfg, section, "el_window_deg")),
            amp_var=_number(cfg, section, "amp_var", minimum=0.0),
        )
        side_cfg.validate_against(params)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from exc
    return side_cfg


def _parse_code(code: dict) -> tuple[int, int, str, tuple[int, ...]]:
    m = _integer(code, "code", "pulses_per_slot", minimum=1)
    b = _integer(code, "code", "bits_per_slot", minimum=0)
    column_order = code["column_order"]
    if column_order not in COLUMN_ORDERS:
        raise ConfigError(f"code.column_order: must be one of {COLUMN_ORDERS}")
    try:
        build_codebooks(m, b, column_order)
    except ValueError as exc:
        raise ConfigError(f"code: {exc}") from exc
    raw = code["p_grid"]
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigError("code.p_grid: expected a non-empty list of integers")
    p_grid = []
    for i, p in enumerate(raw):
        if isinstance(p, bool) or not isinstance(p, int) or p < 1:
            raise ConfigError(f"code.p_grid[{i}]: expected a positive integer, got {p!r}")
        if p & (p - 1):
            raise ConfigError(f"code.p_grid[{i}]: burst length {p} is not a power of two")
        if p % m:
            raise ConfigError(
                f"code.p_grid[{i}]: burst length {p} not a multiple of slot length {m}"
            )
        p_grid.append(p)
    return m, b, column_order, tuple(p_grid)


def load_scenario(source) -> ScenarioConfig:
    """Load and validate a scenario from a JSON file path, JSON text or dict.

    Missing sections fall back to the built-in defaults; an empty config is a
    complete, runnable scenario.
    """
    if source is None:
        user = {}
    elif isinstance(source, dict):
        user = source
    elif isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"config file {source!r}: {exc}") from exc
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {source!r}: invalid JSON: {exc}") from exc
    else:
        try:
            user = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config text: invalid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config root: expected a JSON object")
    cfg = _merge(DEFAULT_CONFIG, user, "")

    m, b, column_order, p_grid = _parse_code(cfg["code"])

    sys_cfg = cfg["system"]
    try:
        params = SystemParams(
            carrier_freq=_number(sys_cfg, "system", "carrier_freq_ghz", minimum=1e-9) * 1e9,
            bandwidth=_number(sys_cfg, "system", "bandwidth_mhz", minimum=1e-9) * 1e6,
            pri=_number(sys_cfg, "system", "pri_ms", minimum=1e-12) * 1e-3,
            pulses_per_cpi=p_grid[0],
            pulse_power=10.0 ** ((_number(sys_cfg, "system", "pulse_power_dbm") - 30.0) / 10.0),
            feeder_gain=10.0 ** (_number(sys_cfg, "system", "feeder_gain_db") / 10.0),
            feeder_distance=_number(sys_cfg, "system", "feeder_distance_m", minimum=1e-9),
            feeder_direction=_direction(sys_cfg, "system", "feeder_direction_deg"),
            # spectral density in dBm/Hz becomes watts per complex sample at
            # the signal bandwidth (one sample per 1/bandwidth seconds)
            radar_noise_var=10.0
            ** ((_number(sys_cfg, "system", "radar_noise_dbm_per_hz") - 30.0) / 10.0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc

    try:
        ris = ArrayGeometry(_integer(sys_cfg, "system", "n_ris", minimum=1))
        rad = ArrayGeometry(_integer(sys_cfg, "system", "n_rad", minimum=1))
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc

    tgt = cfg["target"]
    dir_tr = _direction(tgt, "target", "direction_tr_deg")
    if half_space_of(dir_tr) is not HalfSpace.TRANSMISSIVE:
        raise ConfigError("target.direction_tr_deg: not in the transmissive half-space")
    dir_re = mirror_direction(dir_tr)
    if tgt["direction_re_deg"] is not None:
        given = _direction(tgt, "target", "direction_re_deg")
        if abs(given.az - dir_re.az) > MIRROR_ATOL or abs(given.el - dir_re.el) > MIRROR_ATOL:
            raise ConfigError(
                "target.direction_re_deg: must be the mirror image of"
                " direction_tr_deg (azimuth 180deg - az, same elevation)"
            )
        dir_re = given

    bound = params.unambiguous_doppler
    windows = {}
    for key in ("doppler_window_tr_khz", "doppler_window_re_khz"):
        lo, hi = (v * 1e3 for v in _pair(tgt, "target", key))
        if not lo < hi:
            raise ConfigError(f"target.{key}: window must have lo < hi")
        if lo < -bound or hi > bound:
            raise ConfigError(
                f"target.{key}: window ({lo} Hz, {hi} Hz) exceeds the"
                f" unambiguous interval (+-{bound} Hz)"
            )
        windows[key] = (lo, hi)

    users = {
        HalfSpace.TRANSMISSIVE: _user_side(
            cfg["users"]["transmissive"], "users.transmissive", HalfSpace.TRANSMISSIVE, params
        ),
        HalfSpace.REFLECTIVE: _user_side(
            cfg["users"]["reflective"], "users.reflective", HalfSpace.REFLECTIVE, params
        ),
    }

    comm = cfg["comm"]
    snr_grid_db = _grid(comm, "comm", "snr_grid_db")
    mb_raw = comm["mb_pairs"]
    if not isinstance(mb_raw, (list, tuple)) or not mb_raw:
        raise ConfigError("comm.mb_pairs: expected a non-empty list of [m, b] pairs")
    mb_pairs = []
    for i, pair in enumerate(mb_raw):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"comm.mb_pairs[{i}]: expected an [m, b] pair")
        mi, bi = pair
        if any(isinstance(v, bool) or not isinstance(v, int) for v in (mi, bi)):
            raise ConfigError(f"comm.mb_pairs[{i}]: expected integers, got {pair!r}")
        if bi < 1:
            raise ConfigError(f"comm.mb_pairs[{i}]: bits_per_slot must be >= 1 for a rate cell")
        try:
            build_codebooks(mi, bi, column_order)
        except ValueError as exc:
            raise ConfigError(f"comm.mb_pairs[{i}]: {exc}") from exc
        mb_pairs.append((mi, bi))
    slots_per_cell = _integer(comm, "comm", "slots_per_cell", minimum=1)

    radar_trials = _integer(cfg["radar"], "radar", "trials_per_cell", minimum=1)

    det = cfg["detector"]
    penalty_raw = det["penalty"]
    if penalty_raw == "calibrate":
        penalty = None
    elif isinstance(penalty_raw, (int, float)) and not isinstance(penalty_raw, bool):
        if penalty_raw < 0:
            raise ConfigError(f"detector.penalty: must be >= 0, got {penalty_raw!r}")
        penalty = float(penalty_raw)
    else:
        raise ConfigError(
            f"detector.penalty: expected a number or 'calibrate', got {penalty_raw!r}"
        )
    fa_counting = det["fa_counting"]
    if fa_counting not in ("event", "per_target"):
        raise ConfigError(
            f"detector.fa_counting: must be 'event' or 'per_target', got {fa_counting!r}"
        )
    fa_target = _number(det, "detector", "fa_target")
    if not 0.0 < fa_target < 1.0:
        raise ConfigError(f"detector.fa_target: must be in (0, 1), got {fa_target!r}")
    detector = DetectorConfig(
        oversampling=_integer(det, "detector", "oversampling", minimum=1),
        fa_target=fa_target,
        fa_counting=fa_counting,
        penalty=penalty,
        calibration_trials=_integer(det, "detector", "calibration_trials", minimum=1),
    )

    return ScenarioConfig(
        seed=_integer(cfg, "config", "seed", minimum=0),
        params=params,
        ris=ris,
        rad=rad,
        target_range=_number(tgt, "target", "range_m", minimum=1e-9),
        target_dir_tr=dir_tr,
        target_dir_re=dir_re,
        doppler_window_tr=windows["doppler_window_tr_khz"],
        doppler_window_re=windows["doppler_window_re_khz"],
        rcs_grid=_grid(tgt, "target", "rcs_grid_m2", minimum=0.0),
        pulses_per_slot=m,
        bits_per_slot=b,
        column_order=column_order,
        p_grid=p_grid,
        users=users,
        snr_grid_db=snr_grid_db,
        mb_pairs=tuple(mb_pairs),
        slots_per_cell=slots_per_cell,
        radar_trials_per_cell=radar_trials,
        detector=detector,
        raw=cfg,
    )
