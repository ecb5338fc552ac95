"""Monte Carlo experiment drivers with deterministic, parallelisable substreams.

Every experiment splits its trials into fixed-size blocks; block i of a cell
draws from a generator seeded by (master seed, experiment id, cell path, i).
Results therefore depend only on the config and seed, never on the worker
count or completion order: per-block partial sums are reduced in block order.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .channel import _draw_path_arrays, _taps_from_arrays, feeder_ris_channel
from .codebook import build_codebooks, radar_only_codes
from .comm import decode_metrics, reference_snr_to_noise
from .config import ScenarioConfig
from .geometry import HalfSpace
from .radar import (
    burst_statistics,
    decide,
    design_pesa_beamformer,
    doppler_to_velocity,
    make_doppler_grids,
    null_rejection_maxima,
    solve_penalty,
    template_phases,
)
from .starris import design_spatial_beamformer, radar_gain_coefficient

__all__ = [
    "Scene",
    "MetricsRecord",
    "build_scene",
    "resolve_jobs",
    "calibration_key",
    "calibrate_scenario",
    "validate_penalty",
    "run_radar_mc",
    "run_comm_mc",
    "wilson_halfwidth",
]

# experiment ids baked into the substream keys; never renumber
EXP_CALIBRATE, EXP_RADAR, EXP_COMM = 1, 2, 3
# trials per RNG block; a fixed constant so reruns reproduce old results
BLOCK = 4096

# column order contract: cell keys, metrics, confidence half-widths, trials, seed
RADAR_COLUMNS = (
    "experiment", "p", "rcs_m2", "with_comm",
    "pd", "rate_h0", "rate_h1_tr", "rate_h1_re",
    "rmse_v_tr", "rmse_v_re", "rmse_v_tr_h2", "rmse_v_re_h2",
    "n_est_tr", "n_est_re", "n_h2", "penalty",
    "pd_hw95", "trials", "seed",
)
COMM_COLUMNS = (
    "experiment", "m", "b", "side", "snr_db",
    "rate_bps", "ber", "bit_errors", "bits", "sigma2_com",
    "ber_hw95", "slots", "seed",
)


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for one block, keyed by integers only."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(p) for p in path]]))


def resolve_jobs(requested: int | None) -> int:
    """Worker count: the STARISAC_JOBS environment variable overrides the argument."""
    env = os.environ.get("STARISAC_JOBS")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ValueError(f"STARISAC_JOBS must be an integer, got {env!r}") from exc
        if value < 1:
            raise ValueError(f"STARISAC_JOBS must be >= 1, got {value}")
        return value
    if requested is None:
        return 1
    if requested < 1:
        raise ValueError(f"jobs must be >= 1, got {requested}")
    return requested


def _map_blocks(total: int, jobs: int, fn):
    """Run fn(block_index, block_size) over fixed blocks; results in block order."""
    sizes = [(i, min(BLOCK, total - i * BLOCK)) for i in range((total + BLOCK - 1) // BLOCK)]
    if jobs <= 1:
        return [fn(i, n) for i, n in sizes]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda args: fn(*args), sizes))


def wilson_halfwidth(successes: int, trials: int, z: float = 1.959963984540054) -> float:
    """Half-width of the Wilson 95% confidence interval for a proportion."""
    if trials == 0:
        return float("nan")
    p = successes / trials
    denom = 1.0 + z * z / trials
    return (z / denom) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))


@dataclass(frozen=True)
class Scene:
    """Beamformers and link gains derived once from a scenario."""

    cfg: ScenarioConfig
    g: np.ndarray = field(repr=False)
    s_tr: object = field(repr=False)
    s_re: object = field(repr=False)
    s_rad: np.ndarray = field(repr=False)
    gamma_tr: complex = 0j
    gamma_re: complex = 0j


def build_scene(cfg: ScenarioConfig) -> Scene:
    g = feeder_ris_channel(cfg.params, cfg.ris)
    s_tr = design_spatial_beamformer(g, cfg.target_dir_tr, cfg.ris)
    s_re = design_spatial_beamformer(g, cfg.target_dir_re, cfg.ris)
    s_rad = design_pesa_beamformer(cfg.target_dir_tr, cfg.rad)
    gamma_tr = radar_gain_coefficient(
        cfg.target_dir_tr, s_tr, s_rad, g, cfg.params, cfg.ris, cfg.rad
    )
    gamma_re = radar_gain_coefficient(
        cfg.target_dir_re, s_re, s_rad, g, cfg.params, cfg.ris, cfg.rad
    )
    return Scene(cfg=cfg, g=g, s_tr=s_tr, s_re=s_re, s_rad=s_rad,
                 gamma_tr=gamma_tr, gamma_re=gamma_re)


@dataclass
class MetricsRecord:
    """One experiment's per-cell aggregates plus run metadata."""

    experiment: str
    columns: tuple[str, ...]
    cells: list[dict]
    meta: dict

    def __post_init__(self) -> None:
        for cell in self.cells:
            missing = [c for c in self.columns if c not in cell]
            if missing:
                raise ValueError(f"cell missing columns {missing}")


def _complex_normal(rng: np.random.Generator, var: float, shape) -> np.ndarray:
    """CN(0, var) draws; real parts first, imaginary second (fixed order)."""
    scale = math.sqrt(var / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return scale * (re + 1j * im)


# ----------------------------------------------------------------------------
# penalty calibration
# ----------------------------------------------------------------------------

def calibration_key(cfg: ScenarioConfig, with_comm: bool, n_pulses: int, trials: int) -> dict:
    """Identity of one calibration artifact entry; all knobs the rate depends on."""
    return {
        "p": n_pulses,
        "with_comm": bool(with_comm),
        "m": cfg.pulses_per_slot,
        "b": cfg.bits_per_slot,
        "column_order": cfg.column_order,
        "oversampling": cfg.detector.oversampling,
        "doppler_window_tr_hz": list(cfg.doppler_window_tr),
        "doppler_window_re_hz": list(cfg.doppler_window_re),
        "pri_s": cfg.params.pri,
        "radar_noise_var_w": cfg.params.radar_noise_var,
        "fa_counting": cfg.detector.fa_counting,
        "fa_target": cfg.detector.fa_target,
        "trials": trials,
        "seed": cfg.seed,
    }


def _code_block_arrays(cfg: ScenarioConfig, n_pulses: int, with_comm: bool):
    """Fixed ingredients for drawing one block of per-burst code sequences."""
    if with_comm:
        book_tr, book_re = build_codebooks(
            cfg.pulses_per_slot, cfg.bits_per_slot, cfg.column_order
        )
        slots = n_pulses // cfg.pulses_per_slot
        return book_tr, book_re, slots
    c_tr, c_re = radar_only_codes(n_pulses)
    return c_tr.values, c_re.values, 0


def _draw_codes(ingredients, with_comm: bool, n: int, rng: np.random.Generator):
    """Per-burst code arrays; draws messages only when the burst carries data."""
    if not with_comm:
        c_tr, c_re, _ = ingredients
        return c_tr, c_re
    book_tr, book_re, slots = ingredients
    msg_tr = rng.integers(0, book_tr.n_codewords, size=(n, slots))
    msg_re = rng.integers(0, book_re.n_codewords, size=(n, slots))
    c_tr = book_tr.codewords[msg_tr].reshape(n, -1)
    c_re = book_re.codewords[msg_re].reshape(n, -1)
    return c_tr, c_re


def _null_maxima_blocks(
    cfg: ScenarioConfig, with_comm: bool, n_pulses: int, trials: int,
    jobs: int, stream_tag: int,
):
    grids = make_doppler_grids(
        cfg.doppler_window_tr, cfg.doppler_window_re, n_pulses, cfg.params.pri,
        cfg.detector.oversampling,
    )
    e_tr = template_phases(grids.tr, n_pulses, cfg.params.pri)
    e_re = template_phases(grids.re, n_pulses, cfg.params.pri)
    noise_var = cfg.params.radar_noise_var
    ingredients = _code_block_arrays(cfg, n_pulses, with_comm)

    def block(i: int, n: int):
        rng = substream(cfg.seed, EXP_CALIBRATE, int(with_comm), n_pulses, stream_tag, i)
        c_tr, c_re = _draw_codes(ingredients, with_comm, n, rng)
        y = _complex_normal(rng, noise_var, (n, n_pulses))
        return null_rejection_maxima(y, c_tr, c_re, e_tr, e_re, noise_var)

    parts = _map_blocks(trials, jobs, block)
    singles = np.concatenate([p[0] for p in parts])
    pairs = np.concatenate([p[1] for p in parts])
    return singles, pairs


def calibrate_scenario(
    cfg: ScenarioConfig, with_comm: bool, n_pulses: int,
    *, trials: int | None = None, jobs: int = 1,
) -> float:
    """Penalty meeting the configured false-alarm target for one burst length.

    When the burst carries data, fresh messages are drawn for every trial so
    the calibration marginalises over them.
    """
    trials = cfg.detector.calibration_trials if trials is None else trials
    singles, pairs = _null_maxima_blocks(cfg, with_comm, n_pulses, trials, jobs, 0)
    return solve_penalty(singles, pairs, cfg.detector.fa_target, cfg.detector.fa_counting)


def validate_penalty(
    cfg: ScenarioConfig, with_comm: bool, n_pulses: int, penalty: float,
    *, trials: int | None = None, jobs: int = 1,
) -> float:
    """Empirical false-alarm rate of a penalty on an independent trial stream."""
    trials = cfg.detector.calibration_trials if trials is None else trials
    singles, pairs = _null_maxima_blocks(cfg, with_comm, n_pulses, trials, jobs, 1)
    two = (pairs > 2.0 * penalty) & (pairs - singles > penalty)
    if cfg.detector.fa_counting == "event":
        return float(np.mean(two | (singles > penalty)))
    return float(np.mean(2.0 * two + 1.0 * (~two & (singles > penalty))))


# ----------------------------------------------------------------------------
# radar experiment
# ----------------------------------------------------------------------------

def run_radar_mc(
    cfg: ScenarioConfig,
    with_comm: bool,
    penalties: dict[int, float],
    *, trials: int | None = None, jobs: int | None = None,
    doppler_draw: str = "uniform",
) -> MetricsRecord:
    """Detection and velocity-error statistics over the (burst length, RCS) grid.

    Every trial puts one fluctuating target on each side with independent
    Doppler draws, synthesises one burst and runs the detector.  `penalties`
    maps each burst length in the grid to its model-order penalty.
    `doppler_draw` is "uniform" over the windows or "on_grid" (uniform draws
    snapped to the nearest search-grid point).
    """
    if doppler_draw not in ("uniform", "on_grid"):
        raise ValueError(f"doppler_draw must be 'uniform' or 'on_grid', got {doppler_draw!r}")
    missing = [p for p in cfg.p_grid if p not in penalties]
    if missing:
        raise ValueError(f"no penalty provided for burst lengths {missing}")
    trials = cfg.radar_trials_per_cell if trials is None else trials
    jobs = resolve_jobs(jobs)
    t0 = time.monotonic()
    scene = build_scene(cfg)
    lam = cfg.params.wavelength
    sigma2 = cfg.params.radar_noise_var
    range4 = cfg.target_range**4
    cells = []
    cell_index = 0
    for p in cfg.p_grid:
        grids = make_doppler_grids(
            cfg.doppler_window_tr, cfg.doppler_window_re, p, cfg.params.pri,
            cfg.detector.oversampling,
        )
        e_tr = template_phases(grids.tr, p, cfg.params.pri)
        e_re = template_phases(grids.re, p, cfg.params.pri)
        ingredients = _code_block_arrays(cfg, p, with_comm)
        penalty = penalties[p]
        pulses = np.arange(p)
        for rcs in cfg.rcs_grid:
            amp_std = math.sqrt(rcs / ((4 * math.pi) ** 2 * range4) / 2.0)

            def block(i: int, n: int, _rcs=rcs, _p=p, _amp=amp_std, _pen=penalty,
                      _grids=grids, _etr=e_tr, _ere=e_re, _ing=ingredients,
                      _pulses=pulses, _ci=cell_index):
                rng = substream(cfg.seed, EXP_RADAR, int(with_comm), _ci, i)
                # draw order: amplitudes, dopplers (tr then re), messages, noise
                re_parts = rng.standard_normal((n, 2))
                im_parts = rng.standard_normal((n, 2))
                alphas = _amp * (re_parts + 1j * im_parts)
                nu_tr = rng.uniform(*cfg.doppler_window_tr, size=n)
                nu_re = rng.uniform(*cfg.doppler_window_re, size=n)
                if doppler_draw == "on_grid":
                    nu_tr = _grids.tr[np.argmin(np.abs(nu_tr[:, None] - _grids.tr), axis=1)]
                    nu_re = _grids.re[np.argmin(np.abs(nu_re[:, None] - _grids.re), axis=1)]
                c_tr, c_re = _draw_codes(_ing, with_comm, n, rng)
                noise = _complex_normal(rng, sigma2, (n, _p))
                phase_tr = np.exp(2j * np.pi * cfg.params.pri * nu_tr[:, None] * _pulses)
                phase_re = np.exp(2j * np.pi * cfg.params.pri * nu_re[:, None] * _pulses)
                y = (
                    alphas[:, 0, None] * scene.gamma_tr * (c_tr * phase_tr)
                    + alphas[:, 1, None] * scene.gamma_re * (c_re * phase_re)
                    + noise
                )
                s_tr, s_re, s2 = burst_statistics(y, c_tr, c_re, _etr, _ere, sigma2)
                hyp, pick_tr, pick_re, _ = decide(s_tr, s_re, s2, _pen)
                err_tr = doppler_to_velocity(_grids.tr[pick_tr] - nu_tr, cfg.params)
                err_re = doppler_to_velocity(_grids.re[pick_re] - nu_re, cfg.params)
                est_tr = (hyp == 1) | (hyp == 3)
                est_re = (hyp == 2) | (hyp == 3)
                is_h2 = hyp == 3
                return np.array([
                    n,
                    np.sum(hyp == 0), np.sum(hyp == 1), np.sum(hyp == 2), np.sum(is_h2),
                    np.sum(err_tr[est_tr] ** 2), np.sum(est_tr),
                    np.sum(err_re[est_re] ** 2), np.sum(est_re),
                    np.sum(err_tr[is_h2] ** 2), np.sum(err_re[is_h2] ** 2), np.sum(is_h2),
                ])

            totals = np.sum(_map_blocks(trials, jobs, block), axis=0)
            (n_tot, c0, c1, c2, c3, sse_tr, n_tr, sse_re, n_re,
             sse_tr_h2, sse_re_h2, n_h2) = totals
            cells.append({
                "experiment": "radar",
                "p": p,
                "rcs_m2": rcs,
                "with_comm": int(with_comm),
                "trials": int(n_tot),
                "penalty": penalty,
                "rate_h0": c0 / n_tot,
                "rate_h1_tr": c1 / n_tot,
                "rate_h1_re": c2 / n_tot,
                "pd": c3 / n_tot,
                "pd_hw95": wilson_halfwidth(int(c3), int(n_tot)),
                "rmse_v_tr": math.sqrt(sse_tr / n_tr) if n_tr else float("nan"),
                "n_est_tr": int(n_tr),
                "rmse_v_re": math.sqrt(sse_re / n_re) if n_re else float("nan"),
                "n_est_re": int(n_re),
                "rmse_v_tr_h2": math.sqrt(sse_tr_h2 / n_h2) if n_h2 else float("nan"),
                "rmse_v_re_h2": math.sqrt(sse_re_h2 / n_h2) if n_h2 else float("nan"),
                "n_h2": int(n_h2),
                "seed": cfg.seed,
            })
            cell_index += 1
    meta = {
        "experiment": "radar",
        "seed": cfg.seed,
        "with_comm": bool(with_comm),
        "trials_per_cell": trials,
        "doppler_draw": doppler_draw,
        "penalties": {str(p): penalties[p] for p in cfg.p_grid},
        "fa_counting": cfg.detector.fa_counting,
        "fa_target": cfg.detector.fa_target,
        "gamma_tr_abs": abs(scene.gamma_tr),
        "gamma_re_abs": abs(scene.gamma_re),
        "version": __version__,
        "runtime_s": time.monotonic() - t0,
        "config": cfg.raw,
    }
    return MetricsRecord(experiment="radar", columns=RADAR_COLUMNS, cells=cells, meta=meta)


# ----------------------------------------------------------------------------
# communication experiment
# ----------------------------------------------------------------------------

def run_comm_mc(
    cfg: ScenarioConfig,
    *, slots: int | None = None, jobs: int | None = None,
) -> MetricsRecord:
    """Bit error rate over the (codebook, reference SNR, served side) grid.

    User channels are redrawn independently for every slot.  The reference
    noise variance of an SNR point comes from the reflective-side link budget
    and is shared by both sides, so the per-side BER difference reflects the
    geometry, not the normalisation.
    """
    slots = cfg.slots_per_cell if slots is None else slots
    jobs = resolve_jobs(jobs)
    t0 = time.monotonic()
    scene = build_scene(cfg)
    beamformers = {HalfSpace.TRANSMISSIVE: scene.s_tr, HalfSpace.REFLECTIVE: scene.s_re}
    cells = []
    cell_index = 0
    sides = (HalfSpace.TRANSMISSIVE, HalfSpace.REFLECTIVE)
    for m, b in cfg.mb_pairs:
        book_tr, book_re = build_codebooks(m, b, cfg.column_order)
        books = {HalfSpace.TRANSMISSIVE: book_tr, HalfSpace.REFLECTIVE: book_re}
        popcount = np.array([bin(v).count("1") for v in range(1 << b)])
        for snr_db in cfg.snr_grid_db:
            sigma2_com = reference_snr_to_noise(
                10.0 ** (snr_db / 10.0), cfg.params, scene.g,
                scene.s_re, cfg.ris, cfg.users[HalfSpace.REFLECTIVE],
            )
            for side in sides:
                book = books[side]
                side_cfg = cfg.users[side]
                weights = beamformers[side].weights

                def block(i: int, n: int, _book=book, _side_cfg=side_cfg,
                          _weights=weights, _s2=sigma2_com, _ci=cell_index,
                          _popcount=popcount):
                    rng = substream(cfg.seed, EXP_COMM, _ci, i)
                    # draw order: paths (delays, az, el, amps), messages, noise
                    delays, az, el, amps = _draw_path_arrays(_side_cfg, cfg.params, n, rng)
                    msg = rng.integers(0, _book.n_codewords, size=n)
                    noise = _complex_normal(rng, _s2, (n, _book.m, _side_cfg.n_taps))
                    taps = _taps_from_arrays(
                        delays, az, el, amps, _weights, scene.g, cfg.params,
                        _side_cfg, cfg.ris,
                    )
                    y = _book.codewords[msg][:, :, None] * taps[:, None, :] + noise
                    metrics = decode_metrics(y, _book)
                    decoded = np.argmax(metrics, axis=1)
                    return np.array([n, int(np.sum(_popcount[decoded ^ msg]))])

                totals = np.sum(_map_blocks(slots, jobs, block), axis=0)
                n_slots, bit_errors = int(totals[0]), int(totals[1])
                bits = n_slots * b
                cells.append({
                    "experiment": "comm",
                    "m": m,
                    "b": b,
                    "side": str(side),
                    "snr_db": snr_db,
                    "rate_bps": b / (m * cfg.params.pri),
                    "slots": n_slots,
                    "bits": bits,
                    "bit_errors": bit_errors,
                    "ber": bit_errors / bits,
                    "ber_hw95": wilson_halfwidth(bit_errors, bits),
                    "sigma2_com": sigma2_com,
                    "seed": cfg.seed,
                })
                cell_index += 1
    meta = {
        "experiment": "comm",
        "seed": cfg.seed,
        "slots_per_cell": slots,
        "column_order": cfg.column_order,
        "version": __version__,
        "runtime_s": time.monotonic() - t0,
        "config": cfg.raw,
    }
    return MetricsRecord(experiment="comm", columns=COMM_COLUMNS, cells=cells, meta=meta)
