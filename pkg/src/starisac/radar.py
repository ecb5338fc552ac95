"""Slow-time radar processing: Doppler templates, burst synthesis and detection.

The receiver collapses each pulse to one complex sample, so a burst of P
pulses yields a length-P slow-time vector.  Up to two returns can be present,
one per half-space, each riding its own code sequence and Doppler frequency.
Detection picks among four hypotheses (no target, one target on either side,
two targets) by penalised matched filtering over per-side Doppler grids: each
candidate's data statistic is the energy of the observation projected onto
the whitened span of its templates, and every estimated target costs a fixed
penalty.  Ties resolve towards fewer targets, transmissive before reflective.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .codebook import CodeSequence
from .geometry import steering_vector

__all__ = [
    "Hypothesis",
    "TargetTruth",
    "RadarObservation",
    "DetectionResult",
    "DopplerGrids",
    "RadarLink",
    "make_doppler_grids",
    "doppler_template",
    "design_pesa_beamformer",
    "synth_radar_observation",
    "whitened_template",
    "gic_detect",
    "burst_statistics",
    "solve_penalty",
    "calibrate_penalty",
    "doppler_to_velocity",
]

# relative eigenvalue floor below which a template pair is treated as collinear
DEGENERATE_RTOL = 1e-10


class Hypothesis(enum.Enum):
    """Detection outcomes, listed in tie-break order (fewer targets first)."""

    H0 = "h0"
    H1_TR = "h1_tr"
    H1_RE = "h1_re"
    H2 = "h2"

    def __str__(self) -> str:
        return self.value


HYPOTHESIS_ORDER = (Hypothesis.H0, Hypothesis.H1_TR, Hypothesis.H1_RE, Hypothesis.H2)


@dataclass(frozen=True)
class TargetTruth:
    """Ground truth behind one synthesised burst."""

    alpha_tr: complex
    alpha_re: complex
    doppler_tr: float
    doppler_re: float


@dataclass(frozen=True)
class RadarObservation:
    """Slow-time samples of one burst plus the truth that generated them."""

    samples: np.ndarray = field(repr=False)
    truth: TargetTruth | None = None


@dataclass(frozen=True)
class DetectionResult:
    """Selected hypothesis, per-side Doppler estimates and per-hypothesis scores.

    A Doppler field is set exactly when the hypothesis says that side's target
    is present; scores hold the penalised statistics the decision compared.
    """

    hypothesis: Hypothesis
    doppler_tr: float | None
    doppler_re: float | None
    scores: dict[Hypothesis, float]

    def __post_init__(self) -> None:
        want_tr = self.hypothesis in (Hypothesis.H1_TR, Hypothesis.H2)
        want_re = self.hypothesis in (Hypothesis.H1_RE, Hypothesis.H2)
        if (self.doppler_tr is not None) != want_tr or (self.doppler_re is not None) != want_re:
            raise ValueError("doppler estimates inconsistent with selected hypothesis")


@dataclass(frozen=True)
class DopplerGrids:
    """Per-side Doppler search grids in Hz."""

    tr: np.ndarray
    re: np.ndarray

    def __post_init__(self) -> None:
        for name, grid in (("tr", self.tr), ("re", self.re)):
            if np.asarray(grid).size == 0:
                raise ValueError(f"{name} Doppler grid is empty")


def make_doppler_grids(
    window_tr: tuple[float, float],
    window_re: tuple[float, float],
    n_pulses: int,
    pri: float,
    oversampling: int = 16,
) -> DopplerGrids:
    """Cell-centred uniform grids over two open Doppler windows.

    Spacing is the Doppler resolution 1/(n_pulses*pri) divided by
    `oversampling`; points sit at cell centres so they stay strictly inside
    the open windows.
    """
    if oversampling < 1:
        raise ValueError(f"oversampling must be >= 1, got {oversampling}")
    spacing = 1.0 / (n_pulses * pri * oversampling)
    grids = []
    for lo, hi in (window_tr, window_re):
        if not lo < hi:
            raise ValueError(f"Doppler window ({lo!r}, {hi!r}) must have lo < hi")
        n = int(math.floor((hi - lo) / spacing + 1e-9))
        if n == 0:
            raise ValueError(
                f"Doppler window ({lo!r}, {hi!r}) narrower than one grid cell {spacing!r}"
            )
        grids.append(lo + (np.arange(n) + 0.5) * spacing)
    return DopplerGrids(tr=grids[0], re=grids[1])


def _code_values(code) -> np.ndarray:
    return code.values if isinstance(code, CodeSequence) else np.asarray(code)


def template_phases(grid: np.ndarray, n_pulses: int, pri: float) -> np.ndarray:
    """Doppler progression factors exp(2j*pi*f*pri*p); shape (n_pulses, len(grid))."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    pulses = np.arange(n_pulses)
    return np.exp(2j * np.pi * pri * np.outer(pulses, grid))


def doppler_template(code, doppler: float, pri: float) -> np.ndarray:
    """Slow-time template h(p) = c(p) * exp(2j*pi*doppler*pri*p), p = 0..P-1."""
    values = _code_values(code)
    return values * template_phases(doppler, values.shape[0], pri)[:, 0]


def design_pesa_beamformer(direction, rad) -> np.ndarray:
    """Unit-norm receive combiner matched to one look direction."""
    u = steering_vector(rad, direction)
    return u / np.linalg.norm(u)


@dataclass(frozen=True)
class RadarLink:
    """Everything the slow-time model needs about the propagation side.

    gamma_tr/gamma_re are the deterministic two-hop gains of the two target
    directions; noise_var is the per-sample noise power after combining.
    """

    gamma_tr: complex
    gamma_re: complex
    pri: float
    n_pulses: int
    noise_var: float

    @property
    def unambiguous_doppler(self) -> float:
        return 0.5 / self.pri


def synth_radar_observation(
    link: RadarLink,
    alpha_tr: complex,
    alpha_re: complex,
    doppler_tr: float,
    doppler_re: float,
    codes: tuple[CodeSequence, CodeSequence],
    rng: np.random.Generator,
) -> RadarObservation:
    """One noisy burst with up to two code-synchronous target returns."""
    bound = link.unambiguous_doppler
    for name, doppler in (("doppler_tr", doppler_tr), ("doppler_re", doppler_re)):
        if not -bound < doppler < bound:
            raise ValueError(
                f"{name} {doppler!r} Hz outside the open unambiguous interval"
                f" (+-{bound!r} Hz)"
            )
    c_tr, c_re = codes
    if c_tr.n_pulses != link.n_pulses or c_re.n_pulses != link.n_pulses:
        raise ValueError("code sequences do not match the burst length")
    signal = alpha_tr * link.gamma_tr * doppler_template(c_tr, doppler_tr, link.pri)
    signal = signal + alpha_re * link.gamma_re * doppler_template(c_re, doppler_re, link.pri)
    scale = math.sqrt(link.noise_var / 2.0)
    noise = scale * (
        rng.standard_normal(link.n_pulses) + 1j * rng.standard_normal(link.n_pulses)
    )
    truth = TargetTruth(
        alpha_tr=complex(alpha_tr),
        alpha_re=complex(alpha_re),
        doppler_tr=float(doppler_tr),
        doppler_re=float(doppler_re),
    )
    return RadarObservation(samples=signal + noise, truth=truth)


def _solve_cov(cov, mat: np.ndarray) -> np.ndarray:
    """C^-1 @ mat for a scalar variance or a Hermitian positive definite matrix."""
    if np.isscalar(cov):
        return mat / cov
    return np.linalg.solve(np.asarray(cov), mat)


def whitened_template(code, doppler: float, cov, pri: float) -> np.ndarray:
    """Matched-filter direction xi = C^-1 h / ||C^-1/2 h||, so xi^H C xi = 1."""
    h = doppler_template(code, doppler, pri)
    w = _solve_cov(cov, h)
    norm = math.sqrt(float(np.real(np.vdot(h, w))))
    return w / norm


def _pair_statistic_grid(u, v, norm_tr, norm_re, cross):
    """Two-target data statistic on the full grid product, with degenerate pairs masked.

    u: (..., n_tr) correlations against whitened transmissive templates;
    v: (..., n_re) reflective counterparts; norm_* the whitened template energies
    (scalar or per-point); cross: (..., n_re, n_tr) whitened cross correlations.
    Returns statistics shaped (..., n_re, n_tr); masked entries are -inf.
    """
    norm_tr = np.asarray(norm_tr, dtype=float)
    norm_re = np.asarray(norm_re, dtype=float)
    nt = norm_tr if norm_tr.ndim == 0 else norm_tr[..., None, :]
    nr = norm_re if norm_re.ndim == 0 else norm_re[..., :, None]
    abs_u2 = np.abs(u[..., None, :]) ** 2
    abs_v2 = np.abs(v[..., :, None]) ** 2
    re_cross = np.real(cross * np.conj(v[..., :, None]) * u[..., None, :])
    det = nr * nt - np.abs(cross) ** 2
    num = nt * abs_v2 + nr * abs_u2 - 2.0 * re_cross
    # 2x2 Gram eigenvalues: (nr+nt)/2 +- sqrt(((nr-nt)/2)^2 + |cross|^2)
    mid = 0.5 * (nr + nt) + np.zeros_like(np.abs(cross))
    dev = np.sqrt((0.5 * (nr - nt)) ** 2 + np.abs(cross) ** 2)
    degenerate = (mid - dev) <= DEGENERATE_RTOL * (mid + dev)
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = num / det
    return np.where(degenerate, -np.inf, stat)


def burst_statistics(
    y: np.ndarray,
    c_tr: np.ndarray,
    c_re: np.ndarray,
    e_tr: np.ndarray,
    e_re: np.ndarray,
    noise_var: float,
):
    """Grid statistics for a block of bursts in white noise.

    y: (n, P) observations; c_tr/c_re: codes, (P,) shared or (n, P) per burst;
    e_tr/e_re: Doppler phase matrices from `template_phases`.  Returns
    (s_tr (n, n_tr), s_re (n, n_re), s2 (n, n_re, n_tr)), where s2 carries
    -inf at degenerate template pairs.
    """
    y = np.atleast_2d(y)
    c_tr = np.asarray(c_tr)
    c_re = np.asarray(c_re)
    tr2d = np.atleast_2d(c_tr)
    re2d = np.atleast_2d(c_re)
    corr_tr = (y * np.conj(tr2d)) @ np.conj(e_tr)  # (n, n_tr)
    corr_re = (y * np.conj(re2d)) @ np.conj(e_re)
    energy_tr = float(np.sum(np.abs(tr2d[0]) ** 2))  # template energy, Doppler-free
    energy_re = float(np.sum(np.abs(re2d[0]) ** 2))
    s_tr = np.abs(corr_tr) ** 2 / (noise_var * energy_tr)
    s_re = np.abs(corr_re) ** 2 / (noise_var * energy_re)
    # cross-Gram depends on codes only through the per-pulse product sequence
    prod = np.conj(re2d) * tr2d  # (n or 1, P)
    uniq, inverse = np.unique(prod, axis=0, return_inverse=True)
    cross = np.einsum("pj,up,pk->ujk", np.conj(e_re), uniq, e_tr, optimize=True)[inverse]
    s2 = _pair_statistic_grid(corr_tr, corr_re, energy_tr, energy_re, cross)
    return s_tr, s_re, s2 / noise_var


def decide(s_tr, s_re, s2, penalty: float):
    """Penalised model selection over a block of statistic grids.

    Returns (hypothesis index into HYPOTHESIS_ORDER, argmax index per side,
    score matrix (n, 4)).  Ties resolve to the earliest hypothesis in order.
    """
    s_tr = np.atleast_2d(s_tr)
    s_re = np.atleast_2d(s_re)
    n = s_tr.shape[0]
    i_tr = np.argmax(s_tr, axis=1)
    i_re = np.argmax(s_re, axis=1)
    flat = s2.reshape(n, -1)
    i_pair = np.argmax(flat, axis=1)
    scores = np.empty((n, 4))
    scores[:, 0] = 0.0
    scores[:, 1] = s_tr[np.arange(n), i_tr] - penalty
    scores[:, 2] = s_re[np.arange(n), i_re] - penalty
    scores[:, 3] = flat[np.arange(n), i_pair] - 2.0 * penalty
    hyp = np.argmax(scores, axis=1)  # first maximum wins: fewer targets preferred
    j_re, j_tr = np.unravel_index(i_pair, s2.shape[1:])
    pick_tr = np.where(hyp == 3, j_tr, i_tr)
    pick_re = np.where(hyp == 3, j_re, i_re)
    return hyp, pick_tr, pick_re, scores


def gic_detect(
    y,
    codes: tuple[CodeSequence, CodeSequence],
    grids: DopplerGrids,
    cov,
    penalty: float,
    pri: float,
) -> DetectionResult:
    """Penalised multi-hypothesis detection of up to one target per half-space.

    Parameters
    ----------
    y : RadarObservation or array
        Slow-time burst samples.
    codes : (transmissive, reflective) code sequences the surface emitted.
    grids : Doppler search grids for the two sides.
    cov : noise covariance; a scalar variance or a Hermitian positive
        definite matrix.
    penalty : per-target model-order penalty (often written eta).
    pri : pulse repetition interval in seconds.

    The one-target statistics are squared matched-filter outputs after
    whitening; the two-target statistic projects onto the whitened span of a
    template pair, skipping pairs whose Gram matrix is numerically singular.
    """
    if penalty < 0:
        raise ValueError(f"penalty must be >= 0, got {penalty!r}")
    samples = y.samples if isinstance(y, RadarObservation) else np.asarray(y)
    n_pulses = samples.shape[0]
    c_tr, c_re = codes
    e_tr = template_phases(grids.tr, n_pulses, pri)
    e_re = template_phases(grids.re, n_pulses, pri)
    h_tr = _code_values(c_tr)[:, None] * e_tr
    h_re = _code_values(c_re)[:, None] * e_re
    w_tr = _solve_cov(cov, h_tr)
    w_re = _solve_cov(cov, h_re)
    u = np.conj(w_tr).T @ samples
    v = np.conj(w_re).T @ samples
    norm_tr = np.real(np.sum(np.conj(h_tr) * w_tr, axis=0))
    norm_re = np.real(np.sum(np.conj(h_re) * w_re, axis=0))
    cross = np.conj(w_re).T @ h_tr
    s_tr = np.abs(u) ** 2 / norm_tr
    s_re = np.abs(v) ** 2 / norm_re
    s2 = _pair_statistic_grid(u, v, norm_tr, norm_re, cross)
    hyp, pick_tr, pick_re, scores = decide(s_tr[None, :], s_re[None, :], s2[None], penalty)
    hypothesis = HYPOTHESIS_ORDER[int(hyp[0])]
    doppler_tr = float(grids.tr[pick_tr[0]]) if hypothesis in (Hypothesis.H1_TR, Hypothesis.H2) else None
    doppler_re = float(grids.re[pick_re[0]]) if hypothesis in (Hypothesis.H1_RE, Hypothesis.H2) else None
    return DetectionResult(
        hypothesis=hypothesis,
        doppler_tr=doppler_tr,
        doppler_re=doppler_re,
        scores={h: float(scores[0, i]) for i, h in enumerate(HYPOTHESIS_ORDER)},
    )


def null_rejection_maxima(
    y: np.ndarray,
    c_tr,
    c_re,
    e_tr: np.ndarray,
    e_re: np.ndarray,
    noise_var: float,
):
    """Per-burst maxima (largest one-target statistic, largest pair statistic)."""
    s_tr, s_re, s2 = burst_statistics(y, c_tr, c_re, e_tr, e_re, noise_var)
    max_single = np.maximum(s_tr.max(axis=1), s_re.max(axis=1))
    max_pair = s2.reshape(s2.shape[0], -1).max(axis=1)
    return max_single, max_pair


def _false_alarm_rate(max_single, max_pair, penalty, counting):
    two = (max_pair > 2.0 * penalty) & (max_pair - max_single > penalty)
    if counting == "event":
        return float(np.mean(two | (max_single > penalty)))
    # per_target: a two-target declaration counts twice
    one = ~two & (max_single > penalty)
    return float(np.mean(2.0 * two + 1.0 * one))


def solve_penalty(max_single, max_pair, target_rate: float, counting: str = "event") -> float:
    """Smallest penalty whose empirical false-alarm rate is <= target_rate.

    Operates on stored per-burst statistic maxima from noise-only input; the
    rate is non-increasing in the penalty, so bisection converges to the
    boundary.  Requires enough bursts for >= 100 expected false alarms.
    """
    if counting not in ("event", "per_target"):
        raise ValueError(f"counting must be 'event' or 'per_target', got {counting!r}")
    max_single = np.asarray(max_single, dtype=float)
    max_pair = np.asarray(max_pair, dtype=float)
    n = max_single.shape[0]
    if n * target_rate < 100:
        raise ValueError(
            f"{n} bursts resolve rates only down to ~100/{n}; raise the burst"
            f" count for target rate {target_rate!r}"
        )
    lo = 0.0
    hi = float(max(max_single.max(initial=0.0), max_pair.max(initial=0.0) / 2.0)) + 1.0
    if _false_alarm_rate(max_single, max_pair, lo, counting) <= target_rate:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _false_alarm_rate(max_single, max_pair, mid, counting) <= target_rate:
            hi = mid
        else:
            lo = mid
    return hi


def calibrate_penalty(
    codes: tuple[CodeSequence, CodeSequence],
    grids: DopplerGrids,
    noise_var: float,
    pri: float,
    target_rate: float,
    trials: int,
    rng: np.random.Generator,
    *,
    counting: str = "event",
    block: int = 4096,
) -> float:
    """Monte Carlo penalty calibration for a fixed code pair.

    Simulates `trials` noise-only bursts in blocks, records the statistic
    maxima once and solves for the smallest penalty meeting `target_rate`.
    """
    c_tr, c_re = codes
    n_pulses = _code_values(c_tr).shape[0]
    e_tr = template_phases(grids.tr, n_pulses, pri)
    e_re = template_phases(grids.re, n_pulses, pri)
    singles = np.empty(trials)
    pairs = np.empty(trials)
    scale = math.sqrt(noise_var / 2.0)
    done = 0
    while done < trials:
        n = min(block, trials - done)
        y = scale * (
            rng.standard_normal((n, n_pulses)) + 1j * rng.standard_normal((n, n_pulses))
        )
        ms, mp = null_rejection_maxima(
            y, _code_values(c_tr), _code_values(c_re), e_tr, e_re, noise_var
        )
        singles[done : done + n] = ms
        pairs[done : done + n] = mp
        done += n
    return solve_penalty(singles, pairs, target_rate, counting)


def doppler_to_velocity(doppler, params) -> float | np.ndarray:
    """Radial velocity from Doppler shift: v = wavelength * doppler / 2."""
    out = params.wavelength * np.asarray(doppler, dtype=float) / 2.0
    return float(out) if out.ndim == 0 else out
