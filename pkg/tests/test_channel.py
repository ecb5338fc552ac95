import math

import numpy as np
import pytest

from starisac.channel import (
    SystemParams,
    UserSideConfig,
    draw_target_amplitude,
    draw_user_paths,
    feeder_ris_channel,
    pulse_autocorr,
    user_channel_taps,
    _draw_path_arrays,
    _taps_from_arrays,
)
from starisac.geometry import (
    AngularDirection,
    ArrayGeometry,
    HalfSpace,
    element_gain,
    steering_vector,
)


def make_params(**overrides) -> SystemParams:
    base = dict(
        carrier_freq=28e9,
        bandwidth=50e6,
        pri=0.25e-3,
        pulses_per_cpi=16,
        pulse_power=1.0,
        feeder_gain=100.0,
        feeder_distance=3.0,
        feeder_direction=AngularDirection.from_degrees(-45.0, 0.0),
        radar_noise_var=10.0 ** (-19.4),
    )
    base.update(overrides)
    return SystemParams(**base)


def make_user_cfg(**overrides) -> UserSideConfig:
    base = dict(
        side=HalfSpace.REFLECTIVE,
        n_paths=3,
        n_taps=15,
        delay_min=0.0,
        delay_max=0.26e-6,
        az_window=(math.radians(15.0), math.radians(25.0)),
        el_window=(math.radians(-25.0), math.radians(-15.0)),
        amp_var=1.0,
    )
    base.update(overrides)
    return UserSideConfig(**base)


class TestSystemParams:
    def test_derived_quantities(self):
        p = make_params()
        assert p.wavelength == pytest.approx(0.0107068735, rel=1e-12)
        assert p.pulse_width == pytest.approx(2e-8, rel=1e-15)
        assert p.unambiguous_doppler == pytest.approx(2000.0, rel=1e-15)

    def test_rejects_long_pulse(self):
        with pytest.raises(ValueError):
            make_params(bandwidth=1e3)  # 1 ms pulse inside a 0.25 ms interval

    @pytest.mark.parametrize("field,value", [
        ("carrier_freq", 0.0), ("bandwidth", -1.0), ("pri", 0.0),
        ("pulse_power", -2.0), ("radar_noise_var", 0.0), ("pulses_per_cpi", 0),
    ])
    def test_rejects_non_positive(self, field, value):
        with pytest.raises(ValueError):
            make_params(**{field: value})


class TestFeederChannel:
    def test_magnitude_oracle(self):
        # sqrt(gain * element_gain(-45deg, 0)) * wavelength / (4*pi*3m)
        p = make_params()
        g = feeder_ris_channel(p, ArrayGeometry(256))
        np.testing.assert_allclose(np.abs(g), 0.001779760220858196, rtol=1e-12)

    def test_phase_matches_steering(self):
        p = make_params()
        ris = ArrayGeometry(64)
        g = feeder_ris_channel(p, ris)
        u = steering_vector(ris, p.feeder_direction)
        np.testing.assert_allclose(g / np.abs(g), u, atol=1e-12)


class TestTargetAmplitude:
    def test_variance_oracle(self, rng):
        # rcs / ((4*pi)^2 * range^4) at rcs=1, range=10
        var = 1.0 / ((4 * math.pi) ** 2 * 10.0**4)
        assert var == pytest.approx(6.332573977646111e-07, rel=1e-12)
        draws = draw_target_amplitude(1.0, 10.0, rng, size=200_000)
        assert np.mean(np.abs(draws) ** 2) == pytest.approx(var, rel=0.03)
        # circular: real/imag parts each carry half the variance
        assert np.var(draws.real) == pytest.approx(var / 2, rel=0.05)
        assert np.mean(draws).real == pytest.approx(0.0, abs=3 * math.sqrt(var / 200_000))

    def test_zero_rcs_is_exactly_zero(self, rng):
        assert draw_target_amplitude(0.0, 10.0, rng) == 0j
        assert np.all(draw_target_amplitude(0.0, 10.0, rng, size=5) == 0)

    def test_scalar_matches_vector_stream(self):
        a = draw_target_amplitude(2.0, 5.0, np.random.default_rng(7))
        b = draw_target_amplitude(2.0, 5.0, np.random.default_rng(7), size=None)
        assert a == b

    def test_rejects_bad_inputs(self, rng):
        with pytest.raises(ValueError):
            draw_target_amplitude(-1.0, 10.0, rng)
        with pytest.raises(ValueError):
            draw_target_amplitude(1.0, 0.0, rng)


class TestPulseAutocorr:
    def test_triangle(self):
        p = make_params()
        w = p.pulse_width
        assert pulse_autocorr(0.0, p) == 1.0
        assert pulse_autocorr(w / 2, p) == pytest.approx(0.5, rel=1e-12)
        assert pulse_autocorr(-w / 2, p) == pytest.approx(0.5, rel=1e-12)
        assert pulse_autocorr(w, p) == 0.0
        assert pulse_autocorr(3 * w, p) == 0.0
        np.testing.assert_allclose(pulse_autocorr(np.array([0.0, w / 4]), p), [1.0, 0.75])


class TestUserSideConfig:
    def test_valid_default(self):
        cfg = make_user_cfg()
        cfg.validate_against(make_params())
        c = cfg.central_direction
        assert c.az == pytest.approx(math.radians(20.0))
        assert c.el == pytest.approx(math.radians(-20.0))

    def test_rejects_tap_count_mismatch(self):
        cfg = make_user_cfg(n_taps=10)
        with pytest.raises(ValueError):
            cfg.validate_against(make_params())

    def test_rejects_window_outside_half_space(self):
        with pytest.raises(ValueError):
            make_user_cfg(az_window=(math.radians(85.0), math.radians(95.0)))

    def test_rejects_bad_scalars(self):
        with pytest.raises(ValueError):
            make_user_cfg(n_paths=0)
        with pytest.raises(ValueError):
            make_user_cfg(delay_min=-1e-9)
        with pytest.raises(ValueError):
            make_user_cfg(amp_var=0.0)


class TestPathDraws:
    def test_draws_respect_windows_and_grid(self, rng):
        cfg = make_user_cfg()
        params = make_params()
        delays, az, el, amps = _draw_path_arrays(cfg, params, 500, rng)
        assert delays.shape == az.shape == el.shape == amps.shape == (500, 3)
        # delays sit exactly on the tap grid
        idx = (delays - cfg.delay_min) * params.bandwidth
        np.testing.assert_allclose(idx, np.round(idx), atol=1e-9)
        assert idx.min() >= -1e-9 and idx.max() <= cfg.n_taps - 1 + 1e-9
        assert az.min() >= cfg.az_window[0] and az.max() <= cfg.az_window[1]
        assert el.min() >= cfg.el_window[0] and el.max() <= cfg.el_window[1]
        assert np.mean(np.abs(amps) ** 2) == pytest.approx(cfg.amp_var, rel=0.1)

    def test_draw_user_paths_wraps_arrays(self):
        cfg = make_user_cfg()
        params = make_params()
        paths = draw_user_paths(cfg, params, np.random.default_rng(3))
        delays, az, el, amps = _draw_path_arrays(cfg, params, 1, np.random.default_rng(3))
        assert len(paths) == cfg.n_paths
        for k, p in enumerate(paths):
            assert p.delay == delays[0, k]
            assert p.departure.az == az[0, k]
            assert p.amplitude == complex(amps[0, k])


class TestChannelTaps:
    def test_single_path_closed_form(self, rng):
        # one path on tap 4: only tap 4 is non-zero and matches the link budget
        params = make_params()
        ris = ArrayGeometry(64)
        cfg = make_user_cfg(n_paths=1)
        g = feeder_ris_channel(params, ris)
        weights = np.exp(1j * rng.uniform(0, 2 * np.pi, ris.n_elements))
        amp = 0.8 - 0.3j
        az, el = math.radians(22.0), math.radians(-18.0)
        delay = cfg.delay_min + 4 / params.bandwidth
        taps = _taps_from_arrays(
            np.array([[delay]]), np.array([[az]]), np.array([[el]]),
            np.array([[amp]]), weights, g, params, cfg, ris,
        )[0]
        u = steering_vector(ris, AngularDirection(az, el))
        expected_peak = (
            amp
            * math.sqrt(params.pulse_power * params.pulse_width * element_gain(AngularDirection(az, el)))
            * np.sum(u * g * weights)
        )
        assert taps.shape == (cfg.n_taps,)
        assert taps[4] == pytest.approx(expected_peak, rel=1e-12)
        others = np.delete(taps, 4)
        np.testing.assert_allclose(others, 0.0, atol=1e-18)

    def test_off_grid_path_splits_between_taps(self, rng):
        # half a pulse width off the grid: two adjacent taps at half weight
        params = make_params()
        ris = ArrayGeometry(16)
        cfg = make_user_cfg(n_paths=1)
        g = feeder_ris_channel(params, ris)
        weights = np.ones(ris.n_elements, dtype=complex)
        delay = cfg.delay_min + (6 + 0.5) / params.bandwidth
        taps = _taps_from_arrays(
            np.array([[delay]]), np.array([[0.3]]), np.array([[-0.3]]),
            np.array([[1.0 + 0j]]), weights, g, params, cfg, ris,
        )[0]
        assert taps[6] == pytest.approx(taps[7], rel=1e-12)
        assert abs(taps[6]) > 0

    def test_taps_linear_in_paths(self, rng):
        # superposition: taps of two paths = sum of single-path taps
        params = make_params()
        ris = ArrayGeometry(16)
        cfg = make_user_cfg(n_paths=2)
        cfg1 = make_user_cfg(n_paths=1)
        g = feeder_ris_channel(params, ris)
        weights = np.exp(1j * rng.uniform(0, 2 * np.pi, ris.n_elements))
        delays, az, el, amps = _draw_path_arrays(cfg, params, 1, rng)
        total = _taps_from_arrays(delays, az, el, amps, weights, g, params, cfg, ris)
        parts = [
            _taps_from_arrays(delays[:, [k]], az[:, [k]], el[:, [k]], amps[:, [k]],
                              weights, g, params, cfg1, ris)
            for k in range(2)
        ]
        np.testing.assert_allclose(total, parts[0] + parts[1], rtol=1e-12)

    def test_user_channel_taps_matches_batch(self, rng):
        params = make_params()
        ris = ArrayGeometry(16)
        cfg = make_user_cfg()
        g = feeder_ris_channel(params, ris)
        weights = np.exp(1j * rng.uniform(0, 2 * np.pi, ris.n_elements))
        paths = draw_user_paths(cfg, params, np.random.default_rng(11))
        taps = user_channel_taps(paths, weights, g, params, cfg, ris)
        delays, az, el, amps = _draw_path_arrays(cfg, params, 1, np.random.default_rng(11))
        batch = _taps_from_arrays(delays, az, el, amps, weights, g, params, cfg, ris)
        np.testing.assert_allclose(taps, batch[0], rtol=1e-12)
