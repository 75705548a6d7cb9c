import dataclasses
import math

import numpy as np
import pytest
from scipy import stats

from srsbs.channel import (
    ChannelConfig,
    ChannelState,
    PRESETS,
    effective_modulation_to_noise,
    get_preset,
    propagate,
    step,
)
from srsbs.srs import make_srs_symbol
from srsbs.tag import OokState


def make_channel(**kwargs):
    return ChannelState.create(ChannelConfig(**kwargs))


class TestPropagate:
    def test_noiseless_transparent_identity(self):
        chan = make_channel(base_gain=1.0, modulation_depth=0.05)
        srs = make_srs_symbol()
        rx = propagate(srs, OokState.TRANSPARENT, chan, np.random.default_rng(0))
        np.testing.assert_array_equal(rx.values, srs.values)

    def test_noiseless_backscatter_depth(self):
        chan = make_channel(base_gain=1.0, modulation_depth=0.05)
        rx = propagate(
            make_srs_symbol(), OokState.BACKSCATTER, chan, np.random.default_rng(0)
        )
        assert np.max(np.abs(np.abs(rx.values) - 1.05)) < 1e-12

    def test_mean_magnitude_matches_rician(self):
        # independent closed form: per-subcarrier magnitude is Rice(nu, sigma_c)
        # with nu the clean amplitude and sigma_c the per-component noise std
        sigma = 0.05
        gain = 0.3
        chan = make_channel(base_gain=gain, modulation_depth=0.0, noise_sigma=sigma)
        rng = np.random.default_rng(42)
        srs = make_srs_symbol()
        n_periods = 10_000
        total = 0.0
        for _ in range(n_periods):
            rx = propagate(srs, OokState.TRANSPARENT, chan, rng)
            total += np.abs(rx.values).mean()
        measured = total / n_periods
        sigma_c = sigma / math.sqrt(2.0)
        rice = stats.rice(b=gain / sigma_c, scale=sigma_c)
        se = rice.std() / math.sqrt(144 * n_periods)
        assert abs(measured - rice.mean()) < 3 * se

    def test_spike_scales_whole_symbol(self):
        srs = make_srs_symbol()
        quiet = make_channel(base_gain=1.0, spike_probability=0.0)
        spiky = make_channel(base_gain=1.0, spike_probability=1.0, spike_gain=3.0)
        rx_quiet = propagate(srs, OokState.TRANSPARENT, quiet, np.random.default_rng(7))
        rx_spiky = propagate(srs, OokState.TRANSPARENT, spiky, np.random.default_rng(7))
        np.testing.assert_allclose(rx_spiky.values, 3.0 * rx_quiet.values, rtol=1e-12)

    def test_spike_affects_single_period(self):
        # same noise stream; spikes drawn per period leave other periods alone
        cfg = ChannelConfig(base_gain=1.0, noise_sigma=0.01, spike_probability=0.5)
        srs = make_srs_symbol()
        base = ChannelState.create(dataclasses.replace(cfg, spike_probability=0.0))
        spiky = ChannelState.create(cfg)
        rng_a = np.random.default_rng(3)
        rng_b = np.random.default_rng(3)
        ratios = []
        for _ in range(50):
            rx_a = propagate(srs, OokState.TRANSPARENT, base, rng_a)
            rx_b = propagate(srs, OokState.TRANSPARENT, spiky, rng_b)
            ratio = rx_b.values / rx_a.values
            assert np.allclose(ratio, ratio[0])
            ratios.append(complex(ratio[0]))
        assert {round(r.real, 9) for r in ratios} == {1.0, 3.0}

    def test_determinism(self):
        cfg = dict(base_gain=0.3, noise_sigma=0.02, spike_probability=0.1)
        srs = make_srs_symbol()
        out = []
        for _ in range(2):
            chan = make_channel(**cfg)
            rng = np.random.default_rng(123)
            values = []
            for _ in range(20):
                rx = propagate(srs, OokState.BACKSCATTER, chan, rng)
                step(chan, rng)
                values.append(rx.values.copy())
            out.append(np.stack(values))
        np.testing.assert_array_equal(out[0], out[1])

    def test_null_depth_states_indistinguishable(self):
        chan = make_channel(base_gain=0.3, modulation_depth=0.0, noise_sigma=0.02)
        srs = make_srs_symbol()
        rng = np.random.default_rng(11)
        n = 10_000
        on = np.empty(n)
        off = np.empty(n)
        for i in range(n):
            on[i] = np.abs(propagate(srs, OokState.BACKSCATTER, chan, rng).values).mean()
            off[i] = np.abs(propagate(srs, OokState.TRANSPARENT, chan, rng).values).mean()
        result = stats.ks_2samp(on, off)
        assert result.pvalue > 0.01


class TestStep:
    def test_zero_drift_keeps_gain(self):
        chan = make_channel(base_gain=0.4, drift_rate=0.0)
        rng = np.random.default_rng(0)
        for _ in range(100):
            step(chan, rng)
        assert chan.gain == 0.4

    def test_fixed_seed_replays_trajectory(self):
        def trajectory():
            chan = make_channel(base_gain=1.0, drift_rate=0.01)
            rng = np.random.default_rng(5)
            return [step(chan, rng) or chan.gain for _ in range(217)]

        assert trajectory() == trajectory()

    def test_log_gain_random_walk_variance(self):
        # var(log g_K / g_0) = K * rate^2 for a K-step walk
        rate = 0.001
        walks = 4000
        steps = 217
        rng = np.random.default_rng(99)
        finals = np.empty(walks)
        for i in range(walks):
            chan = make_channel(base_gain=1.0, drift_rate=rate)
            for _ in range(steps):
                step(chan, rng)
            finals[i] = math.log(chan.gain)
        expected = steps * rate**2
        assert np.var(finals) == pytest.approx(expected, rel=0.15)


class TestConfigAndPresets:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(base_gain=0.0),
            dict(modulation_depth=-0.1),
            dict(noise_sigma=-1.0),
            dict(spike_probability=1.5),
            dict(spike_gain=1.0),
            dict(drift_rate=-0.2),
        ],
    )
    def test_invalid_config_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ChannelConfig(**kwargs)

    def test_preset_names(self):
        assert set(PRESETS) == {"noiseless", "indoor_short", "indoor_long", "outdoor"}
        assert get_preset("noiseless").config.noise_sigma == 0.0

    def test_unknown_preset_rejected(self):
        with pytest.raises(ValueError, match="unknown scenario"):
            get_preset("underwater")

    def test_presets_ordered_by_modulation_to_noise(self):
        ratios = [
            effective_modulation_to_noise(PRESETS[name].config)
            for name in ("noiseless", "indoor_short", "indoor_long", "outdoor")
        ]
        assert all(a > b for a, b in zip(ratios, ratios[1:]))
