"""Tests for delay profiles, channel realizations and noise injection."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from conftest import complex_normal
from svdfbmc.core.errors import ConfigurationError
from svdfbmc.phy.channel import (
    add_awgn,
    flat_channel,
    load_profile,
    preset_profile,
    profile_for,
    realize_channel,
    snr_to_noise_variance,
)
from svdfbmc.phy.modem import SampleStream


class TestProfiles:
    @pytest.mark.parametrize("model,taps", [("D", 8), ("E", 15), ("F", 22)])
    def test_preset_tap_counts(self, model, taps):
        profile = preset_profile(model)
        assert profile.num_taps == taps
        assert profile.last_delay == taps - 1
        assert profile.powers.sum() == pytest.approx(1.0)
        assert np.all(np.diff(profile.powers) < 0)

    def test_flat(self):
        profile = preset_profile("flat")
        assert profile.num_taps == 1
        assert profile.last_delay == 0

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError):
            preset_profile("G")

    def test_load_profile(self, tmp_path):
        path = tmp_path / "profile.py"
        path.write_text('NAME = "lab"\nDELAYS_NS = [0, 100, 210]\nPOWERS = [1.0, 0.5, 0.5]\n')
        profile = load_profile(str(path))
        assert profile.name == "lab"
        assert_array_equal(profile.delays, [0, 2, 4])
        assert_allclose(profile.powers, [0.5, 0.25, 0.25])
        assert_allclose(profile.delays_ns, [0.0, 100.0, 200.0])

    def test_profile_missing_key(self, tmp_path):
        path = tmp_path / "profile.py"
        path.write_text("DELAYS_NS = [0, 50]\n")
        with pytest.raises(ConfigurationError):
            load_profile(str(path))

    def test_colliding_delays(self, tmp_path):
        path = tmp_path / "profile.py"
        path.write_text("DELAYS_NS = [0, 10, 60]\nPOWERS = [1, 1, 1]\n")
        with pytest.raises(ConfigurationError):
            load_profile(str(path))

    def test_custom_needs_a_file(self):
        with pytest.raises(ConfigurationError):
            profile_for("custom", None)
        assert profile_for("D").name == "D"


class TestRealization:
    def test_same_seed_same_channel(self):
        profile = preset_profile("D")
        a = realize_channel(profile, 2, 2, 256, 11)
        b = realize_channel(profile, 2, 2, 256, 11)
        assert_array_equal(a.H, b.H)
        assert a.H.shape == (256, 2, 2)
        assert a.taps.shape == (2, 2, 8)

    def test_response_is_dft_of_taps(self):
        channel = realize_channel(preset_profile("F"), 2, 3, 64, 5)
        for r in range(2):
            for t in range(3):
                assert_allclose(channel.H[:, r, t], np.fft.fft(channel.taps[r, t], 64))

    def test_too_few_tones(self):
        with pytest.raises(ConfigurationError):
            realize_channel(preset_profile("F"), 2, 2, 32, 0)

    def test_average_power(self):
        profile = preset_profile("D")
        gains = [
            np.mean(np.abs(realize_channel(profile, 2, 2, 64, seed).H) ** 2)
            for seed in range(400)
        ]
        assert np.mean(gains) == pytest.approx(1.0, abs=0.1)

    def test_flat_channel(self, rng):
        H0 = complex_normal(rng, 2, 2)
        channel = flat_channel(H0, 16)
        assert_allclose(channel.H, np.broadcast_to(H0, (16, 2, 2)))
        assert_allclose(channel.adjacent_perturbation(), 0.0)

    def test_subchannel_response(self):
        channel = realize_channel(preset_profile("D"), 2, 2, 256, 3)
        sub = channel.subchannel_response(64)
        assert sub.shape == (64, 2, 2)
        assert_array_equal(sub[1], channel.H[4])

    def test_apply_matches_convolution(self, rng):
        channel = realize_channel(preset_profile("D"), 2, 2, 64, 9)
        x = complex_normal(rng, 2, 100)
        y = channel.apply(SampleStream(x)).x
        for r in range(2):
            expected = sum(np.convolve(x[t], channel.taps[r, t])[:100] for t in range(2))
            assert_allclose(y[r], expected, atol=1e-12)


class TestNoise:
    @pytest.mark.parametrize(
        "snr_db,nt,expected", [(10.0, 2, 0.2), (0.0, 1, 1.0), (30.0, 2, 0.002)]
    )
    def test_snr_to_noise_variance(self, snr_db, nt, expected):
        assert snr_to_noise_variance(snr_db, nt) == pytest.approx(expected)

    def test_infinite_snr_is_noiseless(self):
        assert snr_to_noise_variance(np.inf, 2) == 0.0

    def test_zero_variance_is_identity(self, rng):
        stream = SampleStream(complex_normal(rng, 2, 10))
        noisy = add_awgn(stream, 0.0, 1)
        assert_array_equal(noisy.x, stream.x)
        assert noisy.x is not stream.x

    def test_negative_variance(self):
        with pytest.raises(ConfigurationError):
            add_awgn(SampleStream(np.zeros((1, 4), dtype=complex)), -1.0)

    def test_variance(self):
        noisy = add_awgn(SampleStream(np.zeros((2, 100000), dtype=complex)), 0.5, 3)
        assert np.mean(np.abs(noisy.x) ** 2) == pytest.approx(0.5, rel=0.02)
        assert np.mean(noisy.x.real ** 2) == pytest.approx(0.25, rel=0.03)
