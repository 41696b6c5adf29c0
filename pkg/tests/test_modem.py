"""Tests for OQAM staggering and the FS-FBMC modem."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from conftest import complex_normal
from svdfbmc.core.config import default_active_subchannels
from svdfbmc.core.errors import ConfigurationError, ShapeError
from svdfbmc.phy.channel import flat_channel
from svdfbmc.phy.modem import (
    FsFbmcModem,
    PamGrid,
    cyclic_hull,
    oqam_destagger,
    oqam_stagger,
)
from svdfbmc.phy.prototype_filter import pulse
from svdfbmc.phy.smoothing import BeamformerSet, smooth_sweep


def random_pam(rng, shape):
    return rng.choice([-3.0, -1.0, 1.0, 3.0], size=shape)


def back_to_back(modem, values):
    ident = BeamformerSet.identity(modem.N, values.shape[0], modem.sweep_tones)
    est, grid = modem.demodulate(modem.modulate(PamGrid(values), ident), ident)
    return est, grid


class TestOqamStaggering:
    def test_stagger(self):
        qam = np.zeros((1, 2, 1), dtype=complex)
        qam[0, 0, 0] = 3 + 4j
        values = oqam_stagger(qam).values
        assert values[0, 0, 0] == 3.0
        assert values[0, 0, 1] == 4.0

    def test_real_input_gives_zero_odd_times(self, rng):
        values = oqam_stagger(rng.standard_normal((2, 4, 3))).values
        assert not np.any(values[..., 1::2])

    def test_destagger(self):
        assert oqam_destagger(np.array([[[1.0, -1.0]]]))[0, 0, 0] == 1 - 1j
        assert not np.any(oqam_destagger(np.zeros((2, 4, 6))))

    def test_destagger_inverts_stagger(self, rng):
        qam = complex_normal(rng, 2, 8, 7)
        assert_allclose(oqam_destagger(oqam_stagger(qam)), qam)

    def test_odd_half_times_raise(self):
        with pytest.raises(ShapeError):
            oqam_destagger(np.zeros((1, 4, 3)))

    def test_inactive_subchannels_are_zeroed(self, rng):
        active = np.array([True, False, True, False])
        grid = oqam_stagger(complex_normal(rng, 1, 4, 2), active)
        assert not np.any(grid.values[:, ~active])
        assert grid.num_symbols == 4

    def test_grid_must_be_three_dimensional(self):
        with pytest.raises(ShapeError):
            PamGrid(np.zeros((4, 4)))


class TestCyclicHull:
    def test_contiguous(self):
        support = np.zeros(16, dtype=bool)
        support[3:7] = True
        assert_array_equal(cyclic_hull(support), [3, 4, 5, 6])

    def test_wraps_around(self):
        support = np.zeros(16, dtype=bool)
        support[[0, 1, 14, 15]] = True
        assert_array_equal(cyclic_hull(support), [14, 15, 0, 1])

    def test_fills_small_gaps(self):
        support = np.zeros(16, dtype=bool)
        support[[2, 4, 9]] = True
        assert_array_equal(cyclic_hull(support), np.arange(2, 10))

    def test_empty(self):
        assert cyclic_hull(np.zeros(8, dtype=bool)).size == 0


class TestModemLayout:
    def test_sweep_covers_active_band(self, phydyas):
        active = np.zeros(64, dtype=bool)
        active[default_active_subchannels(64)] = True
        modem = FsFbmcModem(phydyas, active=active)
        assert len(modem.sweep_tones) == 215
        assert modem.sweep_tones[0] == 149
        assert modem.sweep_tones[-1] == 107
        assert not np.any(modem.rows[:, ~modem.tone_mask])

    def test_full_band(self, full_modem):
        assert len(full_modem.sweep_tones) == 256

    def test_stream_length(self, full_modem):
        assert full_modem.stream_length(14) == 13 * 32 + 256

    def test_fft_size_must_hold_the_pulse(self, phydyas):
        with pytest.raises(ConfigurationError):
            FsFbmcModem(phydyas, fft_size=128)
        with pytest.raises(ConfigurationError):
            FsFbmcModem(phydyas, fft_size=300)

    def test_theta(self, full_modem):
        theta = full_modem.theta(5)
        assert theta.shape == (64, 5)
        assert_allclose(theta[:2, :2], [[1, 1j], [1j, 1]], atol=1e-15)
        assert_allclose(np.abs(theta), 1.0)


class TestModulation:
    def test_single_symbol_is_the_pulse(self, phydyas, full_modem):
        for m in (0, 5):
            values = np.zeros((1, 64, 1))
            values[0, m, 0] = 1.0
            ident = BeamformerSet.identity(256, 1)
            x = full_modem.modulate(PamGrid(values), ident).x[0]
            assert_allclose(x, pulse(phydyas, m, 0, np.arange(256)), atol=1e-12)

    def test_tone_frames(self, full_modem, rng):
        pam = PamGrid(random_pam(rng, (2, 64, 6)))
        frames = full_modem.tone_frames(pam, BeamformerSet.identity(256, 2))
        assert [f.n for f in frames] == list(range(6))
        assert frames[0].b.shape == (2, 256)

    def test_missing_beamformer_raises(self, full_modem):
        pam = PamGrid(np.ones((1, 64, 2)))
        partial = BeamformerSet.identity(256, 1, tones=np.arange(10))
        with pytest.raises(ConfigurationError):
            full_modem.modulate(pam, partial)
        with pytest.raises(ConfigurationError):
            full_modem.modulate(pam, BeamformerSet.identity(512, 1))

    def test_zero_input_gives_zero_output(self, full_modem):
        est, grid = back_to_back(full_modem, np.zeros((1, 64, 4)))
        assert not np.any(est)
        assert not np.any(grid.values)

    def test_back_to_back_distortion(self, full_modem, rng):
        values = random_pam(rng, (1, 64, 14))
        est, grid = back_to_back(full_modem, values)
        distortion = np.mean((grid.values - values) ** 2)
        sdr_db = 10 * np.log10(np.mean(values ** 2) / distortion)
        assert sdr_db >= 55.0

    def test_eight_m_receiver(self, phydyas, rng):
        modem = FsFbmcModem(phydyas, fft_size=512)
        values = random_pam(rng, (1, 64, 10))
        est, grid = back_to_back(modem, values)
        distortion = np.mean((grid.values - values) ** 2)
        assert 10 * np.log10(np.mean(values ** 2) / distortion) >= 55.0

    def test_linearity(self, full_modem, rng):
        a = random_pam(rng, (2, 64, 6))
        b = random_pam(rng, (2, 64, 6))
        est_a, _ = back_to_back(full_modem, a)
        est_b, _ = back_to_back(full_modem, b)
        est_ab, _ = back_to_back(full_modem, a + b)
        assert_allclose(est_ab, est_a + est_b, atol=1e-10)

    def test_one_window_inverts_one_symbol(self, full_modem):
        values = np.zeros((1, 64, 1))
        values[0, 9, 0] = 1.0
        ident = BeamformerSet.identity(256, 1)
        x = full_modem.modulate(PamGrid(values), ident)
        spectrum = full_modem._window_spectra(x, 1)[0, 0]
        expected = full_modem.rows[9] * full_modem.theta(1)[9, 0]
        assert_allclose(spectrum, expected, atol=1e-14)

    def test_short_stream_is_zero_padded(self, full_modem, rng):
        values = random_pam(rng, (1, 64, 4))
        ident = BeamformerSet.identity(256, 1)
        x = full_modem.modulate(PamGrid(values), ident)
        x.x = x.x[:, :200]
        est, _ = full_modem.demodulate(x, ident, 4)
        assert est.shape == (1, 64, 4)


class TestFlatChannel:
    def test_interference_stays_imaginary(self, full_modem, rng):
        H0 = complex_normal(rng, 2, 2)
        channel = flat_channel(H0, 256)
        bf = smooth_sweep(channel.H, full_modem.sweep_tones, 2, "ortho")
        values = random_pam(rng, (2, 64, 8))

        rx = channel.apply(full_modem.modulate(PamGrid(values), bf))
        est, _ = full_modem.demodulate(rx, bf, 8)
        reference, _ = back_to_back(full_modem, values)

        # c = a * zeta: the flat channel output equals the back-to-back output
        assert_allclose(est, reference, atol=1e-8 * np.abs(reference).max())
        assert np.max(np.abs(est.real - values)) < 5e-2
