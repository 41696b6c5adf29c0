"""Tests for the PHYDYAS prototype filter and the transmultiplexer response."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from svdfbmc.core.errors import ConfigurationError
from svdfbmc.phy.prototype_filter import (
    design_phydyas,
    pulse,
    spread_coefficients,
    transmux_response,
)


class TestDesign:
    def test_length_and_energy(self, phydyas):
        assert phydyas.length == 256
        assert phydyas.P == 4
        assert np.linalg.norm(phydyas.g) == pytest.approx(1.0)
        assert phydyas.g[0] == 0.0

    def test_even_symmetry(self, phydyas):
        assert phydyas.g[1] == pytest.approx(phydyas.g[255])
        assert_allclose(phydyas.g[1:], phydyas.g[1:][::-1], atol=1e-15)

    def test_seven_non_negligible_tones(self, phydyas):
        assert list(phydyas.significant_tones()) == [0, 1, 2, 3, 253, 254, 255]

    def test_frequency_samples(self, phydyas):
        mag = np.abs(phydyas.G)
        ratios = mag[[0, 1, 2, 3]] / mag[0]
        assert_allclose(ratios, [1.0, 0.97196, 0.70711, 0.23515], atol=1e-5)
        assert_allclose(mag[[1, 2, 3]], mag[[255, 254, 253]])
        assert ratios[1] ** 2 + ratios[3] ** 2 == pytest.approx(1.0)
        assert ratios[2] == pytest.approx(np.sqrt(2) / 2)

    def test_overlap_three(self):
        filt = design_phydyas(32, 3)
        assert filt.length == 96
        assert len(filt.significant_tones()) == 5

    def test_overlap_two(self):
        # g(0) is nonzero before zeroing for K = 2, so the spectrum is not sparse
        filt = design_phydyas(32, 2)
        assert filt.length == 64
        assert np.linalg.norm(filt.g) == pytest.approx(1.0)
        assert filt.P == 2

    @pytest.mark.parametrize("M,K", [(64, 5), (64, 1), (48, 4), (4, 4)])
    def test_unsupported_parameters(self, M, K):
        with pytest.raises(ConfigurationError):
            design_phydyas(M, K)

    def test_padded_spectrum_too_short(self, phydyas):
        with pytest.raises(ConfigurationError):
            phydyas.padded_spectrum(128)
        assert phydyas.padded_spectrum(512).shape == (512,)


class TestSpreadCoefficients:
    def test_origin_support(self, phydyas):
        coeffs = spread_coefficients(phydyas, 0, 0, 0)
        support = np.flatnonzero(np.abs(coeffs) > 1e-3 * np.abs(coeffs).max())
        assert list(support) == [0, 1, 2, 3, 253, 254, 255]
        assert_allclose(coeffs, phydyas.G / 256, atol=1e-15)

    def test_next_subchannel_shifts_by_k_tones(self, phydyas):
        base = np.abs(spread_coefficients(phydyas, 0, 0, 0))
        shifted = np.abs(spread_coefficients(phydyas, 1, 0, 0))
        assert_allclose(shifted, np.roll(base, 4), atol=1e-12)

    def test_delayed_pulse(self, phydyas):
        coeffs = spread_coefficients(phydyas, 0, 1, 0)
        delayed = np.concatenate([np.zeros(32), phydyas.g[:224]])
        assert_allclose(coeffs, 1j * np.fft.fft(delayed) / 256, atol=1e-12)

    def test_matches_direct_dft(self, phydyas):
        t = 3 * 32 + np.arange(256)
        direct = np.fft.fft(pulse(phydyas, 5, 2, t)) / 256
        assert_allclose(spread_coefficients(phydyas, 5, 2, 3), direct, atol=1e-10)

    def test_no_overlap_gives_zero(self, phydyas):
        assert not np.any(spread_coefficients(phydyas, 0, 20, 0))


class TestTransmuxResponse:
    def test_unit_gain_at_origin(self, phydyas):
        assert transmux_response(phydyas, 3, 4, 3, 4) == pytest.approx(1.0)

    def test_neighbours_are_imaginary_or_small(self, phydyas):
        m0, n0 = 10, 12
        for dm in (-1, 0, 1):
            for dn in range(-7, 8):
                if dm == 0 and dn == 0:
                    continue
                zeta = transmux_response(phydyas, m0 + dm, n0 + dn, m0, n0)
                if (dm * (2 * n0 + dn) + dm + dn) % 2:
                    assert abs(zeta.real) < 1e-10, (dm, dn)
                else:
                    assert abs(zeta.imag) < 1e-10, (dm, dn)
                    assert abs(zeta.real) < 2e-3, (dm, dn)

    def test_adjacent_subchannel_has_strong_imaginary_term(self, phydyas):
        zeta = transmux_response(phydyas, 11, 12, 10, 12)
        assert abs(zeta.imag) > 0.1

    def test_distant_subchannels_do_not_interact(self, phydyas):
        for dm in (2, 3, 5):
            assert abs(transmux_response(phydyas, 10 + dm, 12, 10, 12)) < 1e-10

    def test_energy_is_finite(self, phydyas):
        total = sum(
            abs(transmux_response(phydyas, m, n, 10, 12)) ** 2
            for m in range(7, 14)
            for n in range(5, 20)
        )
        assert 1.0 < total < 10.0
