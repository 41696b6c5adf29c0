"""
PHYDYAS prototype filter and the transmultiplexer response of the filter bank.
"""

import logging
from dataclasses import dataclass

import numpy as np

from svdfbmc.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

# Tones with |G| below this fraction of the peak are treated as zero
NEGLIGIBLE_FRACTION = 1e-3


def _phydyas_frequency_samples(overlap: int) -> np.ndarray:
    """Frequency samples H_0..H_{K-1} of the PHYDYAS design, Nyquist-constrained."""
    if overlap == 2:
        return np.array([1.0, np.sqrt(2) / 2])
    if overlap == 3:
        h2 = (np.sqrt(7) - 1) / 4
        return np.array([1.0, h2 + 0.5, h2])
    if overlap == 4:
        s = (1 + np.sqrt(2)) / 2
        root = np.sqrt(2 - s * s)
        # |H1|^2 + |H3|^2 = 1, H2 = sqrt(2)/2
        return np.array([1.0, (s + root) / 2, np.sqrt(2) / 2, (s - root) / 2])
    raise ConfigurationError(f"PHYDYAS design not available for K={overlap}, use 2, 3 or 4")


@dataclass(frozen=True, eq=False)
class PrototypeFilter:
    """
    Prototype pulse of the filter bank.

    Attributes:
        M (int): Number of subchannels
        K (int): Overlapping factor
        P (int): One-sided count of non-negligible frequency tones
        g (np.ndarray): Real impulse response of length K*M, unit energy
        G (np.ndarray): Length-K*M DFT of g
    """

    M: int
    K: int
    P: int
    g: np.ndarray
    G: np.ndarray

    @property
    def length(self) -> int:
        return self.K * self.M

    def significant_tones(self) -> np.ndarray:
        """
        Tone indices (0..KM-1) where |G| exceeds the negligibility threshold.

        Returns:
            np.ndarray: Sorted tone indices
        """
        mag = np.abs(self.G)
        return np.flatnonzero(mag > NEGLIGIBLE_FRACTION * mag.max())

    def padded_spectrum(self, fft_size: int) -> np.ndarray:
        """
        Spectrum of the pulse zero-padded to ``fft_size`` samples.

        Args:
            fft_size (int): DFT length, at least K*M

        Returns:
            np.ndarray: Length ``fft_size`` DFT of g
        """
        if fft_size < self.length:
            raise ConfigurationError(
                f"FFT size {fft_size} is shorter than the pulse ({self.length})"
            )
        return np.fft.fft(self.g, fft_size)


def design_phydyas(M: int, K: int) -> PrototypeFilter:
    """
    Build the frequency-sampled PHYDYAS prototype filter.

    Args:
        M (int): Number of subchannels, a power of two not below 8
        K (int): Overlapping factor, 2, 3 or 4

    Returns:
        PrototypeFilter: Unit-energy filter with g(0) = 0

    Raises:
        ConfigurationError: For unsupported K or M
    """
    if M < 8 or M & (M - 1):
        raise ConfigurationError(f"M must be a power of two >= 8, got {M}")
    h = _phydyas_frequency_samples(K)

    i = np.arange(K * M)
    k = np.arange(1, K)
    signs = (-1.0) ** k
    g = h[0] + 2 * np.sum(
        (signs * h[1:])[:, None] * np.cos(2 * np.pi * np.outer(k, i) / (K * M)), axis=0
    )
    g[0] = 0.0
    g = g / np.linalg.norm(g)

    logger.debug(f"Designed PHYDYAS filter M={M} K={K}")
    return PrototypeFilter(M=M, K=K, P=K, g=g, G=np.fft.fft(g))


def pulse(filt: PrototypeFilter, m: int, n: int, t: np.ndarray) -> np.ndarray:
    """
    Samples of the modulated pulse g_{m,n} at absolute sample times t.

    g_{m,n}(t) = g(t - nM/2) exp(j2pi m t / M) exp(j pi (m+n) / 2), zero outside the pulse.

    Args:
        filt (PrototypeFilter): Prototype filter
        m (int): Subchannel index
        n (int): Half-symbol time index
        t (np.ndarray): Integer sample times

    Returns:
        np.ndarray: Complex pulse samples
    """
    t = np.asarray(t, dtype=np.int64)
    j = t - n * (filt.M // 2)
    inside = (j >= 0) & (j < filt.length)
    values = np.where(inside, filt.g[np.clip(j, 0, filt.length - 1)], 0.0)
    carrier = np.exp(2j * np.pi * ((m * t) % filt.M) / filt.M)
    return values * carrier * 1j ** ((m + n) % 4)


def spread_coefficients(
    filt: PrototypeFilter, m: int, n: int, n0: int, fft_size: int = None
) -> np.ndarray:
    """
    Spreading coefficients G_{m,n}^{(n0)}(k) of pulse (m, n) seen by window n0.

    The window covers samples n0*M/2 .. n0*M/2 + fft_size - 1; the result is the
    DFT of the pulse portion inside it, scaled by 1/fft_size so that an unscaled
    inverse DFT gives back the time samples.

    Args:
        filt (PrototypeFilter): Prototype filter
        m (int): Subchannel index
        n (int): Half-symbol time of the pulse
        n0 (int): Window index
        fft_size (int): DFT length, defaults to K*M

    Returns:
        np.ndarray: Length ``fft_size`` complex vector, all zero without overlap
    """
    size = fft_size or filt.length
    t = n0 * (filt.M // 2) + np.arange(size)
    return np.fft.fft(pulse(filt, m, n, t)) / size


def transmux_response(filt: PrototypeFilter, m: int, n: int, m0: int, n0: int) -> complex:
    """
    Transmultiplexer response, the inner product of pulses (m0, n0) and (m, n).

    Args:
        filt (PrototypeFilter): Prototype filter
        m (int): Subchannel of the interfering pulse
        n (int): Half-symbol time of the interfering pulse
        m0 (int): Subchannel of the reference pulse
        n0 (int): Half-symbol time of the reference pulse

    Returns:
        complex: zeta, 1 at the origin and imaginary or tiny elsewhere
    """
    half = filt.M // 2
    t = np.arange(min(n, n0) * half, max(n, n0) * half + filt.length)
    return complex(np.vdot(pulse(filt, m0, n0, t), pulse(filt, m, n, t)))
