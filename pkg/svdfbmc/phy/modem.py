"""
Frequency-spreading FBMC/OQAM modem with per-tone MIMO beamforming.

Each real OQAM symbol is spread over the tones of a length-N DFT (N = K*M for the
4M receiver, 2K*M for the 8M receiver), beamformed tone by tone and sent through
an unscaled IFFT whose outputs are overlap-added every M/2 samples. The receiver
slides a length-N window by M/2, applies the DFT, receive beamformer and ZF gain
per tone, and despreads with the conjugate spreading coefficients.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from svdfbmc.core.errors import ConfigurationError, ShapeError
from svdfbmc.phy.prototype_filter import NEGLIGIBLE_FRACTION, PrototypeFilter
from svdfbmc.phy.smoothing import BeamformerSet

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class PamGrid:
    """
    Real OQAM symbols indexed (stream, subchannel, half-symbol time).

    Attributes:
        values (np.ndarray): (L, M, Nsym) real symbols
        active (np.ndarray): (M,) True for data subchannels
    """

    values: np.ndarray
    active: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3:
            raise ShapeError(f"PAM grid must be (L, M, Nsym), got {self.values.shape}")
        if self.active is None:
            self.active = np.ones(self.values.shape[1], dtype=bool)
        self.active = np.asarray(self.active, dtype=bool)
        self.values[:, ~self.active, :] = 0.0

    @property
    def num_streams(self) -> int:
        return self.values.shape[0]

    @property
    def num_subchannels(self) -> int:
        return self.values.shape[1]

    @property
    def num_symbols(self) -> int:
        return self.values.shape[2]


@dataclass(eq=False)
class SampleStream:
    """Complex baseband samples, one row per antenna, at interval T/M."""

    x: np.ndarray

    @property
    def num_antennas(self) -> int:
        return self.x.shape[0]

    def __len__(self) -> int:
        return self.x.shape[1]


@dataclass(eq=False)
class ToneFrame:
    """Beamformed tone values b_n(k) of half-symbol time n, shape (Nt, N)."""

    n: int
    b: np.ndarray


def oqam_stagger(qam: np.ndarray, active: Optional[np.ndarray] = None) -> PamGrid:
    """
    Split QAM symbols into real and imaginary PAM symbols half a period apart.

    Args:
        qam (np.ndarray): (L, M, Nq) complex QAM symbols
        active (Optional[np.ndarray]): (M,) data subchannel mask

    Returns:
        PamGrid: 2*Nq half-times with a[2n] = Re s[n], a[2n+1] = Im s[n]
    """
    qam = np.asarray(qam, dtype=complex)
    values = np.empty(qam.shape[:-1] + (2 * qam.shape[-1],))
    values[..., 0::2] = qam.real
    values[..., 1::2] = qam.imag
    return PamGrid(values, active)


def oqam_destagger(pam) -> np.ndarray:
    """
    Recombine pairs of PAM symbols into QAM symbols.

    Args:
        pam: PamGrid or real array with half-times on the last axis

    Returns:
        np.ndarray: Complex symbols s[n] = a[2n] + j a[2n+1]
    """
    values = pam.values if isinstance(pam, PamGrid) else np.asarray(pam)
    if values.shape[-1] % 2:
        raise ShapeError(f"Odd number of half-times ({values.shape[-1]})")
    return values[..., 0::2] + 1j * values[..., 1::2]


def cyclic_hull(support: np.ndarray) -> np.ndarray:
    """
    Smallest cyclic run of indices covering every True entry.

    The run starts right after the largest cyclic gap and is returned in
    ascending (wrapping) order.

    Args:
        support (np.ndarray): Boolean mask

    Returns:
        np.ndarray: Indices of the run
    """
    size = len(support)
    idx = np.flatnonzero(support)
    if idx.size == 0:
        return idx
    gaps = (np.roll(idx, -1) - idx) % size
    if idx.size == size:
        return np.arange(size)
    widest = int(np.argmax(gaps))
    start = idx[(widest + 1) % idx.size]
    length = (idx[widest] - start) % size + 1
    return (start + np.arange(length)) % size


class FsFbmcModem:
    """FS-FBMC transmitter and receiver for a fixed filter, FFT size and active layout."""

    def __init__(
        self,
        filt: PrototypeFilter,
        fft_size: Optional[int] = None,
        active: Optional[Sequence[bool]] = None,
    ):
        """
        Initialize the modem.

        Args:
            filt (PrototypeFilter): Prototype filter
            fft_size (Optional[int]): DFT length, a multiple of M not below K*M
            active (Optional[Sequence[bool]]): Data subchannel mask, all active by default
        """
        self.filt = filt
        self.M = filt.M
        self.N = fft_size or filt.length
        if self.N % self.M or self.N < filt.length:
            raise ConfigurationError(
                f"FFT size {self.N} must be a multiple of M={self.M} and at least {filt.length}"
            )
        self.hop = self.M // 2
        self.active = (
            np.ones(self.M, dtype=bool) if active is None else np.asarray(active, dtype=bool)
        )
        if self.active.shape != (self.M,):
            raise ShapeError(f"Active mask must have {self.M} entries")

        base = filt.padded_spectrum(self.N) / self.N
        shift = self.N // self.M
        rows = np.stack([np.roll(base, m * shift) for m in range(self.M)])
        significant = np.abs(rows[self.active]) > NEGLIGIBLE_FRACTION * np.abs(base).max()
        self.sweep_tones = cyclic_hull(significant.any(axis=0))
        self.tone_mask = np.zeros(self.N, dtype=bool)
        self.tone_mask[self.sweep_tones] = True
        self.rows = rows * self.tone_mask

        m = np.arange(self.M)
        # OQAM phase (-1)^(mn) j^(m+n) depends on n mod 4 only
        self._theta = np.stack(
            [(-1.0) ** (m * n) * 1j ** ((m + n) % 4) for n in range(4)]
        )
        logger.debug(
            f"FS-FBMC modem M={self.M} N={self.N}, {len(self.sweep_tones)} beamformed tones"
        )

    def theta(self, num_symbols: int) -> np.ndarray:
        """
        OQAM phase factors for half-times 0..num_symbols-1.

        Returns:
            np.ndarray: (M, num_symbols) unit-modulus factors
        """
        return self._theta[np.arange(num_symbols) % 4].T

    def stream_length(self, num_symbols: int) -> int:
        """Samples produced by ``num_symbols`` half-symbol times."""
        return (num_symbols - 1) * self.hop + self.N

    def _spread(self, weights: np.ndarray) -> np.ndarray:
        """(A, M, Nsym) complex amplitudes to (Nsym, A, N) tone values."""
        w = weights * self.theta(weights.shape[-1])[None]
        return np.einsum("amn,mk->nak", w, self.rows)

    def _overlap_add(self, frames: np.ndarray) -> SampleStream:
        num_symbols, antennas, _ = frames.shape
        blocks = np.fft.ifft(frames, axis=-1) * self.N
        x = np.zeros((antennas, self.stream_length(num_symbols)), dtype=complex)
        for n in range(num_symbols):
            x[:, n * self.hop : n * self.hop + self.N] += blocks[n]
        return SampleStream(x)

    def _check_coverage(self, beamformers: BeamformerSet) -> None:
        if beamformers.num_tones != self.N:
            raise ConfigurationError(
                f"Beamformers cover {beamformers.num_tones} tones, modem uses {self.N}"
            )
        missing = np.setdiff1d(self.sweep_tones, beamformers.tones)
        if missing.size:
            raise ConfigurationError(f"No beamformer at {missing.size} needed tones")

    def _beamformed(self, pam: PamGrid, beamformers: BeamformerSet) -> np.ndarray:
        self._check_coverage(beamformers)
        values = np.where(self.active[None, :, None], pam.values, 0.0)
        spread = self._spread(values)
        return np.einsum("kal,nlk->nak", beamformers.V, spread)

    def tone_frames(self, pam: PamGrid, beamformers: BeamformerSet) -> List[ToneFrame]:
        """
        Beamformed tone values for every half-symbol time.

        Args:
            pam (PamGrid): Symbols to send
            beamformers (BeamformerSet): Transmit beamformers

        Returns:
            List[ToneFrame]: One frame per half-time
        """
        frames = self._beamformed(pam, beamformers)
        return [ToneFrame(n=n, b=frames[n]) for n in range(frames.shape[0])]

    def modulate(self, pam: PamGrid, beamformers: BeamformerSet) -> SampleStream:
        """
        Spread, beamform per tone, IFFT and overlap-add.

        Args:
            pam (PamGrid): (L, M, Nsym) symbols
            beamformers (BeamformerSet): Transmit beamformers with L streams

        Returns:
            SampleStream: (Nt, (Nsym-1)*M/2 + N) samples
        """
        return self._overlap_add(self._beamformed(pam, beamformers))

    def synthesize(self, grid: np.ndarray) -> SampleStream:
        """
        Spread complex per-antenna amplitudes without tone-level beamforming.

        Args:
            grid (np.ndarray): (A, M, Nsym) complex amplitudes

        Returns:
            SampleStream: (A, samples)
        """
        grid = np.asarray(grid, dtype=complex) * self.active[None, :, None]
        return self._overlap_add(self._spread(grid))

    def _window_spectra(self, y: SampleStream, num_symbols: Optional[int]) -> np.ndarray:
        x = np.asarray(y.x)
        if num_symbols is None:
            num_symbols = max((x.shape[1] - self.N) // self.hop + 1, 0)
        needed = self.stream_length(num_symbols)
        if x.shape[1] < needed:
            x = np.pad(x, ((0, 0), (0, needed - x.shape[1])))
        windows = sliding_window_view(x, self.N, axis=-1)[:, :: self.hop][:, :num_symbols]
        return np.fft.fft(windows, axis=-1) / self.N

    def _despread(self, tones: np.ndarray) -> np.ndarray:
        """(Nsym, X, N) tone values to (X, M, Nsym) symbol estimates."""
        est = np.einsum("mk,nxk->xmn", self.rows.conj(), tones) * self.N
        est *= np.conj(self.theta(tones.shape[0]))[None]
        est[:, ~self.active, :] = 0.0
        return est

    def demodulate(
        self,
        y: SampleStream,
        beamformers: BeamformerSet,
        num_symbols: Optional[int] = None,
    ) -> Tuple[np.ndarray, PamGrid]:
        """
        Window, DFT, receive beamforming, ZF and despreading.

        Args:
            y (SampleStream): (Nr, samples) received samples
            beamformers (BeamformerSet): Receive beamformers and ZF gains
            num_symbols (Optional[int]): Half-times to recover, inferred from length

        Returns:
            Tuple[np.ndarray, PamGrid]: complex estimates (L, M, Nsym) and their real part
        """
        self._check_coverage(beamformers)
        spectra = self._window_spectra(y, num_symbols)
        z = np.einsum("kal,ank->nlk", beamformers.U.conj(), spectra)
        z = z * beamformers.E.T[None]
        est = self._despread(z)
        return est, PamGrid(est.real, self.active)

    def analyze(self, y: SampleStream, num_symbols: Optional[int] = None) -> np.ndarray:
        """
        Despread every antenna separately, without beamforming or equalization.

        Args:
            y (SampleStream): (A, samples) samples
            num_symbols (Optional[int]): Half-times to recover

        Returns:
            np.ndarray: (A, M, Nsym) complex matched-filter outputs
        """
        spectra = self._window_spectra(y, num_symbols)
        return self._despread(np.transpose(spectra, (1, 0, 2)))
