"""
Tapped-delay-line Rayleigh MIMO channels and AWGN injection.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.signal import fftconvolve

from svdfbmc.core.config import load_module_values
from svdfbmc.core.errors import ConfigurationError
from svdfbmc.phy.modem import SampleStream

logger = logging.getLogger(__name__)

# 20 MHz sampling: 64 subcarriers at 312.5 kHz
SAMPLE_SPACING_NS = 50.0

# Maximum delay spread of the 802.11n channel models, in ns
MAX_DELAY_SPREAD_NS = {"D": 390.0, "E": 730.0, "F": 1050.0}

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]


@dataclass(frozen=True, eq=False)
class DelayProfile:
    """
    Power-delay profile on the sample grid.

    Attributes:
        name (str): Label
        delays (np.ndarray): Strictly increasing integer sample offsets starting at 0
        powers (np.ndarray): Tap powers summing to 1
    """

    name: str
    delays: np.ndarray
    powers: np.ndarray

    @property
    def num_taps(self) -> int:
        return len(self.delays)

    @property
    def last_delay(self) -> int:
        return int(self.delays[-1])

    @property
    def delays_ns(self) -> np.ndarray:
        return self.delays * SAMPLE_SPACING_NS


def _make_profile(name: str, delays_ns, powers) -> DelayProfile:
    delays = np.floor(np.asarray(delays_ns, dtype=float) / SAMPLE_SPACING_NS).astype(int)
    powers = np.asarray(powers, dtype=float)
    if delays.shape != powers.shape or delays.size == 0:
        raise ConfigurationError(f"Profile '{name}' needs one power per delay")
    if delays[0] != 0 or np.any(np.diff(delays) <= 0):
        raise ConfigurationError(
            f"Profile '{name}' delays must start at 0 and stay distinct on the "
            f"{SAMPLE_SPACING_NS:g} ns grid"
        )
    if np.any(powers < 0) or powers.sum() <= 0:
        raise ConfigurationError(f"Profile '{name}' powers must be nonnegative")
    return DelayProfile(name=name, delays=delays, powers=powers / powers.sum())


def preset_profile(model: str) -> DelayProfile:
    """
    Exponential power-delay profile matched to a channel model's delay spread.

    The profile has taps every 50 ns up to the model's maximum delay spread and
    an RMS delay spread of a quarter of it. "flat" is a single tap.

    Args:
        model (str): "D", "E", "F" or "flat"

    Returns:
        DelayProfile: Unit-power profile
    """
    if model == "flat":
        return DelayProfile(name="flat", delays=np.array([0]), powers=np.array([1.0]))
    if model not in MAX_DELAY_SPREAD_NS:
        raise ConfigurationError(f"No preset for channel model '{model}'")
    max_delay = MAX_DELAY_SPREAD_NS[model]
    delays_ns = np.arange(int(max_delay // SAMPLE_SPACING_NS) + 1) * SAMPLE_SPACING_NS
    rms = max_delay / 4.0
    return _make_profile(model, delays_ns, np.exp(-delays_ns / rms))


def load_profile(path: str) -> DelayProfile:
    """
    Read a profile from a ``NAME``, ``DELAYS_NS``, ``POWERS`` module file.

    Args:
        path (str): Profile file

    Returns:
        DelayProfile: Profile snapped down to the sample grid
    """
    values = load_module_values(path)
    try:
        profile = _make_profile(values.get("NAME", path), values["DELAYS_NS"], values["POWERS"])
    except KeyError as e:
        raise ConfigurationError(f"Profile file {path} is missing {e}")
    logger.info(f"Loaded delay profile '{profile.name}' with {profile.num_taps} taps")
    return profile


def profile_for(model: str, profile_file: Optional[str] = None) -> DelayProfile:
    """Preset profile for a model name, or the custom profile file."""
    if model == "custom":
        if not profile_file:
            raise ConfigurationError("Channel model 'custom' needs a profile file")
        return load_profile(profile_file)
    return preset_profile(model)


@dataclass(frozen=True, eq=False)
class ChannelFrequencyResponse:
    """
    One static MIMO channel realization.

    Attributes:
        taps (np.ndarray): (Nr, Nt, last_delay + 1) impulse response on the sample grid
        H (np.ndarray): (N, Nr, Nt) length-N DFT of the taps
    """

    taps: np.ndarray
    H: np.ndarray

    @property
    def num_tones(self) -> int:
        return self.H.shape[0]

    def subchannel_response(self, num_subchannels: int) -> np.ndarray:
        """
        Response at the subchannel centre frequencies.

        Args:
            num_subchannels (int): M, dividing the number of tones

        Returns:
            np.ndarray: (M, Nr, Nt)
        """
        return self.H[:: self.num_tones // num_subchannels]

    def adjacent_perturbation(self) -> np.ndarray:
        """Spectral norms ||H_{k+1} - H_k||_2 between neighbouring tones."""
        diff = np.diff(self.H, axis=0)
        return np.linalg.norm(diff, ord=2, axis=(1, 2))

    def apply(self, stream: SampleStream) -> SampleStream:
        """
        Convolve a transmit stream with the channel, truncated to its length.

        Args:
            stream (SampleStream): (Nt, T) samples

        Returns:
            SampleStream: (Nr, T) samples
        """
        x = np.asarray(stream.x)
        length = x.shape[1]
        y = fftconvolve(x[None, :, :], self.taps, axes=-1)
        return SampleStream(y.sum(axis=1)[:, :length])


def realize_channel(
    profile: DelayProfile, nr: int, nt: int, n_fft: int, seed: SeedLike = None
) -> ChannelFrequencyResponse:
    """
    Draw i.i.d. Rayleigh taps for every antenna pair.

    Args:
        profile (DelayProfile): Power-delay profile
        nr (int): Receive antennas
        nt (int): Transmit antennas
        n_fft (int): Number of tones of the frequency response
        seed: Seed or generator

    Returns:
        ChannelFrequencyResponse: Taps and per-tone matrices
    """
    if n_fft < 2 * profile.last_delay:
        raise ConfigurationError(
            f"{n_fft} tones cannot resolve a {profile.last_delay}-sample delay spread"
        )
    rng = np.random.default_rng(seed)
    shape = (nr, nt, profile.num_taps)
    gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    taps = np.zeros((nr, nt, profile.last_delay + 1), dtype=complex)
    taps[:, :, profile.delays] = gains * np.sqrt(profile.powers)
    H = np.transpose(np.fft.fft(taps, n_fft, axis=-1), (2, 0, 1))
    return ChannelFrequencyResponse(taps=taps, H=H)


def flat_channel(H0: np.ndarray, n_fft: int) -> ChannelFrequencyResponse:
    """
    Frequency-flat channel with the same matrix on every tone.

    Args:
        H0 (np.ndarray): (Nr, Nt) matrix
        n_fft (int): Number of tones

    Returns:
        ChannelFrequencyResponse: Single-tap channel
    """
    H0 = np.asarray(H0, dtype=complex)
    return ChannelFrequencyResponse(
        taps=H0[:, :, None].copy(), H=np.broadcast_to(H0, (n_fft,) + H0.shape).copy()
    )


def snr_to_noise_variance(
    snr_db: float, nt: int, sigma_a2: float = 1.0, sigma_h2: float = 1.0
) -> float:
    """
    Noise variance for SNR = Nt sigma_a^2 sigma_h^2 / sigma_n^2.

    Args:
        snr_db (float): SNR in dB, inf for a noiseless link
        nt (int): Transmit antennas
        sigma_a2 (float): Symbol power
        sigma_h2 (float): Channel power gain per antenna pair

    Returns:
        float: sigma_n^2
    """
    return float(nt * sigma_a2 * sigma_h2 / 10.0 ** (snr_db / 10.0))


def add_awgn(stream: SampleStream, noise_var: float, seed: SeedLike = None) -> SampleStream:
    """
    Add circular complex Gaussian noise of variance ``noise_var`` per sample.

    Args:
        stream (SampleStream): Received samples
        noise_var (float): Noise variance per sample and antenna
        seed: Seed or generator

    Returns:
        SampleStream: Noisy samples
    """
    if noise_var < 0:
        raise ConfigurationError(f"Negative noise variance {noise_var}")
    if noise_var == 0:
        return SampleStream(np.array(stream.x, copy=True))
    rng = np.random.default_rng(seed)
    shape = stream.x.shape
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return SampleStream(stream.x + np.sqrt(noise_var / 2) * noise)
