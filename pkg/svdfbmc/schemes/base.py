"""
Base scheme classes and scheme manager for the compared MIMO links.
"""

import abc
import logging
from dataclasses import dataclass
from typing import List, Optional, Type

import numpy as np

from svdfbmc.core.config import SimConfig
from svdfbmc.core.errors import ConfigurationError
from svdfbmc.phy.channel import ChannelFrequencyResponse, snr_to_noise_variance

logger = logging.getLogger(__name__)

# Beamformer granularity of the compared systems
GRANULARITY_OFDM = "ofdm"
GRANULARITY_SUBCHANNEL = "subchannel"
GRANULARITY_TONE = "tone"
GRANULARITY_SCALAR = "scalar"


@dataclass(eq=False)
class LinkOutput:
    """
    Equalized QAM estimates of one frame.

    Attributes:
        symbols (np.ndarray): (L, M, Nq) complex estimates
        noise_var (np.ndarray): (L, M) post-equalizer complex noise variance
    """

    symbols: np.ndarray
    noise_var: np.ndarray


class BaseScheme(abc.ABC):
    """Base class for all link schemes"""

    name = ""
    granularity = ""
    smoothing = "none"
    uses_channel = True

    def __init__(self, config: SimConfig):
        """
        Initialize the base scheme.

        Args:
            config (SimConfig): Simulation configuration
        """
        self.config = config
        self.M = config.NUM_SUBCARRIERS
        self.L = config.NUM_STREAMS
        self.active = np.asarray(config.active_mask(), dtype=bool)

    @property
    def fft_size(self) -> int:
        """Tones at which the channel response is needed."""
        return self.M

    def noise_variance(self, snr_db: float) -> float:
        """
        Noise variance per sample for an SNR point.

        Args:
            snr_db (float): SNR in dB

        Returns:
            float: sigma_n^2
        """
        return snr_to_noise_variance(snr_db, self.config.NUM_TX)

    @abc.abstractmethod
    def link(
        self,
        qam: np.ndarray,
        channel: Optional[ChannelFrequencyResponse],
        noise_var: float,
        rng: Optional[np.random.Generator] = None,
        phase_rng: Optional[np.random.Generator] = None,
    ) -> LinkOutput:
        """
        Send one frame of QAM symbols through the channel and equalize it.

        Args:
            qam (np.ndarray): (L, M, Nq) symbols, zero on inactive subchannels
            channel (Optional[ChannelFrequencyResponse]): Channel realization
            noise_var (float): Noise variance per sample
            rng (Optional[np.random.Generator]): Noise generator
            phase_rng (Optional[np.random.Generator]): Phases of unsmoothed SVDs

        Returns:
            LinkOutput: Estimates and their noise variance
        """
        pass


class SchemeManager:
    """Manages the creation of the different link schemes"""

    def __init__(self):
        """Initialize the scheme manager."""
        # Schemes will be registered by register_schemes
        self.scheme_types = {}

    def register_scheme(self, name: str, scheme_class: Type[BaseScheme]):
        """
        Register a scheme type.

        Args:
            name (str): Name of the scheme
            scheme_class (Type[BaseScheme]): Scheme class
        """
        self.scheme_types[name] = scheme_class

    def get_scheme_types(self) -> List[str]:
        """
        Return a list of available scheme names.

        Returns:
            List[str]: List of scheme names
        """
        return list(self.scheme_types.keys())

    def scheme_for(self, granularity: str, smoothing: str = "none") -> str:
        """
        Name of the registered scheme with a given beamformer granularity and smoothing.

        Args:
            granularity (str): "ofdm", "subchannel", "tone" or "scalar"
            smoothing (str): "none", "ortho" or "phase"

        Returns:
            str: Scheme name

        Raises:
            ConfigurationError: If no scheme matches
        """
        fallback = None
        for name, scheme_class in self.scheme_types.items():
            if scheme_class.granularity != granularity:
                continue
            if scheme_class.smoothing == smoothing:
                return name
            # the proposed scheme takes its smoothing method from the config
            if scheme_class.smoothing == "config" and smoothing != "none":
                fallback = name
        if fallback:
            return fallback
        raise ConfigurationError(
            f"No scheme with {granularity} granularity and '{smoothing}' smoothing"
        )

    def create_scheme(self, scheme_type: str, config: SimConfig) -> BaseScheme:
        """
        Create a scheme of the specified type.

        Args:
            scheme_type (str): Type of scheme to create
            config (SimConfig): Simulation configuration

        Returns:
            BaseScheme: Initialized scheme object
        """
        if scheme_type not in self.scheme_types:
            raise ConfigurationError(
                f"Scheme '{scheme_type}' not found, available: {', '.join(self.scheme_types)}"
            )
        return self.scheme_types[scheme_type](config)
