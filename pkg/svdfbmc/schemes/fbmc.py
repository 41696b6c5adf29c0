"""
SVD-beamformed FS-FBMC links at subchannel and at tone granularity.
"""

import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from svdfbmc.core.config import SimConfig
from svdfbmc.phy.channel import ChannelFrequencyResponse, add_awgn
from svdfbmc.phy.modem import (
    FsFbmcModem,
    PamGrid,
    cyclic_hull,
    oqam_destagger,
    oqam_stagger,
)
from svdfbmc.phy.prototype_filter import design_phydyas
from svdfbmc.phy.smoothing import (
    SMOOTHING_NONE,
    SMOOTHING_ORTHO,
    BeamformerSet,
    smooth_sweep,
)
from svdfbmc.schemes.base import (
    GRANULARITY_SUBCHANNEL,
    GRANULARITY_TONE,
    BaseScheme,
    LinkOutput,
)

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def _cached_modem(M: int, K: int, fft_size: int, active: Tuple[bool, ...]) -> FsFbmcModem:
    return FsFbmcModem(design_phydyas(M, K), fft_size, np.array(active))


def fbmc_modem(config: SimConfig) -> FsFbmcModem:
    """
    Modem for a configuration, shared between calls with the same numerology.

    Args:
        config (SimConfig): Simulation configuration

    Returns:
        FsFbmcModem: Modem instance
    """
    return _cached_modem(
        config.NUM_SUBCARRIERS, config.OVERLAP, config.fft_size, tuple(config.active_mask())
    )


def subchannel_beamformers(
    channel: ChannelFrequencyResponse,
    config: SimConfig,
    smoothing: str,
    phase_rng: Optional[np.random.Generator] = None,
) -> BeamformerSet:
    """
    Beamformers at the subchannel centre frequencies.

    Subchannels are swept across the cyclic hull of the active layout, so the
    smoothed variant runs across inactive subchannels inside the band as well.
    """
    M = config.NUM_SUBCARRIERS
    order = cyclic_hull(np.asarray(config.active_mask(), dtype=bool))
    return smooth_sweep(
        channel.subchannel_response(M),
        order,
        config.NUM_STREAMS,
        smoothing,
        n_iter=config.N_ITER,
        closeness_threshold=config.CLOSENESS_THRESHOLD,
        zf_floor=config.ZF_FLOOR,
        phase_rng=phase_rng,
    )


def tone_beamformers(
    channel: ChannelFrequencyResponse,
    config: SimConfig,
    smoothing: str,
    modem: Optional[FsFbmcModem] = None,
    phase_rng: Optional[np.random.Generator] = None,
) -> BeamformerSet:
    """Beamformers on every FS-FBMC tone in the modem's sweep order."""
    modem = modem or fbmc_modem(config)
    return smooth_sweep(
        channel.H,
        modem.sweep_tones,
        config.NUM_STREAMS,
        smoothing,
        n_iter=config.N_ITER,
        closeness_threshold=config.CLOSENESS_THRESHOLD,
        zf_floor=config.ZF_FLOOR,
        phase_rng=phase_rng,
    )


def subchannel_fbmc_link(
    values: np.ndarray,
    channel: ChannelFrequencyResponse,
    config: SimConfig,
    smoothing: str = SMOOTHING_NONE,
    noise_var: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    phase_rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, BeamformerSet]:
    """
    FS-FBMC where each symbol is precoded with its own subchannel's beamformer.

    Precoding happens before spreading and receive combining after per-antenna
    despreading, so all spread tones of a symbol share one beamformer.

    Args:
        values (np.ndarray): (L, M, Nsym) real PAM symbols
        channel (ChannelFrequencyResponse): Channel realization with config.fft_size tones
        config (SimConfig): Simulation configuration
        smoothing (str): "none" or a smoothing method across subchannels
        noise_var (float): Noise variance per sample
        rng (Optional[np.random.Generator]): Noise generator
        phase_rng (Optional[np.random.Generator]): Phases of unsmoothed SVDs

    Returns:
        Tuple[np.ndarray, BeamformerSet]: (L, M, Nsym) complex estimates and the
        per-subchannel beamformers
    """
    modem = fbmc_modem(config)
    bf = subchannel_beamformers(channel, config, smoothing, phase_rng)
    grid = np.einsum("mal,lmn->amn", bf.V, np.asarray(values, dtype=float))
    rx = add_awgn(channel.apply(modem.synthesize(grid)), noise_var, rng)
    per_antenna = modem.analyze(rx, values.shape[-1])
    est = np.einsum("mal,amn->lmn", bf.U.conj(), per_antenna) * bf.E.T[:, :, None]
    est[:, ~modem.active, :] = 0.0
    return est, bf


def tone_fbmc_link(
    values: np.ndarray,
    channel: ChannelFrequencyResponse,
    config: SimConfig,
    smoothing: str = SMOOTHING_ORTHO,
    noise_var: float = 0.0,
    rng: Optional[np.random.Generator] = None,
    phase_rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, BeamformerSet]:
    """
    FS-FBMC with beamforming and ZF on every tone.

    Args:
        values (np.ndarray): (L, M, Nsym) real PAM symbols
        channel (ChannelFrequencyResponse): Channel realization with config.fft_size tones
        config (SimConfig): Simulation configuration
        smoothing (str): "none", "phase" or "ortho"
        noise_var (float): Noise variance per sample
        rng (Optional[np.random.Generator]): Noise generator
        phase_rng (Optional[np.random.Generator]): Phases of unsmoothed SVDs

    Returns:
        Tuple[np.ndarray, BeamformerSet]: (L, M, Nsym) complex estimates and the
        per-tone beamformers
    """
    modem = fbmc_modem(config)
    bf = tone_beamformers(channel, config, smoothing, modem, phase_rng)
    pam = PamGrid(np.array(values, dtype=float), modem.active)
    rx = add_awgn(channel.apply(modem.modulate(pam, bf)), noise_var, rng)
    est, _ = modem.demodulate(rx, bf, values.shape[-1])
    return est, bf


class FbmcScheme(BaseScheme):
    """FS-FBMC scheme working on real OQAM symbols"""

    def __init__(self, config: SimConfig):
        super().__init__(config)
        self.modem = fbmc_modem(config)

    @property
    def fft_size(self) -> int:
        return self.config.fft_size

    @property
    def smoothing_method(self) -> str:
        return self.smoothing

    def pam_link(
        self,
        values: np.ndarray,
        channel: ChannelFrequencyResponse,
        noise_var: float = 0.0,
        rng: Optional[np.random.Generator] = None,
        phase_rng: Optional[np.random.Generator] = None,
    ) -> Tuple[np.ndarray, BeamformerSet]:
        """
        Complex estimates of real PAM symbols sent through the channel.

        Args:
            values (np.ndarray): (L, M, Nsym) PAM symbols
            channel (ChannelFrequencyResponse): Channel realization
            noise_var (float): Noise variance per sample
            rng (Optional[np.random.Generator]): Noise generator
            phase_rng (Optional[np.random.Generator]): Phases of unsmoothed SVDs

        Returns:
            Tuple[np.ndarray, BeamformerSet]: Estimates and beamformers used
        """
        link = tone_fbmc_link if self.granularity == GRANULARITY_TONE else subchannel_fbmc_link
        return link(
            values,
            channel,
            self.config,
            self.smoothing_method,
            noise_var,
            rng,
            self.svd_phase_rng(phase_rng),
        )

    def svd_phase_rng(
        self, phase_rng: Optional[np.random.Generator]
    ) -> Optional[np.random.Generator]:
        """The phase generator to use, None when config.SVD_PHASE is "pinned"."""
        return phase_rng if self.config.SVD_PHASE == "random" else None

    def link(self, qam, channel, noise_var, rng=None, phase_rng=None) -> LinkOutput:
        values = oqam_stagger(qam, self.active).values
        est, bf = self.pam_link(values, channel, noise_var, rng, phase_rng)
        symbols = oqam_destagger(est.real)

        # noise seen at each subchannel's centre tone
        if self.granularity == GRANULARITY_TONE:
            centre = bf.E[np.arange(self.M) * (self.fft_size // self.M)]
        else:
            centre = bf.E
        return LinkOutput(symbols=symbols, noise_var=noise_var * centre.T ** 2)


class SubchannelScheme(FbmcScheme):
    """Basic subchannel-level SVD-FBMC"""

    name = "sc"
    granularity = GRANULARITY_SUBCHANNEL
    smoothing = SMOOTHING_NONE


class SmoothedSubchannelScheme(FbmcScheme):
    """Subchannel-level SVD-FBMC with orthogonal iteration across subchannels"""

    name = "sc-smooth"
    granularity = GRANULARITY_SUBCHANNEL
    smoothing = SMOOTHING_ORTHO


class FinerScheme(FbmcScheme):
    """Tone-level SVD-FS-FBMC without smoothing"""

    name = "finer"
    granularity = GRANULARITY_TONE
    smoothing = SMOOTHING_NONE


class ProposedScheme(FbmcScheme):
    """Tone-level SVD-FS-FBMC with smoothed beamformers"""

    name = "proposed"
    granularity = GRANULARITY_TONE
    smoothing = "config"

    @property
    def smoothing_method(self) -> str:
        return self.config.SMOOTHING_METHOD
