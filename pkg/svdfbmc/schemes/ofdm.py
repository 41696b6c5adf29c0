"""
SVD-OFDM reference link with cyclic prefix.
"""

import logging
from typing import Optional

import numpy as np

from svdfbmc.core.config import SimConfig
from svdfbmc.phy.channel import ChannelFrequencyResponse, add_awgn
from svdfbmc.phy.modem import SampleStream
from svdfbmc.phy.smoothing import SMOOTHING_NONE, BeamformerSet, smooth_sweep
from svdfbmc.schemes.base import GRANULARITY_OFDM, BaseScheme, LinkOutput

logger = logging.getLogger(__name__)


def ofdm_beamformers(channel: ChannelFrequencyResponse, config: SimConfig) -> BeamformerSet:
    """Independent SVD beamformers on every active subchannel."""
    H = channel.subchannel_response(config.NUM_SUBCARRIERS)
    return smooth_sweep(
        H,
        sorted(config.ACTIVE_SUBCHANNELS),
        config.NUM_STREAMS,
        SMOOTHING_NONE,
        zf_floor=config.ZF_FLOOR,
    )


def ofdm_svd_link(
    qam: np.ndarray,
    channel: ChannelFrequencyResponse,
    config: SimConfig,
    noise_var: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> LinkOutput:
    """
    CP-OFDM with per-subchannel SVD precoding, receive combining and ZF.

    Args:
        qam (np.ndarray): (L, M, Nq) QAM symbols
        channel (ChannelFrequencyResponse): Channel realization
        config (SimConfig): Numerology and stream count
        noise_var (float): Noise variance per sample
        rng (Optional[np.random.Generator]): Noise generator

    Returns:
        LinkOutput: (L, M, Nq) estimates and per-subchannel noise variance
    """
    M = config.NUM_SUBCARRIERS
    cp = config.CP_LENGTH
    active = np.asarray(config.active_mask(), dtype=bool)
    bf = ofdm_beamformers(channel, config)

    grid = np.einsum("mal,lmq->amq", bf.V, np.asarray(qam, dtype=complex))
    grid[:, ~active, :] = 0.0
    symbols = np.fft.ifft(grid, axis=1) * np.sqrt(M)
    symbols = np.concatenate([symbols[:, M - cp :, :], symbols], axis=1)
    antennas, block, num_symbols = symbols.shape
    tx = SampleStream(np.transpose(symbols, (0, 2, 1)).reshape(antennas, -1))

    rx = add_awgn(channel.apply(tx), noise_var, rng)
    blocks = rx.x.reshape(rx.num_antennas, num_symbols, block)[:, :, cp:]
    spectra = np.fft.fft(blocks, axis=-1) / np.sqrt(M)

    est = np.einsum("mal,aqm->lmq", bf.U.conj(), spectra) * bf.E.T[:, :, None]
    est[:, ~active, :] = 0.0
    return LinkOutput(symbols=est, noise_var=noise_var * bf.E.T ** 2)


class OfdmScheme(BaseScheme):
    """SVD-OFDM baseline"""

    name = "ofdm"
    granularity = GRANULARITY_OFDM

    def link(self, qam, channel, noise_var, rng=None, phase_rng=None) -> LinkOutput:
        return ofdm_svd_link(qam, channel, self.config, noise_var, rng)
