"""
Scalar AWGN link that bypasses the MIMO channel and the waveform.
"""

import numpy as np

from svdfbmc.phy.channel import snr_to_noise_variance
from svdfbmc.schemes.base import GRANULARITY_SCALAR, BaseScheme, LinkOutput


class AwgnScheme(BaseScheme):
    """Calibration link: every QAM symbol sees independent noise of variance 1/SNR"""

    name = "awgn"
    granularity = GRANULARITY_SCALAR
    uses_channel = False

    def noise_variance(self, snr_db: float) -> float:
        return snr_to_noise_variance(snr_db, 1)

    def link(self, qam, channel, noise_var, rng=None, phase_rng=None) -> LinkOutput:
        qam = np.asarray(qam, dtype=complex)
        rng = np.random.default_rng(rng)
        noise = rng.standard_normal(qam.shape) + 1j * rng.standard_normal(qam.shape)
        symbols = qam + np.sqrt(noise_var / 2) * noise
        symbols[:, ~self.active, :] = 0.0
        return LinkOutput(
            symbols=symbols, noise_var=np.full(qam.shape[:2], float(noise_var))
        )
