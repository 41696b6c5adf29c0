"""
Monte Carlo BER sweeps, beamformer smoothness histograms and interference probes.
"""

import os
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from svdfbmc.core.config import SimConfig, write_config_module
from svdfbmc.core.errors import ConfigurationError
from svdfbmc.core.utils import Utils
from svdfbmc.phy.channel import (
    ChannelFrequencyResponse,
    flat_channel,
    profile_for,
    realize_channel,
)
from svdfbmc.phy.coding import CodeConfig, decode_frame, encode_frame, frame_message_length
from svdfbmc.phy.modem import FsFbmcModem, PamGrid, oqam_stagger
from svdfbmc.phy.qam import qam_demap, qam_map
from svdfbmc.phy.smoothing import BeamformerSet, smooth_sweep
from svdfbmc.schemes import BaseScheme, FbmcScheme, default_manager
from svdfbmc.schemes.base import GRANULARITY_TONE
from svdfbmc.schemes.fbmc import fbmc_modem, tone_beamformers

logger = logging.getLogger(__name__)

# Distances of unit-norm L-column beamformers stay below 2*sqrt(L)
DEFAULT_DISTANCE_EDGES = np.round(np.arange(0.0, 3.01, 0.1), 10)


@dataclass
class BerRecord:
    """One SNR point of a BER sweep."""

    config_digest: str
    system: str
    snr_db: float
    frames: int
    bits_simulated: int
    bit_errors: int
    ber: float
    wilson_half_width: float

    @classmethod
    def header(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> Tuple:
        return astuple(self)


# Schemes keyed by config digest, reused across frames of a process
_SCHEMES: Dict[str, BaseScheme] = {}


def build_scheme(config: SimConfig) -> BaseScheme:
    """
    Validate a configuration and create its scheme.

    Args:
        config (SimConfig): Simulation configuration

    Returns:
        BaseScheme: Scheme for config.SYSTEM
    """
    config.validate()
    key = config.digest()
    if key not in _SCHEMES:
        _SCHEMES[key] = default_manager().create_scheme(config.SYSTEM, config)
    return _SCHEMES[key]


def frame_layout(config: SimConfig) -> Dict[str, int]:
    """
    Bit budget of one frame.

    Returns:
        Dict[str, int]: symbols, coded_bits and message_bits per frame
    """
    active = len(set(config.ACTIVE_SUBCHANNELS))
    symbols = config.NUM_STREAMS * active * config.SYMBOLS_PER_FRAME
    coded = symbols * config.bits_per_symbol
    message = frame_message_length(coded, code_config(config)) if config.CODING else coded
    return {"symbols": symbols, "coded_bits": coded, "message_bits": message}


def code_config(config: SimConfig) -> CodeConfig:
    return CodeConfig(interleaver_seed=config.INTERLEAVER_SEED)


def _place(symbols: np.ndarray, config: SimConfig) -> np.ndarray:
    """Fill (L, active, Nq) data positions of an (L, M, Nq) grid."""
    active = np.asarray(config.active_mask(), dtype=bool)
    grid = np.zeros(
        (config.NUM_STREAMS, config.NUM_SUBCARRIERS, config.SYMBOLS_PER_FRAME), dtype=complex
    )
    grid[:, active, :] = symbols.reshape(config.NUM_STREAMS, active.sum(), -1)
    return grid


def _frame_inputs(
    config: SimConfig, scheme: BaseScheme, gens: Dict[str, np.random.Generator]
) -> Tuple[np.ndarray, np.ndarray, Optional[ChannelFrequencyResponse]]:
    """Message bits, placed QAM grid and channel realization of one trial."""
    layout = frame_layout(config)
    message = gens["bits"].integers(0, 2, layout["message_bits"], dtype=np.uint8)
    coded = encode_frame(message, code_config(config)) if config.CODING else message
    qam = _place(qam_map(coded, config.MODULATION), config)

    channel = None
    if scheme.uses_channel:
        profile = profile_for(config.CHANNEL_MODEL, config.CHANNEL_PROFILE_FILE)
        channel = realize_channel(
            profile, config.NUM_RX, config.NUM_TX, scheme.fft_size, gens["channel"]
        )
    return message, qam, channel


def run_frame(
    config: SimConfig, snr_index: int, frame_index: int, scheme: Optional[BaseScheme] = None
) -> Tuple[int, int]:
    """
    Simulate one frame at one SNR point.

    Args:
        config (SimConfig): Simulation configuration
        snr_index (int): Index into config.SNR_GRID_DB
        frame_index (int): Frame counter within the SNR point

    Returns:
        Tuple[int, int]: (bit errors, message bits)
    """
    scheme = scheme or build_scheme(config)
    gens = Utils.trial_generators(config.MASTER_SEED, snr_index, frame_index)
    code = code_config(config)
    message, qam, channel = _frame_inputs(config, scheme, gens)

    noise_var = scheme.noise_variance(config.SNR_GRID_DB[snr_index])
    out = scheme.link(qam, channel, noise_var, gens["noise"], gens["phase"])

    active = np.asarray(config.active_mask(), dtype=bool)
    received = out.symbols[:, active, :].ravel()
    per_symbol = np.repeat(out.noise_var[:, active].ravel(), config.SYMBOLS_PER_FRAME)
    llrs = qam_demap(received, per_symbol, config.MODULATION)
    decided = decode_frame(llrs, code) if config.CODING else (llrs < 0).astype(np.uint8)
    return int(np.count_nonzero(decided != message)), int(message.size)


def _frame_task(args: Tuple[SimConfig, int, int]) -> Tuple[int, int]:
    config, snr_index, frame_index = args
    return run_frame(config, snr_index, frame_index)


def run_ber_sweep(config: SimConfig, workers: Optional[int] = None) -> List[BerRecord]:
    """
    BER over the SNR grid of a configuration.

    Frames run in batches of MIN_FRAMES and the stopping rule is only checked
    between batches, so the frame count of a point never depends on the worker
    count. A point can therefore run up to MIN_FRAMES - 1 frames past the frame
    that reached MIN_BIT_ERRORS.

    Args:
        config (SimConfig): Simulation configuration
        workers (Optional[int]): Worker processes, config.WORKERS by default

    Returns:
        List[BerRecord]: One record per SNR point
    """
    scheme = build_scheme(config)
    workers = workers or config.WORKERS
    digest = config.digest()
    batch = max(1, min(config.MIN_FRAMES, config.FRAMES_PER_POINT))
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    records = []

    try:
        for snr_index, snr_db in enumerate(config.SNR_GRID_DB):
            frames = errors = bits = 0
            while True:
                stop = min(frames + batch, config.FRAMES_PER_POINT)
                tasks = [(config, snr_index, f) for f in range(frames, stop)]
                if executor:
                    results = list(executor.map(_frame_task, tasks))
                else:
                    results = [run_frame(c, s, f, scheme) for c, s, f in tasks]
                for e, b in results:
                    errors += e
                    bits += b
                frames = stop
                if frames >= config.FRAMES_PER_POINT:
                    break
                if errors >= config.MIN_BIT_ERRORS and frames >= config.MIN_FRAMES:
                    break

            _, half = Utils.wilson_interval(errors, bits)
            record = BerRecord(
                config_digest=digest,
                system=config.SYSTEM,
                snr_db=float(snr_db),
                frames=frames,
                bits_simulated=bits,
                bit_errors=errors,
                ber=errors / bits if bits else 0.0,
                wilson_half_width=half,
            )
            logger.info(
                f"{config.SYSTEM} @ {snr_db} dB: BER {record.ber:.3e} "
                f"({errors}/{bits} bits, {frames} frames)"
            )
            records.append(record)
    finally:
        if executor:
            executor.shutdown()
    return records


def write_ber_results(records: Sequence[BerRecord], config: SimConfig) -> Tuple[str, str]:
    """
    Write the CSV and the manifest of a sweep to config.OUTPUT_DIR.

    Returns:
        Tuple[str, str]: CSV path and manifest path
    """
    digest = config.digest()
    csv_path = os.path.join(config.OUTPUT_DIR, f"ber_{digest}.csv")
    manifest_path = os.path.join(config.OUTPUT_DIR, f"ber_{digest}.manifest.py")
    Utils.write_csv(csv_path, BerRecord.header(), [r.as_row() for r in records])
    Utils.ensure_dir(config.OUTPUT_DIR)
    write_config_module(config, manifest_path, header=f"svdfbmc run manifest, digest {digest}")
    return csv_path, manifest_path


def snr_at_ber(records: Sequence[BerRecord], target: float) -> Optional[float]:
    """
    SNR at which a BER curve first falls to ``target``.

    log10(BER) is interpolated linearly in dB between the last point at or
    above the target and the next one; error-free points count as half an
    error over the bits simulated.

    Args:
        records (Sequence[BerRecord]): Records of one sweep, ascending in SNR
        target (float): BER level

    Returns:
        Optional[float]: SNR in dB, None when the curve never crosses the target
    """
    for upper, lower in zip(records, records[1:]):
        hi = max(upper.ber, 0.5 / max(upper.bits_simulated, 1))
        lo = max(lower.ber, 0.5 / max(lower.bits_simulated, 1))
        if hi >= target > lo:
            t = (np.log10(hi) - np.log10(target)) / (np.log10(hi) - np.log10(lo))
            return float(upper.snr_db + t * (lower.snr_db - upper.snr_db))
    return None


def dump_tone_frames(
    config: SimConfig, path: str, snr_index: int = 0, frame_index: int = 0
) -> Tuple[int, ...]:
    """
    Dump the beamformed tone values of one frame as raw complex64.

    The frame uses the same bits, channel and SVD phases as the matching frame
    of a sweep. Only tone-level systems form per-tone frames.

    Args:
        config (SimConfig): Configuration naming a tone-level FS-FBMC system
        path (str): Output file
        snr_index (int): SNR point of the trial
        frame_index (int): Frame counter of the trial

    Returns:
        Tuple[int, ...]: (half-times, Nt, N) shape of the dumped array
    """
    scheme = build_scheme(config)
    if not isinstance(scheme, FbmcScheme) or scheme.granularity != GRANULARITY_TONE:
        raise ConfigurationError(
            f"Tone frames are only formed by tone-level systems, not '{config.SYSTEM}'"
        )
    gens = Utils.trial_generators(config.MASTER_SEED, snr_index, frame_index)
    _, qam, channel = _frame_inputs(config, scheme, gens)
    bf = tone_beamformers(
        channel,
        config,
        scheme.smoothing_method,
        scheme.modem,
        scheme.svd_phase_rng(gens["phase"]),
    )
    frames = scheme.modem.tone_frames(oqam_stagger(qam, scheme.active), bf)
    return Utils.export_complex64(path, np.stack([frame.b for frame in frames]))


@dataclass(eq=False)
class DistanceHistogram:
    """Pooled adjacent-beamformer distances and their histogram."""

    distances: np.ndarray
    counts: np.ndarray
    edges: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        total = self.counts.sum()
        return self.counts / total if total else self.counts.astype(float)

    def mass_above(self, threshold: float) -> float:
        """Fraction of distances strictly above ``threshold``."""
        if self.distances.size == 0:
            return 0.0
        return float(np.mean(self.distances > threshold))


def beamformer_distance_histogram(
    sets: Iterable[BeamformerSet], bin_edges: Optional[np.ndarray] = None
) -> DistanceHistogram:
    """
    Histogram of ||V_k - V_{k-1}||_F over adjacent swept tones of every set.

    Args:
        sets (Iterable[BeamformerSet]): One set per channel draw
        bin_edges (Optional[np.ndarray]): Bin edges, 0 to 3 in steps of 0.1 by default

    Returns:
        DistanceHistogram: Distances, counts and edges
    """
    edges = DEFAULT_DISTANCE_EDGES if bin_edges is None else np.asarray(bin_edges)
    distances = np.concatenate([s.adjacent_distances() for s in sets])
    counts, _ = np.histogram(distances, bins=edges)
    return DistanceHistogram(distances=distances, counts=counts, edges=edges)


def total_variation(a: DistanceHistogram, b: DistanceHistogram) -> float:
    """Total-variation distance between two histograms on the same bins."""
    if not np.array_equal(a.edges, b.edges):
        raise ConfigurationError("Histograms use different bins")
    return float(0.5 * np.abs(a.probabilities - b.probabilities).sum())


def channel_draws(config: SimConfig, num_draws: int, fft_size: Optional[int] = None):
    """
    Channel realizations shared by every method and scheme of an experiment.

    Args:
        config (SimConfig): Simulation configuration
        num_draws (int): Number of realizations
        fft_size (Optional[int]): Number of tones, config.fft_size by default

    Yields:
        ChannelFrequencyResponse: One realization per draw
    """
    profile = profile_for(config.CHANNEL_MODEL, config.CHANNEL_PROFILE_FILE)
    for draw in range(num_draws):
        gens = Utils.trial_generators(config.MASTER_SEED, 0, draw)
        yield realize_channel(
            profile, config.NUM_RX, config.NUM_TX, fft_size or config.fft_size, gens["channel"]
        )


def svd_phase_generator(config: SimConfig, draw: int) -> Optional[np.random.Generator]:
    """Phase generator for the unsmoothed SVDs of a channel draw, None if pinned."""
    if config.SVD_PHASE != "random":
        return None
    return Utils.trial_generators(config.MASTER_SEED, 0, draw)["phase"]


def collect_beamformer_sets(
    config: SimConfig, method: str, num_draws: int, modem: Optional[FsFbmcModem] = None
) -> List[BeamformerSet]:
    """
    Per-tone beamformers for a number of channel draws.

    Args:
        config (SimConfig): Simulation configuration
        method (str): "none", "phase" or "ortho"
        num_draws (int): Channel draws

    Returns:
        List[BeamformerSet]: One set per draw
    """
    modem = modem or fbmc_modem(config)
    return [
        smooth_sweep(
            channel.H,
            modem.sweep_tones,
            config.NUM_STREAMS,
            method,
            n_iter=config.N_ITER,
            closeness_threshold=config.CLOSENESS_THRESHOLD,
            zf_floor=config.ZF_FLOOR,
            phase_rng=svd_phase_generator(config, draw),
        )
        for draw, channel in enumerate(channel_draws(config, num_draws))
    ]


PROBE_FULL = "full"
PROBE_SINGLE = "single"


def probe_grid(config: SimConfig, probe: str, rng: np.random.Generator) -> np.ndarray:
    """
    Real OQAM probe symbols for the interference measurement.

    "full" fills every data position with random QAM components, "single" sends
    one unit symbol on the first stream at the middle of the band and the frame.

    Returns:
        np.ndarray: (L, M, 2 * SYMBOLS_PER_FRAME) PAM symbols
    """
    active = np.asarray(config.active_mask(), dtype=bool)
    shape = (config.NUM_STREAMS, config.NUM_SUBCARRIERS, config.SYMBOLS_PER_FRAME)
    if probe == PROBE_FULL:
        bits = rng.integers(0, 2, int(np.prod(shape)) * config.bits_per_symbol)
        qam = qam_map(bits, config.MODULATION).reshape(shape)
        return oqam_stagger(qam, active).values
    if probe == PROBE_SINGLE:
        values = np.zeros(shape[:2] + (2 * shape[2],))
        indices = np.flatnonzero(active)
        values[0, indices[len(indices) // 2], shape[2]] = 1.0
        return values
    raise ConfigurationError(f"Unknown probe '{probe}', use '{PROBE_FULL}' or '{PROBE_SINGLE}'")


def _back_to_back(modem: FsFbmcModem, values: np.ndarray) -> np.ndarray:
    ident = BeamformerSet.identity(modem.N, values.shape[0], modem.sweep_tones)
    pam = PamGrid(values, modem.active)
    est, _ = modem.demodulate(modem.modulate(pam, ident), ident, values.shape[-1])
    return est


def measure_leaked_interference(
    config: SimConfig,
    probe: str = PROBE_FULL,
    num_draws: int = 1,
    channels: Optional[Sequence[ChannelFrequencyResponse]] = None,
) -> np.ndarray:
    """
    Real-part interference per subchannel that the beamformers let through.

    The received real parts are compared with the back-to-back output of the
    same probe, so the filter bank's own residual is not counted. For "full"
    probes the result is the interference-to-signal power ratio per subchannel;
    for "single" probes it is the leaked energy into each subchannel excluding
    the probe's own position.

    Args:
        config (SimConfig): Configuration naming an FS-FBMC system
        probe (str): "full" or "single"
        num_draws (int): Channel draws to average over
        channels (Optional[Sequence[ChannelFrequencyResponse]]): Explicit channels

    Returns:
        np.ndarray: (M,) leakage, zero on inactive subchannels
    """
    scheme = build_scheme(config)
    if not isinstance(scheme, FbmcScheme):
        raise ConfigurationError(f"Leakage probes need an FS-FBMC system, not '{config.SYSTEM}'")
    if channels is None:
        channels = list(channel_draws(config, num_draws, scheme.fft_size))

    rng = np.random.default_rng(np.random.SeedSequence([config.MASTER_SEED, 1]))
    leakage = np.zeros(config.NUM_SUBCARRIERS)
    for draw, channel in enumerate(channels):
        values = probe_grid(config, probe, rng)
        reference = _back_to_back(scheme.modem, values).real
        est, _ = scheme.pam_link(values, channel, phase_rng=svd_phase_generator(config, draw))
        error = (est.real - reference) ** 2
        if probe == PROBE_SINGLE:
            error[values != 0] = 0.0
            leakage += error.sum(axis=(0, 2)) / np.sum(values ** 2)
        else:
            power = np.mean(values[:, scheme.active, :] ** 2)
            leakage += error.mean(axis=(0, 2)) / power
    leakage /= max(len(channels), 1)
    leakage[~scheme.active] = 0.0
    return leakage


def identity_channel(config: SimConfig, fft_size: Optional[int] = None) -> ChannelFrequencyResponse:
    """Flat channel with an identity matrix, Nr x Nt."""
    return flat_channel(
        np.eye(config.NUM_RX, config.NUM_TX), fft_size or config.fft_size
    )
