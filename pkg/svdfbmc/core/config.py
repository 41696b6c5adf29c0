"""
Configuration handling for the svdfbmc package.
"""

import os
import json
import hashlib
import logging
import importlib.util
from typing import Any, Dict, List, Optional
from dataclasses import dataclass, asdict, fields

from svdfbmc.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

# Compared systems plus the scalar calibration link
SYSTEMS = ("ofdm", "sc", "sc-smooth", "finer", "proposed", "awgn")
CHANNEL_MODELS = ("D", "E", "F", "flat", "custom")
SMOOTHING_METHODS = ("ortho", "phase")
MODULATIONS = (16, 64)
# Phase convention of unsmoothed per-tone SVDs
SVD_PHASES = ("random", "pinned")
# Execution settings that never change what a run computes
RUN_ONLY_FIELDS = ("WORKERS", "OUTPUT_DIR")


def default_active_subchannels(num_subcarriers: int = 64) -> List[int]:
    """
    Data subchannel indices of the 802.11n-style layout.

    Offsets -26..-1 and +1..+26 around DC without the pilot offsets +-7 and +-21,
    scaled to ``num_subcarriers`` and mapped onto 0..M-1.

    Args:
        num_subcarriers (int): Number of subchannels M

    Returns:
        List[int]: Sorted active subchannel indices
    """
    edge = (26 * num_subcarriers) // 64
    pilots = {(7 * num_subcarriers) // 64, (21 * num_subcarriers) // 64}
    offsets = [
        o for o in range(-edge, edge + 1) if o != 0 and abs(o) not in pilots
    ]
    return sorted(o % num_subcarriers for o in offsets)


@dataclass
class SimConfig:
    """Configuration data structure for a simulation run."""

    # Which of the compared systems to simulate
    SYSTEM: str = "proposed"
    MODULATION: int = 64
    CODING: bool = True

    # Channel
    CHANNEL_MODEL: str = "D"
    CHANNEL_PROFILE_FILE: Optional[str] = None

    # Numerology: 20 MHz, 64 subcarriers, K = 4
    NUM_SUBCARRIERS: int = 64
    OVERLAP: int = 4
    FFT_FACTOR: Optional[int] = None  # tones per subchannel: K (4M) or 2K (8M)
    NUM_TX: int = 2
    NUM_RX: int = 2
    NUM_STREAMS: int = 2
    SYMBOLS_PER_FRAME: int = 7
    CP_LENGTH: int = 16
    ACTIVE_SUBCHANNELS: List[int] = None

    # Beamformer smoothing
    SMOOTHING_METHOD: str = "ortho"
    N_ITER: int = 3
    CLOSENESS_THRESHOLD: float = 0.05
    ZF_FLOOR: float = 1e-6
    SVD_PHASE: str = "random"  # unsmoothed SVDs: "random" or "pinned" phases

    # Monte Carlo control
    SNR_GRID_DB: List[float] = None
    FRAMES_PER_POINT: int = 200
    MIN_BIT_ERRORS: int = 500
    MIN_FRAMES: int = 20
    MASTER_SEED: int = 2017
    INTERLEAVER_SEED: int = 7
    WORKERS: int = 1

    OUTPUT_DIR: str = "results"

    def __post_init__(self):
        """Initialize default lists if None."""
        if self.ACTIVE_SUBCHANNELS is None:
            self.ACTIVE_SUBCHANNELS = default_active_subchannels(self.NUM_SUBCARRIERS)
        if self.SNR_GRID_DB is None:
            self.SNR_GRID_DB = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0]

    @property
    def tones_per_subchannel(self) -> int:
        """FS-FBMC tones per subchannel (K for a 4M receiver, 2K for 8M)."""
        return self.FFT_FACTOR if self.FFT_FACTOR else self.OVERLAP

    @property
    def fft_size(self) -> int:
        """Length of the FS-FBMC DFT."""
        return self.tones_per_subchannel * self.NUM_SUBCARRIERS

    @property
    def bits_per_symbol(self) -> int:
        """Bits carried by one QAM symbol."""
        return int(self.MODULATION).bit_length() - 1

    def active_mask(self) -> List[bool]:
        """
        Boolean mask over subchannels, True where data is carried.

        Returns:
            List[bool]: One entry per subchannel
        """
        active = set(self.ACTIVE_SUBCHANNELS)
        return [m in active for m in range(self.NUM_SUBCARRIERS)]

    def validate(self) -> "SimConfig":
        """
        Check field values and flag combinations.

        Returns:
            SimConfig: self, for chaining

        Raises:
            ConfigurationError: If any value or combination is invalid
        """
        if self.SYSTEM not in SYSTEMS:
            raise ConfigurationError(
                f"Unknown system '{self.SYSTEM}', expected one of {', '.join(SYSTEMS)}"
            )
        if self.MODULATION not in MODULATIONS:
            raise ConfigurationError(f"Unsupported modulation {self.MODULATION}-QAM")
        if self.CHANNEL_MODEL not in CHANNEL_MODELS:
            raise ConfigurationError(f"Unknown channel model '{self.CHANNEL_MODEL}'")
        if self.CHANNEL_MODEL == "custom" and not self.CHANNEL_PROFILE_FILE:
            raise ConfigurationError("Channel model 'custom' needs CHANNEL_PROFILE_FILE")
        if self.SMOOTHING_METHOD not in SMOOTHING_METHODS:
            raise ConfigurationError(
                f"Unknown smoothing method '{self.SMOOTHING_METHOD}'"
            )
        if self.SVD_PHASE not in SVD_PHASES:
            raise ConfigurationError(
                f"SVD_PHASE must be one of {', '.join(SVD_PHASES)}, not '{self.SVD_PHASE}'"
            )
        if self.FFT_FACTOR not in (None, self.OVERLAP, 2 * self.OVERLAP):
            raise ConfigurationError(
                f"FFT_FACTOR must be K={self.OVERLAP} or 2K={2 * self.OVERLAP}"
            )
        if self.SYSTEM in ("ofdm", "awgn") and self.tones_per_subchannel != self.OVERLAP:
            raise ConfigurationError(
                f"FFT_FACTOR only applies to FS-FBMC systems, not '{self.SYSTEM}'"
            )
        if self.NUM_STREAMS < 1 or self.NUM_STREAMS > min(self.NUM_TX, self.NUM_RX):
            raise ConfigurationError(
                f"NUM_STREAMS={self.NUM_STREAMS} must lie in 1..min(NUM_TX, NUM_RX)"
            )
        if not 0 <= self.CP_LENGTH < self.NUM_SUBCARRIERS:
            raise ConfigurationError("CP_LENGTH must lie in 0..NUM_SUBCARRIERS-1")
        if self.N_ITER < 1:
            raise ConfigurationError("N_ITER must be at least 1")
        if self.FRAMES_PER_POINT < 1:
            raise ConfigurationError("FRAMES_PER_POINT must be at least 1")
        if self.SYMBOLS_PER_FRAME < 1:
            raise ConfigurationError("SYMBOLS_PER_FRAME must be at least 1")
        if self.WORKERS < 1:
            raise ConfigurationError("WORKERS must be at least 1")
        snrs = list(self.SNR_GRID_DB)
        if not snrs or any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ConfigurationError("SNR_GRID_DB must be non-empty and strictly increasing")
        if not self.ACTIVE_SUBCHANNELS or any(
            not 0 <= m < self.NUM_SUBCARRIERS for m in self.ACTIVE_SUBCHANNELS
        ):
            raise ConfigurationError("ACTIVE_SUBCHANNELS must index 0..NUM_SUBCARRIERS-1")
        return self

    def to_dict(self) -> Dict[str, Any]:
        """
        Plain dictionary of all fields.

        Returns:
            Dict[str, Any]: Field name to value
        """
        return asdict(self)

    def digest(self) -> str:
        """
        Short stable hash of the settings that determine a run's results.

        WORKERS and OUTPUT_DIR are left out, so a sweep keeps its digest when it
        is rerun with another worker count or written elsewhere.

        Returns:
            str: First 12 hex characters of the SHA-256 of the canonical dump
        """
        values = {k: v for k, v in self.to_dict().items() if k not in RUN_ONLY_FIELDS}
        canonical = json.dumps(values, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def load_module_values(path: str) -> Dict[str, Any]:
    """
    Execute a ``KEY = value`` Python file and collect its public values.

    Args:
        path (str): Path to the file

    Returns:
        Dict[str, Any]: Non-callable, non-dunder module attributes

    Raises:
        ConfigurationError: If the file does not exist or fails to execute
    """
    if not os.path.isfile(path):
        raise ConfigurationError(f"Configuration file not found: {path}")
    try:
        spec = importlib.util.spec_from_file_location("user_config", path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
    except Exception as e:
        raise ConfigurationError(f"Error loading configuration from {path}: {e}")

    return {
        key: getattr(module, key)
        for key in dir(module)
        if not key.startswith("__") and not callable(getattr(module, key))
    }


def load_config(config_path: Optional[str] = None) -> SimConfig:
    """
    Load configuration from the specified path or search for 'config.py'.

    Args:
        config_path (Optional[str]): Path to the configuration file

    Returns:
        SimConfig: Configuration object
    """
    config = SimConfig()

    if config_path:
        update_config_from_values(config, load_module_values(config_path))
        logger.info(f"Loaded configuration from {config_path}")
    else:
        # Search for config.py in current directory and parent directories
        current_dir = os.getcwd()
        max_levels = 3

        for _ in range(max_levels):
            potential_config = os.path.join(current_dir, "config.py")
            if os.path.isfile(potential_config):
                try:
                    update_config_from_values(
                        config, load_module_values(potential_config)
                    )
                    logger.info(f"Loaded configuration from {potential_config}")
                    break
                except ConfigurationError as e:
                    logger.error(str(e))

            parent_dir = os.path.dirname(current_dir)
            if parent_dir == current_dir:
                break
            current_dir = parent_dir

    return config


def update_config_from_values(config: SimConfig, values: Dict[str, Any]) -> None:
    """
    Update configuration object with values loaded from a config module.

    Args:
        config (SimConfig): Configuration object to update
        values (Dict[str, Any]): Values keyed by field name
    """
    for key, value in values.items():
        # Only update if the config has this attribute
        if hasattr(config, key):
            setattr(config, key, value)
        else:
            logger.debug(f"Ignoring unknown configuration key {key}")


def write_config_module(config: SimConfig, path: str, header: str = "") -> None:
    """
    Write every field of a configuration as a loadable ``KEY = value`` file.

    Args:
        config (SimConfig): Configuration to write
        path (str): Destination path
        header (str): Optional comment placed at the top of the file
    """
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    for field in fields(config):
        lines.append(f"{field.name} = {getattr(config, field.name)!r}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def create_default_config_file(path: str) -> bool:
    """
    Create a default configuration file at the specified path.

    Args:
        path (str): Path to create the configuration file at

    Returns:
        bool: True if successful, False otherwise
    """
    default_config = """# svdfbmc configuration file

# System under test: ofdm, sc, sc-smooth, finer, proposed (or awgn for calibration)
SYSTEM = "proposed"
MODULATION = 64
CODING = True

# Channel: D, E, F (tapped-delay-line presets), flat, or custom
CHANNEL_MODEL = "D"
# CHANNEL_PROFILE_FILE = "profile.py"  # NAME, DELAYS_NS, POWERS

# FS-FBMC receiver: tones per subchannel, 4 (4M) or 8 (8M)
FFT_FACTOR = 4

# Smoothing of the proposed system
SMOOTHING_METHOD = "ortho"
N_ITER = 3

# Unsmoothed baselines: "random" per-tone SVD phases, or "pinned" (largest entry real)
SVD_PHASE = "random"

# Monte Carlo
SNR_GRID_DB = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0]
FRAMES_PER_POINT = 200
MASTER_SEED = 2017
WORKERS = 1

OUTPUT_DIR = "results"
"""

    try:
        with open(path, "w") as f:
            f.write(default_config)
        logger.info(f"Created default configuration file at {path}")
        return True
    except Exception as e:
        logger.error(f"Error creating default configuration file: {e}")
        return False
