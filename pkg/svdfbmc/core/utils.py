"""
Utility functions for the svdfbmc simulator.
"""

import os
import csv
import logging
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from scipy.stats import norm

logger = logging.getLogger(__name__)


class Utils:
    # Independent random streams spawned for every trial
    TRIAL_STREAMS = ("bits", "channel", "noise", "phase")

    @staticmethod
    def trial_generators(
        master_seed: int, snr_index: int, frame_index: int
    ) -> Dict[str, np.random.Generator]:
        """
        Random generators for one frame of one SNR point.

        The seed sequence is keyed on (master seed, SNR index, frame index) only,
        so results do not depend on scheduling or on which system is simulated.

        Args:
            master_seed (int): Run-wide seed
            snr_index (int): Position of the SNR point in the grid
            frame_index (int): Frame counter within the SNR point

        Returns:
            Dict[str, np.random.Generator]: Generators keyed by stream name
        """
        root = np.random.SeedSequence([master_seed, snr_index, frame_index])
        children = root.spawn(len(Utils.TRIAL_STREAMS))
        return {
            name: np.random.default_rng(child)
            for name, child in zip(Utils.TRIAL_STREAMS, children)
        }

    @staticmethod
    def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
        """
        Wilson score interval for a binomial proportion.

        Args:
            errors (int): Number of observed errors
            trials (int): Number of trials
            confidence (float): Two-sided confidence level

        Returns:
            Tuple[float, float]: (centre, half-width)
        """
        if trials <= 0:
            return 0.0, 0.0
        z = norm.ppf(0.5 + confidence / 2.0)
        p = errors / trials
        denom = 1.0 + z * z / trials
        centre = (p + z * z / (2.0 * trials)) / denom
        half = z * np.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
        return float(centre), float(half)

    @staticmethod
    def ensure_dir(path: str) -> str:
        """
        Create a directory if it does not exist.

        Args:
            path (str): Directory path

        Returns:
            str: The same path
        """
        if path and not os.path.isdir(path):
            os.makedirs(path, exist_ok=True)
            logger.debug(f"Created directory {path}")
        return path

    @staticmethod
    def write_csv(path: str, header: Sequence[str], rows: List[Sequence[Any]]) -> None:
        """
        Write rows as RFC-4180-style CSV.

        Floats are written with repr so that identical results give identical bytes.

        Args:
            path (str): Output file
            header (Sequence[str]): Column names
            rows (List[Sequence[Any]]): Row values
        """
        Utils.ensure_dir(os.path.dirname(path))
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        logger.info(f"Wrote {len(rows)} rows to {path}")

    @staticmethod
    def export_complex64(path: str, array: np.ndarray) -> Tuple[int, ...]:
        """
        Dump an array as raw little-endian complex64 in C order.

        Args:
            path (str): Output file
            array (np.ndarray): Array to dump

        Returns:
            Tuple[int, ...]: Shape of the dumped array, needed to read it back
        """
        Utils.ensure_dir(os.path.dirname(path))
        data = np.ascontiguousarray(array, dtype="<c8")
        data.tofile(path)
        logger.info(f"Exported complex64 array of shape {data.shape} to {path}")
        return data.shape

    @staticmethod
    def export_columns(path: str, columns: Dict[str, np.ndarray]) -> None:
        """
        Write equal-length vectors as whitespace-separated text columns.

        Args:
            path (str): Output file
            columns (Dict[str, np.ndarray]): Column name to values
        """
        Utils.ensure_dir(os.path.dirname(path))
        names = list(columns)
        data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
        np.savetxt(path, data, header=" ".join(names), fmt="%.17g")
        logger.info(f"Exported {data.shape[0]} rows to {path}")
