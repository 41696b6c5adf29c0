"""
Gray-labelled square QAM with unit average energy.
"""

import logging
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.stats import norm

from svdfbmc.core.errors import ConfigurationError, ShapeError

logger = logging.getLogger(__name__)


def _bits_per_symbol(order: int) -> int:
    bits = int(order).bit_length() - 1
    if order < 4 or order != 1 << bits or bits % 2:
        raise ConfigurationError(f"{order}-QAM is not a square power-of-two constellation")
    return bits


def _axis_levels(side: int) -> np.ndarray:
    return 2.0 * np.arange(side) - (side - 1)


@lru_cache(maxsize=None)
def constellation(order: int) -> np.ndarray:
    """
    Constellation points indexed by bit label.

    The high half of the label selects the in-phase level, the low half the
    quadrature level, each Gray coded.

    Args:
        order (int): 4, 16, 64, ...

    Returns:
        np.ndarray: (order,) complex points with unit mean energy
    """
    bits = _bits_per_symbol(order)
    half = bits // 2
    side = 1 << half
    idx = np.arange(side)
    gray = idx ^ (idx >> 1)
    levels = _axis_levels(side)

    points = np.empty(order, dtype=complex)
    labels = (gray[:, None] << half) | gray[None, :]
    points[labels] = levels[:, None] + 1j * levels[None, :]
    points /= np.sqrt(2.0 * (order - 1) / 3.0)
    points.setflags(write=False)
    return points


def _label_bits(order: int) -> np.ndarray:
    bits = _bits_per_symbol(order)
    labels = np.arange(order)
    return (labels[:, None] >> np.arange(bits - 1, -1, -1)[None, :]) & 1


def qam_map(bits: np.ndarray, order: int) -> np.ndarray:
    """
    Map bits (MSB first per symbol) to QAM symbols.

    Args:
        bits (np.ndarray): Bit vector, length divisible by log2(order)
        order (int): Constellation size

    Returns:
        np.ndarray: Complex symbols
    """
    per = _bits_per_symbol(order)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % per:
        raise ShapeError(f"{bits.size} bits do not fill {order}-QAM symbols")
    weights = 1 << np.arange(per - 1, -1, -1)
    return constellation(order)[bits.reshape(-1, per) @ weights]


def qam_demap(
    symbols: np.ndarray, noise_var: Union[float, np.ndarray], order: int
) -> np.ndarray:
    """
    Max-log per-bit LLRs, positive for bit 0.

    Args:
        symbols (np.ndarray): Received symbols
        noise_var (Union[float, np.ndarray]): Complex noise variance, scalar or per symbol
        order (int): Constellation size

    Returns:
        np.ndarray: LLRs, log2(order) per symbol in mapping order
    """
    y = np.asarray(symbols, dtype=complex).ravel()
    points = constellation(order)
    dist = np.abs(y[:, None] - points[None, :]) ** 2
    labels = _label_bits(order)
    llr = np.empty((y.size, labels.shape[1]))
    for j in range(labels.shape[1]):
        one = labels[:, j].astype(bool)
        llr[:, j] = dist[:, one].min(axis=1) - dist[:, ~one].min(axis=1)
    var = np.broadcast_to(np.asarray(noise_var, dtype=float), y.shape)
    llr /= np.maximum(var, np.finfo(float).tiny)[:, None]
    return llr.ravel()


def qam_hard_demap(symbols: np.ndarray, order: int) -> np.ndarray:
    """
    Bits of the nearest constellation point.

    Args:
        symbols (np.ndarray): Received symbols
        order (int): Constellation size

    Returns:
        np.ndarray: Bits, MSB first per symbol
    """
    y = np.asarray(symbols, dtype=complex).ravel()
    nearest = np.argmin(np.abs(y[:, None] - constellation(order)[None, :]), axis=1)
    return _label_bits(order)[nearest].astype(np.uint8).ravel()


def theoretical_qam_ber(order: int, snr_db: float) -> float:
    """
    Exact bit error rate of Gray square QAM over AWGN with nearest-point decisions.

    Args:
        order (int): Constellation size
        snr_db (float): Es/N0 in dB

    Returns:
        float: Bit error probability
    """
    bits = _bits_per_symbol(order)
    half = bits // 2
    side = 1 << half
    scale = np.sqrt(2.0 * (order - 1) / 3.0)
    levels = _axis_levels(side) / scale
    edges = np.concatenate([[-np.inf], (levels[:-1] + levels[1:]) / 2, [np.inf]])
    sigma = np.sqrt(10.0 ** (-snr_db / 10.0) / 2.0)

    cdf = norm.cdf((edges[None, :] - levels[:, None]) / sigma)
    prob = np.diff(cdf, axis=1)
    idx = np.arange(side)
    gray = idx ^ (idx >> 1)
    flips = np.array([[bin(a ^ b).count("1") for b in gray] for a in gray])
    return float(np.sum(prob * flips) / (side * half))
