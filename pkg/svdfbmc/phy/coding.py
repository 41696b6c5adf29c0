"""
Rate-2/3 punctured convolutional code (K=7, generators 133/171) with a seeded
random interleaver and a soft-input Viterbi decoder.

LLRs are positive for bit 0.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from svdfbmc.core.errors import ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CodeConfig:
    """
    Code parameters.

    Attributes:
        generators (Tuple[int, int]): Mother code generators, octal 133 and 171
        constraint_length (int): Encoder register length including the input
        puncture (Tuple[Tuple[int, ...], ...]): Keep pattern, one row per generator
        interleaver_seed (int): Seed of the interleaver permutation
    """

    generators: Tuple[int, int] = (0o133, 0o171)
    constraint_length: int = 7
    puncture: Tuple[Tuple[int, ...], ...] = ((1, 1), (1, 0))
    interleaver_seed: int = 7

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def num_states(self) -> int:
        return 1 << self.memory

    def keep_mask(self, num_bits: int) -> np.ndarray:
        """(num_bits, 2) mask of mother-code outputs surviving the puncturing."""
        pattern = np.asarray(self.puncture, dtype=bool).T
        reps = -(-num_bits // pattern.shape[0])
        return np.tile(pattern, (reps, 1))[:num_bits]

    def coded_length(self, num_bits: int) -> int:
        """Punctured output length for ``num_bits`` encoder inputs."""
        return int(self.keep_mask(num_bits).sum())

    def input_length(self, num_coded: int) -> int:
        """
        Encoder input length that fills exactly ``num_coded`` coded bits.

        Raises:
            ShapeError: If no input length produces that many coded bits
        """
        period = np.asarray(self.puncture).shape[1]
        kept = int(np.sum(self.puncture))
        guess = (num_coded * period) // kept
        for candidate in (guess, guess + 1):
            if self.coded_length(candidate) == num_coded:
                return candidate
        raise ShapeError(f"{num_coded} is not a valid coded block length")


def _register_taps(cfg: CodeConfig) -> np.ndarray:
    """(2, K) taps with column d weighting the input delayed by d."""
    d = np.arange(cfg.constraint_length)
    return np.array([(g >> (cfg.memory - d)) & 1 for g in cfg.generators])


def interleaver_permutation(length: int, seed: int) -> np.ndarray:
    """Seeded random permutation used by the interleaver."""
    return np.random.default_rng(seed).permutation(length)


def encode(bits: np.ndarray, cfg: CodeConfig = CodeConfig()) -> np.ndarray:
    """
    Convolutionally encode, puncture to rate 2/3 and interleave.

    No tail bits are appended; see ``encode_frame``.

    Args:
        bits (np.ndarray): Message bits
        cfg (CodeConfig): Code parameters

    Returns:
        np.ndarray: ceil(3 T / 2) coded bits for T message bits
    """
    u = np.asarray(bits, dtype=np.int64).ravel()
    num_bits = u.size
    taps = _register_taps(cfg)
    mother = np.stack(
        [np.convolve(u, h)[:num_bits] % 2 for h in taps], axis=1
    )
    coded = mother[cfg.keep_mask(num_bits)].astype(np.uint8)
    return coded[interleaver_permutation(coded.size, cfg.interleaver_seed)]


def _trellis(cfg: CodeConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Predecessor states (S, 2) and branch outputs (S, 2, 2) per next state."""
    states = np.arange(cfg.num_states)
    half = cfg.num_states >> 1
    d = np.arange(2)
    prev = ((states[:, None] & (half - 1)) << 1) | d[None, :]
    u = states >> (cfg.memory - 1)
    reg = (u[:, None] << cfg.memory) | prev
    parity = np.array([bin(x).count("1") & 1 for x in range(1 << cfg.constraint_length)])
    outputs = np.stack([parity[reg & g] for g in cfg.generators], axis=-1)
    return prev, outputs


def decode(
    llrs: np.ndarray,
    cfg: CodeConfig = CodeConfig(),
    num_bits: Optional[int] = None,
    terminated: bool = True,
) -> np.ndarray:
    """
    Deinterleave, depuncture and run a soft-input Viterbi decoder.

    Args:
        llrs (np.ndarray): Coded-bit LLRs, positive for 0
        cfg (CodeConfig): Code parameters
        num_bits (Optional[int]): Expected message length
        terminated (bool): Trace back from the zero state

    Returns:
        np.ndarray: Decoded bits

    Raises:
        ShapeError: If the LLR count does not match a coded block
    """
    llrs = np.asarray(llrs, dtype=float).ravel()
    length = cfg.input_length(llrs.size)
    if num_bits is not None and num_bits != length:
        raise ShapeError(f"{llrs.size} LLRs decode to {length} bits, expected {num_bits}")

    deint = np.empty_like(llrs)
    deint[interleaver_permutation(llrs.size, cfg.interleaver_seed)] = llrs
    mother = np.zeros((length, 2))
    mother[cfg.keep_mask(length)] = deint

    prev, outputs = _trellis(cfg)
    signs = 1.0 - 2.0 * outputs
    metric = np.full(cfg.num_states, -np.inf)
    metric[0] = 0.0
    choices = np.empty((length, cfg.num_states), dtype=np.uint8)
    for t in range(length):
        cand = metric[prev] + signs @ mother[t]
        pick = np.argmax(cand, axis=1)
        choices[t] = pick
        metric = cand[np.arange(cfg.num_states), pick]

    state = 0 if terminated else int(np.argmax(metric))
    bits = np.empty(length, dtype=np.uint8)
    shift = cfg.memory - 1
    for t in range(length - 1, -1, -1):
        bits[t] = state >> shift
        state = prev[state, choices[t, state]]
    return bits


def encode_frame(message: np.ndarray, cfg: CodeConfig = CodeConfig()) -> np.ndarray:
    """Encode a message followed by zero tail bits that terminate the trellis."""
    tail = np.zeros(cfg.memory, dtype=np.uint8)
    return encode(np.concatenate([np.asarray(message, dtype=np.uint8), tail]), cfg)


def decode_frame(llrs: np.ndarray, cfg: CodeConfig = CodeConfig()) -> np.ndarray:
    """Decode a zero-terminated frame and drop its tail bits."""
    return decode(llrs, cfg, terminated=True)[: -cfg.memory]


def frame_message_length(coded_bits: int, cfg: CodeConfig = CodeConfig()) -> int:
    """
    Message bits that fit a frame of ``coded_bits`` coded bits, tail excluded.

    Args:
        coded_bits (int): Coded bits carried by the frame
        cfg (CodeConfig): Code parameters

    Returns:
        int: Message length
    """
    return cfg.input_length(coded_bits) - cfg.memory
