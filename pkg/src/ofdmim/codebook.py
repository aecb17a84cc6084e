"""
Codebook construction for single-group OFDM-IM.

A B-bit word is split into ``p = floor(log2(C(N, K)))`` index bits, which
pick a subcarrier activation pattern (SAP) from the lexicographic list of
K-subsets, followed by K groups of ``log2(M)`` bits, each Gray-mapped to an
M-PSK point on the active subcarriers in ascending order.

Subcarriers are numbered 1..N in the public API (``Sap.active_set``) and
0..N-1 in dense numpy views.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

MAX_SUBCARRIERS = 32
MAX_PSK_ORDER = 64


class ConfigurationError(ValueError):
    """Invalid system parameters (N, K, M, mu)."""


class PepConvention(str, enum.Enum):
    """How the per-subcarrier tau is scaled from the SNR.

    ``STANDARD`` follows the usual ML derivation with complex noise of total
    variance N0 (tau divisor 4K) and agrees with the simulator.
    ``PAPER_LITERAL`` keeps the divisor 2K, i.e. an effective SNR twice as
    large.
    """

    STANDARD = "standard"
    PAPER_LITERAL = "paper"

    @property
    def tau_divisor(self) -> int:
        return 4 if self is PepConvention.STANDARD else 2


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class SystemConfig:
    n_subcarriers: int
    n_active: int
    psk_order: int = 2
    mean_channel_gain: float = 1.0
    pep_convention: PepConvention = PepConvention.STANDARD

    def __post_init__(self):
        n, k, m = self.n_subcarriers, self.n_active, self.psk_order
        for name, v in (("n_subcarriers", n), ("n_active", k), ("psk_order", m)):
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {v!r}")
        if not 1 <= n <= MAX_SUBCARRIERS:
            raise ConfigurationError(f"N must be in 1..{MAX_SUBCARRIERS}, got {n}")
        if not 1 <= k <= n:
            raise ConfigurationError(f"K must satisfy 1 <= K <= N={n}, got {k}")
        if m < 2 or m > MAX_PSK_ORDER or not _is_power_of_two(m):
            raise ConfigurationError(
                f"M must be a power of two in 2..{MAX_PSK_ORDER}, got {m}")
        mu = float(self.mean_channel_gain)
        if not (mu > 0 and math.isfinite(mu)):
            raise ConfigurationError(f"mean channel gain must be positive, got {mu}")
        object.__setattr__(self, "mean_channel_gain", mu)
        object.__setattr__(self, "pep_convention", PepConvention(self.pep_convention))
        if self.total_bits > 62:
            raise ConfigurationError(
                f"B={self.total_bits} bits per block is beyond the supported range")

    @property
    def index_bits(self) -> int:
        """p = floor(log2(C(N, K))), computed exactly on integers."""
        return math.comb(self.n_subcarriers, self.n_active).bit_length() - 1

    @property
    def bits_per_symbol(self) -> int:
        return self.psk_order.bit_length() - 1

    @property
    def total_bits(self) -> int:
        return self.index_bits + self.n_active * self.bits_per_symbol

    @property
    def n_blocks(self) -> int:
        """X = 2^p * M^K."""
        return (1 << self.index_bits) * self.psk_order ** self.n_active


@dataclass(frozen=True)
class Sap:
    active_set: tuple[int, ...]

    def __post_init__(self):
        s = tuple(int(i) for i in self.active_set)
        if len(s) == 0 or any(b <= a for a, b in zip(s, s[1:])) or s[0] < 1:
            raise ValueError(f"active set must be strictly increasing from 1: {s}")
        object.__setattr__(self, "active_set", s)

    def __len__(self):
        return len(self.active_set)

    def __iter__(self):
        return iter(self.active_set)


def _check_nk(n: int, k: int) -> None:
    if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise ConfigurationError(f"N and K must be integers, got {n!r}, {k!r}")
    if n < 1 or not 1 <= k <= n:
        raise ConfigurationError(f"need 1 <= K <= N, got N={n}, K={k}")


def enumerate_saps(n: int, k: int) -> list[Sap]:
    """All C(n, k) activation patterns in lexicographic order.

    >>> [s.active_set for s in enumerate_saps(4, 2)][:3]
    [(1, 2), (1, 3), (1, 4)]
    """
    _check_nk(n, k)
    return [Sap(c) for c in itertools.combinations(range(1, n + 1), k)]


def unrank_sap(rank: int, n: int, k: int) -> Sap:
    """The ``rank``-th (0-based) K-subset in lexicographic order, without
    materialising the whole list."""
    _check_nk(n, k)
    total = math.comb(n, k)
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} out of range for C({n},{k})={total}")
    out = []
    x = 1
    for remaining in range(k, 0, -1):
        # skip all subsets starting with x while rank is beyond them
        while True:
            c = math.comb(n - x, remaining - 1)
            if rank < c:
                break
            rank -= c
            x += 1
        out.append(x)
        x += 1
    return Sap(tuple(out))


def _bits_to_int(bits: str) -> int:
    if any(ch not in "01" for ch in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return int(bits, 2) if bits else 0


def map_index_bits(bits: str, n: int, k: int) -> Sap:
    """Map p index bits (MSB first) to the SAP of that rank."""
    _check_nk(n, k)
    p = math.comb(n, k).bit_length() - 1
    if len(bits) != p:
        raise ValueError(f"expected {p} index bits for N={n}, K={k}, got {len(bits)}")
    return unrank_sap(_bits_to_int(bits), n, k)


def gray_decode(g: int) -> int:
    b = 0
    while g:
        b ^= g
        g >>= 1
    return b


def gray_encode(b: int) -> int:
    return b ^ (b >> 1)


def psk_point(symbol_bits: str, m: int) -> complex:
    """Gray-labelled M-PSK point exp(2j*pi*m/M), phase origin at 0."""
    if m < 2 or not _is_power_of_two(m):
        raise ConfigurationError(f"M must be a power of two >= 2, got {m}")
    if len(symbol_bits) != m.bit_length() - 1:
        raise ValueError(f"expected {m.bit_length() - 1} symbol bits, got {symbol_bits!r}")
    return _psk_by_gray_label(_bits_to_int(symbol_bits), m)


def _psk_by_gray_label(label: int, m: int) -> complex:
    idx = gray_decode(label)
    # exact values on the axes so BPSK/QPSK deltas come out as clean integers
    q, r = divmod(4 * idx, m)
    if r == 0:
        return (1, 1j, -1, -1j)[q % 4]
    return complex(np.exp(2j * np.pi * idx / m))


@dataclass(frozen=True)
class Block:
    """One legitimate OFDM-IM block.

    ``symbols[i]`` sits on subcarrier ``sap.active_set[i]``.
    """

    sap: Sap
    symbols: tuple[complex, ...]
    label: str
    ordinal: int
    n_subcarriers: int

    @property
    def dense(self) -> np.ndarray:
        x = np.zeros(self.n_subcarriers, dtype=np.complex128)
        for sc, s in zip(self.sap.active_set, self.symbols):
            x[sc - 1] = s
        return x


def _make_block(config: SystemConfig, ordinal: int, saps: Sequence[Sap]) -> Block:
    B, p = config.total_bits, config.index_bits
    q, k, m = config.bits_per_symbol, config.n_active, config.psk_order
    label = format(ordinal, f"0{B}b") if B else ""
    sap = saps[ordinal >> (B - p)]
    symbols = []
    for i in range(k):
        shift = B - p - (i + 1) * q
        symbols.append(_psk_by_gray_label((ordinal >> shift) & (m - 1), m))
    return Block(sap, tuple(symbols), label, ordinal, config.n_subcarriers)


@dataclass(frozen=True)
class Codebook:
    config: SystemConfig
    blocks: tuple[Block, ...] = field(repr=False)

    @property
    def X(self) -> int:
        return len(self.blocks)

    @property
    def bits_per_block(self) -> int:
        return self.config.total_bits

    @cached_property
    def dense(self) -> np.ndarray:
        """(X, N) complex matrix; row ``s`` is block ``s``."""
        if not self.blocks:
            return np.zeros((0, self.config.n_subcarriers), dtype=np.complex128)
        out = np.stack([b.dense for b in self.blocks])
        out.setflags(write=False)
        return out

    @cached_property
    def labels(self) -> np.ndarray:
        """Integer value of each block's bit label."""
        out = np.array([_bits_to_int(b.label) for b in self.blocks], dtype=np.int64)
        out.setflags(write=False)
        return out

    def block_of_bits(self, bits: str) -> Block:
        if len(bits) != self.bits_per_block:
            raise ValueError(f"expected {self.bits_per_block} bits, got {len(bits)}")
        return self.blocks[_bits_to_int(bits)]

    @staticmethod
    def bits_of_block(block: Block) -> str:
        return block.label


def build_codebook(config: SystemConfig) -> Codebook:
    """Enumerate all 2^B blocks; the block ordinal equals its label's value."""
    X = config.n_blocks
    if X > 1 << 22:
        raise ConfigurationError(f"X={X} blocks is too large to enumerate")
    n_used = 1 << config.index_bits
    saps = [unrank_sap(r, config.n_subcarriers, config.n_active) for r in range(n_used)]
    blocks = tuple(_make_block(config, s, saps) for s in range(X))
    return Codebook(config, blocks)
