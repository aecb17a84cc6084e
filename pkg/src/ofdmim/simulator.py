"""
Monte Carlo reference for the analytic error rates.

Model per trial: ``y = sqrt(rho/K) * H x + w`` with ``h_n ~ CN(0, mu)`` and
``w_n ~ CN(0, 1)``, detected by exhaustive ML search over the codebook.

Randomness
----------
Trials are generated in fixed-size chunks of ``CHUNK_TRIALS``.  Chunk ``i``
of a run with seed ``s`` draws from ``PCG64(SeedSequence(s, spawn_key=(i,)))``
in the order: transmitted ordinals, channel (real, imag), noise (real, imag).
Chunks are therefore independent streams and a run gives the same counts
whether chunks are processed serially or by several workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .analysis import SnrPoint
from .codebook import Block, Codebook

CHUNK_TRIALS = 1 << 16
Z95 = 1.96


@dataclass(frozen=True)
class ChannelRealization:
    coefficients: np.ndarray

    @property
    def gains(self) -> np.ndarray:
        h = self.coefficients
        return h.real ** 2 + h.imag ** 2


@dataclass(frozen=True)
class ErrorEstimate:
    trials: int
    block_errors: int
    bit_errors: int
    bits_per_block: int

    @property
    def bler_hat(self) -> float:
        return self.block_errors / self.trials

    @property
    def ber_hat(self) -> float:
        return self.bit_errors / (self.trials * self.bits_per_block)

    @property
    def bler_ci95(self) -> float:
        p = self.bler_hat
        return Z95 * math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def ber_ci95(self) -> float:
        # bits are counted as trials*B Bernoulli samples
        p = self.ber_hat
        return Z95 * math.sqrt(p * (1.0 - p) / (self.trials * self.bits_per_block))


def _complex_normal(rng: np.random.Generator, shape, variance: float) -> tuple[np.ndarray, np.ndarray]:
    sd = math.sqrt(variance / 2.0)
    re = rng.standard_normal(shape) * sd
    im = rng.standard_normal(shape) * sd
    return re, im


def sample_channel(n: int, mu: float, rng: np.random.Generator) -> ChannelRealization:
    """N i.i.d. CN(0, mu) coefficients, i.e. exponential gains with mean mu."""
    if not mu > 0:
        raise ValueError(f"mean channel gain must be positive, got {mu}")
    re, im = _complex_normal(rng, n, mu)
    return ChannelRealization(re + 1j * im)


def _codebook_parts(codebook: Codebook):
    C = codebook.dense
    return np.ascontiguousarray(C.real), np.ascontiguousarray(C.imag)


def simulate_trial(tx: Block, codebook: Codebook, snr: SnrPoint, rng: np.random.Generator,
                   noiseless: bool = False, backend: str = "auto") -> int:
    """One transmission of ``tx``; returns the ML-detected ordinal.

    ``noiseless=True`` forces w = 0 (test hook).
    """
    if not 0 <= tx.ordinal < codebook.X or codebook.blocks[tx.ordinal] != tx:
        raise ValueError("transmitted block is not a member of the codebook")
    cfg = codebook.config
    N = cfg.n_subcarriers
    h = sample_channel(N, cfg.mean_channel_gain, rng).coefficients
    if noiseless:
        wr = wi = np.zeros(N)
    else:
        wr, wi = _complex_normal(rng, N, 1.0)
    cr, ci = _codebook_parts(codebook)
    detect = _kernels.get_detector(backend)
    out = detect(cr, ci, np.array([tx.ordinal], dtype=np.int64),
                 np.ascontiguousarray(h.real)[None, :], np.ascontiguousarray(h.imag)[None, :],
                 np.asarray(wr, dtype=np.float64)[None, :], np.asarray(wi, dtype=np.float64)[None, :],
                 math.sqrt(snr.linear / cfg.n_active))
    return int(out[0])


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _run_chunk(codebook, parts, detect, scale, seed, index, size):
    cfg = codebook.config
    rng = chunk_rng(seed, index)
    shape = (size, cfg.n_subcarriers)
    tx = rng.integers(0, codebook.X, size=size, dtype=np.int64)
    hr, hi = _complex_normal(rng, shape, cfg.mean_channel_gain)
    wr, wi = _complex_normal(rng, shape, 1.0)
    detected = detect(parts[0], parts[1], tx, hr, hi, wr, wi, scale)
    wrong = detected != tx
    labels = codebook.labels
    flips = np.bitwise_xor(labels[tx[wrong]], labels[detected[wrong]]).astype("<u8")
    nbits = int(np.unpackbits(flips.view(np.uint8)).sum()) if flips.size else 0
    return int(wrong.sum()), nbits


def monte_carlo(codebook: Codebook, snr: SnrPoint, trials: int, seed: int,
                backend: str = "auto", workers: int = 1) -> ErrorEstimate:
    """
    Estimate BLER and BER by simulation.

    Transmitted blocks are uniform over the codebook (equiprobable bits).
    Bit errors are the Hamming distance between transmitted and detected
    labels.  Results are bit-exact for fixed (codebook, snr, trials, seed)
    regardless of ``backend`` and ``workers``.
    """
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials}")
    trials = int(trials)
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    detect = _kernels.get_detector(backend)
    parts = _codebook_parts(codebook)
    scale = math.sqrt(snr.linear / codebook.config.n_active)
    sizes = [min(CHUNK_TRIALS, trials - s) for s in range(0, trials, CHUNK_TRIALS)]

    def job(i):
        return _run_chunk(codebook, parts, detect, scale, seed, i, sizes[i])

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, range(len(sizes))))
    else:
        results = [job(i) for i in range(len(sizes))]
    block_errors = sum(r[0] for r in results)
    bit_errors = sum(r[1] for r in results)
    return ErrorEstimate(trials, block_errors, bit_errors, codebook.bits_per_block)
