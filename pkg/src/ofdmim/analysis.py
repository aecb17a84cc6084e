"""
Pairwise error probabilities and union bounds for OFDM-IM over i.i.d.
Rayleigh subchannels.

For a pair of blocks the conditional PEP is ``Q(sqrt(c * sum_n G_n Delta_n))``.
Averaging over exponential gains through Craig's form of Q gives

    PEP = (1/pi) int_0^{pi/2} prod_n (1 + tau_n / sin^2 t)^{-1} dt

which is evaluated either by partial fractions (distinct tau) or by
quadrature.  The two-exponential approximation of Q is kept as a baseline.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .codebook import Block, Codebook, SystemConfig
from .numerics import (
    DEFAULT_QUADRATURE,
    DegeneratePoleError,
    QuadratureSpec,
    alpha_product,
    integrate,
    taus_distinct,
)

# max ratio sum|alpha_n term_n| / |sum alpha_n term_n| accepted from the
# closed form; beyond it the residue sum loses more than ~1e-10 relative
CANCELLATION_LIMIT = 1e5

# exponential approximation of Q: sum_i rho_i exp(-eta_i x^2)
EXP_APPROX_WEIGHTS = (1.0 / 12.0, 1.0 / 4.0)
EXP_APPROX_RATES = (1.0 / 2.0, 2.0 / 3.0)

# decimals kept when grouping squared distances into profiles
_DELTA_DECIMALS = 12


@dataclass(frozen=True)
class SnrPoint:
    """Transmit-power-to-noise ratio P_t/N_0, stored in dB."""

    db: float

    def __post_init__(self):
        db = float(self.db)
        if not math.isfinite(db):
            raise ValueError(f"SNR must be finite, got {self.db}")
        object.__setattr__(self, "db", db)

    @property
    def linear(self) -> float:
        return 10.0 ** (self.db / 10.0)

    @classmethod
    def from_linear(cls, rho: float) -> "SnrPoint":
        if not rho > 0:
            raise ValueError(f"linear SNR must be positive, got {rho}")
        return cls(10.0 * math.log10(rho))


class PepMethod(str, enum.Enum):
    CRAIG_CLOSED_FORM = "craig-closed-form"
    CRAIG_QUADRATURE = "craig-quadrature"
    EXPONENTIAL_APPROX = "exponential"


class UnionMethod(str, enum.Enum):
    CRAIG = "craig"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class PepValue:
    value: float
    method: PepMethod

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class PairProfile:
    from_ordinal: int
    to_ordinal: int
    deltas: np.ndarray
    bit_errors: int


def _same_codebook(a: Block, b: Block) -> None:
    if a.n_subcarriers != b.n_subcarriers or len(a.symbols) != len(b.symbols) \
            or len(a.label) != len(b.label):
        raise ValueError("blocks come from different system configurations")


def pair_deltas(a: Block, b: Block) -> np.ndarray:
    """Squared modulus of the dense difference, per subcarrier."""
    _same_codebook(a, b)
    d = a.dense - b.dense
    return d.real ** 2 + d.imag ** 2


def bit_errors(a: Block, b: Block) -> int:
    """Hamming distance between the labels of two distinct blocks."""
    _same_codebook(a, b)
    if a.label == b.label:
        raise ValueError("bit_errors needs two distinct blocks")
    return sum(x != y for x, y in zip(a.label, b.label))


def pair_profile(a: Block, b: Block) -> PairProfile:
    return PairProfile(a.ordinal, b.ordinal, pair_deltas(a, b), bit_errors(a, b))


def taus_of_pair(deltas: Sequence[float], config: SystemConfig, snr: SnrPoint) -> np.ndarray:
    """
    Effective tau values of a block pair.

    ``tau = rho * mu * Delta / (c * K)`` with ``c = 4`` (standard) or ``2``
    (paper-literal); subcarriers with ``Delta = 0`` contribute a unit factor
    and are dropped.
    """
    d = np.asarray(deltas, dtype=np.float64)
    if np.any(d < 0):
        raise ValueError("squared distances must be non-negative")
    d = d[d > 0]
    if d.size == 0:
        raise ValueError("all-zero deltas: a block is not in error against itself")
    c = config.pep_convention.tau_divisor
    return snr.linear * config.mean_channel_gain * d / (c * config.n_active)


def _positive_taus(taus) -> np.ndarray:
    t = np.asarray(taus, dtype=np.float64).ravel()
    if t.size == 0:
        raise ValueError("need at least one tau")
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError(f"tau values must be finite and non-negative, got {t}")
    return t[t > 0]


def single_branch_pep(tau: float) -> float:
    """(1/pi) int_0^{pi/2} (1 + tau csc^2)^{-1} = (1/2)(1 - sqrt(tau/(1+tau))),
    written without the cancellation of the difference form."""
    return 0.5 / (1.0 + tau + math.sqrt(tau * (1.0 + tau)))


def pep_craig_closed_form(taus: Sequence[float]) -> float:
    """Partial-fraction evaluation; raises DegeneratePoleError on repeated tau."""
    t = _positive_taus(taus)
    if t.size == 0:
        return 0.5
    alpha = alpha_product(t).values
    return math.fsum(a * single_branch_pep(x) for a, x in zip(alpha, t))


def pep_quadrature(taus: Sequence[float], spec: QuadratureSpec = DEFAULT_QUADRATURE) -> PepValue:
    """
    Average PEP by direct quadrature of the Craig/MGF integrand.

    The integrand is normalised by its value at pi/2, so ``spec.abs_tol``
    acts as a relative tolerance on the result.
    """
    t = _positive_taus(taus)
    if t.size == 0:
        return PepValue(0.5, PepMethod.CRAIG_QUADRATURE)
    peak = 1.0 / (1.0 + t)
    tt = t[:, None]

    def f(theta):
        s2 = np.sin(theta) ** 2
        return np.prod((s2 / (s2 + tt)) / peak[:, None], axis=0)

    val = integrate(f, 0.0, math.pi / 2, spec) / math.pi
    return PepValue(val * float(np.prod(peak)), PepMethod.CRAIG_QUADRATURE)


def pep_craig(taus: Sequence[float], spec: QuadratureSpec = DEFAULT_QUADRATURE) -> PepValue:
    """
    Exact (Craig-formula) average PEP for a tau vector.

    Uses the partial-fraction closed form when the tau are pairwise distinct
    and the residue sum does not cancel badly; otherwise (repeated tau, or
    high diversity at high SNR where the terms nearly cancel) falls back to
    quadrature.
    """
    t = _positive_taus(taus)
    if t.size == 0:
        return PepValue(0.5, PepMethod.CRAIG_CLOSED_FORM)
    if taus_distinct(t):
        alpha = alpha_product(t).values
        terms = [a * single_branch_pep(x) for a, x in zip(alpha, t)]
        val = math.fsum(terms)
        if val > 0 and math.fsum(abs(v) for v in terms) <= CANCELLATION_LIMIT * val:
            return PepValue(val, PepMethod.CRAIG_CLOSED_FORM)
    return pep_quadrature(t, spec)


def pep_exponential(taus: Sequence[float]) -> PepValue:
    """Baseline PEP from the two-exponential approximation of Q."""
    t = _positive_taus(taus)
    val = 0.0
    for rho, eta in zip(EXP_APPROX_WEIGHTS, EXP_APPROX_RATES):
        val += rho * float(np.prod(1.0 / (1.0 + 2.0 * eta * t)))
    return PepValue(val, PepMethod.EXPONENTIAL_APPROX)


def _popcount(x: np.ndarray) -> np.ndarray:
    b = np.unpackbits(np.ascontiguousarray(x, dtype="<u8").view(np.uint8))
    return b.reshape(*x.shape, 64).sum(axis=-1, dtype=np.int64)


@dataclass(frozen=True)
class SpectrumEntry:
    """All ordered pairs sharing one multiset of nonzero squared distances."""

    deltas: tuple[float, ...]
    pairs: int
    bit_errors: int


@lru_cache(maxsize=16)
def distance_spectrum(codebook: Codebook) -> tuple[SpectrumEntry, ...]:
    """
    Group the X(X-1) ordered pairs by their sorted nonzero deltas.

    A pair's PEP depends only on that multiset, so the union bounds need one
    PEP per entry.  Counts are exact integers, so the grouping is independent
    of how the pair loop is chunked.
    """
    C = codebook.dense
    labels = codebook.labels.astype(np.uint64)
    X, N = C.shape
    rows = max(1, (1 << 22) // max(1, X * N))
    acc_pairs: dict[tuple, int] = defaultdict(int)
    acc_bits: dict[tuple, int] = defaultdict(int)
    for start in range(0, X, rows):
        stop = min(X, start + rows)
        diff = C[start:stop, None, :] - C[None, :, :]
        d = np.round(diff.real ** 2 + diff.imag ** 2, _DELTA_DECIMALS)
        d = np.sort(d, axis=-1)
        bits = _popcount(labels[start:stop, None] ^ labels[None, :])
        keep = bits > 0
        keys = np.concatenate([d[keep], bits[keep][:, None].astype(np.float64)], axis=1)
        uniq, counts = np.unique(keys, axis=0, return_counts=True)
        for row, cnt in zip(uniq, counts):
            prof = tuple(float(v) for v in row[:N] if v > 0)
            acc_pairs[prof] += int(cnt)
            acc_bits[prof] += int(cnt) * int(row[N])
    return tuple(SpectrumEntry(k, acc_pairs[k], acc_bits[k]) for k in sorted(acc_pairs))


@dataclass(frozen=True)
class UnionBound:
    bler: float
    ber: float
    method: UnionMethod


def union_bounds(codebook: Codebook, snr: SnrPoint, method: UnionMethod | str = UnionMethod.CRAIG,
                 spec: QuadratureSpec = DEFAULT_QUADRATURE) -> UnionBound:
    """Union-bound average BLER and BER in one pass over the spectrum.

    Values are not clamped; at low SNR the BLER bound exceeds 1.
    """
    method = UnionMethod(method)
    cfg = codebook.config
    bler_terms, ber_terms = [], []
    for entry in distance_spectrum(codebook):
        taus = taus_of_pair(entry.deltas, cfg, snr)
        if method is UnionMethod.CRAIG:
            p = pep_craig(taus, spec).value
        else:
            p = pep_exponential(taus).value
        bler_terms.append(entry.pairs * p)
        ber_terms.append(entry.bit_errors * p)
    X, B = codebook.X, codebook.bits_per_block
    return UnionBound(math.fsum(bler_terms) / X, math.fsum(ber_terms) / (X * B), method)


def union_bler(codebook: Codebook, snr: SnrPoint, method: UnionMethod | str = UnionMethod.CRAIG,
               spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return union_bounds(codebook, snr, method, spec).bler


def union_ber(codebook: Codebook, snr: SnrPoint, method: UnionMethod | str = UnionMethod.CRAIG,
              spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return union_bounds(codebook, snr, method, spec).ber


__all__ = [
    "DegeneratePoleError", "PairProfile", "PepMethod", "PepValue", "SnrPoint",
    "SpectrumEntry", "UnionBound", "UnionMethod", "bit_errors", "distance_spectrum",
    "pair_deltas", "pair_profile", "pep_craig", "pep_craig_closed_form",
    "pep_exponential", "pep_quadrature", "single_branch_pep", "taus_of_pair",
    "union_ber", "union_bler", "union_bounds",
]
