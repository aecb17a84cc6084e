"""
Numerical kernels behind the closed-form error analysis.

``integrate`` is an adaptive Gauss-Kronrod (G7/K15) rule; it serves as the
reference path for every closed form in :mod:`ofdmim.analysis`.  The rest of
the module deals with the partial-fraction weights of

    prod_n 1 / (1 + tau_n s)  =  sum_n alpha_n / (1 + tau_n s),

computed either from the residues directly (``alpha_product``) or from the
coefficient-matching linear system (``solve_alpha_linear``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# relative gap below which two poles are treated as one
DISTINCT_RTOL = 1e-9

# G7/K15 abscissae and weights on [-1, 1] (QUADPACK qk15 tables)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1:7:2] = _WG[:3]
_GWEIGHTS[7] = _WG[3]
_GWEIGHTS[9:14:2] = _WG[2::-1]


class QuadratureError(RuntimeError):
    """Adaptive subdivision hit ``max_depth`` before meeting the tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class DegeneratePoleError(ValueError):
    """Two or more tau values coincide (or nearly so); the distinct-pole
    decomposition does not apply and the quadrature path must be used."""


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    max_depth: int = 50

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class AlphaSet:
    """Partial-fraction weights, one per (distinct) tau."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def total(self) -> float:
        return float(np.sum(self.values))


def _eval(f, x):
    try:
        y = f(x)
    except TypeError:
        y = None
    if y is None or np.shape(y) != x.shape:
        # scalar-only integrand
        y = np.array([f(float(t)) for t in x])
    return np.asarray(y, dtype=np.float64)


def _gk15(f, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx = _eval(f, c + h * _NODES)
    k = h * np.dot(_KWEIGHTS, fx)
    g = h * np.dot(_GWEIGHTS, fx)
    return k, abs(k - g)


def integrate(f: Callable, a: float, b: float,
              spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """
    Adaptive Gauss-Kronrod integral of ``f`` over [a, b].

    Each panel is evaluated with the 15-point Kronrod rule and its error is
    taken as ``|K15 - G7|``.  Panels whose error exceeds their share of
    ``spec.abs_tol`` (proportional to width) are bisected.  ``f`` is called
    with a numpy array of 15 abscissae, none of which is an endpoint, so
    integrands with removable singularities at a or b are fine.

    Raises
    ------
    QuadratureError
        if a panel needs more than ``spec.max_depth`` bisections; the
        exception carries the best estimate found.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    width = b - a
    err_total = 0.0
    failed = False
    stack = [(a, b, 0)]
    parts = []
    while stack:
        lo, hi, depth = stack.pop()
        val, err = _gk15(f, lo, hi)
        if err <= spec.abs_tol * (hi - lo) / width or not np.isfinite(val):
            parts.append(val)
            err_total += err
            continue
        if depth >= spec.max_depth:
            failed = True
            parts.append(val)
            err_total += err
            continue
        mid = 0.5 * (lo + hi)
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    total = math.fsum(parts)
    if not np.isfinite(total):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]", total, np.inf)
    if failed:
        raise QuadratureError(
            f"no convergence within depth {spec.max_depth} (error ~{err_total:.3g})",
            total, err_total)
    return total


def elem_sym_poly(values: Sequence[float], i: int) -> float:
    """Sum over all i-element subsets of the product of their members.

    >>> elem_sym_poly([1, 2, 3], 2)
    11.0
    """
    v = [float(x) for x in values]
    if not 0 <= i <= len(v):
        raise ValueError(f"i={i} out of range for {len(v)} values")
    e = np.zeros(i + 1)
    e[0] = 1.0
    for x in v:
        # descending j so each value enters a subset at most once
        for j in range(i, 0, -1):
            e[j] += x * e[j - 1]
    return float(e[i])


def _check_taus(taus) -> np.ndarray:
    t = np.asarray(taus, dtype=np.float64).ravel()
    if t.size == 0:
        raise ValueError("need at least one tau")
    if not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise ValueError(f"tau values must be finite and positive, got {t}")
    s = np.sort(t)
    gaps = np.diff(s)
    if np.any(gaps <= DISTINCT_RTOL * s[1:]):
        raise DegeneratePoleError(f"tau values are not pairwise distinct: {t}")
    return t


def taus_distinct(taus) -> bool:
    try:
        _check_taus(taus)
    except DegeneratePoleError:
        return False
    return True


def alpha_product(taus: Sequence[float]) -> AlphaSet:
    """Residue weights alpha_n = prod_{m != n} tau_n / (tau_n - tau_m)."""
    t = _check_taus(taus)
    n = t.size
    alpha = np.ones(n)
    for j in range(n):
        for m in range(n):
            if m != j:
                alpha[j] *= t[j] / (t[j] - t[m])
    return AlphaSet(alpha)


def alpha_matrix(taus: Sequence[float]) -> np.ndarray:
    """Coefficient-matching matrix: first row ones, row i (i >= 1) holds the
    degree-i elementary symmetric sums of tau with column j left out."""
    t = np.asarray(taus, dtype=np.float64)
    n = t.size
    A = np.empty((n, n))
    for j in range(n):
        rest = np.delete(t, j)
        e = np.zeros(n)
        e[0] = 1.0
        for x in rest:
            e[1:] = e[1:] + x * e[:-1]
        A[:, j] = e
    return A


def solve_alpha_linear(taus: Sequence[float]) -> AlphaSet:
    """Solve A alpha = (1, 0, ..., 0) for the partial-fraction weights.

    Rows are scaled to unit max-norm before the LU solve; row i of A grows
    like tau^i, which otherwise dominates the conditioning.
    """
    t = _check_taus(taus)
    A = alpha_matrix(t)
    b = np.zeros(t.size)
    b[0] = 1.0
    scale = np.max(np.abs(A), axis=1)
    As = A / scale[:, None]
    bs = b / scale
    if np.linalg.cond(As) > 1.0 / DISTINCT_RTOL:
        raise DegeneratePoleError(f"coefficient system is numerically singular for tau={t}")
    return AlphaSet(np.linalg.solve(As, bs))
