"""Error-rate analysis of single-group OFDM with index modulation.

Craig-formula pairwise error probabilities, union-bound BLER/BER, the
two-exponential baseline, and a Monte Carlo ML-detection reference.
"""

from .analysis import (
    PepMethod,
    PepValue,
    SnrPoint,
    UnionMethod,
    bit_errors,
    pair_deltas,
    pep_craig,
    pep_exponential,
    pep_quadrature,
    taus_of_pair,
    union_ber,
    union_bler,
    union_bounds,
)
from .codebook import (
    Block,
    Codebook,
    ConfigurationError,
    PepConvention,
    Sap,
    SystemConfig,
    build_codebook,
    enumerate_saps,
    map_index_bits,
    psk_point,
)
from .numerics import (
    AlphaSet,
    DegeneratePoleError,
    QuadratureError,
    QuadratureSpec,
    alpha_product,
    elem_sym_poly,
    integrate,
    solve_alpha_linear,
)
from .simulator import ErrorEstimate, monte_carlo, sample_channel, simulate_trial

__version__ = "0.1.0"
