"""kontract: compound matrices, matrix measures, and 2-contraction certificates.

The toolbox covers the pipeline from multilinear algebra (multiplicative
and additive compounds, Kronecker calculus, bridge matrices, blockwise
2-compound formulas) through matrix measures and Metzler small-gain tests
to sampling- and constant-based 2-contraction certificates for feedback
interconnections, with a FitzHugh-Nagumo network as the worked
application.
"""

from .block2 import BlockSpec, add2_block, block_permutation, check_2positive_lti, mult2_block, zv_matrices
from .certify import (
    Box,
    CertReport,
    FeedbackSystem,
    GainConstants,
    Sampler,
    build_S,
    corollary2_certify,
    polynomial_system,
    proof_chain_check,
    smallgain_1contraction,
    smax_matrix,
    theorem1_certify,
)
from .compound import LexIndex, add_compound, add_compound_via_limit, lex_index, mult_compound
from .dense import (
    eigenvalues_general,
    load_matrix,
    matmul,
    minor,
    save_matrix_csv,
    spectral_abscissa,
    symmetric_eigs,
)
from .fhn import (
    FhnParams,
    Trajectory,
    corollary_net_check,
    diffusive_check,
    feedback_system,
    fhn_field,
    fhn_gain_constants,
    fhn_jacobian_blocks,
    find_equilibria,
    simulate,
)
from .kron import block_kron, bridge, commutation_matrix, kron_power, kron_product, kron_sum, kron_sum_k
from .measures import (
    HierPartition,
    NormSpec,
    hier_measure_bound,
    hier_vector_norm,
    induced_norm,
    matrix_measure,
    scaled_measure,
    scaled_norm,
    weighted_measure,
)
from .metzler import (
    MetzlerGraph,
    chain_hurwitz,
    cycle_gain,
    cycle_set_gain,
    diagonal_stability_scaling,
    enumerate_simple_cycles,
    is_hurwitz_small_gain,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
