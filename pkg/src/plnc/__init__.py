"""Adaptive physical-layer network coding for the two-way relay channel.

Exact Gaussian-integer arithmetic, PAM/QAM/PSK signal sets, singular fade
state enumeration and counting, Latin-square relay maps (standard
constructions, symmetry transports, constrained completion), adaptive map
selection by minimum cluster distance, and a deterministic Monte-Carlo BER
simulator for the two-phase relaying protocol.
"""

from .gaussian import (
    GaussianInt,
    GaussianRational,
    UNITS,
    gi_norm,
    gi_gcd,
    gi_is_unit,
    gi_divides,
    gi_relatively_prime,
    gi_factorize,
    gr_reduce,
    restricted_totient,
)
from .constellation import (
    Constellation,
    DifferenceConstellation,
    build_pam,
    build_qam,
    build_psk,
    build_constellation,
    difference_constellation,
    delta_plus,
)
from .fades import (
    FadeState,
    ConstraintSet,
    effective_constellation,
    is_singular_fade,
    enumerate_singular_fades,
    constraints_for_fade,
    scaled_delta_plus,
    coprime_partner_counts,
    count_pam,
    count_qam,
    count_qam_upper_bound,
    count_psk,
)
from .latin import (
    LatinSquare,
    PartialSquare,
    CompletionResult,
    Codebook,
    CodebookError,
    is_latin,
    exclusive_law_holds,
    xor_square,
    pam_standard,
    qam_standard,
    transpose,
    permute_columns,
    rotate_columns,
    square_removes_fade,
    complete_cpls,
    build_codebook,
)
from .clustering import (
    Clustering,
    SelectionIndex,
    dmin_effective,
    min_cluster_distance,
    pair_partition_cache,
    select_clustering,
)
from .simulate import (
    SimConfig,
    BerPoint,
    load_sim_config,
    bc_constellation,
    sample_fades,
    run_ber,
    format_ber_csv,
    exact_decode_check,
)

__version__ = "0.1.0"
