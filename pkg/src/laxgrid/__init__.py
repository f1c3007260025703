"""laxgrid: dyadic-grid permutation approximations of measure-preserving
maps of the unit square and torus, with the finite diagnostics that make the
approximation quantitative -- approximation-speed profiles, Rokhlin and
two-column towers, rank-one bases, partition entropy, Koopman spectra, and
localized-twist realizations of cell permutations.
"""

from .errors import (
    CapacityExceeded,
    ConfigError,
    CycleTooShort,
    DomainError,
    EqualSizeInfeasible,
    GapTooSmall,
    GridMismatch,
    IoError,
    LaxgridError,
    NoCycle,
    NoPerfectMatching,
    NotAPartition,
    NotCoprime,
    NotCyclic,
    OddOrder,
    PathsIntersect,
    PointsOnBoundary,
    TooSmall,
    UnsupportedGeometry,
)
from .grid import DyadicGrid, RefinedSet, snake_order
from .maps import (
    MeasureMap,
    OverlapMatrix,
    cat_map,
    composition,
    dyadic_permutation,
    identity,
    image_diameters,
    k_baker,
    overlap_matrix,
    parse_map_spec,
    torus_linear,
    translation,
    twist,
)
from .lax import (
    CellPermutation,
    LaxCertificate,
    MODES,
    bicyclize,
    cyclicize,
    hall_matching,
    lax_approximate,
)
from .metrics import (
    ApproxRecord,
    ThetaSpec,
    d_strong_bound,
    d_weak,
    d_weak_map,
    delta_sum,
    delta_sum_iterate,
    epsilon_tolerance,
    parse_theta,
    speed_profile,
)
from .towers import (
    RankOneCertificate,
    Tower,
    TwoColumnTower,
    bezout_split,
    rank_one_base,
    rokhlin_tower,
    two_column_partition,
)
from .entropy import (
    Branch,
    Partition,
    Rect,
    RectModel,
    entropy_rate_estimate,
    horseshoe_entropy_lower,
    join,
    katok_stepin_gap_bound,
    markov_components,
    partition_entropy,
)
from .spectral import (
    KoopmanShift,
    SpectralMeasure,
    cesaro_mixing_diagnostic,
    cesaro_unsigned_average,
    mutual_singularity,
    rigidity_detector,
    spectral_measure_of_vector,
    spectral_type,
)
from .extension import (
    TwistMap,
    jacobian_check,
    move_points,
    permutation_twist_map,
    segment_distance,
)
from .report import ExperimentConfig, run_experiment
from .oracles import ORACLE_SUITES, run_oracle

__version__ = "0.1.0"

__all__ = [
    "ApproxRecord",
    "Branch",
    "CapacityExceeded",
    "CellPermutation",
    "ConfigError",
    "CycleTooShort",
    "DomainError",
    "DyadicGrid",
    "EqualSizeInfeasible",
    "ExperimentConfig",
    "GapTooSmall",
    "GridMismatch",
    "IoError",
    "KoopmanShift",
    "LaxCertificate",
    "LaxgridError",
    "MODES",
    "MeasureMap",
    "NoCycle",
    "NoPerfectMatching",
    "NotAPartition",
    "NotCoprime",
    "NotCyclic",
    "ORACLE_SUITES",
    "OddOrder",
    "OverlapMatrix",
    "Partition",
    "PathsIntersect",
    "PointsOnBoundary",
    "RankOneCertificate",
    "Rect",
    "RectModel",
    "RefinedSet",
    "SpectralMeasure",
    "ThetaSpec",
    "TooSmall",
    "Tower",
    "TwistMap",
    "TwoColumnTower",
    "UnsupportedGeometry",
    "bezout_split",
    "bicyclize",
    "cat_map",
    "cesaro_mixing_diagnostic",
    "cesaro_unsigned_average",
    "composition",
    "cyclicize",
    "d_strong_bound",
    "d_weak",
    "d_weak_map",
    "delta_sum",
    "delta_sum_iterate",
    "dyadic_permutation",
    "entropy_rate_estimate",
    "epsilon_tolerance",
    "hall_matching",
    "horseshoe_entropy_lower",
    "identity",
    "image_diameters",
    "jacobian_check",
    "join",
    "k_baker",
    "katok_stepin_gap_bound",
    "lax_approximate",
    "markov_components",
    "move_points",
    "mutual_singularity",
    "overlap_matrix",
    "parse_map_spec",
    "parse_theta",
    "partition_entropy",
    "permutation_twist_map",
    "rank_one_base",
    "rigidity_detector",
    "rokhlin_tower",
    "run_experiment",
    "run_oracle",
    "segment_distance",
    "snake_order",
    "spectral_measure_of_vector",
    "spectral_type",
    "speed_profile",
    "torus_linear",
    "translation",
    "twist",
    "two_column_partition",
]
