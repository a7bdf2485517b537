"""Golden-ratio spoke foraging: simulator, gap analysis and experiment harness."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    GOLDEN_ANGLE,
    PHI,
    ArenaConfig,
    GapStructure,
    SpokeSequence,
    cluster_half_angle,
    gap_structure,
    golden_spoke_angle,
    min_spokes_for_max_gap,
    multi_searcher_angle,
    ray_exit_distance,
    ray_hits_disk,
    ray_hits_square,
    verify_three_gap,
)
from .sim import (  # noqa: E402
    ClusterSpec,
    ConfigError,
    CongestionModel,
    SearcherConfig,
    SpokeCapExceeded,
    SwarmConfig,
    TrialResult,
    congestion_delay,
    place_cluster,
    searcher_detection_time,
    simulate_trial,
)
