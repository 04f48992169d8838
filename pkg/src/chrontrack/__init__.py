"""chrontrack: chronological-network community dynamics for event streams.

Turns geolocated event CSVs into weekly grid-cell graphs (chronnets),
detects communities per snapshot by modularity optimization, tracks their
life cycles across snapshots, and flags seasonal resurgences via binary or
neighborhood-weighted Jaccard matching.
"""

__version__ = "0.1.0"

from .chronnet import Snapshot, assign_window, build_snapshots, radius_filter
from .community import Partition, detect_communities, modularity, validate_partition
from .events import FireEvent, filter_events, order_events, parse_events
from .grid import (
    DEFAULT_BOX,
    CellCoord,
    GridSpec,
    StudyBox,
    chebyshev_ring,
    manhattan_distance,
)
from .pipeline import PipelineConfig, run_pipeline
from .synth import PatternSpec, generate_events
from .tracking import (
    CommunityTimeline,
    LifecycleEvent,
    ResurgenceLink,
    binary_jaccard,
    build_timelines,
    find_resurgences,
    match_adjacent,
    membership_weights,
    weighted_jaccard,
)

__all__ = [
    "__version__",
    "assign_window",
    "binary_jaccard",
    "build_snapshots",
    "build_timelines",
    "CellCoord",
    "chebyshev_ring",
    "CommunityTimeline",
    "DEFAULT_BOX",
    "detect_communities",
    "filter_events",
    "find_resurgences",
    "FireEvent",
    "generate_events",
    "GridSpec",
    "LifecycleEvent",
    "manhattan_distance",
    "match_adjacent",
    "membership_weights",
    "modularity",
    "order_events",
    "parse_events",
    "Partition",
    "PatternSpec",
    "PipelineConfig",
    "radius_filter",
    "ResurgenceLink",
    "run_pipeline",
    "Snapshot",
    "StudyBox",
    "validate_partition",
    "weighted_jaccard",
]
