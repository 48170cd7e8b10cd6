from teletype.analysis.metrics import (
    METRICS,
    DensityPoint,
    SessionGroup,
    all_tables,
    density_deltas,
    density_points,
    edit_delta_by_kind,
    error_location_breakdown,
    error_popularity,
    errors_by_mode,
    group_sessions,
    mode_distribution,
    module_delta_breakdown,
    records_per_hour,
    session_stats,
    size_stats,
    transition_effect,
)
from teletype.analysis.stats import DistStats, dist_stats, nearest_rank
from teletype.analysis.tables import Root, Table, format_cell, percent

__all__ = [
    "METRICS", "DensityPoint", "SessionGroup", "all_tables", "density_deltas", "density_points",
    "edit_delta_by_kind", "error_location_breakdown", "error_popularity", "errors_by_mode",
    "group_sessions", "mode_distribution", "module_delta_breakdown", "records_per_hour",
    "session_stats", "size_stats", "transition_effect", "DistStats", "dist_stats", "nearest_rank",
    "Root", "Table", "format_cell", "percent",
]
