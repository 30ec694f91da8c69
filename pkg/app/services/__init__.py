"""
Services package
"""
from .ble import ProviderClassifier, classify_provider, estimate_distance, parse_advertisement, proximity_class
from .encounter_detector import EncounterDetector, detect_corpus, detect_encounters, partition_by_participant
from .feedback import (
    build_profile,
    classify_startle,
    filter_study_window,
    gate_prompts,
    link_observed_to_predicted,
    summarize_direction_matrix,
)
from .geo_graph import AtomicNetwork, SegmentIndex, assign_campus, build_graph, make_grid_network, snap_to_segment
from .binning import bin_hourly, bin_time, frequency_distribution, hourly_series, split_high_low
from .metrics import build_metrics_table, mem, pem, rssi_group_comparison, schedule_correlation, tes
from .scoring import score_detector
from .simulator import FieldSimulator, SimulationResult, simulate

__all__ = [
    "ProviderClassifier",
    "classify_provider",
    "estimate_distance",
    "parse_advertisement",
    "proximity_class",
    "EncounterDetector",
    "detect_corpus",
    "detect_encounters",
    "partition_by_participant",
    "build_profile",
    "classify_startle",
    "filter_study_window",
    "gate_prompts",
    "link_observed_to_predicted",
    "summarize_direction_matrix",
    "AtomicNetwork",
    "SegmentIndex",
    "assign_campus",
    "build_graph",
    "make_grid_network",
    "snap_to_segment",
    "bin_hourly",
    "bin_time",
    "frequency_distribution",
    "hourly_series",
    "split_high_low",
    "build_metrics_table",
    "mem",
    "pem",
    "rssi_group_comparison",
    "schedule_correlation",
    "tes",
    "score_detector",
    "FieldSimulator",
    "SimulationResult",
    "simulate",
]
