"""
analyze: network matching, spatio-temporal frequency distributions and safety metrics
"""
import argparse
import logging
from typing import List

from app.config import PipelineConfig
from app.models import (
    DAY_NAMES,
    METRICS_CSV_HEADER,
    RSSI_GROUPS_CSV_HEADER,
    SEGMENT_CSV_HEADER,
    Keying,
    LocatedEncounter,
    ScheduleCorrelation,
)
from app.services.binning import (
    HOURS_PER_DAY,
    assign_groups,
    frequency_distribution,
    heatmap_geojson,
    hour_of_week,
    hourly_series,
    hourly_series_by_class,
    key_label,
    locate_encounters,
    locate_feedback,
    split_high_low,
    universe_size,
)
from app.services.feedback import filter_study_window
from app.services.geo_graph import SegmentIndex
from app.services.metrics import build_metrics_table, rssi_group_comparison, schedule_correlation
from app.storage import load_encounters, load_feedback, load_schedule
from .common import existing_path, load_network, output_storage, write_summary, zone_of

logger = logging.getLogger(__name__)

NAME = "analyze"

HISTOGRAM_KEYINGS = (Keying.SPACE, Keying.TIME, Keying.WEEK_TIME, Keying.SPACE_TIME)
HISTOGRAM_CSV_HEADER = ("count", "keys")
TOP_KEYS_CSV_HEADER = ("keying", "key", "count")
HOURLY_CSV_HEADER = ("day_of_week", "day", "hour_index", "predicted", "observed", "scheduled")
CLASS_HOURLY_CSV_HEADER = ("functional_class", "day", "hour_index", "encounters")


def register(subparsers, parents=()) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=list(parents), help="Bin encounters on the network and compute safety metrics")
    parser.add_argument("--network", help="GeoJSON street network")
    parser.add_argument("--encounters", help="Predicted encounters CSV")
    parser.add_argument("--feedback", help="Participant feedback CSV (observed encounters)")
    parser.add_argument("--schedule", help="Points-of-interest schedule CSV")
    parser.add_argument("--campus-polygons", dest="campus_polygons", help="GeoJSON campus polygons")
    return parser


def run(config: PipelineConfig) -> dict:
    analysis = config.analysis
    zone = zone_of(config)
    network = load_network(config)
    index = SegmentIndex(network)

    encounters = load_encounters(config.require("encounters"))
    feedback_path = existing_path(config.paths.feedback, "feedback")
    observed = filter_study_window(load_feedback(feedback_path), zone) if feedback_path else []

    predicted = locate_encounters(encounters, index, zone, analysis.max_snap_distance_m)
    located_observed = locate_feedback(observed, index, zone, analysis.max_snap_distance_m)
    if not encounters:
        logger.warning("No predicted encounters to analyze")

    storage = output_storage(config)
    storage.write_csv("segments.csv", SEGMENT_CSV_HEADER, (s.to_csv_row() for s in network))

    table = build_metrics_table(
        predicted, located_observed, network, analysis.mem_method, analysis.pem_formula,
    )
    storage.write_csv("metrics.csv", METRICS_CSV_HEADER, table.csv_rows())

    frequency = {}
    rssi_rows: List[tuple] = []
    top_keys: List[tuple] = []
    for keying in HISTOGRAM_KEYINGS:
        distribution = frequency_distribution(predicted, keying, len(network), analysis.percentiles)
        frequency[keying.value] = distribution.summary()
        storage.write_csv(
            f"histogram_{keying.value}.csv", HISTOGRAM_CSV_HEADER, sorted(distribution.histogram.items()),
        )
        observed_distribution = frequency_distribution(located_observed, keying, len(network), analysis.percentiles)
        frequency[keying.value]["observed"] = observed_distribution.summary()
        storage.write_csv(
            f"histogram_observed_{keying.value}.csv", HISTOGRAM_CSV_HEADER,
            sorted(observed_distribution.histogram.items()),
        )
        ranked = sorted(distribution.counts.items(), key=lambda item: -item[1])[:10]
        top_keys.extend((keying.value, key_label(key), count) for key, count in ranked)

        groups = split_high_low(distribution.counts, analysis.split_rounding)
        frequency[keying.value]["split"] = {
            "low_range": list(groups.low_range) if groups.max_count else None,
            "high_range": list(groups.high_range) if groups.max_count else None,
            "low_keys": len(groups.low),
            "high_keys": len(groups.high),
        }
        stats = rssi_group_comparison(predicted, assign_groups(predicted, keying, groups))
        rssi_rows.extend(item.to_csv_row(keying.value) for item in stats)

    storage.write_json("frequency_summary.json", frequency)
    storage.write_csv("top_keys.csv", TOP_KEYS_CSV_HEADER, top_keys)
    storage.write_csv("rssi_groups.csv", RSSI_GROUPS_CSV_HEADER, rssi_rows)
    storage.write_geojson("heatmap.geojson", heatmap_geojson(predicted, network))

    correlation = _correlation(config, predicted)
    observed_hourly = {(h.day_of_week, h.hour_index): h.encounters for h in hourly_series(located_observed)}
    storage.write_csv("hourly_encounters.csv", HOURLY_CSV_HEADER, (
        (
            item.day_of_week, DAY_NAMES[item.day_of_week], item.hour_index, item.encounters,
            observed_hourly.get((item.day_of_week, item.hour_index), 0), item.scheduled,
        )
        for item in _full_week(predicted, correlation)
    ))
    storage.write_csv("class_hourly.csv", CLASS_HOURLY_CSV_HEADER, _class_hourly_rows(predicted, network))
    storage.write_json("schedule_correlation.json", correlation.to_json_dict())

    zones = universe_size(Keying.SPACE_TIME, len(network))
    logger.info(f"Zone universe: {len(network)} segments x 68 slots = {zones} zones")
    summary = {
        "segments": len(network),
        "total_length_miles": round(network.total_length_miles, 6),
        "segments_by_class": network.class_counts(),
        "zone_universe_size": zones,
        "predicted_encounters": len(encounters),
        "observed_encounters": len(observed),
        "unmatched": {kind.value: count for kind, count in table.unmatched.items()},
        "predicted_outside_study_day": sum(1 for e in predicted if not e.in_window),
        "schedule_correlation_defined": correlation.defined,
        "observed_nonzero_keys": {keying: item["observed"]["nonzero_keys"] for keying, item in frequency.items()},
    }
    return write_summary(storage, NAME, summary)


def _correlation(config: PipelineConfig, predicted: List[LocatedEncounter]) -> ScheduleCorrelation:
    schedule_path = existing_path(config.paths.schedule, "schedule")
    if schedule_path is None:
        logger.warning("No schedule configured; schedule correlation skipped")
        return ScheduleCorrelation(series=hourly_series(predicted), reason="no schedule configured")
    return schedule_correlation(hourly_series(predicted), load_schedule(schedule_path), config.analysis.correlation_days)


def _full_week(predicted: List[LocatedEncounter], correlation: ScheduleCorrelation):
    """Hourly rows for the whole week; scheduled counts come from the correlated days"""
    scheduled = {(h.day_of_week, h.hour_index): h.scheduled for h in correlation.series}
    return [
        item.copy(update={"scheduled": scheduled.get((item.day_of_week, item.hour_index), 0)})
        for item in hourly_series(predicted)
    ]


def _class_hourly_rows(predicted: List[LocatedEncounter], network) -> List[tuple]:
    rows = []
    for name, series in hourly_series_by_class(predicted, network).items():
        for day, day_name in enumerate(DAY_NAMES):
            for hour in range(HOURS_PER_DAY):
                rows.append((name, day_name, hour, series[hour_of_week(day, hour)]))
    return rows
