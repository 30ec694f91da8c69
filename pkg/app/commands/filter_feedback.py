"""
filter-feedback: study-window filtering, direction matrix and heart-rate startle of observed encounters
"""
import argparse
import logging
from collections import defaultdict
from typing import Dict, List

from app.config import PipelineConfig
from app.models import FEEDBACK_CSV_HEADER, FeedbackRecord, HeartRateProfile
from app.services.feedback import (
    build_profiles,
    classify_startle,
    elevated_fraction,
    filter_study_window,
    link_observed_to_predicted,
    summarize_direction_matrix,
)
from app.storage import load_encounters, load_feedback, load_receptions
from .common import classifier_of, existing_path, output_storage, write_summary, zone_of

logger = logging.getLogger(__name__)

NAME = "filter-feedback"
SUMMARY_NAME = "feedback"

PROFILE_CSV_HEADER = (
    "participant_id", "n_samples", "modal_low", "modal_high", "band_low", "band_high", "low_confidence",
)
STARTLE_CSV_HEADER = ("participant_id", "iso_time", "provider", "q_moving", "heart_rate_bpm", "band_high", "startle")
LINK_CSV_HEADER = ("participant_id", "iso_time", "device_id", "max_rssi_db", "proximity", "candidates", "ambiguous")


def register(subparsers, parents=()) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=list(parents), help="Filter observed encounters and classify heart-rate startle")
    parser.add_argument("--feedback", help="Participant feedback CSV")
    parser.add_argument("--receptions", help="Reception JSON-lines file supplying heart-rate samples")
    parser.add_argument("--encounters", help="Predicted encounters CSV to link observed records to")
    return parser


def _heart_rate_samples(config: PipelineConfig, records: List[FeedbackRecord]) -> Dict[str, List[float]]:
    samples: Dict[str, List[float]] = defaultdict(list)
    receptions_path = existing_path(config.paths.receptions, "receptions")
    if receptions_path is not None:
        for reception in load_receptions(receptions_path):
            if reception.heart_rate_bpm is not None:
                samples[reception.receiver_id].append(reception.heart_rate_bpm)
    else:
        logger.warning("No receptions configured; heart-rate profiles built from feedback samples only")
        for record in records:
            if record.heart_rate_bpm is not None:
                samples[record.participant_id].append(record.heart_rate_bpm)
    return dict(samples)


def _profile_row(profile: HeartRateProfile) -> tuple:
    return (
        profile.participant_id,
        len(profile.samples),
        f"{profile.modal_bin[0]:.1f}",
        f"{profile.modal_bin[1]:.1f}",
        f"{profile.band_low:.2f}",
        f"{profile.band_high:.2f}",
        "yes" if profile.low_confidence else "no",
    )


def run(config: PipelineConfig) -> dict:
    records = load_feedback(config.require("feedback"))
    zone = zone_of(config)
    filtered = filter_study_window(records, zone)
    logger.info(f"Kept {len(filtered)} of {len(records)} feedback records in the study window")

    storage = output_storage(config)
    storage.write_csv("feedback_filtered.csv", FEEDBACK_CSV_HEADER, (r.to_csv_row() for r in filtered))

    matrix = summarize_direction_matrix(filtered)
    storage.write_json("direction_matrix.json", matrix.to_json_dict())

    fb = config.feedback
    profiles = build_profiles(
        _heart_rate_samples(config, records),
        bin_width_bpm=fb.bin_width_bpm,
        spread_multiplier=fb.spread_multiplier,
        min_samples=fb.min_samples,
    )
    storage.write_csv("heart_rate_profiles.csv", PROFILE_CSV_HEADER, (_profile_row(p) for p in profiles.values()))

    startle_rows = []
    for record in filtered:
        profile = profiles.get(record.participant_id)
        startle = classify_startle(record, profile).value if profile else "Unknown"
        startle_rows.append((
            record.participant_id,
            record.timestamp.isoformat(timespec="milliseconds"),
            record.provider.value,
            "yes" if record.q_moving else "no",
            "" if record.heart_rate_bpm is None else f"{record.heart_rate_bpm:.1f}",
            "" if profile is None else f"{profile.band_high:.2f}",
            startle,
        ))
    storage.write_csv("startle.csv", STARTLE_CSV_HEADER, startle_rows)

    moving = [r for r in filtered if r.q_moving]
    summary = {
        "records": len(records),
        "filtered_records": len(filtered),
        "moving_records": len(moving),
        "profiles": len(profiles),
        "low_confidence_profiles": sum(1 for p in profiles.values() if p.low_confidence),
        "elevated_fraction": _rounded(elevated_fraction(filtered, profiles)),
        "elevated_fraction_moving": _rounded(elevated_fraction(moving, profiles)),
        "approaching_from_behind": matrix.approaching_from_behind,
    }

    encounters_path = existing_path(config.paths.encounters, "encounters")
    if encounters_path is not None:
        links = link_observed_to_predicted(
            filtered, load_encounters(encounters_path), fb.link_tolerance_s, classifier_of(config).baselines,
        )
        storage.write_csv("feedback_links.csv", LINK_CSV_HEADER, (
            (
                link.participant_id,
                link.feedback_time.isoformat(timespec="milliseconds"),
                link.device_id or "",
                "" if link.max_rssi_db is None else f"{link.max_rssi_db:.2f}",
                "" if link.proximity is None else link.proximity.value,
                link.candidates,
                "yes" if link.ambiguous else "no",
            )
            for link in links
        ))
        summary["linked_records"] = sum(1 for link in links if link.device_id is not None)
        summary["ambiguous_links"] = sum(1 for link in links if link.ambiguous)

    return write_summary(storage, NAME, summary, stem=SUMMARY_NAME)


def _rounded(value):
    return None if value is None else round(value, 6)
