"""
simulate: run the synthetic campus and write its reception, feedback and truth files
"""
import argparse
import logging

from app.config import PipelineConfig
from app.models import FEEDBACK_CSV_HEADER, TRUTH_CSV_HEADER
from app.services.simulator import simulate
from app.storage import SCHEDULE_CSV_HEADER, load_geojson, load_schedule, schedule_rows
from .common import classifier_of, existing_path, output_storage, write_summary

logger = logging.getLogger(__name__)

NAME = "simulate"


def register(subparsers, parents=()) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=list(parents), help="Generate synthetic receptions, feedback and ground truth")
    parser.add_argument("--network", help="GeoJSON street network (default: synthetic grid)")
    parser.add_argument("--schedule", help="Points-of-interest schedule CSV (default: built-in class schedule)")
    return parser


def run(config: PipelineConfig) -> dict:
    """
    Simulate and write receptions.jsonl, feedback.csv, truth.csv, network.geojson and schedule.csv

    Raises:
        ConfigError: If a configured network or schedule path does not exist
    """
    sim = config.simulation
    network_path = existing_path(sim.network or config.paths.network, "network")
    schedule_path = existing_path(sim.schedule or config.paths.schedule, "schedule")
    network = load_geojson(network_path) if network_path else None
    schedule = load_schedule(schedule_path) if schedule_path else None

    logger.info(f"Simulating {sim.duration_days} days from {sim.start_date} with seed {sim.seed}")
    result = simulate(sim, network=network, schedule=schedule, baselines=classifier_of(config).baselines)

    storage = output_storage(config)
    storage.write_jsonl("receptions.jsonl", (r.to_json_dict() for r in result.all_receptions()))
    storage.write_csv("feedback.csv", FEEDBACK_CSV_HEADER, (r.to_csv_row() for r in result.feedback))
    storage.write_csv("truth.csv", TRUTH_CSV_HEADER, (t.to_csv_row() for t in result.truth))
    storage.write_geojson("network.geojson", result.network.to_geojson())
    storage.write_csv("schedule.csv", SCHEDULE_CSV_HEADER, schedule_rows(result.schedule))

    summary = dict(result.summary(), seed=sim.seed, segments=len(result.network))
    return write_summary(storage, NAME, summary)
