"""
score: precision and recall of detected encounters against simulated ground truth
"""
import argparse
import logging

from app.config import PipelineConfig
from app.models import TRUTH_CSV_HEADER
from app.services.scoring import score_detector, unmatched_truth
from app.storage import load_encounters, load_truth
from .common import output_storage, write_summary

logger = logging.getLogger(__name__)

NAME = "score"


def register(subparsers, parents=()) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=list(parents), help="Score detected encounters against ground truth")
    parser.add_argument("--truth", help="Ground-truth encounters CSV")
    parser.add_argument("--encounters", help="Detected encounters CSV")
    return parser


def run(config: PipelineConfig) -> dict:
    truth = load_truth(config.require("truth"))
    detected = load_encounters(config.require("encounters"))
    report = score_detector(truth, detected)

    storage = output_storage(config)
    missed = unmatched_truth(truth, report)
    storage.write_csv("missed_truth.csv", TRUTH_CSV_HEADER, (t.to_csv_row() for t in missed))
    if missed:
        logger.info(f"{len(missed)} truth encounters were not detected")
    return write_summary(storage, NAME, report.to_json_dict())
