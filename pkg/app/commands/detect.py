"""
detect: sliding-window encounter detection over a reception corpus
"""
import argparse
import logging

from app.config import PipelineConfig
from app.models import ENCOUNTER_CSV_HEADER
from app.services.ble import within_one_foot_share
from app.services.encounter_detector import detect_corpus, partition_by_participant
from app.storage import load_receptions
from .common import classifier_of, output_storage, write_summary

logger = logging.getLogger(__name__)

NAME = "detect"


def register(subparsers, parents=()) -> argparse.ArgumentParser:
    parser = subparsers.add_parser(NAME, parents=list(parents), help="Detect predicted encounters in BLE receptions")
    parser.add_argument("--receptions", help="Reception JSON-lines file")
    parser.add_argument("--workers", type=int, help="Worker processes (one participant per task)")
    return parser


def run(config: PipelineConfig) -> dict:
    receptions = load_receptions(config.require("receptions"))
    classifier = classifier_of(config)
    streams = partition_by_participant(receptions)
    encounters, corpus = detect_corpus(
        streams, config.detector, classifier, max_workers=config.max_workers,
    )

    storage = output_storage(config)
    storage.write_csv("encounters.csv", ENCOUNTER_CSV_HEADER, (e.to_csv_row() for e in encounters))

    share = within_one_foot_share(encounters, classifier.baselines)
    summary = dict(
        corpus.dict(),
        receptions=len(receptions),
        participants=len(streams),
        within_one_foot_share={k: round(v, 6) for k, v in share.items()},
    )
    return write_summary(storage, NAME, summary)
