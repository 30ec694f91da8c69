"""
Precision and recall of detected encounters against simulated ground truth
"""
import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Sequence, Tuple

from app.models import Encounter, GroundTruthEncounter, MatchedPair, ScoreReport

logger = logging.getLogger(__name__)


def _overlaps(truth: GroundTruthEncounter, detected: Encounter) -> bool:
    return detected.start <= truth.end and truth.start <= detected.end


def score_detector(
    truth: Iterable[GroundTruthEncounter],
    detected: Iterable[Encounter],
) -> ScoreReport:
    """
    Match detections to truth by (participant, device) and overlapping intervals

    Precision is the share of detections overlapping some truth encounter,
    recall the share of truth encounters overlapped by some detection. With no
    detections precision is reported as 1.0 and flagged undefined; likewise
    recall with no truth.
    """
    truth = list(truth)
    detected = list(detected)

    truth_by_pair: Dict[Tuple[str, str], List[GroundTruthEncounter]] = defaultdict(list)
    for item in truth:
        truth_by_pair[(item.participant_id, item.device_id)].append(item)

    matched: List[MatchedPair] = []
    hit_detections = 0
    recovered = set()
    for detection in sorted(detected, key=lambda e: e.sort_key):
        candidates = truth_by_pair.get((detection.participant_id, detection.device_id), [])
        hits = [i for i, item in enumerate(candidates) if _overlaps(item, detection)]
        if hits:
            hit_detections += 1
        for i in hits:
            item = candidates[i]
            recovered.add((item.participant_id, item.device_id, i))
            matched.append(MatchedPair(
                participant_id=item.participant_id,
                device_id=item.device_id,
                truth_start=item.start,
                detected_start=detection.start,
            ))

    report = ScoreReport(
        n_truth=len(truth),
        n_detected=len(detected),
        true_positive_detections=hit_detections,
        recovered_truth=len(recovered),
        precision=hit_detections / len(detected) if detected else 1.0,
        recall=len(recovered) / len(truth) if truth else 1.0,
        precision_defined=bool(detected),
        recall_defined=bool(truth),
        matched=matched,
    )
    logger.info(
        f"Scored {len(detected)} detections against {len(truth)} truth encounters: "
        f"precision={report.precision:.3f} recall={report.recall:.3f}"
    )
    return report


def unmatched_truth(truth: Sequence[GroundTruthEncounter], report: ScoreReport) -> List[GroundTruthEncounter]:
    """Truth encounters no detection overlapped"""
    hit = {(p.participant_id, p.device_id, p.truth_start) for p in report.matched}
    return [t for t in truth if (t.participant_id, t.device_id, t.start) not in hit]
