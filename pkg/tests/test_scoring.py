"""
Tests for detector scoring against ground truth
"""
import pytest

from app.models import Encounter, GroundTruthEncounter, Provider
from app.services.scoring import score_detector, unmatched_truth
from conftest import at


def truth(start_s, end_s, device_id="d1", participant_id="P01"):
    return GroundTruthEncounter(
        participant_id=participant_id, device_id=device_id, provider=Provider.BIRD,
        start=at(start_s), end=at(end_s), min_distance_ft=3.0,
    )


def detected(start_s, end_s, device_id="d1", participant_id="P01"):
    return Encounter(
        participant_id=participant_id, device_id=device_id, provider=Provider.BIRD,
        start=at(start_s), end=at(end_s), packet_count=6, max_rssi_db=-65.0,
    )


class TestScoreDetector:

    def test_perfect_detection(self):
        planted = [truth(0, 10), truth(1000, 1010, "d2")]
        report = score_detector(planted, [detected(0, 10), detected(1000, 1010, "d2")])
        assert report.precision == 1.0
        assert report.recall == 1.0
        assert len(report.matched) == 2

    def test_no_detections(self):
        report = score_detector([truth(0, 10)], [])
        assert report.recall == 0.0
        assert report.precision == 1.0
        assert not report.precision_defined
        assert report.recall_defined

    def test_no_truth(self):
        report = score_detector([], [detected(0, 10)])
        assert report.precision == 0.0
        assert report.recall == 1.0
        assert not report.recall_defined

    def test_partial_overlap_counts(self):
        report = score_detector([truth(0, 10)], [detected(9, 30)])
        assert report.recall == 1.0

    def test_touching_intervals_overlap(self):
        assert score_detector([truth(0, 10)], [detected(10, 20)]).recall == 1.0

    def test_device_and_participant_must_match(self):
        report = score_detector(
            [truth(0, 10)],
            [detected(0, 10, device_id="d2"), detected(0, 10, participant_id="P02")],
        )
        assert report.precision == 0.0
        assert report.recall == 0.0

    def test_mixed(self):
        planted = [truth(0, 10), truth(500, 510), truth(2000, 2010)]
        found = [detected(2, 8), detected(505, 600), detected(5000, 5010)]
        report = score_detector(planted, found)
        assert report.true_positive_detections == 2
        assert report.recovered_truth == 2
        assert report.precision == pytest.approx(2 / 3)
        assert report.recall == pytest.approx(2 / 3)

    def test_one_detection_spanning_two_truths(self):
        report = score_detector([truth(0, 10), truth(100, 110)], [detected(0, 200)])
        assert report.precision == 1.0
        assert report.recall == 1.0

    def test_json_summary(self):
        summary = score_detector([truth(0, 10)], [detected(0, 10)]).to_json_dict()
        assert summary["matched_pairs"] == 1
        assert summary["precision"] == 1.0


def test_unmatched_truth():
    planted = [truth(0, 10), truth(500, 510)]
    report = score_detector(planted, [detected(0, 10)])
    assert unmatched_truth(planted, report) == [planted[1]]
