"""
Tests for observed-encounter handling: prompt gating, filtering, startle and linking
"""
from datetime import datetime, timezone

import numpy as np
import pytest

from app.exceptions import DataError
from app.models import Encounter, Provider, ProximityClass, StartleClass
from app.services.feedback import (
    build_profile,
    build_profiles,
    classify_startle,
    elevated_fraction,
    filter_study_window,
    gate_prompts,
    in_study_window,
    link_observed_to_predicted,
    prompt_count_bound,
    summarize_direction_matrix,
)
from conftest import CHICAGO, at, feedback

PROFILE_SAMPLES = [72.0] * 20 + [68.0] * 10 + [80.0] * 5 + [100.0]


def encounter(start_s, end_s, device_id="lime-1", provider=Provider.LIME, rssi=-60.0, participant_id="P01"):
    return Encounter(
        participant_id=participant_id, device_id=device_id, provider=provider,
        start=at(start_s), end=at(end_s), packet_count=8, max_rssi_db=rssi,
    )


class TestGatePrompts:

    def test_quiet_period_after_accepted_prompt(self):
        assert gate_prompts([0.0, 600.0, 900.0]) == [0.0, 900.0]

    def test_rejected_events_do_not_restart_the_clock(self):
        assert gate_prompts([0.0, 899.9, 1799.0]) == [0.0, 1799.0]

    def test_datetimes(self):
        events = [at(0), at(300), at(901), at(1500)]
        assert gate_prompts(events) == [at(0), at(901)]

    def test_unordered_events(self):
        with pytest.raises(DataError):
            gate_prompts([10.0, 5.0])

    def test_empty(self):
        assert gate_prompts([]) == []

    def test_spacing_and_bound_hold_for_random_events(self, rng):
        for _ in range(200):
            events = np.sort(rng.uniform(0, 20_000, size=int(rng.integers(1, 80)))).tolist()
            accepted = gate_prompts(events)
            assert accepted[0] == events[0]
            assert all(b - a >= 900.0 for a, b in zip(accepted, accepted[1:]))
            assert len(accepted) <= prompt_count_bound(events[-1] - events[0], 900.0)


class TestStudyWindow:

    @pytest.mark.parametrize("hour,minute,second,expected", [
        (5, 59, 59, False),
        (6, 0, 0, True),
        (12, 30, 0, True),
        (22, 59, 59, True),
        (23, 0, 0, False),
    ])
    def test_local_window_boundaries(self, hour, minute, second, expected):
        stamp = datetime(2019, 4, 2, hour, minute, second, tzinfo=CHICAGO)
        assert in_study_window(stamp) is expected

    def test_converts_to_study_zone(self):
        # 04:30 UTC is 23:30 the previous evening in Chicago
        stamp = datetime(2019, 4, 2, 4, 30, tzinfo=timezone.utc)
        assert in_study_window(stamp, CHICAGO) is False
        assert in_study_window(stamp.replace(hour=14), CHICAGO) is True

    def test_filter_drops_other_providers(self):
        records = [
            feedback(0, provider=Provider.LIME),
            feedback(10, provider=Provider.BIRD),
            feedback(20, provider=Provider.BLUE_DUCK),
            feedback(30, provider=Provider.UNKNOWN),
        ]
        kept = filter_study_window(records, CHICAGO)
        assert [r.provider for r in kept] == [Provider.LIME, Provider.BIRD]

    def test_filter_drops_late_records(self):
        late = datetime(2019, 4, 1, 23, 15, tzinfo=CHICAGO)
        records = [feedback(0), feedback(0, base=late)]
        assert len(filter_study_window(records, CHICAGO)) == 1


class TestHeartRateProfile:

    def test_band_around_modal_bin(self):
        profile = build_profile("P01", PROFILE_SAMPLES)
        assert profile.modal_bin == (70.0, 75.0)
        assert profile.band_low == pytest.approx(70.0)
        assert profile.band_high == pytest.approx(75.0)
        assert not profile.low_confidence

    def test_lowest_bin_wins_ties(self):
        profile = build_profile("P01", [62.0] * 15 + [77.0] * 15)
        assert profile.modal_bin == (60.0, 65.0)

    def test_band_covers_modal_bin_and_stays_in_range(self, rng):
        for _ in range(50):
            samples = rng.normal(rng.uniform(60, 90), rng.uniform(1, 12), size=int(rng.integers(30, 300)))
            samples = np.clip(samples, 30, 240)
            profile = build_profile("P01", samples.tolist())
            low, high = profile.modal_bin
            assert profile.band_low <= low and profile.band_high >= high
            assert profile.band_low >= min(samples.min(), low)
            assert profile.band_high <= max(samples.max(), high)

    def test_few_samples_span_observed_range(self):
        profile = build_profile("P01", [60.0, 62.0, 64.0, 66.0, 90.0])
        assert profile.low_confidence
        assert (profile.band_low, profile.band_high) == (60.0, 90.0)

    def test_constant_samples_get_nonempty_band(self):
        profile = build_profile("P01", [70.0, 70.0, 70.0])
        assert (profile.band_low, profile.band_high) == (67.5, 72.5)

    def test_no_samples(self):
        with pytest.raises(DataError):
            build_profile("P01", [])

    def test_build_profiles_skips_empty(self):
        profiles = build_profiles({"P02": [], "P01": PROFILE_SAMPLES}, min_samples=10)
        assert list(profiles) == ["P01"]


class TestStartle:

    @pytest.fixture
    def profiles(self):
        return {"P01": build_profile("P01", PROFILE_SAMPLES)}

    def test_classification(self, profiles):
        profile = profiles["P01"]
        assert classify_startle(feedback(0, heart_rate_bpm=80.0), profile) == StartleClass.ELEVATED
        assert classify_startle(feedback(0, heart_rate_bpm=74.0), profile) == StartleClass.NORMAL
        assert classify_startle(feedback(0, heart_rate_bpm=None), profile) == StartleClass.UNKNOWN

    def test_elevated_fraction_ignores_unknown(self, profiles):
        records = [
            feedback(0, heart_rate_bpm=80.0),
            feedback(1, heart_rate_bpm=72.0),
            feedback(2, heart_rate_bpm=None),
            feedback(3, participant_id="P09", heart_rate_bpm=150.0),
        ]
        assert elevated_fraction(records, profiles) == 0.5

    def test_elevated_fraction_without_known_rates(self, profiles):
        assert elevated_fraction([feedback(0, heart_rate_bpm=None)], profiles) is None


class TestDirectionMatrix:

    def test_counts(self):
        records = [
            feedback(0, q_moving=False),
            feedback(1, q_in_front=True, q_toward=True),
            feedback(2, q_in_front=True, q_toward=False),
            feedback(3, q_in_front=False, q_toward=True),
            feedback(4, q_in_front=False, q_toward=True),
            feedback(5, q_in_front=False, q_toward=False),
            feedback(6, q_in_front=None, q_toward=True),
        ]
        matrix = summarize_direction_matrix(records)
        assert matrix.stationary == 1
        assert matrix.front_toward == 1
        assert matrix.front_away == 1
        assert matrix.behind_toward == 2
        assert matrix.behind_away == 1
        assert matrix.moving_unanswered == 1
        assert matrix.moving == 6
        assert matrix.total == 7
        assert matrix.approaching_from_behind == 2
        assert sum(matrix.fractions().values()) == pytest.approx(1.0)

    def test_empty_matrix_fractions(self):
        matrix = summarize_direction_matrix([])
        assert matrix.total == 0
        assert set(matrix.fractions().values()) == {0.0}


class TestLinkObservedToPredicted:

    def test_record_within_tolerance_links(self):
        link, = link_observed_to_predicted([feedback(30.0)], [encounter(0.0, 10.0, rssi=-45.0)])
        assert link.device_id == "lime-1"
        assert link.proximity == ProximityClass.WITHIN_ONE_FOOT
        assert not link.ambiguous

    def test_record_outside_tolerance_is_unlinked(self):
        link, = link_observed_to_predicted([feedback(100.0)], [encounter(0.0, 10.0)])
        assert link.device_id is None
        assert link.candidates == 0

    def test_provider_must_match(self):
        link, = link_observed_to_predicted([feedback(5.0)], [encounter(0.0, 10.0, provider=Provider.BIRD)])
        assert link.device_id is None

    def test_participant_must_match(self):
        link, = link_observed_to_predicted([feedback(5.0)], [encounter(0.0, 10.0, participant_id="P02")])
        assert link.device_id is None

    def test_strongest_candidate_wins(self):
        encounters = [encounter(0.0, 10.0, "lime-1", rssi=-80.0), encounter(20.0, 40.0, "lime-2", rssi=-50.0)]
        link, = link_observed_to_predicted([feedback(15.0)], encounters)
        assert link.device_id == "lime-2"
        assert link.max_rssi_db == -50.0
        assert link.ambiguous
