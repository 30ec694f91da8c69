"""
Tests for the synthetic campus simulator
"""
import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import ConfigError
from app.models import GridSpec, Keying, PoiEvent, PoiKind, Provider, ProviderBaselines, ReceptionModel, SimConfig
from app.services.binning import assign_groups, count_by_key, hourly_series, locate_encounters, split_high_low
from app.services.ble import build_advertisement
from app.services.encounter_detector import detect_corpus, detect_encounters
from app.services.feedback import build_profiles, elevated_fraction, filter_study_window
from app.services.geo_graph import SegmentIndex
from app.services.metrics import rssi_group_comparison, schedule_correlation
from app.services.scoring import score_detector
from app.services.simulator import (
    M_PER_FT,
    FieldSimulator,
    Pedestrian,
    Scenario,
    Scooter,
    Track,
    capture_probability,
    default_schedule,
    simulate,
)
from conftest import BASE_TIME, CHICAGO

ORIGIN = (29.5830, -98.6190)
LIME = build_advertisement("Lime-ABC123", manufacturer_id=0x0A2C)


def scenario(ped_track, scooter_track, provider=Provider.LIME):
    return Scenario(
        start=BASE_TIME,
        origin=ORIGIN,
        pedestrians=[Pedestrian("P01", 70.0, [ped_track])],
        scooters=[Scooter("AA:BB:CC:DD:EE:01", provider, LIME, phase_s=0.1, tracks=[scooter_track])],
    )


@pytest.fixture
def simulator():
    return FieldSimulator(SimConfig(seed=11, feedback_fraction=1.0))


def small_config(**overrides):
    values = dict(
        seed=5, n_pedestrians=3, n_scooters=10, duration_days=1,
        grid=GridSpec(rows=2, cols=2, block_m=80.0),
    )
    values.update(overrides)
    return SimConfig(**values)


class TestCaptureProbability:

    @pytest.mark.parametrize("distance_ft,expected", [
        (0.5, 0.95), (20.0, 0.95), (40.0, 0.5), (60.0, 0.05), (100.0, 0.05), (150.0, 0.05), (151.0, 0.0),
    ])
    def test_piecewise_curve(self, distance_ft, expected):
        assert float(capture_probability(distance_ft, ReceptionModel())) == pytest.approx(expected)

    def test_non_increasing(self):
        p = capture_probability(np.linspace(0, 200, 401), ReceptionModel())
        assert np.all(np.diff(p) <= 1e-12)


class TestMicroScenarios:

    def test_parked_scooter_next_to_standing_participant(self, simulator):
        result = simulator.run(scenario(Track.stationary((0.0, 0.0), 0.0, 60.0), Track.stationary((0.3, 0.0), 0.0, 60.0)))
        stream = result.receptions["P01"]
        assert len(stream) > 150
        assert all(r.rssi_db < 0 for r in stream)
        assert len(result.truth) == 1
        assert not result.truth[0].moving

        encounters = detect_encounters(stream)
        assert len(encounters) == 1
        assert encounters[0].provider == Provider.LIME
        report = score_detector(result.truth, encounters)
        assert (report.precision, report.recall) == (1.0, 1.0)

        record, = result.feedback
        assert record.q_moving is False
        assert record.q_in_front is None

    def test_parked_scooter_at_hundred_feet(self, simulator):
        result = simulator.run(scenario(Track.stationary((0.0, 0.0), 0.0, 600.0), Track.stationary((100 * M_PER_FT, 0.0), 0.0, 600.0)))
        stream = result.receptions["P01"]
        assert 0 < len(stream) < 400
        assert result.truth == []
        assert result.feedback == []
        assert detect_encounters(stream) == []

    def test_scooter_beyond_capture_range(self, simulator):
        result = simulator.run(scenario(Track.stationary((0.0, 0.0), 0.0, 60.0), Track.stationary((200 * M_PER_FT, 0.0), 0.0, 60.0)))
        assert result.receptions == {"P01": []}
        assert result.truth == []

    def test_head_on_pass(self, simulator):
        ped = Track.along([(-50.0, 0.0), (50.0, 0.0)], 0.0, 1.34)
        ride = Track.along([(50.0, 0.5), (-50.0, 0.5)], 0.0, 5.0)
        result = simulator.run(scenario(ped, ride))
        truth, = result.truth
        assert truth.moving
        assert truth.min_distance_ft < 3.0
        record, = result.feedback
        assert (record.q_moving, record.q_in_front, record.q_toward) == (True, True, True)
        assert len(detect_encounters(result.receptions["P01"])) == 1

    def test_overtaken_from_behind(self, simulator):
        ped = Track.along([(-50.0, 0.0), (50.0, 0.0)], 0.0, 1.34)
        ride = Track.along([(-150.0, 0.5), (150.0, 0.5)], 0.0, 5.0)
        record, = simulator.run(scenario(ped, ride)).feedback
        assert (record.q_in_front, record.q_toward) == (False, True)

    def test_streams_are_time_ordered(self, simulator):
        ped = Track.along([(-50.0, 0.0), (50.0, 0.0)], 0.0, 1.34)
        ride = Track.along([(50.0, 0.5), (-50.0, 0.5)], 0.0, 5.0)
        stream = simulator.run(scenario(ped, ride)).receptions["P01"]
        stamps = [r.epoch_ms for r in stream]
        assert stamps == sorted(stamps)
        assert all(r.heart_rate_bpm is not None and r.gps is not None for r in stream)


class TestReceptionPhysics:

    DISTANCES_FT = (5.0, 15.0, 25.0, 40.0)
    DURATION_S = 1200.0

    @pytest.fixture
    def fixed_distances(self, simulator):
        scooters = [
            Scooter(f"AA:BB:CC:DD:EE:{i:02X}", Provider.LIME, LIME, phase_s=0.1,
                    tracks=[Track.stationary((d * M_PER_FT, 0.0), 0.0, self.DURATION_S)])
            for i, d in enumerate(self.DISTANCES_FT)
        ]
        ped = Pedestrian("P01", 70.0, [Track.stationary((0.0, 0.0), 0.0, self.DURATION_S)])
        result = simulator.run(Scenario(start=BASE_TIME, origin=ORIGIN, pedestrians=[ped], scooters=scooters))
        by_device = {s.device_id: [] for s in scooters}
        for r in result.receptions["P01"]:
            by_device[r.device_id].append(r)
        return simulator, [by_device[s.device_id] for s in scooters]

    def test_reception_interval_grows_with_distance(self, fixed_distances):
        _, streams = fixed_distances
        means = [float(np.diff([r.epoch_ms for r in stream]).mean()) for stream in streams]
        for nearer, farther in zip(means, means[1:]):
            assert farther >= nearer * 0.98
        assert means[-1] > 1.5 * means[0]

    def test_rssi_stays_under_noise_ceiling(self, fixed_distances):
        simulator, streams = fixed_distances
        cfg = simulator.config
        baseline = simulator.baselines.baseline(Provider.LIME)
        ceiling = 3 * cfg.rssi_noise_sigma_db
        for distance_ft, stream in zip(self.DISTANCES_FT, streams):
            expected = baseline - 10 * cfg.path_loss_exponent * np.log10(distance_ft)
            rssi = np.array([r.rssi_db for r in stream])
            assert rssi.max() <= baseline + ceiling
            assert rssi.max() <= expected + ceiling + 0.005
            assert rssi.min() >= expected - ceiling - 0.005

    def test_configured_baselines_drive_rssi(self):
        custom = FieldSimulator(
            SimConfig(seed=11, rssi_noise_sigma_db=0.0),
            baselines=ProviderBaselines(by_provider={Provider.LIME: -40.0}),
        )
        result = custom.run(scenario(Track.stationary((0.0, 0.0), 0.0, 30.0), Track.stationary((0.3, 0.0), 0.0, 30.0)))
        assert {r.rssi_db for r in result.receptions["P01"]} == {-40.0}

    def test_default_baselines(self):
        plain = FieldSimulator(SimConfig(seed=11, rssi_noise_sigma_db=0.0))
        result = plain.run(scenario(Track.stationary((0.0, 0.0), 0.0, 30.0), Track.stationary((0.3, 0.0), 0.0, 30.0)))
        assert {r.rssi_db for r in result.receptions["P01"]} == {-46.25}


class TestPlanning:

    def test_default_schedule_has_no_sunday(self, grid_network):
        events = default_schedule(grid_network)
        assert sum(e.kind == PoiKind.ATTRACTOR for e in events) == 5
        assert sum(e.kind == PoiKind.GENERATOR for e in events) == 4
        assert all(s.day_of_week != 6 for e in events for s in e.schedule)

    def test_demand_peaks_during_sessions(self, grid_network):
        intensity = FieldSimulator(small_config()).demand_intensity(default_schedule(grid_network))
        assert intensity.shape == (1, 68)
        assert intensity.max() > intensity.min() > 0

    def test_unreachable_points_of_interest(self):
        network = {"type": "FeatureCollection", "features": [
            {"type": "Feature", "properties": {"highway": "footway"},
             "geometry": {"type": "LineString", "coordinates": [[-98.6190, 29.5830], [-98.6180, 29.5830]]}},
            {"type": "Feature", "properties": {"highway": "footway"},
             "geometry": {"type": "LineString", "coordinates": [[-98.6190, 29.5900], [-98.6180, 29.5900]]}},
        ]}
        schedule = [
            PoiEvent(poi_id="A", lat=29.5830, lon=-98.6190),
            PoiEvent(poi_id="B", kind=PoiKind.GENERATOR, lat=29.5900, lon=-98.6180),
        ]
        with pytest.raises(ConfigError, match="unreachable"):
            FieldSimulator(small_config(), network=network, schedule=schedule).plan_scenario()

    def test_undetectable_advertising_interval(self):
        with pytest.raises(ValidationError):
            SimConfig(advertisement_interval_s=0.5)


class TestSimulate:

    def test_same_seed_same_output(self):
        first, second = simulate(small_config()), simulate(small_config())
        assert [r.to_json_dict() for r in first.all_receptions()] == [r.to_json_dict() for r in second.all_receptions()]
        assert [f.to_csv_row() for f in first.feedback] == [f.to_csv_row() for f in second.feedback]
        assert [t.to_csv_row() for t in first.truth] == [t.to_csv_row() for t in second.truth]

    def test_other_seed_differs(self):
        first, second = simulate(small_config()), simulate(small_config(seed=6))
        assert [r.to_json_dict() for r in first.all_receptions()] != [r.to_json_dict() for r in second.all_receptions()]

    def test_outputs_are_consistent(self):
        result = simulate(small_config())
        assert set(result.receptions) == {"P01", "P02", "P03"}
        for participant_id, stream in result.receptions.items():
            assert all(r.receiver_id == participant_id for r in stream)
        starts = [t.start for t in result.truth]
        assert starts == sorted(starts)
        assert len(result.network) == 12
        assert result.summary()["participants"] == 3


@pytest.mark.slow
class TestDefaultCampus:

    @pytest.fixture(scope="class")
    def campus(self):
        config = SimConfig()
        result = simulate(config)
        encounters, _ = detect_corpus(sorted(result.receptions.items()), config.detector)
        return config, result, encounters

    def test_detector_recovers_planted_encounters(self, campus):
        _, result, encounters = campus
        report = score_detector(result.truth, encounters)
        assert report.n_truth >= 50
        assert report.recall >= 0.9
        assert report.precision >= 0.85

    def test_busy_segments_have_closer_passes(self, campus):
        _, result, encounters = campus
        located = locate_encounters(encounters, SegmentIndex(result.network.segments), CHICAGO)
        groups = split_high_low(count_by_key(located, Keying.SPACE))
        stats = rssi_group_comparison(located, assign_groups(located, Keying.SPACE, groups))
        by_provider = {}
        for item in stats:
            by_provider.setdefault(item.provider, {})[item.group.value] = item
        compared = [p for p, g in by_provider.items() if not g["High"].empty and not g["Low"].empty]
        assert compared
        for provider in compared:
            assert by_provider[provider]["High"].mean > by_provider[provider]["Low"].mean

    def test_planted_startle_share(self, campus):
        _, result, _ = campus
        samples = {}
        for r in result.all_receptions():
            samples.setdefault(r.receiver_id, []).append(r.heart_rate_bpm)
        profiles = build_profiles(samples)
        moving = [r for r in filter_study_window(result.feedback, CHICAGO) if r.q_moving]
        assert moving
        assert elevated_fraction(moving, profiles) == pytest.approx(0.60, abs=0.05)

    def test_encounters_follow_class_schedule(self, campus):
        _, result, encounters = campus
        located = locate_encounters(encounters, SegmentIndex(result.network.segments), CHICAGO)
        correlation = schedule_correlation(hourly_series(located), result.schedule)
        assert correlation.defined
        assert correlation.spearman_rho > 0.5
