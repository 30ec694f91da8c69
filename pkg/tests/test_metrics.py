"""
Tests for TES/MEM/PEM, RSSI group statistics and schedule correlation
"""
from datetime import time

import pytest

from app.exceptions import DomainError
from app.models import (
    AtomicSegment,
    EncounterKind,
    FunctionalClass,
    Group,
    HourlyCount,
    LocatedEncounter,
    MemMethod,
    PemFormula,
    PoiEvent,
    Provider,
    Session,
    TimeBin,
)
from app.services.geo_graph import AtomicNetwork
from app.services.metrics import (
    build_metrics_table,
    mem,
    pem,
    rssi_group_comparison,
    schedule_correlation,
    scheduled_per_hour,
    tes,
)

PREDICTED_MEM = {
    "Arterial": 146.1, "Collector": 68.4, "Local": 176.0,
    "SharedUsePath": 306.0, "Sidewalk": 617.8, "Other": 799.1,
}
PREDICTED_PEM = {
    "Arterial": 6.9, "Collector": 3.2, "Local": 8.3,
    "SharedUsePath": 14.5, "Sidewalk": 29.2, "Other": 37.8,
}
OBSERVED_MEM = {
    "Arterial": 60.7, "Collector": 55.2, "Local": 171.8,
    "SharedUsePath": 432.6, "Sidewalk": 470.7, "Other": 1410.0,
}
OBSERVED_PEM = {
    "Arterial": 2.3, "Collector": 2.1, "Local": 6.6,
    "SharedUsePath": 16.6, "Sidewalk": 18.1, "Other": 54.2,
}


def segment(segment_id, length_miles, functional_class=FunctionalClass.LOCAL):
    lon = -98.6 + segment_id * 0.01
    return AtomicSegment(
        segment_id=segment_id,
        polyline=((29.58, lon), (29.58, lon + 0.005)),
        length_miles=length_miles,
        functional_class=functional_class,
    )


def at_segment(segment_id, kind=EncounterKind.PREDICTED, provider=Provider.BIRD, rssi=-70.0, in_window=True):
    return LocatedEncounter(
        kind=kind,
        participant_id="P01",
        provider=provider,
        segment_id=segment_id,
        time_bin=TimeBin(day_of_week=0, index=10) if in_window else None,
        hour_index=2 if in_window else None,
        max_rssi_db=rssi,
    )


@pytest.fixture
def network():
    return AtomicNetwork([
        segment(0, 0.5),
        segment(1, 1.0),
        segment(2, 0.25, FunctionalClass.ARTERIAL),
    ])


class TestTes:

    def test_counts_per_segment_and_class(self, network):
        totals = tes([at_segment(0)] * 3 + [at_segment(2)], network)
        assert totals.per_segment == {0: 3, 1: 0, 2: 1}
        assert totals.per_class == {"Arterial": 1, "Local": 3}
        assert totals.matched_total == 4

    def test_unmatched_and_out_of_window(self, network):
        totals = tes([at_segment(None), at_segment(0, in_window=False), at_segment(99)], network)
        assert totals.matched_total == 0
        assert totals.unmatched == 2


class TestMem:

    def test_ten_encounters_on_half_a_mile(self):
        single = AtomicNetwork([segment(0, 0.5)])
        assert mem({0: 10}, single)["Local"] == pytest.approx(20.0)

    def test_zero_segments_take_part_in_the_mean(self, network):
        assert mem({0: 10, 1: 0}, network)["Local"] == pytest.approx(10.0)

    def test_ratio_of_totals(self, network):
        assert mem({0: 10, 1: 0}, network, MemMethod.RATIO_OF_TOTALS)["Local"] == pytest.approx(10 / 1.5)

    def test_classes_without_segments_are_omitted(self, network):
        assert set(mem({}, network)) == {"Arterial", "Local"}


class TestPem:

    @pytest.mark.parametrize("class_mem,expected", [
        (PREDICTED_MEM, PREDICTED_PEM),
        (OBSERVED_MEM, OBSERVED_PEM),
    ])
    def test_reproduces_published_shares(self, class_mem, expected):
        shares = pem(class_mem)
        for name, value in expected.items():
            assert shares[name] == pytest.approx(value, abs=0.1)
        assert sum(shares.values()) == pytest.approx(100.0)

    def test_tes_share(self):
        shares = pem({"Local": 1.0, "Arterial": 9.0}, PemFormula.TES_SHARE, {"Local": 3, "Arterial": 1})
        assert shares == {"Local": 75.0, "Arterial": 25.0}

    def test_tes_share_needs_tes(self):
        with pytest.raises(DomainError):
            pem({"Local": 1.0}, PemFormula.TES_SHARE)

    def test_all_zero_is_undefined(self):
        with pytest.raises(DomainError):
            pem({"Local": 0.0, "Arterial": 0.0})


class TestMetricsTable:

    def test_rows_and_totals(self, network):
        predicted = [at_segment(0)] * 4 + [at_segment(2)] * 2 + [at_segment(None)]
        observed = [at_segment(1, kind=EncounterKind.OBSERVED)]
        table = build_metrics_table(predicted, observed, network)

        local = table.row(EncounterKind.PREDICTED, "Local")
        assert local.tes == 4
        assert local.mem == pytest.approx(4.0)
        arterial = table.row(EncounterKind.PREDICTED, "Arterial")
        assert arterial.mem == pytest.approx(8.0)
        assert local.pem + arterial.pem == pytest.approx(100.0)
        assert table.unmatched[EncounterKind.PREDICTED] == 1
        assert table.totals[EncounterKind.OBSERVED].tes == 1

    def test_csv_rows(self, network):
        table = build_metrics_table([at_segment(0)] * 2, [], network)
        rows = table.csv_rows()
        assert [row[0] for row in rows] == ["Arterial", "Local", "Total", "Unmatched"]
        local = rows[1]
        assert local[:3] == ("Local", 2, 0)
        assert local[5:] == ("100.0", "0.0")
        assert rows[-1] == ("Unmatched", 0, 0, "", "", "", "")

    def test_no_encounters_gives_zero_pem(self, network):
        table = build_metrics_table([], [], network)
        assert table.totals[EncounterKind.PREDICTED].pem == 0.0
        assert all(row.pem == 0.0 for row in table.rows[EncounterKind.OBSERVED])


class TestRssiGroups:

    def test_statistics(self):
        encounters = [at_segment(0, rssi=r) for r in (-60.0, -70.0, -80.0)] + [at_segment(1, rssi=-90.0)]
        groups = [Group.HIGH, Group.HIGH, Group.HIGH, Group.LOW]
        stats = {(s.provider, s.group): s for s in rssi_group_comparison(encounters, groups)}
        high = stats[(Provider.BIRD, Group.HIGH)]
        assert high.n == 3
        assert high.mean == pytest.approx(-70.0)
        assert high.median == pytest.approx(-70.0)
        assert (high.q1, high.q3) == (pytest.approx(-75.0), pytest.approx(-65.0))
        assert stats[(Provider.BIRD, Group.LOW)].n == 1

    def test_empty_group_is_flagged(self):
        stats = rssi_group_comparison([at_segment(0, provider=Provider.LIME)], [Group.LOW])
        assert [(s.group, s.empty) for s in stats] == [(Group.HIGH, True), (Group.LOW, False)]
        assert stats[0].to_csv_row("space")[-1] == "empty"

    def test_ungrouped_encounters_are_skipped(self):
        assert rssi_group_comparison([at_segment(0)], [None]) == []

    def test_misaligned(self):
        with pytest.raises(DomainError):
            rssi_group_comparison([at_segment(0)], [])


def weekly_schedule(per_hour):
    """One event whose sessions fill each hour h per_hour(day, h) times"""
    sessions = [
        Session(day_of_week=day, start=time(6 + hour), end=time(7 + hour))
        for day in range(7)
        for hour in range(17)
        for _ in range(per_hour(day, hour))
    ]
    return [PoiEvent(poi_id="hall", lat=29.58, lon=-98.62, schedule=sessions)]


def hourly(per_hour):
    return [
        HourlyCount(day_of_week=day, hour_index=hour, encounters=per_hour(day, hour), scheduled=0)
        for day in range(7)
        for hour in range(17)
    ]


class TestScheduleCorrelation:

    def test_sessions_count_in_overlapping_hours(self):
        event = PoiEvent(poi_id="x", lat=0, lon=0, schedule=[Session(day_of_week=1, start=time(9, 30), end=time(11, 0))])
        assert scheduled_per_hour([event]) == {(1, 3): 1, (1, 4): 1}

    def test_identical_series(self):
        result = schedule_correlation(hourly(lambda d, h: h % 3), weekly_schedule(lambda d, h: h % 3))
        assert result.defined
        assert result.spearman_rho == pytest.approx(1.0)
        assert len(result.series) == 6 * 17

    def test_reversed_series(self):
        result = schedule_correlation(hourly(lambda d, h: 2 - h % 3), weekly_schedule(lambda d, h: h % 3))
        assert result.spearman_rho == pytest.approx(-1.0)

    def test_sunday_excluded_by_default(self):
        result = schedule_correlation(hourly(lambda d, h: 1), weekly_schedule(lambda d, h: h % 2))
        assert all(item.day_of_week != 6 for item in result.series)

    def test_constant_encounters_are_undefined(self):
        result = schedule_correlation(hourly(lambda d, h: 1), weekly_schedule(lambda d, h: h % 2))
        assert not result.defined
        assert result.spearman_rho is None
        assert "constant" in result.reason

    def test_empty_schedule_is_undefined(self):
        result = schedule_correlation(hourly(lambda d, h: h), [])
        assert not result.defined
        assert result.reason == "schedule series is constant"

    def test_custom_days(self):
        result = schedule_correlation(hourly(lambda d, h: h), weekly_schedule(lambda d, h: h), days=[6])
        assert len(result.series) == 17
        assert result.spearman_rho == pytest.approx(1.0)
