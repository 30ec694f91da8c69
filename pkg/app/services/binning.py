"""
Temporal and spatio-temporal binning of encounters and frequency distributions
"""
import logging
import math
from collections import Counter, defaultdict
from datetime import datetime
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from app.exceptions import DataError
from app.models import (
    DAY_NAMES,
    UNMATCHED_CLASS,
    Encounter,
    EncounterKind,
    FeedbackRecord,
    FrequencyDistribution,
    Group,
    HourlyCount,
    KeyGroups,
    Keying,
    LocatedEncounter,
    SplitRounding,
    TimeBin,
    ZoneKey,
)
from .geo_graph import AtomicNetwork, SegmentIndex

logger = logging.getLogger(__name__)

DAY_START_MINUTE = 6 * 60
DAY_END_MINUTE = 23 * 60
SLOT_MINUTES = 15
SLOTS_PER_DAY = (DAY_END_MINUTE - DAY_START_MINUTE) // SLOT_MINUTES
HOURS_PER_DAY = (DAY_END_MINUTE - DAY_START_MINUTE) // 60
DAYS_PER_WEEK = 7

DEFAULT_PERCENTILES = (50, 75, 90, 95, 99)


def _minutes_into_day(timestamp: datetime, zone: Optional[ZoneInfo]) -> Optional[float]:
    if timestamp.tzinfo is None:
        raise DataError(f"timestamp {timestamp.isoformat()} has no timezone")
    local = timestamp.astimezone(zone) if zone is not None else timestamp
    minutes = local.hour * 60 + local.minute + (local.second + local.microsecond / 1e6) / 60.0
    if not DAY_START_MINUTE <= minutes < DAY_END_MINUTE:
        return None
    return minutes - DAY_START_MINUTE


def bin_time(timestamp: datetime, zone: Optional[ZoneInfo] = None) -> Optional[TimeBin]:
    """15-minute study-day slot of a timestamp, None outside 06:00-23:00 local"""
    minutes = _minutes_into_day(timestamp, zone)
    if minutes is None:
        return None
    local = timestamp.astimezone(zone) if zone is not None else timestamp
    return TimeBin(day_of_week=local.weekday(), index=int(minutes // SLOT_MINUTES))


def bin_hourly(timestamp: datetime, zone: Optional[ZoneInfo] = None) -> Optional[int]:
    """Hour index 0..16 of the study day, None outside 06:00-23:00 local"""
    minutes = _minutes_into_day(timestamp, zone)
    if minutes is None:
        return None
    return int(minutes // 60)


def hour_of_week(day_of_week: int, hour_index: int) -> int:
    return day_of_week * HOURS_PER_DAY + hour_index


def universe_size(keying: Keying, n_segments: int = 0) -> int:
    """Number of keys a keying can take, zero-count keys included"""
    if keying == Keying.SPACE:
        return n_segments
    if keying == Keying.TIME:
        return SLOTS_PER_DAY
    if keying == Keying.WEEK_TIME:
        return SLOTS_PER_DAY * DAYS_PER_WEEK
    if keying == Keying.SPACE_TIME:
        return n_segments * SLOTS_PER_DAY
    return HOURS_PER_DAY * DAYS_PER_WEEK


def locate(
    kind: EncounterKind,
    participant_id: str,
    provider,
    timestamp: datetime,
    position,
    index: Optional[SegmentIndex],
    zone: Optional[ZoneInfo],
    max_rssi_db: Optional[float] = None,
    max_snap_distance_m: float = 25.0,
) -> LocatedEncounter:
    segment_id = None
    if index is not None and position is not None:
        segment_id = index.snap((position.lat, position.lon), max_snap_distance_m)
    return LocatedEncounter(
        kind=kind,
        participant_id=participant_id,
        provider=provider,
        segment_id=segment_id,
        time_bin=bin_time(timestamp, zone),
        hour_index=bin_hourly(timestamp, zone),
        max_rssi_db=max_rssi_db,
    )


def locate_encounters(
    encounters: Iterable[Encounter],
    index: Optional[SegmentIndex],
    zone: Optional[ZoneInfo] = None,
    max_snap_distance_m: float = 25.0,
) -> List[LocatedEncounter]:
    """Snap predicted encounters to segments and bin them by start time"""
    located = [
        locate(
            e.kind, e.participant_id, e.provider, e.start, e.representative_gps,
            index, zone, e.max_rssi_db, max_snap_distance_m,
        )
        for e in encounters
    ]
    _log_location_stats("predicted", located)
    return located


def locate_feedback(
    records: Iterable[FeedbackRecord],
    index: Optional[SegmentIndex],
    zone: Optional[ZoneInfo] = None,
    max_snap_distance_m: float = 25.0,
) -> List[LocatedEncounter]:
    """Snap observed encounters to segments and bin them by response time"""
    located = [
        locate(
            EncounterKind.OBSERVED, r.participant_id, r.provider, r.timestamp, r.gps,
            index, zone, None, max_snap_distance_m,
        )
        for r in records
    ]
    _log_location_stats("observed", located)
    return located


def _log_location_stats(label: str, located: Sequence[LocatedEncounter]) -> None:
    out_of_window = sum(1 for e in located if not e.in_window)
    unmatched = sum(1 for e in located if not e.matched)
    logger.info(
        f"Located {len(located)} {label} encounters: {out_of_window} outside the study day, "
        f"{unmatched} unmatched to the network"
    )


def encounter_key(encounter: LocatedEncounter, keying: Keying) -> Optional[Hashable]:
    """Key of an encounter under a keying; None when it falls outside the key space"""
    if not encounter.in_window:
        return None
    if keying == Keying.SPACE:
        return encounter.segment_id
    if keying == Keying.TIME:
        return encounter.time_bin.index
    if keying == Keying.WEEK_TIME:
        return encounter.time_bin
    if keying == Keying.SPACE_TIME:
        if encounter.segment_id is None:
            return None
        return ZoneKey(segment_id=encounter.segment_id, index=encounter.time_bin.index)
    return (encounter.time_bin.day_of_week, encounter.hour_index)


def key_order(key: Hashable):
    """Sort key usable across every keying"""
    if isinstance(key, TimeBin):
        return (key.day_of_week, key.index)
    if isinstance(key, ZoneKey):
        return (key.segment_id, key.index)
    return key


def key_label(key: Hashable) -> str:
    if isinstance(key, (TimeBin, ZoneKey)):
        return key.label()
    if isinstance(key, tuple):
        day, hour = key
        return f"{DAY_NAMES[day]}-h{hour:02d}"
    return str(key)


def count_by_key(encounters: Iterable[LocatedEncounter], keying: Keying) -> Dict[Hashable, int]:
    counts: Counter = Counter()
    for encounter in encounters:
        key = encounter_key(encounter, keying)
        if key is not None:
            counts[key] += 1
    return {key: counts[key] for key in sorted(counts, key=key_order)}


def frequency_distribution(
    encounters: Iterable[LocatedEncounter],
    keying: Keying,
    n_segments: int = 0,
    percentiles: Sequence[float] = DEFAULT_PERCENTILES,
) -> FrequencyDistribution:
    """
    Encounter count per key over the full key universe

    Zero-count keys are part of the universe; percentiles use the
    inverted-CDF rule over all keys.
    """
    counts = count_by_key(encounters, keying)
    size = universe_size(keying, n_segments)
    if len(counts) > size:
        raise DataError(f"{len(counts)} {keying.value} keys seen but the universe holds {size}")

    histogram = Counter(counts.values())
    zeros = size - len(counts)
    if zeros:
        histogram[0] = zeros

    values = np.zeros(size, dtype=np.int64)
    values[:len(counts)] = list(counts.values())
    stats = {}
    if size:
        for q in percentiles:
            stats[f"p{q:g}"] = float(np.percentile(values, q, method="inverted_cdf"))

    logger.debug(f"{keying.value}: {sum(counts.values())} encounters over {size} keys, {len(counts)} nonzero")
    return FrequencyDistribution(
        keying=keying,
        universe_size=size,
        counts=counts,
        histogram=dict(sorted(histogram.items())),
        percentiles=stats,
    )


def split_high_low(
    counts: Mapping[Hashable, int],
    rounding: SplitRounding = SplitRounding.FLOOR,
) -> KeyGroups:
    """
    Split keys with at least one encounter into Low and High groups

    Low holds counts in [1, M/2] (M/2 rounded per `rounding`), High the rest up to M.
    """
    max_count = max(counts.values(), default=0)
    if max_count == 0:
        return KeyGroups()
    threshold = max_count // 2 if rounding == SplitRounding.FLOOR else math.ceil(max_count / 2)
    high = {key for key, count in counts.items() if count > threshold}
    low = {key for key, count in counts.items() if 1 <= count <= threshold}
    logger.debug(f"High/Low split at {threshold} of {max_count}: {len(low)} low keys, {len(high)} high keys")
    return KeyGroups(max_count=max_count, threshold=threshold, high=high, low=low)


def assign_groups(
    encounters: Iterable[LocatedEncounter],
    keying: Keying,
    groups: KeyGroups,
) -> List[Optional[Group]]:
    """Group inherited by each encounter from its key, None for keyless encounters"""
    result: List[Optional[Group]] = []
    for encounter in encounters:
        key = encounter_key(encounter, keying)
        if key is not None and key in groups.high:
            result.append(Group.HIGH)
        elif key is not None and key in groups.low:
            result.append(Group.LOW)
        else:
            result.append(None)
    return result


def hourly_series(encounters: Iterable[LocatedEncounter]) -> List[HourlyCount]:
    """Encounters in every hour of the week grid, zero hours included"""
    counts = count_by_key(encounters, Keying.HOUR)
    return [
        HourlyCount(day_of_week=day, hour_index=hour, encounters=counts.get((day, hour), 0), scheduled=0)
        for day in range(DAYS_PER_WEEK)
        for hour in range(HOURS_PER_DAY)
    ]


def hourly_series_by_class(
    encounters: Iterable[LocatedEncounter],
    network: AtomicNetwork,
) -> Dict[str, List[int]]:
    """Encounters per functional class and hour of the week (Unmatched included)"""
    width = HOURS_PER_DAY * DAYS_PER_WEEK
    series: Dict[str, List[int]] = {s.functional_class.value: [0] * width for s in network}
    for encounter in encounters:
        if not encounter.in_window:
            continue
        name = (
            network.segment(encounter.segment_id).functional_class.value
            if encounter.segment_id is not None else UNMATCHED_CLASS
        )
        hour = hour_of_week(encounter.time_bin.day_of_week, encounter.hour_index)
        series.setdefault(name, [0] * width)[hour] += 1
    return {name: series[name] for name in sorted(series)}


def heatmap_geojson(encounters: Iterable[LocatedEncounter], network: AtomicNetwork) -> dict:
    """Segments with total and per-slot encounter counts as feature properties"""
    per_zone = count_by_key(encounters, Keying.SPACE_TIME)
    by_segment: Dict[int, Dict[str, int]] = defaultdict(dict)
    for zone, count in per_zone.items():
        by_segment[zone.segment_id][f"{zone.index:02d}"] = count
    properties = {
        segment_id: {"encounters": sum(slots.values()), "slots": slots}
        for segment_id, slots in by_segment.items()
    }
    for segment in network:
        properties.setdefault(segment.segment_id, {"encounters": 0, "slots": {}})
    return network.to_geojson(properties)
