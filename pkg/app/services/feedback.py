"""
Observed encounters: prompt gating, study-window filtering, heart-rate startle
"""
import logging
import math
from collections import defaultdict
from datetime import datetime, time
from typing import Dict, Iterable, List, Optional, Sequence, Set, Union
from zoneinfo import ZoneInfo

import numpy as np

from app.exceptions import DataError
from app.models import (
    DirectionMatrix,
    Encounter,
    FeedbackRecord,
    HeartRateProfile,
    ObservedPredictedLink,
    Provider,
    ProviderBaselines,
    StartleClass,
)
from .ble import proximity_class

logger = logging.getLogger(__name__)

STUDY_START = time(6, 0)
STUDY_END = time(23, 0)
STUDY_PROVIDERS = frozenset({Provider.BIRD, Provider.LIME})

Instant = Union[datetime, float]


def _seconds(value: Instant) -> float:
    return value.timestamp() if isinstance(value, datetime) else float(value)


def gate_prompts(events: Sequence[Instant], min_interval_s: float = 900.0) -> List[Instant]:
    """
    Accept an event only if min_interval_s has passed since the last accepted one

    Args:
        events: Time-ordered prompt-worthy events of one participant (datetimes or seconds)
        min_interval_s: Quiet period after each accepted prompt

    Returns:
        Accepted events, in order
    """
    accepted: List[Instant] = []
    last: Optional[float] = None
    previous: Optional[float] = None
    for event in events:
        t = _seconds(event)
        if previous is not None and t < previous:
            raise DataError("prompt events must be time-ordered")
        previous = t
        if last is None or t - last >= min_interval_s:
            accepted.append(event)
            last = t
    return accepted


def in_study_window(
    timestamp: datetime,
    zone: Optional[ZoneInfo] = None,
    start: time = STUDY_START,
    end: time = STUDY_END,
) -> bool:
    """Local time of day falls in [start, end)"""
    local = timestamp.astimezone(zone) if zone is not None else timestamp
    return start <= local.time().replace(tzinfo=None) < end


def filter_study_window(
    records: Iterable[FeedbackRecord],
    zone: Optional[ZoneInfo] = None,
    providers: Set[Provider] = STUDY_PROVIDERS,
    start: time = STUDY_START,
    end: time = STUDY_END,
) -> List[FeedbackRecord]:
    """Keep records between 06:00 and 23:00 local time from the studied providers"""
    kept = [
        record for record in records
        if record.provider in providers and in_study_window(record.timestamp, zone, start, end)
    ]
    logger.debug(f"Study-window filter kept {len(kept)} records")
    return kept


def _median_absolute_deviation(values: np.ndarray) -> float:
    return float(np.median(np.abs(values - np.median(values))))


def build_profile(
    participant_id: str,
    samples: Sequence[float],
    bin_width_bpm: float = 5.0,
    spread_multiplier: float = 3.0,
    min_samples: int = 30,
) -> HeartRateProfile:
    """
    Build a personal heart-rate band around the most frequent pulse rate

    The band is centred on the modal histogram bin (bins aligned to multiples
    of bin_width_bpm, lowest bin wins ties) with half-width
    spread_multiplier x MAD, never narrower than the modal bin, then clamped to
    the observed sample range without cutting into the modal bin.

    Raises:
        DataError: If there are no samples
    """
    values = np.asarray([s for s in samples if s is not None], dtype=float)
    if values.size == 0:
        raise DataError(f"no heart-rate samples for participant {participant_id}")

    lo_sample, hi_sample = float(values.min()), float(values.max())
    bins = np.floor(values / bin_width_bpm).astype(np.int64)
    unique, counts = np.unique(bins, return_counts=True)
    modal = int(unique[np.argmax(counts)])
    bin_low, bin_high = modal * bin_width_bpm, (modal + 1) * bin_width_bpm

    if values.size < min_samples:
        logger.warning(
            f"Only {values.size} heart-rate samples for {participant_id}; profile marked low-confidence"
        )
        band_low, band_high = lo_sample, hi_sample
        if band_low >= band_high:
            band_low, band_high = lo_sample - bin_width_bpm / 2, hi_sample + bin_width_bpm / 2
        return HeartRateProfile(
            participant_id=participant_id,
            samples=tuple(values.tolist()),
            band_low=band_low,
            band_high=band_high,
            modal_bin=(bin_low, bin_high),
            low_confidence=True,
        )

    center = (bin_low + bin_high) / 2
    half_width = max(spread_multiplier * _median_absolute_deviation(values), bin_width_bpm / 2)
    band_low = max(center - half_width, min(lo_sample, bin_low))
    band_high = min(center + half_width, max(hi_sample, bin_high))

    return HeartRateProfile(
        participant_id=participant_id,
        samples=tuple(values.tolist()),
        band_low=band_low,
        band_high=band_high,
        modal_bin=(bin_low, bin_high),
    )


def build_profiles(
    samples_by_participant: Dict[str, Sequence[float]],
    **kwargs,
) -> Dict[str, HeartRateProfile]:
    """One profile per participant that has at least one sample"""
    profiles = {}
    for participant_id in sorted(samples_by_participant):
        samples = samples_by_participant[participant_id]
        if len(samples) == 0:
            continue
        profiles[participant_id] = build_profile(participant_id, samples, **kwargs)
    return profiles


def classify_startle(record: FeedbackRecord, profile: HeartRateProfile) -> StartleClass:
    """Elevated when the heart rate exceeds the participant's band"""
    if record.heart_rate_bpm is None:
        return StartleClass.UNKNOWN
    if record.heart_rate_bpm > profile.band_high:
        return StartleClass.ELEVATED
    return StartleClass.NORMAL


def elevated_fraction(records: Iterable[FeedbackRecord], profiles: Dict[str, HeartRateProfile]) -> Optional[float]:
    """Share of records with a known heart rate that are Elevated"""
    known = elevated = 0
    for record in records:
        profile = profiles.get(record.participant_id)
        if profile is None:
            continue
        startle = classify_startle(record, profile)
        if startle == StartleClass.UNKNOWN:
            continue
        known += 1
        elevated += startle == StartleClass.ELEVATED
    return elevated / known if known else None


def summarize_direction_matrix(records: Iterable[FeedbackRecord]) -> DirectionMatrix:
    """Count records by moving / in front / toward"""
    matrix = DirectionMatrix()
    for record in records:
        if not record.q_moving:
            matrix.stationary += 1
        elif record.q_in_front is None or record.q_toward is None:
            matrix.moving_unanswered += 1
        elif record.q_in_front and record.q_toward:
            matrix.front_toward += 1
        elif record.q_in_front:
            matrix.front_away += 1
        elif record.q_toward:
            matrix.behind_toward += 1
        else:
            matrix.behind_away += 1
    return matrix


def link_observed_to_predicted(
    records: Iterable[FeedbackRecord],
    encounters: Iterable[Encounter],
    tolerance_s: float = 60.0,
    baselines: Optional[ProviderBaselines] = None,
) -> List[ObservedPredictedLink]:
    """
    Join each observed record to the predicted encounter it most likely describes

    A candidate is an encounter of the same participant and provider whose
    span, widened by tolerance_s, contains the record time. The candidate with
    the strongest max RSSI is reported; several candidates mark the link ambiguous.
    """
    by_participant: Dict[str, List[Encounter]] = defaultdict(list)
    for encounter in encounters:
        by_participant[encounter.participant_id].append(encounter)

    links = []
    for record in records:
        t = record.timestamp.timestamp()
        candidates = [
            e for e in by_participant.get(record.participant_id, [])
            if e.provider == record.provider
            and e.start.timestamp() - tolerance_s <= t <= e.end.timestamp() + tolerance_s
        ]
        if not candidates:
            links.append(ObservedPredictedLink(participant_id=record.participant_id, feedback_time=record.timestamp))
            continue
        best = max(candidates, key=lambda e: (e.max_rssi_db, -e.start.timestamp()))
        estimate = proximity_class(best.max_rssi_db, best.provider, baselines=baselines)
        links.append(ObservedPredictedLink(
            participant_id=record.participant_id,
            feedback_time=record.timestamp,
            device_id=best.device_id,
            max_rssi_db=best.max_rssi_db,
            proximity=estimate.proximity,
            candidates=len(candidates),
        ))
    return links


def prompt_count_bound(span_s: float, min_interval_s: float) -> int:
    """Upper bound on accepted prompts within a span"""
    return int(math.floor(span_s / min_interval_s)) + 1
