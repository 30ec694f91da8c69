"""
Sliding-window encounter detection over per-participant BLE reception streams
"""
import logging
from bisect import bisect_left
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
from zoneinfo import ZoneInfo

import numpy as np

from app.exceptions import DataError
from app.models import BleReception, CorpusSummary, DetectorParams, Encounter, Provider
from .ble import ProviderClassifier

logger = logging.getLogger(__name__)

Span = Tuple[int, int]


def potential_windows(offsets_ms: Sequence[int], params: DetectorParams) -> List[int]:
    """
    Indices of windows holding at least min_packets_per_window packets

    Window j covers [j * stride, j * stride + window) on the offsets, which are
    measured from the first packet of the partition.
    """
    if len(offsets_ms) == 0:
        return []
    window, stride = params.window_ms, params.stride_ms
    tau = np.asarray(offsets_ms, dtype=np.int64)
    j_hi = tau // stride
    j_lo = np.maximum((tau - window) // stride + 1, 0)
    per_packet = int((j_hi - j_lo).max()) + 1

    # every (packet, window) membership, at most ceil(window / stride) per packet
    candidates = (j_lo[:, None] + np.arange(per_packet)[None, :])
    valid = candidates <= j_hi[:, None]
    js, counts = np.unique(candidates[valid], return_counts=True)
    return [int(j) for j in js[counts >= params.min_packets_per_window]]


def merge_windows(offsets_ms: Sequence[int], windows: Sequence[int], params: DetectorParams) -> List[Span]:
    """
    Merge potential windows into encounter spans of packet indices

    Adjacent windows merge when the gap between the last packet taken so far
    and the first packet of the next window is below merge_gap.
    """
    spans: List[Span] = []
    current: Optional[List[int]] = None
    for j in windows:
        lo = bisect_left(offsets_ms, j * params.stride_ms)
        hi = bisect_left(offsets_ms, j * params.stride_ms + params.window_ms)
        if current is not None and offsets_ms[lo] - offsets_ms[current[1] - 1] < params.merge_gap_ms:
            current[1] = max(current[1], hi)
            continue
        if current is not None:
            spans.append((current[0], current[1]))
        current = [lo, hi]
    if current is not None:
        spans.append((current[0], current[1]))
    return spans


class EncounterDetector:
    """Detects predicted encounters with the sliding-window rule"""

    def __init__(
        self,
        params: Optional[DetectorParams] = None,
        classifier: Optional[ProviderClassifier] = None,
    ):
        self.params = params or DetectorParams()
        self.classifier = classifier or ProviderClassifier.default()
        self.zone = ZoneInfo(self.params.timezone)
        self.discarded = 0

    def detect(self, stream: Sequence[BleReception]) -> List[Encounter]:
        """
        Detect encounters in one participant's time-ordered stream

        Args:
            stream: Receptions of a single participant, sorted by timestamp

        Returns:
            Encounters sorted by start time

        Raises:
            DataError: If the stream is unsorted or mixes participants
        """
        if not stream:
            return []
        self._validate(stream)

        by_device: Dict[str, List[BleReception]] = defaultdict(list)
        for reception in stream:
            by_device[reception.device_id].append(reception)

        encounters: List[Encounter] = []
        for device_id in sorted(by_device):
            packets = by_device[device_id]
            epoch = [p.epoch_ms for p in packets]
            offsets = [t - epoch[0] for t in epoch]
            windows = potential_windows(offsets, self.params)
            spans = merge_windows(offsets, windows, self.params)
            logger.debug(
                f"{stream[0].receiver_id}/{device_id}: {len(packets)} packets, "
                f"{len(windows)} potential windows, {len(spans)} encounters before cap"
            )
            encounters.extend(self._build(packets[lo:hi]) for lo, hi in spans)

        encounters = self._apply_daily_cap(encounters)
        encounters.sort(key=lambda e: e.sort_key)
        return encounters

    def detect_corpus(
        self,
        streams: Iterable[Tuple[str, Sequence[BleReception]]],
        max_workers: int = 1,
    ) -> Tuple[List[Encounter], CorpusSummary]:
        """
        Detect encounters across participants

        Args:
            streams: (participant_id, stream) pairs
            max_workers: Worker processes; 1 runs in-process

        Returns:
            All encounters ordered by start time, and the corpus summary

        Raises:
            DataError: If a participant id appears twice
        """
        streams = list(streams)
        seen = set()
        for participant_id, stream in streams:
            if participant_id in seen:
                raise DataError(f"duplicate participant id across streams: {participant_id}")
            seen.add(participant_id)
            if any(r.receiver_id != participant_id for r in stream):
                raise DataError(f"stream for {participant_id} contains receptions of another participant")

        logger.info(f"Detecting encounters for {len(streams)} participants")
        self.discarded = 0
        if max_workers > 1 and len(streams) > 1:
            with ProcessPoolExecutor(max_workers=max_workers) as pool:
                results = list(pool.map(_detect_with_cap_count, [self] * len(streams), [s for _, s in streams]))
        else:
            results = [_detect_with_cap_count(self, stream) for _, stream in streams]

        encounters: List[Encounter] = []
        discarded = 0
        for found, dropped in results:
            encounters.extend(found)
            discarded += dropped
        encounters.sort(key=lambda e: e.sort_key)
        self.discarded = discarded

        devices_seen = {r.device_id for _, stream in streams for r in stream}
        by_provider = Counter(e.provider.value for e in encounters)
        summary = CorpusSummary(
            unique_scooters_seen=len(devices_seen),
            scooters_with_encounters=len({e.device_id for e in encounters}),
            total_encounters=len(encounters),
            discarded_by_daily_cap=discarded,
            encounters_by_provider=dict(sorted(by_provider.items())),
        )
        logger.info(
            f"Detected {summary.total_encounters} encounters with {summary.scooters_with_encounters} "
            f"of {summary.unique_scooters_seen} scooters ({discarded} discarded by the daily cap)"
        )
        return encounters, summary

    def _validate(self, stream: Sequence[BleReception]) -> None:
        participant = stream[0].receiver_id
        previous = None
        for index, reception in enumerate(stream):
            if reception.receiver_id != participant:
                raise DataError(
                    f"stream mixes participants {participant!r} and {reception.receiver_id!r}", line=index + 1
                )
            current = reception.epoch_ms
            if previous is not None and current < previous:
                raise DataError("stream is not sorted by timestamp", line=index + 1)
            previous = current

    def _build(self, packets: Sequence[BleReception]) -> Encounter:
        strongest = max(range(len(packets)), key=lambda i: (packets[i].rssi_db, -i))
        gps = packets[strongest].gps
        if gps is None:
            gps = next((p.gps for p in packets if p.gps is not None), None)
        return Encounter(
            participant_id=packets[0].receiver_id,
            device_id=packets[0].device_id,
            provider=self._provider_of(packets),
            start=packets[0].timestamp,
            end=packets[-1].timestamp,
            packet_count=len(packets),
            max_rssi_db=packets[strongest].rssi_db,
            representative_gps=gps,
        )

    def _provider_of(self, packets: Sequence[BleReception]) -> Provider:
        cache: Dict[bytes, Provider] = {}
        for packet in packets:
            if packet.payload not in cache:
                cache[packet.payload] = self.classifier.classify(packet.payload)
            if cache[packet.payload] != Provider.UNKNOWN:
                return cache[packet.payload]
        return Provider.UNKNOWN

    def _apply_daily_cap(self, encounters: List[Encounter]) -> List[Encounter]:
        cap = self.params.max_encounters_per_scooter_per_day
        per_day: Dict[tuple, List[Encounter]] = defaultdict(list)
        for encounter in encounters:
            day = encounter.start.astimezone(self.zone).date()
            per_day[(encounter.participant_id, encounter.device_id, day)].append(encounter)

        kept: List[Encounter] = []
        for group in per_day.values():
            group.sort(key=lambda e: e.start)
            kept.extend(group[:cap])
            if len(group) > cap:
                self.discarded += len(group) - cap
        return kept


def _detect_with_cap_count(detector: EncounterDetector, stream: Sequence[BleReception]) -> Tuple[List[Encounter], int]:
    before = detector.discarded
    found = detector.detect(stream)
    return found, detector.discarded - before


def detect_encounters(
    stream: Sequence[BleReception],
    params: Optional[DetectorParams] = None,
    classifier: Optional[ProviderClassifier] = None,
) -> List[Encounter]:
    """Detect encounters in one participant's stream"""
    return EncounterDetector(params, classifier).detect(stream)


def detect_corpus(
    streams: Iterable[Tuple[str, Sequence[BleReception]]],
    params: Optional[DetectorParams] = None,
    classifier: Optional[ProviderClassifier] = None,
    max_workers: int = 1,
) -> Tuple[List[Encounter], CorpusSummary]:
    """Detect encounters across participant streams"""
    return EncounterDetector(params, classifier).detect_corpus(streams, max_workers=max_workers)


def partition_by_participant(receptions: Iterable[BleReception]) -> List[Tuple[str, List[BleReception]]]:
    """Group receptions per participant, each stream sorted by timestamp"""
    streams: Dict[str, List[BleReception]] = defaultdict(list)
    for reception in receptions:
        streams[reception.receiver_id].append(reception)
    return [
        (participant_id, sorted(streams[participant_id], key=lambda r: r.epoch_ms))
        for participant_id in sorted(streams)
    ]
