"""
Safety metrics: TES, MEM and PEM per functional class, RSSI group comparison
and schedule correlation
"""
import logging
from collections import defaultdict
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from app.exceptions import DomainError
from app.models import (
    UNMATCHED_CLASS,
    EncounterKind,
    FunctionalClass,
    Group,
    HourlyCount,
    LocatedEncounter,
    MemMethod,
    MetricsRow,
    MetricsTable,
    PemFormula,
    PoiEvent,
    Provider,
    RssiGroupStats,
    ScheduleCorrelation,
    TesResult,
)
from .binning import DAY_START_MINUTE, HOURS_PER_DAY
from .geo_graph import AtomicNetwork

logger = logging.getLogger(__name__)

# the class schedule has no Sunday sessions
DEFAULT_CORRELATION_DAYS = (0, 1, 2, 3, 4, 5)


def tes(encounters: Iterable[LocatedEncounter], network: AtomicNetwork) -> TesResult:
    """
    Total Encounters per Segment, rolled up per functional class

    Only encounters inside the study day count; those that did not snap to a
    segment are tallied as unmatched.
    """
    per_segment = {s.segment_id: 0 for s in network}
    unmatched = 0
    for encounter in encounters:
        if not encounter.in_window:
            continue
        if encounter.segment_id is None or encounter.segment_id not in per_segment:
            unmatched += 1
            continue
        per_segment[encounter.segment_id] += 1

    per_class: Dict[str, int] = {}
    for functional_class in FunctionalClass:
        members = [s.segment_id for s in network if s.functional_class == functional_class]
        if members:
            per_class[functional_class.value] = sum(per_segment[i] for i in members)
    return TesResult(per_segment=per_segment, per_class=per_class, unmatched=unmatched)


def _segments_by_class(network: AtomicNetwork) -> Dict[str, list]:
    grouped: Dict[str, list] = defaultdict(list)
    for segment in network:
        grouped[segment.functional_class.value].append(segment)
    return grouped


def _mem_of(segments: Sequence, per_segment_tes: Mapping[int, int], method: MemMethod) -> float:
    counts = np.array([per_segment_tes.get(s.segment_id, 0) for s in segments], dtype=float)
    lengths = np.array([s.length_miles for s in segments], dtype=float)
    if method == MemMethod.RATIO_OF_TOTALS:
        return float(counts.sum() / lengths.sum())
    return float(np.mean(counts / lengths))


def mem(
    per_segment_tes: Mapping[int, int],
    network: AtomicNetwork,
    method: MemMethod = MemMethod.MEAN_OF_RATIOS,
) -> Dict[str, float]:
    """
    Mean Encounters per Mile of each functional class

    Segments without encounters take part in the mean. Classes without any
    segment are left out.
    """
    grouped = _segments_by_class(network)
    result = {}
    for functional_class in FunctionalClass:
        segments = grouped.get(functional_class.value)
        if not segments:
            logger.warning(f"No {functional_class.value} segments in the network; MEM omitted")
            continue
        result[functional_class.value] = _mem_of(segments, per_segment_tes, method)
    return result


def pem(
    per_class_mem: Mapping[str, float],
    formula: PemFormula = PemFormula.MEM_SHARE,
    per_class_tes: Optional[Mapping[str, int]] = None,
) -> Dict[str, float]:
    """
    Percent Encounters per Mile of each class

    Raises:
        DomainError: If the shares are computed over a zero total
    """
    if formula == PemFormula.TES_SHARE:
        if per_class_tes is None:
            raise DomainError("the TES-share formula needs per-class TES")
        shares = {name: float(per_class_tes.get(name, 0)) for name in per_class_mem}
    else:
        shares = {name: float(value) for name, value in per_class_mem.items()}

    total = float(np.sum(list(shares.values()))) if shares else 0.0
    if total <= 0:
        raise DomainError("PEM is undefined when every class has zero encounters")
    return {name: 100.0 * value / total for name, value in shares.items()}


def _kind_rows(
    encounters: Sequence[LocatedEncounter],
    network: AtomicNetwork,
    mem_method: MemMethod,
    pem_formula: PemFormula,
    label: str,
) -> Tuple[List[MetricsRow], MetricsRow, int]:
    totals = tes(encounters, network)
    class_mem = mem(totals.per_segment, network, mem_method)
    try:
        class_pem = pem(class_mem, pem_formula, totals.per_class)
        total_pem = 100.0
    except DomainError:
        logger.warning(f"No {label} encounters on the network; metrics are all zero")
        class_pem = {name: 0.0 for name in class_mem}
        total_pem = 0.0

    rows = [
        MetricsRow(
            functional_class=name,
            tes=totals.per_class.get(name, 0),
            mem=class_mem[name],
            pem=class_pem[name],
        )
        for name in class_mem
    ]
    total = MetricsRow(
        functional_class="Total",
        tes=totals.matched_total,
        mem=_mem_of(network.segments, totals.per_segment, mem_method) if len(network) else None,
        pem=total_pem,
    )
    return rows, total, totals.unmatched


def build_metrics_table(
    predicted: Sequence[LocatedEncounter],
    observed: Sequence[LocatedEncounter],
    network: AtomicNetwork,
    mem_method: MemMethod = MemMethod.MEAN_OF_RATIOS,
    pem_formula: PemFormula = PemFormula.MEM_SHARE,
) -> MetricsTable:
    """Per-class TES, MEM and PEM for predicted and observed encounters"""
    table = MetricsTable()
    for kind, encounters in ((EncounterKind.PREDICTED, predicted), (EncounterKind.OBSERVED, observed)):
        rows, total, unmatched = _kind_rows(encounters, network, mem_method, pem_formula, kind.value.lower())
        table.rows[kind] = rows
        table.totals[kind] = total
        table.unmatched[kind] = unmatched
        logger.info(
            f"{kind.value}: TES {total.tes} on {len(network)} segments, "
            f"{unmatched} encounters reported as {UNMATCHED_CLASS}"
        )
    return table


def rssi_group_comparison(
    encounters: Sequence[LocatedEncounter],
    groups: Sequence[Optional[Group]],
) -> List[RssiGroupStats]:
    """
    Max-RSSI distribution per provider and High/Low group

    Args:
        encounters: Located predicted encounters
        groups: Group of each encounter, aligned with encounters (None = ungrouped)
    """
    if len(encounters) != len(groups):
        raise DomainError("encounters and groups must be aligned")
    values: Dict[Tuple[Provider, Group], List[float]] = defaultdict(list)
    providers = set()
    for encounter, group in zip(encounters, groups):
        if group is None or encounter.max_rssi_db is None:
            continue
        providers.add(encounter.provider)
        values[(encounter.provider, group)].append(encounter.max_rssi_db)

    result = []
    for provider in sorted(providers, key=lambda p: p.value):
        for group in (Group.HIGH, Group.LOW):
            sample = np.asarray(values.get((provider, group), []), dtype=float)
            if sample.size == 0:
                logger.warning(f"{provider.value} has no {group.value}-group encounters")
                result.append(RssiGroupStats(provider=provider, group=group))
                continue
            q1, median, q3 = np.quantile(sample, [0.25, 0.5, 0.75])
            result.append(RssiGroupStats(
                provider=provider,
                group=group,
                n=int(sample.size),
                mean=float(sample.mean()),
                median=float(median),
                q1=float(q1),
                q3=float(q3),
            ))
    return result


def scheduled_per_hour(schedule: Iterable[PoiEvent]) -> Dict[Tuple[int, int], int]:
    """Number of sessions overlapping each study hour of the week"""
    counts: Dict[Tuple[int, int], int] = defaultdict(int)
    for event in schedule:
        for session in event.schedule:
            start, end = session.minutes()
            for hour in range(HOURS_PER_DAY):
                lo = DAY_START_MINUTE + hour * 60
                if start < lo + 60 and end > lo:
                    counts[(session.day_of_week, hour)] += 1
    return dict(counts)


def schedule_correlation(
    hourly: Sequence[HourlyCount],
    schedule: Iterable[PoiEvent],
    days: Sequence[int] = DEFAULT_CORRELATION_DAYS,
) -> ScheduleCorrelation:
    """
    Align hourly encounter counts with scheduled sessions and rank-correlate them

    A constant series leaves the correlation undefined; that is reported, not raised.
    """
    scheduled = scheduled_per_hour(schedule)
    series = [
        item.copy(update={"scheduled": scheduled.get((item.day_of_week, item.hour_index), 0)})
        for item in hourly
        if item.day_of_week in days
    ]
    encounters = np.array([item.encounters for item in series], dtype=float)
    sessions = np.array([item.scheduled for item in series], dtype=float)

    if len(series) < 2:
        return ScheduleCorrelation(series=series, reason="fewer than two hourly bins")
    if np.all(encounters == encounters[0]):
        logger.warning("Hourly encounter series is constant; schedule correlation undefined")
        return ScheduleCorrelation(series=series, reason="encounter series is constant")
    if np.all(sessions == sessions[0]):
        logger.warning("Schedule series is constant; schedule correlation undefined")
        return ScheduleCorrelation(series=series, reason="schedule series is constant")

    rho, p_value = stats.spearmanr(encounters, sessions)
    logger.info(f"Schedule correlation over {len(series)} hours: rho={rho:.3f} (p={p_value:.3g})")
    return ScheduleCorrelation(series=series, spearman_rho=float(rho), p_value=float(p_value), defined=True)
