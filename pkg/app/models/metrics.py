"""
Safety metric models
"""
from datetime import time
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, root_validator, validator

from .enums import EncounterKind, Group, PoiKind, Provider

METRICS_CSV_HEADER = ("class", "TES_P", "TES_O", "MEM_P", "MEM_O", "PEM_P", "PEM_O")
RSSI_GROUPS_CSV_HEADER = ("keying", "provider", "group", "n", "mean", "median", "q1", "q3", "flag")


class MetricsRow(BaseModel):
    """TES, MEM and PEM of one functional class for one encounter kind"""
    functional_class: str
    tes: int = Field(default=0, ge=0)
    mem: Optional[float] = Field(default=None, ge=0.0)
    pem: Optional[float] = Field(default=None, ge=0.0)


class TesResult(BaseModel):
    """Total encounters per segment, rolled up per class"""
    per_segment: Dict[int, int] = Field(default_factory=dict)
    per_class: Dict[str, int] = Field(default_factory=dict)
    unmatched: int = 0

    @property
    def matched_total(self) -> int:
        return sum(self.per_segment.values())


class MetricsTable(BaseModel):
    """Per-class metrics for predicted and observed encounters"""
    rows: Dict[EncounterKind, List[MetricsRow]] = Field(default_factory=dict)
    totals: Dict[EncounterKind, MetricsRow] = Field(default_factory=dict)
    unmatched: Dict[EncounterKind, int] = Field(default_factory=dict)

    def row(self, kind: EncounterKind, functional_class: str) -> Optional[MetricsRow]:
        for item in self.rows.get(kind, []):
            if item.functional_class == functional_class:
                return item
        return None

    def classes(self) -> List[str]:
        seen: List[str] = []
        for kind_rows in self.rows.values():
            for item in kind_rows:
                if item.functional_class not in seen:
                    seen.append(item.functional_class)
        return seen

    def csv_rows(self) -> List[tuple]:
        def fmt(value: Optional[float]) -> str:
            return "" if value is None else f"{value:.1f}"

        def cells(row_p: Optional[MetricsRow], row_o: Optional[MetricsRow]) -> tuple:
            return (
                row_p.tes if row_p else 0,
                row_o.tes if row_o else 0,
                fmt(row_p.mem if row_p else None),
                fmt(row_o.mem if row_o else None),
                fmt(row_p.pem if row_p else None),
                fmt(row_o.pem if row_o else None),
            )

        out = []
        for name in self.classes():
            out.append((name,) + cells(self.row(EncounterKind.PREDICTED, name), self.row(EncounterKind.OBSERVED, name)))
        out.append(("Total",) + cells(self.totals.get(EncounterKind.PREDICTED), self.totals.get(EncounterKind.OBSERVED)))
        out.append((
            "Unmatched",
            self.unmatched.get(EncounterKind.PREDICTED, 0),
            self.unmatched.get(EncounterKind.OBSERVED, 0),
            "", "", "", "",
        ))
        return out


class RssiGroupStats(BaseModel):
    """Distribution of encounter max RSSI for one provider and group"""
    provider: Provider
    group: Group
    n: int = 0
    mean: Optional[float] = None
    median: Optional[float] = None
    q1: Optional[float] = None
    q3: Optional[float] = None

    @property
    def empty(self) -> bool:
        return self.n == 0

    def to_csv_row(self, keying: str) -> tuple:
        def fmt(value: Optional[float]) -> str:
            return "" if value is None else f"{value:.3f}"

        return (
            keying, self.provider.value, self.group.value, self.n,
            fmt(self.mean), fmt(self.median), fmt(self.q1), fmt(self.q3),
            "empty" if self.empty else "",
        )


class Session(BaseModel):
    """One weekly occurrence of a point-of-interest event"""
    day_of_week: int = Field(ge=0, le=6)
    start: time
    end: time

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def start_before_end(cls, values):
        if values["start"] >= values["end"]:
            raise ValueError("session start must be before its end")
        return values

    def minutes(self) -> Tuple[int, int]:
        return (self.start.hour * 60 + self.start.minute, self.end.hour * 60 + self.end.minute)


class PoiEvent(BaseModel):
    """A pedestrian/rider attractor or generator with its weekly schedule"""
    poi_id: str
    kind: PoiKind = PoiKind.ATTRACTOR
    lat: float = Field(ge=-90.0, le=90.0)
    lon: float = Field(ge=-180.0, le=180.0)
    schedule: Tuple[Session, ...] = Field(default_factory=tuple)
    magnitude: float = Field(default=0.0, ge=0.0, description="Expected headcount per session")

    @validator("schedule")
    def sorted_sessions(cls, v):
        return tuple(sorted(v, key=lambda s: (s.day_of_week, s.start)))
