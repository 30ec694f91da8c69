"""
Spatio-temporal bin models
"""
from typing import Dict, Hashable, List, Optional, Set, Tuple

from pydantic import BaseModel, Field

from .enums import DAY_NAMES, EncounterKind, Keying, Provider


class TimeBin(BaseModel):
    """A 15-minute slot of the study day"""
    day_of_week: int = Field(ge=0, le=6, description="0 = Monday")
    index: int = Field(ge=0, description="Slot index from the start of the study day")

    class Config:
        frozen = True

    @property
    def day_name(self) -> str:
        return DAY_NAMES[self.day_of_week]

    def label(self) -> str:
        return f"{self.day_name}-{self.index:02d}"


class ZoneKey(BaseModel):
    """A spatio-temporal zone: atomic segment and day-agnostic time slot"""
    segment_id: int
    index: int = Field(ge=0, description="Slot index from the start of the study day")

    class Config:
        frozen = True

    def label(self) -> str:
        return f"{self.segment_id}@{self.index:02d}"


class LocatedEncounter(BaseModel):
    """An encounter placed on the network and on the study clock"""
    kind: EncounterKind
    participant_id: str
    provider: Provider = Provider.UNKNOWN
    segment_id: Optional[int] = None
    time_bin: Optional[TimeBin] = None
    hour_index: Optional[int] = None
    max_rssi_db: Optional[float] = None

    class Config:
        frozen = True

    @property
    def in_window(self) -> bool:
        return self.time_bin is not None

    @property
    def matched(self) -> bool:
        return self.segment_id is not None


class FrequencyDistribution(BaseModel):
    """Encounter counts per key over a full key universe"""
    keying: Keying
    universe_size: int = Field(ge=0)
    counts: Dict[Hashable, int] = Field(default_factory=dict, description="Nonzero keys only")
    histogram: Dict[int, int] = Field(default_factory=dict, description="count -> number of keys")
    percentiles: Dict[str, float] = Field(default_factory=dict)

    class Config:
        arbitrary_types_allowed = True

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def zero_keys(self) -> int:
        return self.histogram.get(0, 0)

    def share_at_most(self, k: int) -> float:
        if self.universe_size == 0:
            return 0.0
        return sum(n for count, n in self.histogram.items() if count <= k) / self.universe_size

    def summary(self) -> dict:
        return {
            "keying": self.keying.value,
            "universe_size": self.universe_size,
            "total_encounters": self.total,
            "nonzero_keys": len(self.counts),
            "zero_share": round(self.zero_keys / self.universe_size, 6) if self.universe_size else 0.0,
            "share_at_most_5": round(self.share_at_most(5), 6),
            "max_count": max(self.counts.values(), default=0),
            "percentiles": {key: round(value, 6) for key, value in self.percentiles.items()},
        }


class KeyGroups(BaseModel):
    """High/Low partition of keys by encounter count"""
    max_count: int = 0
    threshold: int = Field(default=0, description="Largest count still in the Low group")
    high: Set[Hashable] = Field(default_factory=set)
    low: Set[Hashable] = Field(default_factory=set)

    class Config:
        arbitrary_types_allowed = True

    @property
    def low_range(self) -> Tuple[int, int]:
        return (1, self.threshold)

    @property
    def high_range(self) -> Tuple[int, int]:
        return (self.threshold + 1, self.max_count)


class HourlyCount(BaseModel):
    """Encounters and scheduled sessions in one hour of the week"""
    day_of_week: int
    hour_index: int
    encounters: int
    scheduled: int


class ScheduleCorrelation(BaseModel):
    """Aligned weekly series with their rank correlation"""
    series: List[HourlyCount] = Field(default_factory=list)
    spearman_rho: Optional[float] = None
    p_value: Optional[float] = None
    defined: bool = False
    reason: str = ""

    def to_json_dict(self) -> dict:
        return {
            "spearman_rho": None if self.spearman_rho is None else round(self.spearman_rho, 6),
            "p_value": None if self.p_value is None else round(self.p_value, 6),
            "defined": self.defined,
            "reason": self.reason,
            "series": [item.dict() for item in self.series],
        }
