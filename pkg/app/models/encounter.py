"""
Predicted encounter models
"""
from datetime import datetime
from typing import Dict, Optional

from pydantic import BaseModel, Field, root_validator, validator

from .enums import EncounterKind, Provider
from .reception import GpsFix

ENCOUNTER_CSV_HEADER = (
    "participant_id", "device_id", "provider", "start_iso", "end_iso",
    "packet_count", "max_rssi_db", "lat", "lon",
)


class DetectorParams(BaseModel):
    """Sliding-window detector parameters"""
    window_length_s: float = Field(default=1.0, gt=0.0, description="Window length in seconds")
    overlap_fraction: float = Field(default=0.8, ge=0.0, lt=1.0, description="Overlap with the previous window")
    min_packets_per_window: int = Field(default=4, ge=1, description="Packets from one device marking a potential window")
    merge_gap_s: float = Field(default=300.0, gt=0.0, description="Gaps shorter than this merge potential windows")
    max_encounters_per_scooter_per_day: int = Field(default=4, ge=1)
    timezone: str = Field(default="America/Chicago", description="IANA zone whose civil midnight bounds a day")

    class Config:
        frozen = True

    @validator("timezone")
    def valid_timezone(cls, v):
        from zoneinfo import ZoneInfo, ZoneInfoNotFoundError
        try:
            ZoneInfo(v)
        except (ZoneInfoNotFoundError, ValueError):
            raise ValueError(f"unknown timezone: {v}")
        return v

    @root_validator(skip_on_failure=True)
    def merge_gap_exceeds_window(cls, values):
        if values["merge_gap_s"] <= values["window_length_s"]:
            raise ValueError("merge_gap_s must exceed window_length_s")
        if cls._ms(values["window_length_s"]) * (1.0 - values["overlap_fraction"]) < 1.0:
            raise ValueError("window stride must be at least one millisecond")
        return values

    @staticmethod
    def _ms(seconds: float) -> int:
        return int(round(seconds * 1000))

    @property
    def window_ms(self) -> int:
        return self._ms(self.window_length_s)

    @property
    def stride_ms(self) -> int:
        return int(round(self.window_ms * (1.0 - self.overlap_fraction)))

    @property
    def merge_gap_ms(self) -> int:
        return self._ms(self.merge_gap_s)


class Encounter(BaseModel):
    """A detected encounter between one participant and one scooter"""
    participant_id: str
    device_id: str
    provider: Provider = Provider.UNKNOWN
    start: datetime
    end: datetime
    packet_count: int = Field(ge=1)
    max_rssi_db: float = Field(lt=0.0)
    representative_gps: Optional[GpsFix] = None
    kind: EncounterKind = EncounterKind.PREDICTED

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def start_before_end(cls, values):
        if values["start"] > values["end"]:
            raise ValueError("encounter start must not be after its end")
        return values

    @property
    def sort_key(self):
        return (self.start, self.participant_id, self.device_id)

    def to_csv_row(self) -> tuple:
        gps = self.representative_gps
        return (
            self.participant_id,
            self.device_id,
            self.provider.value,
            self.start.isoformat(timespec="milliseconds"),
            self.end.isoformat(timespec="milliseconds"),
            self.packet_count,
            f"{self.max_rssi_db:.2f}",
            "" if gps is None else f"{gps.lat:.7f}",
            "" if gps is None else f"{gps.lon:.7f}",
        )

    def to_json_dict(self) -> dict:
        gps = self.representative_gps
        return {
            "participant_id": self.participant_id,
            "device_id": self.device_id,
            "provider": self.provider.value,
            "start_iso": self.start.isoformat(timespec="milliseconds"),
            "end_iso": self.end.isoformat(timespec="milliseconds"),
            "packet_count": self.packet_count,
            "max_rssi_db": round(self.max_rssi_db, 2),
            "lat": None if gps is None else round(gps.lat, 7),
            "lon": None if gps is None else round(gps.lon, 7),
        }


class CorpusSummary(BaseModel):
    """Counts reported alongside a corpus detection run"""
    unique_scooters_seen: int = 0
    scooters_with_encounters: int = 0
    total_encounters: int = 0
    discarded_by_daily_cap: int = 0
    encounters_by_provider: Dict[str, int] = Field(default_factory=dict)
