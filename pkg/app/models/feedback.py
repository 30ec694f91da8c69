"""
Observed encounter (participant feedback) models
"""
from datetime import datetime
from typing import Optional, Tuple

from pydantic import BaseModel, Field, root_validator

from .enums import Provider, ProximityClass
from .reception import GpsFix

FEEDBACK_CSV_HEADER = (
    "participant_id", "iso_time", "lat", "lon", "provider", "q_moving",
    "q_in_front", "q_toward", "heart_rate_bpm", "answered_within_s",
)

MAX_ANSWER_DELAY_S = 60.0


class FeedbackRecord(BaseModel):
    """Answers to the on-watch encounter questions"""
    participant_id: str = Field(min_length=1)
    timestamp: datetime
    gps: Optional[GpsFix] = None
    provider: Provider = Provider.UNKNOWN
    q_moving: bool
    q_in_front: Optional[bool] = None
    q_toward: Optional[bool] = None
    heart_rate_bpm: Optional[float] = Field(default=None, gt=25.0, lt=250.0)
    answered_within_s: float = Field(ge=0.0, le=MAX_ANSWER_DELAY_S)

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def stationary_has_no_direction(cls, values):
        if not values["q_moving"] and (values.get("q_in_front") is not None or values.get("q_toward") is not None):
            raise ValueError("direction questions are not asked when the scooter is not moving")
        ts = values["timestamp"]
        if ts.tzinfo is None or ts.utcoffset() is None:
            raise ValueError("timestamp must carry a UTC offset")
        return values

    def to_csv_row(self) -> tuple:
        def yes_no(value: Optional[bool]) -> str:
            if value is None:
                return ""
            return "yes" if value else "no"

        return (
            self.participant_id,
            self.timestamp.isoformat(timespec="milliseconds"),
            "" if self.gps is None else f"{self.gps.lat:.7f}",
            "" if self.gps is None else f"{self.gps.lon:.7f}",
            self.provider.value,
            yes_no(self.q_moving),
            yes_no(self.q_in_front),
            yes_no(self.q_toward),
            "" if self.heart_rate_bpm is None else f"{self.heart_rate_bpm:.1f}",
            f"{self.answered_within_s:.1f}",
        )


class HeartRateProfile(BaseModel):
    """Personal heart-rate band built from a participant's samples"""
    participant_id: str
    samples: Tuple[float, ...] = Field(default_factory=tuple)
    band_low: float
    band_high: float
    modal_bin: Tuple[float, float]
    low_confidence: bool = False

    class Config:
        frozen = True

    @root_validator(skip_on_failure=True)
    def band_is_ordered(cls, values):
        if values["band_low"] >= values["band_high"]:
            raise ValueError("band_low must be below band_high")
        return values


class DirectionMatrix(BaseModel):
    """Observed encounters by movement, line of sight and direction"""
    stationary: int = 0
    front_toward: int = 0
    front_away: int = 0
    behind_toward: int = 0
    behind_away: int = 0
    moving_unanswered: int = 0

    @property
    def moving(self) -> int:
        return self.front_toward + self.front_away + self.behind_toward + self.behind_away + self.moving_unanswered

    @property
    def total(self) -> int:
        return self.stationary + self.moving

    @property
    def approaching_from_behind(self) -> int:
        return self.behind_toward

    def fractions(self) -> dict:
        counts = self.dict()
        if self.total == 0:
            return {key: 0.0 for key in counts}
        return {key: value / self.total for key, value in counts.items()}

    def to_json_dict(self) -> dict:
        return {
            "counts": self.dict(),
            "fractions": {key: round(value, 6) for key, value in self.fractions().items()},
            "moving": self.moving,
            "total": self.total,
            "approaching_from_behind": self.approaching_from_behind,
        }


class ObservedPredictedLink(BaseModel):
    """An observed record joined to a concurrent predicted encounter"""
    participant_id: str
    feedback_time: datetime
    device_id: Optional[str] = None
    max_rssi_db: Optional[float] = None
    proximity: Optional[ProximityClass] = None
    candidates: int = 0

    @property
    def ambiguous(self) -> bool:
        return self.candidates > 1
