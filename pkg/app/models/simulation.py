"""
Field simulator models
"""
from datetime import date, datetime
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, root_validator, validator

from .encounter import DetectorParams
from .enums import Provider

TRUTH_CSV_HEADER = ("participant_id", "device_id", "provider", "start_iso", "end_iso", "min_distance_ft", "moving")


class ReceptionModel(BaseModel):
    """Probability that a watch captures an advertisement at a given distance"""
    near_ft: float = Field(default=20.0, gt=0.0, description="Distance up to which capture is reliable")
    near_probability: float = Field(default=0.95, gt=0.0, le=1.0)
    far_ft: float = Field(default=60.0, gt=0.0, description="Distance where capture reaches its floor")
    far_probability: float = Field(default=0.05, ge=0.0, le=1.0)
    max_range_ft: float = Field(default=150.0, gt=0.0, description="No capture beyond this distance")

    @root_validator(skip_on_failure=True)
    def ordered_knees(cls, values):
        if not values["near_ft"] < values["far_ft"] <= values["max_range_ft"]:
            raise ValueError("expected near_ft < far_ft <= max_range_ft")
        if values["far_probability"] > values["near_probability"]:
            raise ValueError("capture probability must not grow with distance")
        return values


class GridSpec(BaseModel):
    """Synthetic campus grid used when no network file is given"""
    rows: int = Field(default=6, ge=2)
    cols: int = Field(default=6, ge=2)
    block_m: float = Field(default=120.0, gt=0.0)
    origin: Tuple[float, float] = (29.5830, -98.6190)


class SimConfig(BaseModel):
    """Everything a simulation run depends on"""
    seed: int = 7
    network: Optional[Path] = None
    grid: GridSpec = Field(default_factory=GridSpec)
    schedule: Optional[Path] = None
    start_date: date = date(2019, 4, 1)
    duration_days: int = Field(default=7, ge=1)
    timezone: str = "America/Chicago"

    n_pedestrians: int = Field(default=8, ge=0)
    n_scooters: int = Field(default=20, ge=0)
    parked_fraction: float = Field(default=0.8, ge=0.0, le=1.0)
    provider_mix: Dict[Provider, float] = Field(
        default_factory=lambda: {Provider.BIRD: 0.5, Provider.LIME: 0.48, Provider.BLUE_DUCK: 0.02}
    )

    trips_per_pedestrian_per_day: float = Field(default=3.0, ge=0.0)
    rides_per_scooter_per_day: float = Field(default=6.0, ge=0.0)
    base_demand: float = Field(default=0.05, ge=0.0, description="Intensity share outside scheduled sessions")
    pedestrian_speed_mps: float = Field(default=1.34, gt=0.0)
    scooter_speed_mps: Tuple[float, float] = (4.5, 6.93)

    advertisement_interval_s: float = Field(default=0.25, gt=0.0)
    advertisement_jitter_s: float = Field(default=0.01, ge=0.0)
    rssi_noise_sigma_db: float = Field(default=4.0, ge=0.0)
    path_loss_exponent: float = Field(default=2.0, ge=1.5, le=4.0)
    reception: ReceptionModel = Field(default_factory=ReceptionModel)
    tick_s: float = Field(default=0.05, gt=0.0)
    gps_sigma_m: float = Field(default=3.0, ge=0.0)

    lateral_offset_m: Tuple[float, float] = (0.3, 3.0)
    intersection_clearance_m: float = Field(default=30.0, ge=0.0)
    closer_passes_on_busy_segments: bool = True

    truth_distance_ft: float = Field(default=25.0, gt=0.0)
    truth_min_duration_s: float = Field(default=1.0, ge=0.0)

    feedback_fraction: float = Field(default=0.8, ge=0.0, le=1.0)
    prompt_interval_s: float = Field(default=900.0, ge=0.0)
    startle_fraction: float = Field(default=0.6, ge=0.0, le=1.0)
    startle_boost_bpm: float = Field(default=20.0, ge=0.0)
    resting_heart_rate_bpm: Tuple[float, float] = (62.0, 80.0)
    heart_rate_sigma_bpm: float = Field(default=3.0, gt=0.0)

    detector: DetectorParams = Field(default_factory=DetectorParams)

    @validator("scooter_speed_mps", "lateral_offset_m", "resting_heart_rate_bpm")
    def ordered_range(cls, v):
        if v[0] > v[1] or v[0] < 0:
            raise ValueError("range must be non-negative and ordered (low, high)")
        return v

    @root_validator(skip_on_failure=True)
    def advertisements_detectable(cls, values):
        detector = values["detector"]
        limit = detector.window_length_s / detector.min_packets_per_window
        if values["advertisement_interval_s"] > limit + 1e-9:
            raise ValueError(
                f"advertisement_interval_s={values['advertisement_interval_s']} exceeds "
                f"window_length_s / min_packets_per_window = {limit}; close passes would be undetectable"
            )
        return values


class GroundTruthEncounter(BaseModel):
    """A close approach the simulator planted"""
    participant_id: str
    device_id: str
    provider: Provider = Provider.UNKNOWN
    start: datetime
    end: datetime
    min_distance_ft: float = Field(ge=0.0)
    moving: bool = False

    class Config:
        frozen = True

    def to_csv_row(self) -> tuple:
        return (
            self.participant_id,
            self.device_id,
            self.provider.value,
            self.start.isoformat(timespec="milliseconds"),
            self.end.isoformat(timespec="milliseconds"),
            f"{self.min_distance_ft:.2f}",
            "yes" if self.moving else "no",
        )


class MatchedPair(BaseModel):
    """A truth encounter paired with an overlapping detection"""
    participant_id: str
    device_id: str
    truth_start: datetime
    detected_start: datetime


class ScoreReport(BaseModel):
    """Precision and recall of a detector run against planted truth"""
    n_truth: int = 0
    n_detected: int = 0
    true_positive_detections: int = 0
    recovered_truth: int = 0
    precision: float = 1.0
    recall: float = 1.0
    precision_defined: bool = True
    recall_defined: bool = True
    matched: List[MatchedPair] = Field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "n_truth": self.n_truth,
            "n_detected": self.n_detected,
            "true_positive_detections": self.true_positive_detections,
            "recovered_truth": self.recovered_truth,
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "precision_defined": self.precision_defined,
            "recall_defined": self.recall_defined,
            "matched_pairs": len(self.matched),
        }
