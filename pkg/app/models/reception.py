"""
BLE reception models
"""
from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, validator

from .enums import MatchField, MatchKind, Provider, ProximityClass


class GpsFix(BaseModel):
    """Receiver position reported by the watch"""
    lat: float = Field(ge=-90.0, le=90.0, description="Latitude in degrees")
    lon: float = Field(ge=-180.0, le=180.0, description="Longitude in degrees")
    accuracy_m: Optional[float] = Field(default=None, ge=0.0, description="Horizontal accuracy in meters")

    class Config:
        frozen = True


class BleReception(BaseModel):
    """One captured BLE advertisement"""
    timestamp: datetime = Field(description="Capture instant, timezone-aware, millisecond resolution")
    device_id: str = Field(min_length=1, description="Opaque identifier of the transmitting radio")
    payload: bytes = Field(default=b"", description="Advertising PDU data")
    rssi_db: float = Field(lt=0.0, description="Received signal strength in dB")
    receiver_id: str = Field(min_length=1, description="Participant identifier")
    gps: Optional[GpsFix] = None
    heart_rate_bpm: Optional[float] = Field(default=None, gt=25.0, lt=250.0)

    class Config:
        frozen = True

    @validator("payload", pre=True)
    def decode_hex_payload(cls, v):
        if isinstance(v, str):
            try:
                return bytes.fromhex(v)
            except ValueError:
                raise ValueError("payload must be hex-encoded")
        return v

    @validator("timestamp")
    def require_timezone(cls, v):
        if v.tzinfo is None or v.utcoffset() is None:
            raise ValueError("timestamp must carry a UTC offset")
        return v

    @property
    def epoch_ms(self) -> int:
        """Capture instant as integer milliseconds since the epoch"""
        return round(self.timestamp.timestamp() * 1000)

    def to_json_dict(self) -> dict:
        """Serialize to the JSON-lines reception format"""
        return {
            "timestamp": self.timestamp.isoformat(timespec="milliseconds"),
            "device_id": self.device_id,
            "payload": self.payload.hex(),
            "rssi_db": round(self.rssi_db, 2),
            "receiver_id": self.receiver_id,
            "gps": None if self.gps is None else {
                "lat": round(self.gps.lat, 7),
                "lon": round(self.gps.lon, 7),
                "accuracy_m": None if self.gps.accuracy_m is None else round(self.gps.accuracy_m, 1),
            },
            "heart_rate_bpm": None if self.heart_rate_bpm is None else round(self.heart_rate_bpm, 1),
        }


class AdvertisementData(BaseModel):
    """Decoded advertising data structures"""
    local_name: Optional[str] = None
    flags: Optional[int] = None
    tx_power_dbm: Optional[int] = None
    manufacturer_id: Optional[int] = None
    manufacturer_data: bytes = b""
    service_uuids_16: List[str] = Field(default_factory=list)


class ProviderRule(BaseModel):
    """One fingerprinting rule"""
    provider: Provider
    match: MatchKind = MatchKind.SUBSTRING
    pattern: str = Field(min_length=1)
    target: MatchField = Field(default=MatchField.LOCAL_NAME, alias="field")

    class Config:
        allow_population_by_field_name = True

    @validator("provider")
    def reject_unknown(cls, v):
        if v == Provider.UNKNOWN:
            raise ValueError("rules cannot map to Unknown")
        return v


class ProviderBaselines(BaseModel):
    """RSSI measured one foot from each provider's radio"""
    by_provider: Dict[Provider, float] = Field(
        default_factory=lambda: {Provider.BIRD: -60.5, Provider.LIME: -46.25}
    )
    default: float = Field(default=-55.0, lt=0.0, description="Baseline for providers without one")

    @validator("by_provider")
    def baselines_negative(cls, v):
        for provider, value in v.items():
            if value >= 0:
                raise ValueError(f"baseline for {provider.value} must be negative")
        return v

    def has_baseline(self, provider: Provider) -> bool:
        return provider in self.by_provider

    def baseline(self, provider: Provider) -> float:
        return self.by_provider.get(provider, self.default)


class ProximityEstimate(BaseModel):
    """Proximity class with the distance it was derived from"""
    proximity: ProximityClass
    distance_ft: float
    low_confidence: bool = False
