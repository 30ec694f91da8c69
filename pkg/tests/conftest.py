"""
Shared fixtures: reception stream builders, small networks and a fixed RNG
"""
from datetime import datetime, timedelta
from typing import List, Optional, Sequence
from zoneinfo import ZoneInfo

import numpy as np
import pytest

from app.models import BleReception, FeedbackRecord, GpsFix, Provider
from app.services.ble import build_advertisement
from app.services.geo_graph import build_graph, make_grid_network

CHICAGO = ZoneInfo("America/Chicago")
BIRD_PAYLOAD = build_advertisement("Bird-AB12")
LIME_PAYLOAD = build_advertisement("Lime-4F2K9Q", manufacturer_id=0x0A2C)

# Monday 2019-04-01, 10:00 local
BASE_TIME = datetime(2019, 4, 1, 10, 0, tzinfo=CHICAGO)


def at(seconds: float, base: datetime = BASE_TIME) -> datetime:
    return base + timedelta(milliseconds=int(round(seconds * 1000)))


def reception(
    seconds: float,
    device_id: str = "scooter-1",
    rssi_db: float = -70.0,
    receiver_id: str = "P01",
    payload: bytes = BIRD_PAYLOAD,
    gps: Optional[GpsFix] = None,
    heart_rate_bpm: Optional[float] = None,
    base: datetime = BASE_TIME,
) -> BleReception:
    return BleReception(
        timestamp=at(seconds, base),
        device_id=device_id,
        payload=payload,
        rssi_db=rssi_db,
        receiver_id=receiver_id,
        gps=gps,
        heart_rate_bpm=heart_rate_bpm,
    )


def burst(start_s: float, n: int = 6, spacing_s: float = 0.1, **kwargs) -> List[BleReception]:
    """n packets from one device starting at start_s"""
    return [reception(start_s + i * spacing_s, **kwargs) for i in range(n)]


def feedback(
    seconds: float,
    participant_id: str = "P01",
    provider: Provider = Provider.LIME,
    q_moving: bool = True,
    q_in_front: Optional[bool] = True,
    q_toward: Optional[bool] = True,
    heart_rate_bpm: Optional[float] = 75.0,
    gps: Optional[GpsFix] = None,
    base: datetime = BASE_TIME,
) -> FeedbackRecord:
    return FeedbackRecord(
        participant_id=participant_id,
        timestamp=at(seconds, base),
        gps=gps,
        provider=provider,
        q_moving=q_moving,
        q_in_front=q_in_front if q_moving else None,
        q_toward=q_toward if q_moving else None,
        heart_rate_bpm=heart_rate_bpm,
        answered_within_s=10.0,
    )


def sorted_stream(receptions: Sequence[BleReception]) -> List[BleReception]:
    return sorted(receptions, key=lambda r: (r.epoch_ms, r.device_id))


@pytest.fixture
def rng():
    return np.random.default_rng(20190401)


@pytest.fixture
def grid_geojson():
    return make_grid_network(rows=3, cols=3, block_m=100.0)


@pytest.fixture
def grid_network(grid_geojson):
    return build_graph(grid_geojson)


@pytest.fixture
def isolated_settings(tmp_path, monkeypatch):
    """Settings read from a clean environment with output under tmp_path"""
    from app.config import get_settings

    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "default-out"))
    for name in ("LOG_FILE", "LOG_LEVEL", "DEFAULT_TIMEZONE", "PROVIDER_RULES_PATH", "MAX_WORKERS", "STORAGE_BACKEND"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()
