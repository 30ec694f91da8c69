"""
Input loaders

Turn pipeline input files into models. Every malformed row or line is
reported as a DataError carrying the file path and 1-based line number.
"""
import csv
import json
import logging
from datetime import datetime, time
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Tuple, TypeVar, Union

import shapely
from pydantic import ValidationError
from shapely.geometry import shape

from app.exceptions import DataError
from app.models import (
    ENCOUNTER_CSV_HEADER,
    FEEDBACK_CSV_HEADER,
    TRUTH_CSV_HEADER,
    BleReception,
    Encounter,
    FeedbackRecord,
    GpsFix,
    GroundTruthEncounter,
    PoiEvent,
    PoiKind,
    Provider,
    Session,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
T = TypeVar("T")

SCHEDULE_CSV_HEADER = ("poi_id", "kind", "lat", "lon", "day_of_week", "start", "end", "magnitude")


def _first_error(error: ValidationError) -> str:
    item = error.errors()[0]
    location = ".".join(str(part) for part in item["loc"])
    return f"{location}: {item['msg']}" if location else item["msg"]


def _csv_rows(path: Path, required: Tuple[str, ...]) -> Iterator[Tuple[int, Dict[str, str]]]:
    """Yield (line number, row) for a headed CSV file"""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        missing = [column for column in required if column not in (reader.fieldnames or [])]
        if reader.fieldnames is None:
            return
        if missing:
            raise DataError(f"missing columns: {', '.join(missing)}", path=path, line=1)
        for row in reader:
            yield reader.line_num, row


def _parse_rows(
    path: PathLike,
    required: Tuple[str, ...],
    parse: Callable[[Dict[str, str]], T],
) -> List[T]:
    path = Path(path)
    items: List[T] = []
    for line, row in _csv_rows(path, required):
        try:
            items.append(parse(row))
        except ValidationError as e:
            raise DataError(_first_error(e), path=path, line=line)
        except (KeyError, ValueError) as e:
            raise DataError(f"invalid value: {e}", path=path, line=line)
    return items


def _optional(value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    value = value.strip()
    return value or None


def _yes_no(value: Optional[str]) -> Optional[bool]:
    value = _optional(value)
    if value is None:
        return None
    lowered = value.lower()
    if lowered in ("yes", "y", "true", "1"):
        return True
    if lowered in ("no", "n", "false", "0"):
        return False
    raise ValueError(f"expected yes/no, got {value!r}")


def _gps(lat: Optional[str], lon: Optional[str]) -> Optional[GpsFix]:
    lat, lon = _optional(lat), _optional(lon)
    if lat is None or lon is None:
        return None
    return GpsFix(lat=float(lat), lon=float(lon))


def _clock(value: str) -> time:
    return datetime.strptime(value.strip(), "%H:%M").time()


def load_receptions(path: PathLike) -> List[BleReception]:
    """
    Load a JSON-lines reception file

    Blank lines are skipped.

    Raises:
        DataError: On the first malformed line, naming its number
    """
    path = Path(path)
    receptions: List[BleReception] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                receptions.append(BleReception.parse_obj(json.loads(line)))
            except json.JSONDecodeError as e:
                raise DataError(f"invalid JSON: {e.msg}", path=path, line=line_number)
            except ValidationError as e:
                raise DataError(_first_error(e), path=path, line=line_number)
    logger.info(f"Loaded {len(receptions)} receptions from {path}")
    return receptions


def load_feedback(path: PathLike) -> List[FeedbackRecord]:
    def parse(row: Dict[str, str]) -> FeedbackRecord:
        heart_rate = _optional(row["heart_rate_bpm"])
        return FeedbackRecord(
            participant_id=row["participant_id"],
            timestamp=datetime.fromisoformat(row["iso_time"]),
            gps=_gps(row["lat"], row["lon"]),
            provider=Provider(_optional(row["provider"]) or Provider.UNKNOWN.value),
            q_moving=_yes_no(row["q_moving"]),
            q_in_front=_yes_no(row["q_in_front"]),
            q_toward=_yes_no(row["q_toward"]),
            heart_rate_bpm=None if heart_rate is None else float(heart_rate),
            answered_within_s=float(row["answered_within_s"]),
        )

    records = _parse_rows(path, FEEDBACK_CSV_HEADER, parse)
    logger.info(f"Loaded {len(records)} feedback records from {path}")
    return records


def load_encounters(path: PathLike) -> List[Encounter]:
    def parse(row: Dict[str, str]) -> Encounter:
        return Encounter(
            participant_id=row["participant_id"],
            device_id=row["device_id"],
            provider=Provider(row["provider"]),
            start=datetime.fromisoformat(row["start_iso"]),
            end=datetime.fromisoformat(row["end_iso"]),
            packet_count=int(row["packet_count"]),
            max_rssi_db=float(row["max_rssi_db"]),
            representative_gps=_gps(row["lat"], row["lon"]),
        )

    encounters = _parse_rows(path, ENCOUNTER_CSV_HEADER, parse)
    logger.info(f"Loaded {len(encounters)} encounters from {path}")
    return encounters


def load_truth(path: PathLike) -> List[GroundTruthEncounter]:
    required = ("participant_id", "device_id", "start_iso", "end_iso", "min_distance_ft")

    def parse(row: Dict[str, str]) -> GroundTruthEncounter:
        return GroundTruthEncounter(
            participant_id=row["participant_id"],
            device_id=row["device_id"],
            provider=Provider(_optional(row.get("provider")) or Provider.UNKNOWN.value),
            start=datetime.fromisoformat(row["start_iso"]),
            end=datetime.fromisoformat(row["end_iso"]),
            min_distance_ft=float(row["min_distance_ft"]),
            moving=bool(_yes_no(row.get("moving"))),
        )

    truth = _parse_rows(path, required, parse)
    logger.info(f"Loaded {len(truth)} truth encounters from {path}")
    return truth


def load_schedule(path: PathLike) -> List[PoiEvent]:
    """
    Load points of interest with their weekly sessions

    One row per session; rows sharing a poi_id are grouped. A row with empty
    day/start/end declares a point of interest without sessions.

    Raises:
        DataError: On malformed rows or a poi_id whose kind or location changes between rows
    """
    path = Path(path)
    events: Dict[str, dict] = {}
    for line, row in _csv_rows(path, SCHEDULE_CSV_HEADER):
        try:
            poi_id = row["poi_id"].strip()
            if not poi_id:
                raise ValueError("empty poi_id")
            head = {
                "kind": PoiKind(row["kind"].strip()),
                "lat": float(row["lat"]),
                "lon": float(row["lon"]),
                "magnitude": float(_optional(row["magnitude"]) or 0.0),
            }
            event = events.setdefault(poi_id, dict(head, poi_id=poi_id, schedule=[]))
            if any(event[key] != value for key, value in head.items()):
                raise ValueError(f"rows for {poi_id} disagree on kind, location or magnitude")
            if _optional(row["day_of_week"]) is not None:
                event["schedule"].append(Session(
                    day_of_week=int(row["day_of_week"]),
                    start=_clock(row["start"]),
                    end=_clock(row["end"]),
                ))
        except ValidationError as e:
            raise DataError(_first_error(e), path=path, line=line)
        except (KeyError, ValueError) as e:
            raise DataError(f"invalid value: {e}", path=path, line=line)

    try:
        result = [PoiEvent.parse_obj(event) for event in events.values()]
    except ValidationError as e:
        raise DataError(_first_error(e), path=path)
    logger.info(f"Loaded {len(result)} points of interest from {path}")
    return result


def schedule_rows(events: List[PoiEvent]) -> List[tuple]:
    """Rows in the schedule CSV layout, sorted by poi_id"""
    rows = []
    for event in sorted(events, key=lambda e: e.poi_id):
        head = (event.poi_id, event.kind.value, f"{event.lat:.7f}", f"{event.lon:.7f}")
        magnitude = f"{event.magnitude:g}"
        if not event.schedule:
            rows.append(head + ("", "", "", magnitude))
        for session in event.schedule:
            rows.append(head + (
                session.day_of_week,
                session.start.strftime("%H:%M"),
                session.end.strftime("%H:%M"),
                magnitude,
            ))
    return rows


def load_geojson(path: PathLike) -> dict:
    """
    Load a GeoJSON document

    Raises:
        DataError: If the file is not JSON or not a FeatureCollection
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"invalid JSON: {e.msg}", path=path, line=e.lineno)
    if not isinstance(data, dict) or data.get("type") != "FeatureCollection":
        raise DataError("expected a GeoJSON FeatureCollection", path=path)
    return data


def load_campus_polygons(path: PathLike, name_property: str = "name") -> Dict[str, "shapely.Geometry"]:
    """Campus name to (Multi)Polygon from a GeoJSON FeatureCollection"""
    path = Path(path)
    campuses: Dict[str, shapely.Geometry] = {}
    for index, feature in enumerate(load_geojson(path).get("features", [])):
        geometry = feature.get("geometry") or {}
        if geometry.get("type") not in ("Polygon", "MultiPolygon"):
            raise DataError(f"feature {index}: campus geometry must be a Polygon or MultiPolygon", path=path)
        name = (feature.get("properties") or {}).get(name_property)
        if not name:
            raise DataError(f"feature {index}: missing '{name_property}' property", path=path)
        polygon = shape(geometry)
        campuses[str(name)] = campuses[str(name)].union(polygon) if str(name) in campuses else polygon
    logger.info(f"Loaded {len(campuses)} campus polygons from {path}")
    return campuses
