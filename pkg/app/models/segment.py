"""
Street and walkway network models
"""
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, Field, validator

from .enums import FunctionalClass

LatLon = Tuple[float, float]

SEGMENT_CSV_HEADER = ("segment_id", "functional_class", "raw_tag", "length_miles", "campus", "wkt")

DEFAULT_CLASS_TABLE: Dict[str, FunctionalClass] = {
    "primary": FunctionalClass.ARTERIAL,
    "secondary": FunctionalClass.ARTERIAL,
    "tertiary": FunctionalClass.COLLECTOR,
    "residential": FunctionalClass.LOCAL,
    "service": FunctionalClass.LOCAL,
    "path": FunctionalClass.SHARED_USE_PATH,
    "cycleway": FunctionalClass.SHARED_USE_PATH,
    "footway": FunctionalClass.SIDEWALK,
    "pedestrian": FunctionalClass.SIDEWALK,
}


class FunctionalClassMap(BaseModel):
    """Highway tag to functional class table; unknown tags map to Other"""
    table: Dict[str, FunctionalClass] = Field(default_factory=lambda: dict(DEFAULT_CLASS_TABLE))

    @validator("table")
    def lowercase_tags(cls, v):
        return {tag.strip().lower(): value for tag, value in v.items()}

    def classify(self, tag: Optional[str]) -> FunctionalClass:
        if not tag:
            return FunctionalClass.OTHER
        return self.table.get(tag.strip().lower(), FunctionalClass.OTHER)


class AtomicSegment(BaseModel):
    """One edge of the road/walkway graph, entered and left only at its ends"""
    segment_id: int = Field(ge=0)
    polyline: Tuple[LatLon, ...] = Field(description="(lat, lon) vertices")
    length_miles: float = Field(gt=0.0)
    functional_class: FunctionalClass
    raw_tag: str = ""
    campus: Optional[str] = None

    class Config:
        frozen = True

    @validator("polyline")
    def at_least_two_vertices(cls, v):
        if len(v) < 2:
            raise ValueError("a segment needs at least two vertices")
        return v

    @property
    def start(self) -> LatLon:
        return self.polyline[0]

    @property
    def end(self) -> LatLon:
        return self.polyline[-1]

    @property
    def length_m(self) -> float:
        return self.length_miles * 1609.344

    def wkt(self) -> str:
        coords = ", ".join(f"{lon:.7f} {lat:.7f}" for lat, lon in self.polyline)
        return f"LINESTRING ({coords})"

    def to_csv_row(self) -> tuple:
        return (
            self.segment_id,
            self.functional_class.value,
            self.raw_tag,
            f"{self.length_miles:.6f}",
            self.campus or "",
            self.wkt(),
        )

    def to_geojson_feature(self, properties: Optional[dict] = None) -> dict:
        props = {
            "segment_id": self.segment_id,
            "functional_class": self.functional_class.value,
            "highway": self.raw_tag,
        }
        props.update(properties or {})
        return {
            "type": "Feature",
            "geometry": {
                "type": "LineString",
                "coordinates": [[round(lon, 7), round(lat, 7)] for lat, lon in self.polyline],
            },
            "properties": props,
        }


class FeatureDiagnostic(BaseModel):
    """A problem found while building the network"""
    feature_index: int
    message: str
