"""
Atomic-segment road/walkway network: building, snapping and campus assignment
"""
import logging
import math
from collections import Counter
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import shapely
from shapely.geometry import LineString, MultiPoint, Point, box, shape
from shapely.strtree import STRtree

from app.exceptions import DataError
from app.models import AtomicSegment, FeatureDiagnostic, FunctionalClassMap

logger = logging.getLogger(__name__)

EARTH_RADIUS_M = 6371008.8
METERS_PER_MILE = 1609.344
DEFAULT_SNAP_DISTANCE_M = 25.0

# vertices closer than this (degrees) are the same network node
VERTEX_DECIMALS = 9

LatLon = Tuple[float, float]

DEFAULT_TAG_CYCLE = (
    "primary", "footway", "residential", "tertiary", "footway", "path",
    "service", "secondary", "pedestrian", "cycleway", "footway", "track",
)


def haversine_m(a: LatLon, b: LatLon) -> float:
    """Great-circle distance in meters between two (lat, lon) points"""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def polyline_length_m(polyline: Sequence[LatLon]) -> float:
    return sum(haversine_m(polyline[i], polyline[i + 1]) for i in range(len(polyline) - 1))


def offset_latlon(origin: LatLon, east_m: float, north_m: float) -> LatLon:
    """Move a point by a local east/north displacement"""
    lat = origin[0] + math.degrees(north_m / EARTH_RADIUS_M)
    lon = origin[1] + math.degrees(east_m / (EARTH_RADIUS_M * math.cos(math.radians(origin[0]))))
    return lat, lon


def project_local(origin: LatLon, points: Sequence[LatLon]) -> np.ndarray:
    """Equirectangular east/north meters of points around origin"""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    north = np.radians(pts[:, 0] - origin[0]) * EARTH_RADIUS_M
    east = np.radians(pts[:, 1] - origin[1]) * EARTH_RADIUS_M * math.cos(math.radians(origin[0]))
    return np.column_stack([east, north])


def unproject_local(origin: LatLon, xy: np.ndarray) -> np.ndarray:
    """Inverse of project_local: (lat, lon) rows for east/north meters"""
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    lat = origin[0] + np.degrees(xy[:, 1] / EARTH_RADIUS_M)
    lon = origin[1] + np.degrees(xy[:, 0] / (EARTH_RADIUS_M * math.cos(math.radians(origin[0]))))
    return np.column_stack([lat, lon])


def point_to_segment_m(point: LatLon, segment: AtomicSegment) -> float:
    """Perpendicular distance in meters from a point to a segment polyline"""
    local = project_local(point, segment.polyline)
    return float(LineString(local).distance(Point(0.0, 0.0)))


def _vertex_key(lat: float, lon: float) -> LatLon:
    return round(lat, VERTEX_DECIMALS), round(lon, VERTEX_DECIMALS)


class AtomicNetwork:
    """Atomic segments of a network plus build diagnostics and a routing graph"""

    def __init__(
        self,
        segments: List[AtomicSegment],
        diagnostics: Optional[List[FeatureDiagnostic]] = None,
        crossings: Optional[List[Tuple[int, int]]] = None,
    ):
        self.segments = segments
        self.diagnostics = diagnostics or []
        self.crossings = crossings or []
        self._by_id = {s.segment_id: s for s in segments}
        self.graph = self._routing_graph()

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def segment(self, segment_id: int) -> AtomicSegment:
        return self._by_id[segment_id]

    @property
    def total_length_miles(self) -> float:
        return sum(s.length_miles for s in self.segments)

    def class_counts(self) -> Dict[str, int]:
        counts = Counter(s.functional_class.value for s in self.segments)
        return dict(sorted(counts.items()))

    def with_campus(self, campus_by_segment: Mapping[int, Optional[str]]) -> "AtomicNetwork":
        """Copy of the network with campus names attached"""
        segments = [s.copy(update={"campus": campus_by_segment.get(s.segment_id)}) for s in self.segments]
        return AtomicNetwork(segments, self.diagnostics, self.crossings)

    def restricted_to(self, campus: str) -> "AtomicNetwork":
        segments = [s for s in self.segments if s.campus == campus]
        return AtomicNetwork(segments, self.diagnostics, self.crossings)

    def to_geojson(self, properties: Optional[Mapping[int, dict]] = None) -> dict:
        properties = properties or {}
        return {
            "type": "FeatureCollection",
            "features": [s.to_geojson_feature(properties.get(s.segment_id)) for s in self.segments],
        }

    def _routing_graph(self) -> nx.Graph:
        graph = nx.Graph()
        for segment in self.segments:
            u, v = _vertex_key(*segment.start), _vertex_key(*segment.end)
            if u == v:
                continue
            length_m = segment.length_m
            existing = graph.get_edge_data(u, v)
            # parallel segments: route over the shorter one
            if existing is not None and existing["length_m"] <= length_m:
                continue
            graph.add_edge(u, v, segment_id=segment.segment_id, length_m=length_m)
        return graph


def _feature_lines(feature: dict) -> List[List[LatLon]]:
    geometry = feature.get("geometry") or {}
    kind = geometry.get("type")
    coords = geometry.get("coordinates") or []
    if kind == "LineString":
        parts = [coords]
    elif kind == "MultiLineString":
        parts = list(coords)
    else:
        raise ValueError(f"unsupported geometry type {kind!r}")

    lines = []
    for part in parts:
        line: List[LatLon] = []
        for vertex in part:
            lon, lat = float(vertex[0]), float(vertex[1])
            # consecutive duplicates carry no length
            if line and _vertex_key(*line[-1]) == _vertex_key(lat, lon):
                continue
            line.append((lat, lon))
        lines.append(line)
    return lines


def _highway_tag(feature: dict) -> str:
    tag = (feature.get("properties") or {}).get("highway") or ""
    if isinstance(tag, (list, tuple)):
        tag = tag[0] if tag else ""
    return str(tag)


def build_graph(
    network: dict,
    class_map: Optional[FunctionalClassMap] = None,
    detect_crossings: bool = True,
) -> AtomicNetwork:
    """
    Split a line network into atomic segments

    Features are cut at every vertex shared with another feature (or repeated
    within the same feature) so that segments meet only at their ends.

    Args:
        network: GeoJSON FeatureCollection of LineString/MultiLineString features
        class_map: Highway tag to functional class table
        detect_crossings: Report segments that cross away from their ends

    Returns:
        The atomic network; rejected features are listed in its diagnostics

    Raises:
        DataError: If the input is not a FeatureCollection
    """
    if not isinstance(network, dict) or network.get("type") != "FeatureCollection":
        raise DataError("network must be a GeoJSON FeatureCollection")
    class_map = class_map or FunctionalClassMap()
    diagnostics: List[FeatureDiagnostic] = []

    lines: List[Tuple[int, str, List[LatLon]]] = []
    for index, feature in enumerate(network.get("features") or []):
        try:
            parts = _feature_lines(feature)
        except (ValueError, TypeError, IndexError) as e:
            diagnostics.append(FeatureDiagnostic(feature_index=index, message=str(e)))
            continue
        tag = _highway_tag(feature)
        for part in parts:
            if len(part) < 2:
                diagnostics.append(FeatureDiagnostic(
                    feature_index=index, message="line has fewer than two distinct vertices",
                ))
                continue
            lines.append((index, tag, part))

    occurrences: Counter = Counter()
    for _, _, line in lines:
        occurrences.update(_vertex_key(*v) for v in line)

    segments: List[AtomicSegment] = []
    for index, tag, line in lines:
        functional_class = class_map.classify(tag)
        piece = [line[0]]
        last = len(line) - 1
        for position, vertex in enumerate(line[1:], start=1):
            piece.append(vertex)
            if position == last or occurrences[_vertex_key(*vertex)] > 1:
                length_m = polyline_length_m(piece)
                if length_m > 0:
                    segments.append(AtomicSegment(
                        segment_id=len(segments),
                        polyline=tuple(piece),
                        length_miles=length_m / METERS_PER_MILE,
                        functional_class=functional_class,
                        raw_tag=tag,
                    ))
                else:
                    diagnostics.append(FeatureDiagnostic(feature_index=index, message="zero-length piece dropped"))
                piece = [vertex]

    crossings = _find_crossings(segments) if detect_crossings else []
    if diagnostics:
        logger.warning(f"{len(diagnostics)} network features produced diagnostics")
    if crossings:
        logger.warning(f"{len(crossings)} segment pairs cross away from their ends (bridges or tunnels?)")
    logger.info(f"Built {len(segments)} atomic segments from {len(network.get('features') or [])} features")
    return AtomicNetwork(segments, diagnostics, crossings)


def _find_crossings(segments: Sequence[AtomicSegment]) -> List[Tuple[int, int]]:
    if len(segments) < 2:
        return []
    geoms = [LineString([(lon, lat) for lat, lon in s.polyline]) for s in segments]
    tree = STRtree(geoms)
    left, right = tree.query(geoms, predicate="intersects")
    crossings = []
    for i, j in zip(left.tolist(), right.tolist()):
        if i >= j:
            continue
        shared = MultiPoint([
            (lon, lat) for lat, lon in {segments[i].start, segments[i].end} & {segments[j].start, segments[j].end}
        ])
        if not geoms[i].intersection(geoms[j]).difference(shared).is_empty:
            crossings.append((segments[i].segment_id, segments[j].segment_id))
    return sorted(crossings)


class SegmentIndex:
    """Nearest-segment lookup backed by an STRtree"""

    def __init__(self, segments: Iterable[AtomicSegment]):
        self.segments = list(segments)
        if not self.segments:
            raise DataError("cannot snap against an empty network")
        self._geoms = [LineString([(lon, lat) for lat, lon in s.polyline]) for s in self.segments]
        self._tree = STRtree(self._geoms)

    def candidates(self, point: LatLon, radius_m: float) -> List[AtomicSegment]:
        lat, lon = point
        dlat = math.degrees(radius_m / EARTH_RADIUS_M)
        dlon = math.degrees(radius_m / (EARTH_RADIUS_M * max(math.cos(math.radians(lat)), 1e-12)))
        hits = self._tree.query(box(lon - dlon, lat - dlat, lon + dlon, lat + dlat))
        return [self.segments[i] for i in sorted(hits.tolist())]

    def snap(self, point: LatLon, max_snap_distance_m: float = DEFAULT_SNAP_DISTANCE_M) -> Optional[int]:
        """
        Segment id nearest to a point, None when nothing lies within the radius

        Ties go to the lowest segment id.
        """
        best: Optional[Tuple[float, int]] = None
        for segment in self.candidates(point, max_snap_distance_m):
            key = (point_to_segment_m(point, segment), segment.segment_id)
            if best is None or key < best:
                best = key
        if best is None or best[0] > max_snap_distance_m:
            return None
        return best[1]

    def snap_many(self, points: Iterable[LatLon], max_snap_distance_m: float = DEFAULT_SNAP_DISTANCE_M) -> List[Optional[int]]:
        return [self.snap(p, max_snap_distance_m) for p in points]


def snap_to_segment(
    point: LatLon,
    segments: Union[SegmentIndex, AtomicNetwork, Sequence[AtomicSegment]],
    max_snap_distance_m: float = DEFAULT_SNAP_DISTANCE_M,
) -> Optional[int]:
    """Snap one (lat, lon) point; None means Unmatched"""
    index = segments if isinstance(segments, SegmentIndex) else SegmentIndex(segments)
    return index.snap(point, max_snap_distance_m)


def assign_campus(
    segments: Iterable[AtomicSegment],
    campus_polygons: Mapping[str, Union[dict, "shapely.Geometry"]],
) -> Dict[int, Optional[str]]:
    """Campus containing each segment's midpoint; first campus by name wins on overlap"""
    polygons = {
        name: geometry if isinstance(geometry, shapely.Geometry) else shape(geometry)
        for name, geometry in sorted(campus_polygons.items())
    }
    result: Dict[int, Optional[str]] = {}
    for segment in segments:
        line = LineString([(lon, lat) for lat, lon in segment.polyline])
        midpoint = line.interpolate(0.5, normalized=True)
        result[segment.segment_id] = next(
            (name for name, polygon in polygons.items() if polygon.covers(midpoint)), None
        )
    assigned = sum(1 for name in result.values() if name is not None)
    logger.info(f"Assigned {assigned} of {len(result)} segments to campuses")
    return result


def make_grid_network(
    rows: int = 6,
    cols: int = 6,
    block_m: float = 120.0,
    origin: LatLon = (29.5830, -98.6190),
    tag_plan: Optional[Sequence[str]] = None,
) -> dict:
    """
    Synthetic grid of rows x cols blocks as a GeoJSON FeatureCollection

    Each street runs the full width (or height) of the grid with a vertex at
    every intersection, so splitting yields rows*(cols+1) + cols*(rows+1) segments.
    Street tags cycle through tag_plan.
    """
    tags = tuple(tag_plan or DEFAULT_TAG_CYCLE)
    features = []
    street = 0
    for r in range(rows + 1):
        coords = [offset_latlon(origin, c * block_m, r * block_m) for c in range(cols + 1)]
        features.append(_line_feature(coords, tags[street % len(tags)], f"EW{r}"))
        street += 1
    for c in range(cols + 1):
        coords = [offset_latlon(origin, c * block_m, r * block_m) for r in range(rows + 1)]
        features.append(_line_feature(coords, tags[street % len(tags)], f"NS{c}"))
        street += 1
    return {"type": "FeatureCollection", "features": features}


def _line_feature(coords: Sequence[LatLon], tag: str, name: str) -> dict:
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": [[lon, lat] for lat, lon in coords]},
        "properties": {"highway": tag, "name": name},
    }


def grid_node(origin: LatLon, block_m: float, row: int, col: int) -> LatLon:
    """Vertex key of the grid intersection at (row, col)"""
    return _vertex_key(*offset_latlon(origin, col * block_m, row * block_m))
