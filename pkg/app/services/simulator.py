"""
Synthetic campus field generator

Pedestrians walk between scheduled points of interest on the street graph,
scooters are parked mid-block or ridden between intersections, and every
scooter advertises over BLE. Watches capture advertisements with a
distance-dependent probability. The run yields reception streams, participant
feedback and the ground-truth close approaches that produced them.
"""
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import Dict, List, Optional, Sequence, Tuple
from zoneinfo import ZoneInfo

import networkx as nx
import numpy as np
from shapely.geometry import LineString, Point

from app.exceptions import ConfigError
from app.models import (
    BleReception,
    FeedbackRecord,
    GpsFix,
    GroundTruthEncounter,
    PoiEvent,
    PoiKind,
    Provider,
    ProviderBaselines,
    ReceptionModel,
    Session,
    SimConfig,
)
from .ble import build_advertisement
from .feedback import STUDY_PROVIDERS, gate_prompts, in_study_window
from .geo_graph import AtomicNetwork, build_graph, make_grid_network, project_local, unproject_local

logger = logging.getLogger(__name__)

M_PER_FT = 0.3048
SLOT_S = 15 * 60
SLOTS_PER_DAY = 68
STUDY_DAY_START = time(6, 0)
ALPHANUMERIC = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"

XY = np.ndarray


def capture_probability(distance_ft, model: ReceptionModel) -> np.ndarray:
    """Piecewise-linear chance that a watch captures one advertisement"""
    d = np.asarray(distance_ft, dtype=float)
    slope = (model.near_probability - model.far_probability) / (model.far_ft - model.near_ft)
    p = model.near_probability - slope * (d - model.near_ft)
    p = np.where(d <= model.near_ft, model.near_probability, p)
    p = np.where(d >= model.far_ft, model.far_probability, p)
    return np.where(d > model.max_range_ft, 0.0, p)


@dataclass
class Track:
    """Piecewise-linear motion of one agent; times in seconds from the run start, xy in local meters"""
    times: np.ndarray
    xy: np.ndarray
    moving: bool = True

    @classmethod
    def stationary(cls, xy: Sequence[float], start: float, end: float) -> "Track":
        point = np.asarray(xy, dtype=float)
        return cls(np.array([start, end], dtype=float), np.vstack([point, point]), moving=False)

    @classmethod
    def along(cls, path_xy: Sequence[Sequence[float]], start: float, speed_mps: float) -> "Track":
        path = np.asarray(path_xy, dtype=float)
        steps = np.linalg.norm(np.diff(path, axis=0), axis=1)
        times = start + np.concatenate([[0.0], np.cumsum(steps)]) / speed_mps
        return cls(times, path, moving=True)

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    def position(self, t) -> XY:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.column_stack([np.interp(t, self.times, self.xy[:, 0]), np.interp(t, self.times, self.xy[:, 1])])

    def velocity(self, t: float, dt: float = 0.25) -> np.ndarray:
        lo, hi = max(t - dt, self.start), min(t + dt, self.end)
        if hi <= lo:
            return np.zeros(2)
        return (self.position(hi)[0] - self.position(lo)[0]) / (hi - lo)

    def distance_to_path(self, point: np.ndarray) -> float:
        if np.allclose(self.xy, self.xy[0]):
            return float(np.linalg.norm(self.xy[0] - point))
        return float(LineString(self.xy).distance(Point(point)))


@dataclass
class Pedestrian:
    participant_id: str
    resting_heart_rate_bpm: float
    tracks: List[Track] = field(default_factory=list)


@dataclass
class Scooter:
    device_id: str
    provider: Provider
    payload: bytes
    phase_s: float = 0.0
    tracks: List[Track] = field(default_factory=list)


@dataclass
class Scenario:
    """Agents of one run, positioned in meters around a geographic origin"""
    start: datetime
    origin: Tuple[float, float]
    pedestrians: List[Pedestrian] = field(default_factory=list)
    scooters: List[Scooter] = field(default_factory=list)
    network: Optional[AtomicNetwork] = None
    schedule: List[PoiEvent] = field(default_factory=list)


@dataclass
class _Run:
    """A contiguous stretch within the truth distance of one pedestrian/scooter pair"""
    start: float
    end: float
    min_distance_ft: float
    moving: bool
    in_front: Optional[bool]
    toward: Optional[bool]
    ped_track: Track


@dataclass
class SimulationResult:
    receptions: Dict[str, List[BleReception]]
    feedback: List[FeedbackRecord]
    truth: List[GroundTruthEncounter]
    network: Optional[AtomicNetwork] = None
    schedule: List[PoiEvent] = field(default_factory=list)

    def all_receptions(self) -> List[BleReception]:
        return [r for participant_id in sorted(self.receptions) for r in self.receptions[participant_id]]

    def summary(self) -> dict:
        return {
            "participants": len(self.receptions),
            "receptions": sum(len(stream) for stream in self.receptions.values()),
            "feedback_records": len(self.feedback),
            "truth_encounters": len(self.truth),
            "moving_truth_encounters": sum(1 for t in self.truth if t.moving),
        }


def default_schedule(network: AtomicNetwork) -> List[PoiEvent]:
    """
    Class schedule for a campus network

    Five classroom buildings hold weekday classes (Mon/Wed/Fri 50-minute and
    Tue/Thu 75-minute blocks), a couple of Saturday morning sessions and
    evening classes Monday to Thursday; nothing on Sunday. Three parking
    lots and a bus stop generate trips.
    """
    nodes = sorted(network.graph.nodes)
    if not nodes:
        raise ConfigError("cannot place points of interest on an empty network")

    def pick(fraction: float) -> Tuple[float, float]:
        return nodes[int(round(fraction * (len(nodes) - 1)))]

    mwf = [(time(h, 0), time(h, 50)) for h in range(8, 15)]
    tr = [(time(8, 0), time(9, 15)), (time(9, 30), time(10, 45)), (time(11, 0), time(12, 15)),
          (time(12, 30), time(13, 45)), (time(14, 0), time(15, 15)), (time(15, 30), time(16, 45))]

    events = []
    for i, fraction in enumerate((0.2, 0.35, 0.5, 0.65, 0.8)):
        sessions = []
        for k, (start, end) in enumerate(mwf):
            if (k + i) % 3 != 2:
                sessions.extend(Session(day_of_week=d, start=start, end=end) for d in (0, 2, 4))
        for k, (start, end) in enumerate(tr):
            if (k + i) % 3 != 1:
                sessions.extend(Session(day_of_week=d, start=start, end=end) for d in (1, 3))
        if i in (0, 2):
            sessions.append(Session(day_of_week=5, start=time(9, 0), end=time(11, 45)))
        if i == 4:
            sessions.extend(Session(day_of_week=d, start=time(18, 0), end=time(20, 45)) for d in range(4))
        lat, lon = pick(fraction)
        events.append(PoiEvent(
            poi_id=f"B{i + 1}", kind=PoiKind.ATTRACTOR, lat=lat, lon=lon,
            schedule=tuple(sessions), magnitude=40.0 + 20.0 * i,
        ))
    for poi_id, fraction in (("LOT1", 0.0), ("LOT2", 1.0), ("LOT3", 0.1), ("BUS1", 0.45)):
        lat, lon = pick(fraction)
        events.append(PoiEvent(poi_id=poi_id, kind=PoiKind.GENERATOR, lat=lat, lon=lon, magnitude=100.0))
    return events


class FieldSimulator:
    """Runs the synthetic campus described by a SimConfig"""

    def __init__(self, config: Optional[SimConfig] = None, network: Optional[dict] = None,
                 schedule: Optional[List[PoiEvent]] = None, baselines: Optional[ProviderBaselines] = None):
        self.config = config or SimConfig()
        self.zone = ZoneInfo(self.config.timezone)
        self.baselines = baselines or ProviderBaselines()
        self._network_source = network
        self._schedule = schedule
        plan, placement, physics, answers = np.random.SeedSequence(self.config.seed).spawn(4)
        self._plan_rng = np.random.default_rng(plan)
        self._placement_rng = np.random.default_rng(placement)
        self._physics_rng = np.random.default_rng(physics)
        self._feedback_rng = np.random.default_rng(answers)

    # -- clock ---------------------------------------------------------------

    def start_datetime(self) -> datetime:
        return datetime.combine(self.config.start_date, time(0), tzinfo=self.zone)

    def _study_day_offset(self, start: datetime, day: int) -> float:
        local = datetime.combine(start.date() + timedelta(days=day), STUDY_DAY_START, tzinfo=self.zone)
        return (local.astimezone(timezone.utc) - start.astimezone(timezone.utc)).total_seconds()

    @staticmethod
    def _to_datetime(start: datetime, seconds: float, zone: ZoneInfo) -> datetime:
        utc = start.astimezone(timezone.utc) + timedelta(milliseconds=int(round(seconds * 1000)))
        return utc.astimezone(zone)

    # -- planning ------------------------------------------------------------

    def simulate(self) -> SimulationResult:
        """Plan the default campus scenario and run it"""
        scenario = self.plan_scenario()
        return self.run(scenario)

    def plan_scenario(self) -> Scenario:
        """
        Build the network, schedule and agents

        Raises:
            ConfigError: If points of interest are not mutually reachable
        """
        cfg = self.config
        source = self._network_source or make_grid_network(
            cfg.grid.rows, cfg.grid.cols, cfg.grid.block_m, cfg.grid.origin,
        )
        network = build_graph(source)
        if len(network) == 0:
            raise ConfigError("simulation network has no segments")
        origin = cfg.grid.origin if self._network_source is None else network.segments[0].start
        schedule = self._schedule if self._schedule is not None else default_schedule(network)
        start = self.start_datetime()

        graph = network.graph
        nodes = sorted(graph.nodes)
        node_xy = project_local(origin, nodes)
        poi_nodes = {event.poi_id: self._nearest_node(event, origin, nodes, node_xy) for event in schedule}
        self._check_reachable(graph, poi_nodes)

        intensity = self.demand_intensity(schedule)
        logger.info(
            f"Planning {cfg.n_pedestrians} pedestrians and {cfg.n_scooters} scooters over "
            f"{cfg.duration_days} days on {len(network)} segments"
        )

        attractors = [e for e in schedule if e.kind in (PoiKind.ATTRACTOR, PoiKind.BOTH)]
        generators = [e for e in schedule if e.kind in (PoiKind.GENERATOR, PoiKind.BOTH)] or attractors
        pedestrians: List[Pedestrian] = []
        traversals: Counter = Counter()
        for i in range(cfg.n_pedestrians):
            low, high = cfg.resting_heart_rate_bpm
            ped = Pedestrian(f"P{i + 1:02d}", float(self._plan_rng.uniform(low, high)))
            n_trips = int(self._plan_rng.poisson(cfg.trips_per_pedestrian_per_day * cfg.duration_days))
            position = poi_nodes[generators[i % len(generators)].poi_id]
            last_end = -math.inf
            for t0, day, slot in self._draw_starts(self._plan_rng, n_trips, intensity, start):
                t0 = max(t0, last_end + 60.0)
                destination = self._pick_destination(attractors, generators, poi_nodes, day, slot, position, start)
                if destination == position:
                    continue
                path, segment_ids = self._route(network, position, destination)
                track = Track.along(project_local(origin, path), t0, cfg.pedestrian_speed_mps)
                ped.tracks.append(track)
                traversals.update(segment_ids)
                position, last_end = destination, track.end
            pedestrians.append(ped)

        scooters = self._place_scooters(network, origin, traversals, intensity, start, poi_nodes)
        return Scenario(start=start, origin=origin, pedestrians=pedestrians, scooters=scooters,
                        network=network, schedule=list(schedule))

    def demand_intensity(self, schedule: Sequence[PoiEvent]) -> np.ndarray:
        """Trip intensity per (simulated day, 15-minute study slot)"""
        cfg = self.config
        headcount = np.zeros((cfg.duration_days, SLOTS_PER_DAY))
        for d in range(cfg.duration_days):
            weekday = (cfg.start_date + timedelta(days=d)).weekday()
            for event in schedule:
                for session in event.schedule:
                    if session.day_of_week != weekday:
                        continue
                    start, end = session.minutes()
                    for s in range(SLOTS_PER_DAY):
                        lo = 6 * 60 + s * 15
                        if start < lo + 15 and end > lo:
                            headcount[d, s] += event.magnitude
        base = cfg.base_demand * max(float(headcount.max()), 1.0)
        return headcount + base

    def _draw_starts(self, rng: np.random.Generator, n: int, intensity: np.ndarray, start: datetime) -> List[Tuple[float, int, int]]:
        if n == 0:
            return []
        flat = intensity.ravel()
        picks = rng.choice(flat.size, size=n, p=flat / flat.sum())
        within = rng.uniform(0.0, SLOT_S, size=n)
        starts = []
        for pick, offset in zip(picks.tolist(), within.tolist()):
            day, slot = divmod(pick, SLOTS_PER_DAY)
            starts.append((self._study_day_offset(start, day) + slot * SLOT_S + offset, day, slot))
        return sorted(starts)

    def _pick_destination(self, attractors, generators, poi_nodes, day, slot, position, start):
        weekday = (start.date() + timedelta(days=day)).weekday()
        minute = 6 * 60 + slot * 15
        active = [
            e for e in attractors
            if poi_nodes[e.poi_id] != position
            and any(s.day_of_week == weekday and s.minutes()[0] < minute + 15 and s.minutes()[1] > minute
                    for s in e.schedule)
        ]
        pool = active or [e for e in generators + attractors if poi_nodes[e.poi_id] != position]
        if not pool:
            return position
        weights = np.array([max(e.magnitude, 1.0) for e in pool])
        choice = pool[int(self._plan_rng.choice(len(pool), p=weights / weights.sum()))]
        return poi_nodes[choice.poi_id]

    @staticmethod
    def _nearest_node(event: PoiEvent, origin, nodes, node_xy) -> Tuple[float, float]:
        xy = project_local(origin, [(event.lat, event.lon)])[0]
        return nodes[int(np.argmin(np.linalg.norm(node_xy - xy, axis=1)))]

    @staticmethod
    def _check_reachable(graph: nx.Graph, poi_nodes: Dict[str, Tuple[float, float]]) -> None:
        ids = sorted(poi_nodes)
        unreachable = [
            (a, b) for i, a in enumerate(ids) for b in ids[i + 1:]
            if not nx.has_path(graph, poi_nodes[a], poi_nodes[b])
        ]
        if unreachable:
            pairs = ", ".join(f"{a}-{b}" for a, b in unreachable)
            raise ConfigError(f"unreachable points of interest: {pairs}")

    @staticmethod
    def _route(network: AtomicNetwork, source, target) -> Tuple[List[Tuple[float, float]], List[int]]:
        nodes = nx.shortest_path(network.graph, source, target, weight="length_m")
        path: List[Tuple[float, float]] = []
        segment_ids = []
        for u, v in zip(nodes, nodes[1:]):
            segment_id = network.graph.edges[u, v]["segment_id"]
            segment_ids.append(segment_id)
            polyline = list(network.segment(segment_id).polyline)
            head, tail = polyline[0], polyline[-1]
            if math.hypot(head[0] - u[0], head[1] - u[1]) > math.hypot(tail[0] - u[0], tail[1] - u[1]):
                polyline.reverse()
            path.extend(polyline if not path else polyline[1:])
        return path, segment_ids

    def _new_scooter(self, provider: Provider) -> Scooter:
        rng = self._placement_rng
        mac = ":".join(f"{b:02X}" for b in rng.integers(0, 256, size=6).tolist())
        tag = "".join(ALPHANUMERIC[i] for i in rng.integers(0, len(ALPHANUMERIC), size=6).tolist())
        if provider == Provider.BIRD:
            payload = build_advertisement(f"Bird-{tag[:4]}")
        elif provider == Provider.LIME:
            payload = build_advertisement(f"Lime-{tag}", manufacturer_id=0x0A2C)
        elif provider == Provider.BLUE_DUCK:
            payload = build_advertisement(f"BD{int(rng.integers(0, 10 ** 6)):06d}")
        else:
            payload = build_advertisement(f"S-{tag}")
        phase = float(rng.uniform(0.0, self.config.advertisement_interval_s))
        return Scooter(device_id=mac, provider=provider, payload=payload, phase_s=phase)

    def _place_scooters(self, network: AtomicNetwork, origin, traversals: Counter, intensity: np.ndarray,
                        start: datetime, poi_nodes: Dict[str, Tuple[float, float]]) -> List[Scooter]:
        cfg = self.config
        rng = self._placement_rng
        if cfg.n_scooters == 0:
            return []
        providers = sorted(cfg.provider_mix, key=lambda p: p.value)
        weights = np.array([cfg.provider_mix[p] for p in providers], dtype=float)
        drawn = rng.choice(len(providers), size=cfg.n_scooters, p=weights / weights.sum())
        scooters = [self._new_scooter(providers[k]) for k in drawn.tolist()]
        n_parked = int(round(cfg.parked_fraction * cfg.n_scooters))
        end_of_run = self._study_day_offset(start, cfg.duration_days) + 24 * 3600.0

        # parked: mid-block, on segments weighted by planned foot traffic
        segment_weights = np.array([traversals.get(s.segment_id, 0) + 1.0 for s in network.segments])
        chosen = rng.choice(len(network.segments), size=n_parked, p=segment_weights / segment_weights.sum())
        per_segment = Counter(chosen.tolist())
        exposure = [traversals.get(network.segments[i].segment_id, 0) * per_segment[i] for i in chosen.tolist()]
        order = sorted(range(n_parked), key=lambda k: (-exposure[k], k))
        low, high = cfg.lateral_offset_m
        offsets = np.empty(n_parked)
        for rank, k in enumerate(order):
            if cfg.closer_passes_on_busy_segments:
                offsets[k] = low + (high - low) * (rank / max(n_parked - 1, 1))
            else:
                offsets[k] = rng.uniform(low, high)

        for k in range(n_parked):
            segment = network.segments[int(chosen[k])]
            line = LineString(project_local(origin, segment.polyline))
            clearance = min(cfg.intersection_clearance_m, line.length / 2)
            s = float(rng.uniform(clearance, line.length - clearance))
            here = np.array(line.interpolate(s).coords[0])
            ahead = np.array(line.interpolate(min(s + 0.5, line.length)).coords[0])
            behind = np.array(line.interpolate(max(s - 0.5, 0.0)).coords[0])
            tangent = (ahead - behind) / np.linalg.norm(ahead - behind)
            normal = np.array([-tangent[1], tangent[0]]) * (1.0 if rng.random() < 0.5 else -1.0)
            scooters[k].tracks.append(Track.stationary(here + offsets[k] * normal, 0.0, end_of_run))

        # riding: present only during rides between intersections of the campus component
        graph = network.graph
        if poi_nodes:
            component = sorted(nx.node_connected_component(graph, next(iter(poi_nodes.values()))))
        else:
            component = sorted(graph.nodes)
        for scooter in scooters[n_parked:] if len(component) > 1 else []:
            n_rides = int(rng.poisson(cfg.rides_per_scooter_per_day * cfg.duration_days))
            last_end = -math.inf
            for t0, _, _ in self._draw_starts(rng, n_rides, intensity, start):
                a, b = rng.choice(len(component), size=2, replace=False).tolist()
                path, _ = self._route(network, component[a], component[b])
                speed = float(rng.uniform(*cfg.scooter_speed_mps))
                track = Track.along(project_local(origin, path), max(t0, last_end + 60.0), speed)
                scooter.tracks.append(track)
                last_end = track.end
        logger.info(f"Placed {n_parked} parked and {cfg.n_scooters - n_parked} riding scooters")
        return scooters

    # -- physics ---------------------------------------------------------------

    def run(self, scenario: Scenario) -> SimulationResult:
        """
        Emit, capture and label every pedestrian/scooter interaction of a scenario

        Returns:
            Per-participant reception streams, feedback records and truth encounters
        """
        cfg = self.config
        max_range_m = cfg.reception.max_range_ft * M_PER_FT
        truth_m = cfg.truth_distance_ft * M_PER_FT
        rng = self._physics_rng

        receptions: Dict[str, List[Tuple[int, str, BleReception]]] = defaultdict(list)
        runs: Dict[Tuple[str, str], List[_Run]] = defaultdict(list)
        providers = {s.device_id: s.provider for s in scenario.scooters}

        for ped in scenario.pedestrians:
            receptions.setdefault(ped.participant_id, [])
            for leg in ped.tracks:
                for scooter in scenario.scooters:
                    for sleg in scooter.tracks:
                        lo, hi = max(leg.start, sleg.start), min(leg.end, sleg.end)
                        if hi <= lo:
                            continue
                        if not sleg.moving and leg.distance_to_path(sleg.xy[0]) > max_range_m:
                            continue
                        runs[(ped.participant_id, scooter.device_id)].extend(
                            self._truth_runs(leg, sleg, lo, hi, truth_m)
                        )
                        for reception in self._receptions(ped, leg, scooter, sleg, lo, hi, scenario, rng):
                            receptions[ped.participant_id].append(
                                (reception.epoch_ms, scooter.device_id, reception)
                            )

        streams = {
            pid: [item[2] for item in sorted(items, key=lambda item: (item[0], item[1]))]
            for pid, items in sorted(receptions.items())
        }
        truth, truth_runs = self._truth(runs, providers, scenario)
        feedback = self._feedback(scenario, truth, truth_runs)
        result = SimulationResult(
            receptions=streams, feedback=feedback, truth=truth,
            network=scenario.network, schedule=scenario.schedule,
        )
        logger.info(f"Simulation finished: {result.summary()}")
        return result

    def _truth_runs(self, leg: Track, sleg: Track, lo: float, hi: float, truth_m: float) -> List[_Run]:
        cfg = self.config
        ticks = np.arange(lo, hi, cfg.tick_s)
        if ticks.size == 0:
            return []
        d = np.linalg.norm(leg.position(ticks) - sleg.position(ticks), axis=1)
        close = d <= truth_m
        if not close.any():
            return []
        edges = np.diff(np.concatenate([[0], close.astype(np.int8), [0]]))
        starts, ends = np.flatnonzero(edges == 1), np.flatnonzero(edges == -1) - 1
        result = []
        for a, b in zip(starts.tolist(), ends.tolist()):
            if ticks[b] - ticks[a] < cfg.truth_min_duration_s - 1e-9:
                continue
            t = float(ticks[a])
            in_front = toward = None
            if sleg.moving:
                offset = sleg.position(t)[0] - leg.position(t)[0]
                in_front = bool(np.dot(leg.velocity(t), offset) > 0)
                toward = bool(np.dot(sleg.velocity(t), -offset) > 0)
            result.append(_Run(
                start=t, end=float(ticks[b]), min_distance_ft=float(d[a:b + 1].min() / M_PER_FT),
                moving=sleg.moving, in_front=in_front, toward=toward, ped_track=leg,
            ))
        return result

    def _receptions(self, ped: Pedestrian, leg: Track, scooter: Scooter, sleg: Track,
                    lo: float, hi: float, scenario: Scenario, rng: np.random.Generator) -> List[BleReception]:
        cfg = self.config
        interval = cfg.advertisement_interval_s
        k0 = math.ceil((lo - scooter.phase_s - cfg.advertisement_jitter_s) / interval)
        k1 = math.floor((hi - scooter.phase_s) / interval)
        if k1 < k0:
            return []
        k = np.arange(k0, k1 + 1)
        t = scooter.phase_s + k * interval + rng.uniform(0.0, cfg.advertisement_jitter_s, size=k.size)
        t = t[(t >= lo) & (t < hi)]
        if t.size == 0:
            return []

        ped_xy = leg.position(t)
        d_ft = np.linalg.norm(ped_xy - sleg.position(t), axis=1) / M_PER_FT
        captured = rng.random(t.size) < capture_probability(d_ft, cfg.reception)
        if not captured.any():
            return []
        t, ped_xy, d_ft = t[captured], ped_xy[captured], d_ft[captured]

        sigma = cfg.rssi_noise_sigma_db
        noise = np.clip(rng.normal(0.0, sigma, t.size), -3 * sigma, 3 * sigma) if sigma > 0 else np.zeros(t.size)
        rssi = (
            self.baselines.baseline(scooter.provider)
            - 10.0 * cfg.path_loss_exponent * np.log10(np.maximum(d_ft, 1.0))
            + noise
        )
        gps_xy = ped_xy + rng.normal(0.0, cfg.gps_sigma_m, size=ped_xy.shape)
        latlon = unproject_local(scenario.origin, gps_xy)
        hr_sigma = cfg.heart_rate_sigma_bpm
        heart = ped.resting_heart_rate_bpm + np.clip(rng.normal(0.0, hr_sigma, t.size), -3 * hr_sigma, 3 * hr_sigma)

        return [
            BleReception(
                timestamp=self._to_datetime(scenario.start, float(t[i]), self.zone),
                device_id=scooter.device_id,
                payload=scooter.payload,
                rssi_db=round(float(min(rssi[i], -0.01)), 2),
                receiver_id=ped.participant_id,
                gps=GpsFix(lat=round(float(latlon[i, 0]), 7), lon=round(float(latlon[i, 1]), 7),
                           accuracy_m=round(cfg.gps_sigma_m, 1)),
                heart_rate_bpm=round(float(heart[i]), 1),
            )
            for i in range(t.size)
        ]

    def _truth(self, runs: Dict[Tuple[str, str], List[_Run]], providers: Dict[str, Provider],
               scenario: Scenario) -> Tuple[List[GroundTruthEncounter], List[_Run]]:
        """Merge runs with the detector's merge gap and daily cap"""
        params = self.config.detector
        cap_zone = ZoneInfo(params.timezone)
        encounters: List[Tuple[GroundTruthEncounter, _Run]] = []
        for (participant_id, device_id), pair_runs in sorted(runs.items()):
            pair_runs.sort(key=lambda r: r.start)
            groups: List[List[_Run]] = []
            for run in pair_runs:
                if groups and run.start - groups[-1][-1].end < params.merge_gap_s:
                    groups[-1].append(run)
                else:
                    groups.append([run])

            per_day: Dict[date, int] = defaultdict(int)
            for group in groups:
                start = self._to_datetime(scenario.start, group[0].start, self.zone)
                day = start.astimezone(cap_zone).date()
                per_day[day] += 1
                if per_day[day] > params.max_encounters_per_scooter_per_day:
                    continue
                moving_runs = [r for r in group if r.moving]
                encounters.append((
                    GroundTruthEncounter(
                        participant_id=participant_id,
                        device_id=device_id,
                        provider=providers.get(device_id, Provider.UNKNOWN),
                        start=start,
                        end=self._to_datetime(scenario.start, max(r.end for r in group), self.zone),
                        min_distance_ft=round(min(r.min_distance_ft for r in group), 2),
                        moving=bool(moving_runs),
                    ),
                    moving_runs[0] if moving_runs else group[0],
                ))
        encounters.sort(key=lambda item: (item[0].start, item[0].participant_id, item[0].device_id))
        return [e for e, _ in encounters], [r for _, r in encounters]

    # -- feedback --------------------------------------------------------------

    def _feedback(self, scenario: Scenario, truth: List[GroundTruthEncounter], runs: List[_Run]) -> List[FeedbackRecord]:
        cfg = self.config
        rng = self._feedback_rng
        resting = {p.participant_id: p.resting_heart_rate_bpm for p in scenario.pedestrians}

        by_participant: Dict[str, List[int]] = defaultdict(list)
        for i, encounter in enumerate(truth):
            by_participant[encounter.participant_id].append(i)

        drafts = []
        for participant_id in sorted(by_participant):
            indices = by_participant[participant_id]
            times = [truth[i].start.timestamp() for i in indices]
            accepted = gate_prompts(times, cfg.prompt_interval_s)
            j = 0
            for i, t in zip(indices, times):
                if j >= len(accepted) or t != accepted[j]:
                    continue
                j += 1
                if rng.random() >= cfg.feedback_fraction:
                    continue
                run, encounter = runs[i], truth[i]
                delay = float(rng.uniform(2.0, 45.0))
                position = run.ped_track.position(run.start) + rng.normal(0.0, cfg.gps_sigma_m, size=(1, 2))
                lat, lon = unproject_local(scenario.origin, position)[0]
                drafts.append(dict(
                    participant_id=participant_id,
                    timestamp=encounter.start + timedelta(seconds=round(delay, 3)),
                    gps=GpsFix(lat=round(float(lat), 7), lon=round(float(lon), 7), accuracy_m=round(cfg.gps_sigma_m, 1)),
                    provider=encounter.provider,
                    q_moving=encounter.moving,
                    q_in_front=run.in_front if encounter.moving else None,
                    q_toward=run.toward if encounter.moving else None,
                    answered_within_s=round(delay, 1),
                ))

        startled = self._plant_startle(drafts, rng)
        sigma = cfg.heart_rate_sigma_bpm
        records = []
        for k, draft in enumerate(drafts):
            base = resting[draft["participant_id"]] + float(np.clip(rng.normal(0.0, sigma), -sigma, sigma))
            if k in startled:
                base += cfg.startle_boost_bpm
            records.append(FeedbackRecord(heart_rate_bpm=round(base, 1), **draft))
        records.sort(key=lambda r: (r.timestamp, r.participant_id))
        logger.info(f"Generated {len(records)} feedback records ({len(startled)} startled)")
        return records

    def _plant_startle(self, drafts: List[dict], rng: np.random.Generator) -> set:
        """Exact startle share among moving in-window Bird/Lime records, Bernoulli elsewhere"""
        fraction = self.config.startle_fraction
        eligible, other = [], []
        for k, draft in enumerate(drafts):
            if not draft["q_moving"]:
                continue
            if draft["provider"] in STUDY_PROVIDERS and in_study_window(draft["timestamp"], self.zone):
                eligible.append(k)
            else:
                other.append(k)
        n = int(round(fraction * len(eligible)))
        chosen = set(rng.choice(eligible, size=n, replace=False).tolist()) if n else set()
        chosen.update(k for k in other if rng.random() < fraction)
        return chosen


def simulate(config: Optional[SimConfig] = None, network: Optional[dict] = None,
             schedule: Optional[List[PoiEvent]] = None,
             baselines: Optional[ProviderBaselines] = None) -> SimulationResult:
    """
    Run the campus scenario of a config

    Args:
        baselines: One-foot RSSI per provider, as loaded with the provider rules
    """
    return FieldSimulator(config, network=network, schedule=schedule, baselines=baselines).simulate()
