"""Synthetic robot/pedestrian encounters with planted ground truth.

Every encounter is a straight robot pass of ``duration`` seconds. The
pedestrian moves at constant velocity such that its closest approach to the
robot equals ``lateral_offset`` at the middle sample, and a road junction is
planted ``junction_distance`` meters to the side of the robot's closest
point. Encounters are laid out far apart on a grid so that each one only
"sees" its own junction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError
from .geometry import GeoPoint, Trajectory, rotate, unproject_arrays
from .roadgraph import JUNCTION_THRESHOLD_M, Node, RoadGraph
from .scenario import DetectionTrack, MissionLog, Odometry, scenario_id

KINDS = ("parallel", "lateral", "head_on")
ALL_KINDS = KINDS + ("circular",)
TRUE_ALPHA = {"parallel": 0.0, "lateral": math.pi / 2, "head_on": math.pi}

# kind -> (mean, sd) of the planted closest approach in meters
DEFAULT_D_ROBOT = {"head_on": (0.5, 0.2), "parallel": (1.5, 0.2), "lateral": (3.0, 0.2)}
DEFAULT_ORIGIN = GeoPoint(50.9166, 13.3422)
CELL_SPACING_M = 200.0
ARM_LENGTH_M = 25.0
TRANSIT_SPEED = 2.0
CIRCULAR_ARC_DEG = 300.0
MIN_OFFSET_M = 0.1


@dataclass(frozen=True)
class EncounterSpec:
    kind: str
    robot_speed: float = 1.0
    ped_speed: float = 1.3
    lateral_offset: float = 1.5
    junction_distance: float = 30.0
    noise_sigma: float = 0.0
    duration: float = 10.0
    sample_rate: float = 5.0
    seed: int = 0
    heading: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)
    t_start: float = 0.0
    side: int = 1
    arc_deg: float = CIRCULAR_ARC_DEG

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise InvalidInputError(f"unknown encounter kind {self.kind!r}")
        if self.robot_speed < 0 or self.ped_speed < 0:
            raise InvalidInputError("speeds must be non-negative")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise InvalidInputError("duration and sample_rate must be positive")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be non-negative")
        if self.lateral_offset < 0 or self.junction_distance < 0:
            raise InvalidInputError("distances must be non-negative")


@dataclass(frozen=True)
class TruthRecord:
    scenario_id: str
    kind: str
    is_junction: bool
    alpha_rad: float
    d_robot_m: float


@dataclass(frozen=True, eq=False)
class Encounter:
    robot: Trajectory
    odometry: Odometry
    track: DetectionTrack
    truth: TruthRecord
    junction: np.ndarray
    ped_true: np.ndarray


def _perp(v):
    return np.array([-v[1], v[0]])


def generate_encounter(spec: EncounterSpec, track_id: str = "0") -> Encounter:
    """Robot segment, detection track and truth record for one planted encounter."""
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration * spec.sample_rate)) + 1
    t = spec.t_start + np.arange(n) / spec.sample_rate
    mid = (n - 1) // 2
    tc = t[mid]
    dt = t - tc
    h = spec.heading
    e = np.array([math.cos(h), math.sin(h)])
    nrm = _perp(e)
    center = np.asarray(spec.center, dtype=float)
    robot = center + spec.robot_speed * dt[:, None] * e

    if spec.kind == "circular":
        arc = math.radians(spec.arc_deg)
        radius = max(spec.ped_speed * spec.duration / arc, 1e-3)
        c = center + (spec.lateral_offset + radius) * nrm
        phi = (h - math.pi / 2) - arc / 2 + (arc / spec.duration) * (t - t[0])
        ped = c + radius * np.column_stack([np.cos(phi), np.sin(phi)])
        junction = center - spec.junction_distance * nrm
        alpha = math.nan
    else:
        if spec.kind == "parallel":
            vel = spec.ped_speed * e
        elif spec.kind == "head_on":
            vel = -spec.ped_speed * e
        else:
            vel = (1 if spec.side >= 0 else -1) * spec.ped_speed * nrm
        w = vel - spec.robot_speed * e
        wn = float(np.hypot(*w))
        u = nrm if wn < 1e-12 else _perp(w) / wn
        ped = center + spec.lateral_offset * u + dt[:, None] * vel
        # junction on the robot's side away from the pedestrian
        s = -1.0 if float(nrm @ u) > 0 else 1.0
        junction = center + s * spec.junction_distance * nrm
        alpha = TRUE_ALPHA[spec.kind]

    d_true = float(np.min(np.hypot(*(ped - robot).T)))
    robot_min_j = float(np.min(np.hypot(*(robot - junction).T)))
    ped_min_j = float(np.min(np.hypot(*(ped - junction).T)))
    is_junction = robot_min_j < JUNCTION_THRESHOLD_M and ped_min_j < JUNCTION_THRESHOLD_M

    robot_rec = robot + rng.normal(0.0, spec.noise_sigma, robot.shape) if spec.noise_sigma else robot
    ped_rec = ped + rng.normal(0.0, spec.noise_sigma, ped.shape) if spec.noise_sigma else ped
    offsets = rotate(ped_rec - robot, -h)
    heading = np.full(n, float(np.arctan2(e[1], e[0])))
    return Encounter(
        robot=Trajectory(t, robot_rec, heading),
        odometry=Odometry(t, np.full(n, spec.robot_speed), np.zeros(n)),
        track=DetectionTrack(track_id, t, offsets),
        truth=TruthRecord(track_id, spec.kind, is_junction, alpha, d_true),
        junction=junction,
        ped_true=ped,
    )


@dataclass(eq=False)
class SynthDataset:
    mission_doc: dict
    graph: RoadGraph
    truth: list[TruthRecord]
    origin: GeoPoint
    encounters: list[Encounter] = field(default_factory=list)

    @property
    def mission(self) -> MissionLog:
        from .io import mission_from_document

        return mission_from_document(self.mission_doc)


def _grid_centers(count: int, spacing: float):
    cols = max(1, math.ceil(math.sqrt(count)))
    out = []
    for i in range(count):
        row, col = divmod(i, cols)
        if row % 2:
            col = cols - 1 - col
        out.append((col * spacing, row * spacing))
    return out


def generate_dataset(
    n_per_kind: int,
    junction_fraction: float,
    noise_sigma: float,
    seed: int,
    *,
    kinds: Sequence[str] = KINDS,
    n_circular: int = 0,
    d_robot: Optional[dict] = None,
    robot_speed: float = 1.0,
    ped_speed: float = 1.3,
    duration: float = 10.0,
    sample_rate: float = 5.0,
    near_junction_m: tuple[float, float] = (1.0, 3.0),
    far_junction_m: tuple[float, float] = (30.0, 30.0),
    origin: GeoPoint = DEFAULT_ORIGIN,
    mission_id: str = "synth",
) -> SynthDataset:
    """Balanced encounters of every kind in one mission, plus junction graph and truth.

    ``round(junction_fraction * n)`` of the straight-line encounters get a
    junction within ``near_junction_m`` of the robot path; the rest (and all
    circular walkers) get one ``far_junction_m`` away.
    """
    if n_per_kind < 1:
        raise InvalidInputError("n_per_kind must be >= 1")
    if not 0.0 <= junction_fraction <= 1.0:
        raise InvalidInputError("junction_fraction must lie in [0, 1]")
    if noise_sigma < 0:
        raise InvalidInputError("noise_sigma must be non-negative")
    if near_junction_m[1] >= JUNCTION_THRESHOLD_M or far_junction_m[0] < 20.0:
        raise InvalidInputError("near junctions must be < 8 m and far junctions >= 20 m")
    d_robot = dict(DEFAULT_D_ROBOT if d_robot is None else d_robot)
    rng = np.random.default_rng(seed)

    plan = [k for k in kinds for _ in range(n_per_kind)]
    n_straight = len(plan)
    plan += ["circular"] * n_circular
    order = rng.permutation(len(plan))
    plan = [plan[i] for i in order]
    n_junction = int(round(junction_fraction * n_straight))
    straight_slots = [i for i, k in enumerate(plan) if k != "circular"]
    junction_slots = set(rng.permutation(straight_slots)[:n_junction].tolist())

    centers = _grid_centers(len(plan), CELL_SPACING_M)
    encounters = []
    t_next = 0.0
    prev_end = None
    for i, kind in enumerate(plan):
        mean, sd = d_robot.get(kind, (1.5, 0.2))
        offset = float(np.clip(rng.normal(mean, sd), MIN_OFFSET_M, mean + 4 * sd))
        near = i in junction_slots
        lo, hi = near_junction_m if near else far_junction_m
        jd = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
        if near and jd + offset >= JUNCTION_THRESHOLD_M:
            jd = max(0.0, JUNCTION_THRESHOLD_M - offset - 0.5)
        heading = float(rng.uniform(-math.pi, math.pi))
        side = 1 if rng.random() < 0.5 else -1
        e = np.array([math.cos(heading), math.sin(heading)])
        start_pos = np.asarray(centers[i]) - robot_speed * duration / 2 * e
        if prev_end is not None:
            t_next = prev_end[0] + float(np.hypot(*(start_pos - prev_end[1]))) / TRANSIT_SPEED + 1.0
        spec = EncounterSpec(
            kind=kind, robot_speed=robot_speed, ped_speed=ped_speed, lateral_offset=offset,
            junction_distance=jd, noise_sigma=noise_sigma, duration=duration,
            sample_rate=sample_rate, seed=int(rng.integers(2**63 - 1)), heading=heading,
            center=centers[i], t_start=round(t_next, 6), side=side,
        )
        enc = generate_encounter(spec, track_id=f"t{i:04d}")
        if near and not enc.truth.is_junction:
            raise RuntimeError(f"encounter {i}: planted junction not within threshold")
        encounters.append(enc)
        prev_end = (enc.robot.end, enc.robot.xy[-1])

    shift = encounters[0].robot.xy[0].copy()
    geo_origin = origin
    robot_rows, odo_rows, tracks, truth, nodes, edges = [], [], [], [], [], []
    for i, enc in enumerate(encounters):
        lat, lon = unproject_arrays(geo_origin, *(enc.robot.xy - shift).T)
        for k in range(len(enc.robot)):
            robot_rows.append({"t": float(enc.robot.t[k]), "lat": float(lat[k]), "lon": float(lon[k]),
                               "heading": float(enc.robot.heading[k])})
        odo = enc.odometry
        for k in range(odo.t.size):
            odo_rows.append({"t": float(odo.t[k]), "v": float(odo.v[k]), "omega": float(odo.omega[k])})
        if i + 1 < len(encounters):
            gap_t = (enc.robot.end + encounters[i + 1].robot.start) / 2
            odo_rows.append({"t": float(gap_t), "v": TRANSIT_SPEED, "omega": 0.0})
        tracks.append({
            "track_id": enc.track.track_id,
            "detections": [{"t": float(tt), "x": float(x), "y": float(y)}
                           for tt, (x, y) in zip(enc.track.t, enc.track.offsets)],
        })
        truth.append(TruthRecord(scenario_id(mission_id, enc.truth.scenario_id), enc.truth.kind,
                                 enc.truth.is_junction, enc.truth.alpha_rad, enc.truth.d_robot_m))
        cx, cy = enc.junction - shift
        pts = {"c": (cx, cy), "e": (cx + ARM_LENGTH_M, cy), "n": (cx, cy + ARM_LENGTH_M),
               "w": (cx - ARM_LENGTH_M, cy), "s": (cx, cy - ARM_LENGTH_M)}
        for tag, (px, py) in pts.items():
            plat, plon = unproject_arrays(geo_origin, px, py)
            nodes.append(Node(f"j{i:04d}{tag}", GeoPoint(float(plat), float(plon))))
        edges += [(f"j{i:04d}c", f"j{i:04d}{tag}") for tag in "enws"]

    mission_doc = {"mission_id": mission_id, "robot_poses": robot_rows, "odometry": odo_rows, "tracks": tracks}
    return SynthDataset(mission_doc, RoadGraph.build(nodes, edges), truth, geo_origin, encounters)
