"""Interaction scenarios: segmentation of mission logs and feature assembly."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateTrajectoryError,
    InvalidInputError,
    MissingOdometryError,
    PipelineError,
)
from .geometry import (
    DirectionFit,
    GeoPoint,
    Trajectory,
    angle_between,
    fit_direction,
    interpolate,
    mean_speed,
    min_distance,
    rotate,
)
from .roadgraph import JunctionIndex, JunctionStats, junction_distance_stats

log = logging.getLogger(__name__)

ODOMETRY_MIN_COVERAGE = 0.5
R_THRESHOLD = 0.5
FILTER_MODES = ("both", "pedestrian", "robot")
OMEGA_MODES = ("abs", "signed")


@dataclass(frozen=True, eq=False)
class Odometry:
    t: np.ndarray
    v: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=float).reshape(-1)
        omega = np.asarray(self.omega, dtype=float).reshape(-1)
        if not (t.shape == v.shape == omega.shape):
            raise InvalidInputError("odometry columns differ in length")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("odometry timestamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "omega", omega)


@dataclass(frozen=True, eq=False)
class DetectionTrack:
    """Detections of one tracked person as offsets in the robot frame (x forward, y left)."""

    track_id: str
    t: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        off = np.asarray(self.offsets, dtype=float).reshape(-1, 2)
        if t.shape[0] != off.shape[0]:
            raise InvalidInputError(f"track {self.track_id}: times and offsets differ in length")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError(f"track {self.track_id}: detection times must be increasing")
        object.__setattr__(self, "track_id", str(self.track_id))
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "offsets", off)


@dataclass(frozen=True, eq=False)
class MissionLog:
    mission_id: str
    origin: GeoPoint
    robot: Trajectory
    odometry: Odometry
    tracks: tuple[DetectionTrack, ...] = ()

    def __post_init__(self):
        if self.robot.heading is None:
            raise InvalidInputError(f"mission {self.mission_id}: robot poses need headings")
        ids = [tr.track_id for tr in self.tracks]
        if len(set(ids)) != len(ids):
            raise InvalidInputError(f"mission {self.mission_id}: duplicate track ids")
        object.__setattr__(self, "tracks", tuple(self.tracks))


@dataclass(frozen=True, eq=False)
class InteractionScenario:
    scenario_id: str
    mission_id: str
    track_id: str
    window: tuple[float, float]
    robot_traj: Trajectory
    ped_traj: Trajectory
    robot_fit: DirectionFit
    ped_fit: DirectionFit
    d_robot: float


@dataclass(frozen=True)
class SkippedTrack:
    mission_id: str
    track_id: str
    reason: str


@dataclass(frozen=True)
class FeatureVector:
    robot_jct_min_m: float
    robot_jct_max_m: float
    robot_jct_mean_m: float
    ped_jct_min_m: float
    ped_jct_max_m: float
    ped_jct_mean_m: float
    robot_v_mean_mps: float
    robot_omega_mean_radps: float
    ped_speed_mean_mps: float
    alpha_rad: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_COLUMNS])


FEATURE_COLUMNS = tuple(f.name for f in fields(FeatureVector))


def scenario_id(mission_id: str, track_id: str) -> str:
    return f"{mission_id}:{track_id}"


def build_pedestrian_trajectory(mission: MissionLog, track: DetectionTrack) -> Trajectory:
    """Pedestrian positions in the mission frame from robot-relative detections.

    Detections outside the robot pose span are dropped (logged); fewer than two
    remaining detections is a degenerate track.
    """
    robot = mission.robot
    inside = (track.t >= robot.start) & (track.t <= robot.end)
    dropped = int(np.count_nonzero(~inside))
    if dropped:
        log.info("track %s: %d detection(s) outside robot pose span dropped", track.track_id, dropped)
    t = track.t[inside]
    if t.size < 2:
        raise DegenerateTrajectoryError(
            f"track {track.track_id}: fewer than 2 detections within robot pose coverage"
        )
    pos, heading = interpolate(robot, t)
    xy = pos + rotate(track.offsets[inside], heading)
    return Trajectory(t, xy)


def _robot_window(robot: Trajectory, t0: float, t1: float) -> Trajectory:
    interior = robot.t[(robot.t > t0) & (robot.t < t1)]
    ts = np.concatenate([[t0], interior, [t1]])
    xy, heading = interpolate(robot, ts)
    return Trajectory(ts, xy, heading)


def segment_scenarios(mission: MissionLog) -> tuple[list[InteractionScenario], list[SkippedTrack]]:
    """One scenario per usable detection track, ordered by first detection time.

    Tracks that cannot form a scenario are returned in the second list with
    the reason instead of aborting the mission.
    """
    scenarios, skipped = [], []
    order = sorted(mission.tracks, key=lambda tr: (tr.t[0] if tr.t.size else math.inf, tr.track_id))
    for track in order:
        try:
            ped = build_pedestrian_trajectory(mission, track)
            t0, t1 = ped.start, ped.end
            robot = _robot_window(mission.robot, t0, t1)
            robot_fit = fit_direction(robot)
            ped_fit = fit_direction(ped)
            d_robot = min_distance(robot, ped)
        except PipelineError as exc:
            log.warning("mission %s track %s skipped: %s", mission.mission_id, track.track_id, exc)
            skipped.append(SkippedTrack(mission.mission_id, track.track_id, str(exc)))
            continue
        scenarios.append(
            InteractionScenario(
                scenario_id=scenario_id(mission.mission_id, track.track_id),
                mission_id=mission.mission_id,
                track_id=track.track_id,
                window=(t0, t1),
                robot_traj=robot,
                ped_traj=ped,
                robot_fit=robot_fit,
                ped_fit=ped_fit,
                d_robot=d_robot,
            )
        )
    return scenarios, skipped


def _held_integral(t, values, lo, hi):
    """Integral over [lo, hi] of the sample-and-hold signal defined on [t[0], t[-1]]."""
    edges = np.clip(np.append(t, t[-1]), lo, hi)
    return float(np.sum(values * np.diff(edges)))


def extract_robot_features(
    scenario: InteractionScenario,
    mission: MissionLog,
    omega_mode: str = "abs",
    min_coverage: float = ODOMETRY_MIN_COVERAGE,
) -> dict:
    """Time-weighted mean |v| and mean omega over the scenario window.

    Each odometry sample holds until the next one. The window must be covered
    by the odometry stream for at least ``min_coverage`` of its duration.
    """
    if omega_mode not in OMEGA_MODES:
        raise InvalidInputError(f"omega_mode must be one of {OMEGA_MODES}")
    t0, t1 = scenario.window
    odo = mission.odometry
    if odo.t.size == 0:
        raise MissingOdometryError(f"{scenario.scenario_id}: no odometry")
    lo, hi = max(t0, odo.t[0]), min(t1, odo.t[-1])
    covered = max(0.0, hi - lo)
    if covered < min_coverage * (t1 - t0) or covered <= 0:
        raise MissingOdometryError(
            f"{scenario.scenario_id}: odometry covers {covered:.3f} s of a {t1 - t0:.3f} s window"
        )
    omega = np.abs(odo.omega) if omega_mode == "abs" else odo.omega
    return {
        "v_mean": _held_integral(odo.t, np.abs(odo.v), lo, hi) / covered,
        "omega_mean": _held_integral(odo.t, omega, lo, hi) / covered,
    }


def extract_passerby_features(scenario: InteractionScenario) -> dict:
    return {"speed_mean": mean_speed(scenario.ped_traj), "fit": fit_direction(scenario.ped_traj)}


def extract_context_features(scenario: InteractionScenario, index: JunctionIndex) -> dict:
    return {
        "robot": junction_distance_stats(scenario.robot_traj, index),
        "ped": junction_distance_stats(scenario.ped_traj, index),
    }


def passes_linearity(scenario: InteractionScenario, r_threshold: float = R_THRESHOLD, mode: str = "both") -> bool:
    if mode not in FILTER_MODES:
        raise InvalidInputError(f"filter mode must be one of {FILTER_MODES}")
    robot_ok = abs(scenario.robot_fit.pearson_r) > r_threshold
    ped_ok = abs(scenario.ped_fit.pearson_r) > r_threshold
    if mode == "both":
        return robot_ok and ped_ok
    return ped_ok if mode == "pedestrian" else robot_ok


def filter_linear(scenarios: Sequence[InteractionScenario], r_threshold: float = R_THRESHOLD, mode: str = "both"):
    """Split scenarios into ``(kept, removed)``; kept iff |r_p| > threshold."""
    kept, removed = [], []
    for s in scenarios:
        (kept if passes_linearity(s, r_threshold, mode) else removed).append(s)
    return kept, removed


def assemble_vector(
    scenario: InteractionScenario, robot_feats: dict, ped_feats: dict, ctx_feats: dict
) -> FeatureVector:
    robot_ctx: JunctionStats = ctx_feats["robot"]
    ped_ctx: JunctionStats = ctx_feats["ped"]
    ped_fit = ped_feats.get("fit", scenario.ped_fit)
    return FeatureVector(
        robot_jct_min_m=robot_ctx.min_m,
        robot_jct_max_m=robot_ctx.max_m,
        robot_jct_mean_m=robot_ctx.mean_m,
        ped_jct_min_m=ped_ctx.min_m,
        ped_jct_max_m=ped_ctx.max_m,
        ped_jct_mean_m=ped_ctx.mean_m,
        robot_v_mean_mps=robot_feats["v_mean"],
        robot_omega_mean_radps=robot_feats["omega_mean"],
        ped_speed_mean_mps=ped_feats["speed_mean"],
        alpha_rad=angle_between(scenario.robot_fit, ped_fit),
    )


def scatter_alpha_distance(scenarios: Sequence[InteractionScenario]) -> np.ndarray:
    """Rows of ``(alpha_rad, d_robot_m)``, one per scenario."""
    rows = [(angle_between(s.robot_fit, s.ped_fit), s.d_robot) for s in scenarios]
    return np.array(rows, dtype=float).reshape(-1, 2)
