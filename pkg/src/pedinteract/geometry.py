"""Local-frame geometry: projection, trajectories, direction fits and distances.

All positions are in a local east/north tangent plane (meters) anchored at a
mission origin. Trajectories store their samples as numpy arrays; they are
treated as immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateTrajectoryError,
    InvalidInputError,
    NoOverlapError,
    OutOfRangeError,
    PreconditionError,
)

EARTH_RADIUS_M = 6_371_000.0

# variance (m^2) below which a coordinate axis counts as constant
AXIS_VARIANCE_EPS = 1e-12


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise InvalidInputError(f"non-finite coordinate {self.lat}, {self.lon}")
        if not -90.0 <= self.lat <= 90.0:
            raise InvalidInputError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise InvalidInputError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class LocalPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidInputError(f"non-finite local point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class TimedPose:
    t: float
    position: LocalPoint
    heading: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise InvalidInputError(f"non-finite timestamp {self.t}")
        if self.heading is not None and not -math.pi <= self.heading <= math.pi:
            raise InvalidInputError(f"heading {self.heading} outside [-pi, pi]")


def wrap_angle(a):
    """Wrap angle(s) to [-pi, pi]."""
    return np.arctan2(np.sin(a), np.cos(a))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Timestamped 2D positions of one entity, optionally with headings.

    ``t`` has shape (n,), ``xy`` shape (n, 2) and ``heading`` (n,) or None.
    Timestamps must be strictly increasing and there must be at least two
    samples.
    """

    t: np.ndarray
    xy: np.ndarray
    heading: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        if t.shape[0] != xy.shape[0]:
            raise InvalidInputError("timestamps and positions differ in length")
        if t.shape[0] < 2:
            raise InvalidInputError("a trajectory needs at least 2 samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(xy))):
            raise InvalidInputError("trajectory contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("trajectory timestamps must be strictly increasing")
        heading = self.heading
        if heading is not None:
            heading = np.asarray(heading, dtype=float).reshape(-1)
            if heading.shape != t.shape:
                raise InvalidInputError("heading length differs from timestamps")
            if not np.all(np.isfinite(heading)) or np.any(np.abs(heading) > math.pi):
                raise InvalidInputError("headings must lie in [-pi, pi]")
            heading.setflags(write=False)
        t.setflags(write=False)
        xy.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "heading", heading)

    @classmethod
    def from_poses(cls, poses: Sequence[TimedPose]) -> "Trajectory":
        t = [p.t for p in poses]
        xy = [(p.position.x, p.position.y) for p in poses]
        headings = [p.heading for p in poses]
        if all(h is None for h in headings):
            heading = None
        elif any(h is None for h in headings):
            raise InvalidInputError("headings must be given for all poses or none")
        else:
            heading = headings
        return cls(t, xy, heading)

    def __len__(self):
        return self.t.shape[0]

    @property
    def samples(self) -> list[TimedPose]:
        h = self.heading
        return [
            TimedPose(float(ti), LocalPoint(float(x), float(y)), None if h is None else float(h[i]))
            for i, (ti, (x, y)) in enumerate(zip(self.t, self.xy))
        ]

    @property
    def start(self) -> float:
        return float(self.t[0])

    @property
    def end(self) -> float:
        return float(self.t[-1])

    @property
    def duration(self) -> float:
        return self.end - self.start

    def pose_at(self, t: float) -> TimedPose:
        xy, heading = interpolate(self, [t])
        h = None if heading is None else float(heading[0])
        return TimedPose(float(t), LocalPoint(float(xy[0, 0]), float(xy[0, 1])), h)


@dataclass(frozen=True)
class DirectionFit:
    direction: tuple[float, float]
    pearson_r: float
    origin: LocalPoint


def project_to_local(origin: GeoPoint, p: GeoPoint) -> LocalPoint:
    """Equirectangular projection of ``p`` into the tangent plane at ``origin``."""
    if abs(p.lat - origin.lat) >= 1.0:
        raise InvalidInputError(
            f"point {p} is more than 1 degree of latitude from origin {origin}"
        )
    x, y = project_arrays(origin, np.array([p.lat]), np.array([p.lon]))
    return LocalPoint(float(x[0]), float(y[0]))


def project_arrays(origin: GeoPoint, lat, lon):
    """Vectorised :func:`project_to_local`; returns ``(x, y)`` arrays."""
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    if np.any(np.abs(lat) > 90) or np.any(np.abs(lon) > 180):
        raise InvalidInputError("coordinates out of WGS84 range")
    dlon = np.radians(lon - origin.lon)
    dlat = np.radians(lat - origin.lat)
    x = EARTH_RADIUS_M * math.cos(math.radians(origin.lat)) * dlon
    y = EARTH_RADIUS_M * dlat
    return x, y


def unproject_arrays(origin: GeoPoint, x, y):
    """Inverse of :func:`project_arrays`; returns ``(lat, lon)`` in degrees."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lat = origin.lat + np.degrees(y / EARTH_RADIUS_M)
    lon = origin.lon + np.degrees(x / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat))))
    return lat, lon


def rotate(xy, angle):
    """Rotate row vectors ``xy`` (n, 2) counter-clockwise by ``angle`` (scalar or (n,))."""
    xy = np.asarray(xy, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([c * xy[..., 0] - s * xy[..., 1], s * xy[..., 0] + c * xy[..., 1]], axis=-1)


def relative_to_global(robot_pose: TimedPose, offset: LocalPoint) -> LocalPoint:
    """Map an offset in the robot frame (x forward, y left) to the local frame."""
    if robot_pose.heading is None:
        raise PreconditionError("robot pose has no heading")
    gx, gy = rotate(np.array([offset.x, offset.y]), robot_pose.heading)
    return LocalPoint(robot_pose.position.x + float(gx), robot_pose.position.y + float(gy))


def pearson_r(x, y) -> float:
    """Pearson correlation of two coordinate series.

    If either coordinate is (numerically) constant the points lie on an
    axis-parallel line and the correlation is reported as 1.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    vx = np.mean(dx * dx)
    vy = np.mean(dy * dy)
    if vx < AXIS_VARIANCE_EPS or vy < AXIS_VARIANCE_EPS:
        return 1.0
    r = np.mean(dx * dy) / math.sqrt(vx * vy)
    return float(min(1.0, max(-1.0, r)))


def fit_direction(traj: Trajectory) -> DirectionFit:
    """Total-least-squares direction of motion of a trajectory.

    The direction is the principal axis of the position covariance, signed
    so that it points along the first-to-last displacement.
    """
    xy = traj.xy
    centroid = xy.mean(axis=0)
    centered = xy - centroid
    cov = centered.T @ centered / len(xy)
    if np.trace(cov) < AXIS_VARIANCE_EPS:
        raise DegenerateTrajectoryError("all trajectory positions are identical")
    _, vecs = np.linalg.eigh(cov)
    d = vecs[:, 1]
    disp = xy[-1] - xy[0]
    proj = float(d @ disp)
    if abs(proj) < 1e-12:
        raise DegenerateTrajectoryError(
            "direction sign undefined: no net displacement along the fitted axis"
        )
    if proj < 0:
        d = -d
    d = d / np.linalg.norm(d)
    return DirectionFit(
        direction=(float(d[0]), float(d[1])),
        pearson_r=pearson_r(xy[:, 0], xy[:, 1]),
        origin=LocalPoint(float(centroid[0]), float(centroid[1])),
    )


def angle_between(a: DirectionFit, b: DirectionFit) -> float:
    """Angle in [0, pi] between two fitted directions (0 parallel, pi head-on)."""
    dot = a.direction[0] * b.direction[0] + a.direction[1] * b.direction[1]
    return math.acos(min(1.0, max(-1.0, dot)))


def path_length(traj: Trajectory) -> float:
    return float(np.sum(np.hypot(*np.diff(traj.xy, axis=0).T)))


def mean_speed(traj: Trajectory) -> float:
    """Path length over duration."""
    if traj.duration <= 0:
        raise DegenerateTrajectoryError("trajectory has zero duration")
    return path_length(traj) / traj.duration


def interpolate(traj: Trajectory, timestamps):
    """Positions and headings of ``traj`` at ``timestamps`` as arrays.

    Positions are interpolated linearly, headings along the shortest arc.
    Returns ``(xy, heading)``; ``heading`` is None when the trajectory has none.
    """
    ts = np.asarray(timestamps, dtype=float).reshape(-1)
    if ts.size and (ts.min() < traj.t[0] or ts.max() > traj.t[-1]):
        raise OutOfRangeError(
            f"timestamps [{ts.min()}, {ts.max()}] outside trajectory span "
            f"[{traj.t[0]}, {traj.t[-1]}]"
        )
    idx = np.clip(np.searchsorted(traj.t, ts, side="right") - 1, 0, len(traj) - 2)
    t0 = traj.t[idx]
    t1 = traj.t[idx + 1]
    frac = np.where(ts == t1, 1.0, (ts - t0) / (t1 - t0))
    p0 = traj.xy[idx]
    p1 = traj.xy[idx + 1]
    # knots must come back bit-for-bit
    xy = p0 + frac[:, None] * (p1 - p0)
    xy = np.where(frac[:, None] == 0.0, p0, np.where(frac[:, None] == 1.0, p1, xy))
    heading = None
    if traj.heading is not None:
        h0 = traj.heading[idx]
        h1 = traj.heading[idx + 1]
        heading = wrap_angle(h0 + frac * wrap_angle(h1 - h0))
        heading = np.where(frac == 0.0, h0, np.where(frac == 1.0, h1, heading))
    return xy, heading


def resample(traj: Trajectory, timestamps) -> Trajectory:
    """Trajectory re-sampled at ``timestamps`` (no extrapolation)."""
    ts = np.asarray(timestamps, dtype=float).reshape(-1)
    xy, heading = interpolate(traj, ts)
    return Trajectory(ts, xy, heading)


def overlap_times(a: Trajectory, b: Trajectory) -> np.ndarray:
    """Union of both trajectories' sample times within their common span."""
    lo = max(a.start, b.start)
    hi = min(a.end, b.end)
    if lo > hi:
        raise NoOverlapError(f"no temporal overlap: [{a.start}, {a.end}] vs [{b.start}, {b.end}]")
    ts = np.union1d(a.t, b.t)
    ts = ts[(ts >= lo) & (ts <= hi)]
    return np.union1d(ts, [lo, hi])


def min_distance(a: Trajectory, b: Trajectory) -> float:
    """Minimum Euclidean distance over the synchronised overlap of two trajectories."""
    ts = overlap_times(a, b)
    pa, _ = interpolate(a, ts)
    pb, _ = interpolate(b, ts)
    return float(np.min(np.hypot(*(pa - pb).T)))
