"""File formats: mission logs and graphs (JSON), tabular exports (CSV), digests."""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, MissionParseError
from .geometry import GeoPoint, Trajectory, project_arrays
from .roadgraph import RoadGraph, graph_to_document
from .scenario import DetectionTrack, MissionLog, Odometry


def _num(rec, key, where):
    if not isinstance(rec, dict) or key not in rec:
        raise MissionParseError(f"{where}: missing field {key!r}")
    v = rec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise MissionParseError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _list(doc, key, where="mission"):
    v = doc.get(key, [])
    if not isinstance(v, list):
        raise MissionParseError(f"{where}.{key}: expected an array")
    return v


def mission_from_document(doc: dict, origin: Optional[GeoPoint] = None) -> MissionLog:
    """Build a :class:`MissionLog` from the mission JSON structure.

    ``{"mission_id", "origin"?: {"lat", "lon"},
       "robot_poses": [{"t", "lat", "lon", "heading"}],
       "odometry": [{"t", "v", "omega"}],
       "tracks": [{"track_id", "detections": [{"t", "x", "y"}]}]}``

    Robot fixes are projected into a local frame anchored at ``origin``, the
    document's ``origin`` entry, or the first robot fix, in that order.
    """
    if not isinstance(doc, dict):
        raise MissionParseError("mission document must be an object")
    mission_id = str(doc.get("mission_id", "mission"))
    poses = _list(doc, "robot_poses")
    rows = [(_num(p, "t", f"robot_poses[{i}]"), _num(p, "lat", f"robot_poses[{i}]"),
             _num(p, "lon", f"robot_poses[{i}]"), _num(p, "heading", f"robot_poses[{i}]"))
            for i, p in enumerate(poses)]
    if len(rows) < 2:
        raise MissionParseError(f"mission {mission_id}: need at least 2 robot poses")
    arr = np.array(rows)
    try:
        if origin is None and "origin" in doc:
            origin = GeoPoint(_num(doc["origin"], "lat", "origin"), _num(doc["origin"], "lon", "origin"))
        if origin is None:
            origin = GeoPoint(arr[0, 1], arr[0, 2])
        if np.any(np.abs(arr[:, 1] - origin.lat) >= 1.0):
            raise InvalidInputError("robot fixes span more than 1 degree of latitude from the origin")
        x, y = project_arrays(origin, arr[:, 1], arr[:, 2])
        robot = Trajectory(arr[:, 0], np.column_stack([x, y]), arr[:, 3])
        odo = np.array([(_num(o, "t", f"odometry[{i}]"), _num(o, "v", f"odometry[{i}]"),
                         _num(o, "omega", f"odometry[{i}]")) for i, o in enumerate(_list(doc, "odometry"))])
        odo = odo.reshape(-1, 3)
        tracks = []
        for i, tr in enumerate(_list(doc, "tracks")):
            where = f"tracks[{i}]"
            if not isinstance(tr, dict) or "track_id" not in tr:
                raise MissionParseError(f"{where}: missing field 'track_id'")
            det = _list(tr, "detections", where)
            d = np.array([(_num(r, "t", f"{where}.detections[{j}]"), _num(r, "x", f"{where}.detections[{j}]"),
                           _num(r, "y", f"{where}.detections[{j}]")) for j, r in enumerate(det)]).reshape(-1, 3)
            tracks.append(DetectionTrack(str(tr["track_id"]), d[:, 0], d[:, 1:]))
        return MissionLog(mission_id, origin, robot, Odometry(odo[:, 0], odo[:, 1], odo[:, 2]), tuple(tracks))
    except InvalidInputError as exc:
        raise MissionParseError(f"mission {mission_id}: {exc}") from None


def load_mission(path, origin: Optional[GeoPoint] = None) -> MissionLog:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise MissionParseError(f"{path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise MissionParseError(f"{path}:{exc.lineno}: {exc.msg} (column {exc.colno})") from None
    try:
        return mission_from_document(doc, origin)
    except MissionParseError as exc:
        raise MissionParseError(f"{path}: {exc}") from None


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def write_graph(path, graph: RoadGraph) -> None:
    write_json(path, graph_to_document(graph))


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[dict]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def parse_bool(s: str) -> bool:
    if s not in ("true", "false"):
        raise InvalidInputError(f"expected true/false, got {s!r}")
    return s == "true"


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_outputs(out_dir, files: dict) -> None:
    """Write ``{name: text}`` into ``out_dir`` after all content is computed."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
