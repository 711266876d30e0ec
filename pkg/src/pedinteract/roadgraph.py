"""Road-network graphs reduced to junctions, with exact nearest-junction queries."""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DanglingReferenceError, GraphParseError, NoJunctionError
from .geometry import GeoPoint, LocalPoint, Trajectory, project_arrays

GRID_CELL_M = 50.0
JUNCTION_THRESHOLD_M = 8.0


@dataclass(frozen=True)
class Node:
    id: str
    position: GeoPoint
    degree: int = 0
    junction: bool = False


@dataclass(frozen=True)
class RoadGraph:
    nodes: tuple[Node, ...]
    edges: tuple[tuple[str, str], ...]

    @classmethod
    def build(cls, nodes: Iterable[Node], edges: Iterable[tuple[str, str]]) -> "RoadGraph":
        """Assemble a graph, validating edge endpoints and computing degrees."""
        nodes = list(nodes)
        edges = [(str(a), str(b)) for a, b in edges]
        ids = [n.id for n in nodes]
        dupes = [i for i, c in Counter(ids).items() if c > 1]
        if dupes:
            raise GraphParseError(f"duplicate node id(s): {sorted(dupes)[:5]}")
        known = set(ids)
        degree = Counter()
        for k, (a, b) in enumerate(edges):
            for end in (a, b):
                if end not in known:
                    raise DanglingReferenceError(f"edges[{k}] references unknown node id {end!r}")
            degree[a] += 1
            degree[b] += 1
        nodes = tuple(Node(n.id, n.position, degree[n.id], n.junction) for n in nodes)
        return cls(nodes, tuple(edges))


def _field(record: dict, key: str, where: str, kind=float, required=True):
    if key not in record:
        if required:
            raise GraphParseError(f"{where}: missing field {key!r}")
        return None
    value = record[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise GraphParseError(f"{where}.{key}: expected a number, got {value!r}")
        return float(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise GraphParseError(f"{where}.{key}: expected true/false, got {value!r}")
        return value
    if isinstance(value, (dict, list)) or value is None:
        raise GraphParseError(f"{where}.{key}: expected an id, got {value!r}")
    return str(value)


def _parse_node(record, where: str) -> Node:
    if not isinstance(record, dict):
        raise GraphParseError(f"{where}: expected an object")
    node_id = _field(record, "id", where, kind=str)
    lat = _field(record, "lat", where)
    lon = _field(record, "lon", where)
    try:
        pos = GeoPoint(lat, lon)
    except ValueError as exc:
        raise GraphParseError(f"{where}: {exc}") from None
    junction = _field(record, "junction", where, kind=bool, required=False) or False
    return Node(node_id, pos, 0, junction)


def _parse_edge(record, where: str) -> tuple[str, str]:
    if not isinstance(record, dict):
        raise GraphParseError(f"{where}: expected an object")
    return _field(record, "from", where, kind=str), _field(record, "to", where, kind=str)


def parse_graph_document(doc) -> RoadGraph:
    if not isinstance(doc, dict):
        raise GraphParseError("graph document must be an object with 'nodes' and 'edges'")
    nodes_raw = doc.get("nodes", [])
    edges_raw = doc.get("edges", [])
    if not isinstance(nodes_raw, list) or not isinstance(edges_raw, list):
        raise GraphParseError("'nodes' and 'edges' must be arrays")
    nodes = [_parse_node(r, f"nodes[{i}]") for i, r in enumerate(nodes_raw)]
    edges = [_parse_edge(r, f"edges[{i}]") for i, r in enumerate(edges_raw)]
    return RoadGraph.build(nodes, edges)


def load_graph(path) -> RoadGraph:
    """Read a road graph file.

    Two layouts are accepted: a single JSON document
    ``{"nodes": [{"id", "lat", "lon", "junction"?}], "edges": [{"from", "to"}]}``
    or, for ``.jsonl`` files, one record per line tagged with
    ``"type": "node"`` or ``"type": "edge"``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise GraphParseError(f"{path}: {exc.strerror or exc}") from None
    if path.suffix == ".jsonl":
        nodes, edges = [], []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise GraphParseError(f"{where}: {exc.msg} (column {exc.colno})") from None
            kind = rec.get("type") if isinstance(rec, dict) else None
            if kind == "node":
                nodes.append(_parse_node(rec, where))
            elif kind == "edge":
                edges.append(_parse_edge(rec, where))
            else:
                raise GraphParseError(f"{where}: record type must be 'node' or 'edge'")
        return RoadGraph.build(nodes, edges)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"{path}:{exc.lineno}: {exc.msg} (column {exc.colno})") from None
    try:
        return parse_graph_document(doc)
    except GraphParseError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def graph_to_document(graph: RoadGraph) -> dict:
    nodes = []
    for n in graph.nodes:
        rec = {"id": n.id, "lat": n.position.lat, "lon": n.position.lon}
        if n.junction:
            rec["junction"] = True
        nodes.append(rec)
    return {"nodes": nodes, "edges": [{"from": a, "to": b} for a, b in graph.edges]}


def extract_junctions(graph: RoadGraph) -> list[GeoPoint]:
    """Positions of nodes with degree >= 3 or an explicit junction flag."""
    return [n.position for n in graph.nodes if n.degree >= 3 or n.junction]


class JunctionIndex:
    """Uniform-grid index over junction positions in a local frame.

    Queries are exact: the grid only prunes cells that cannot contain a
    closer junction than the best one found so far.
    """

    def __init__(self, points, cell_size: float = GRID_CELL_M):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        self.points = pts
        self.cell_size = float(cell_size)
        cells = defaultdict(list)
        for i, (x, y) in enumerate(pts):
            cells[self._cell(x, y)].append(i)
        self._cells = {c: np.asarray(ix) for c, ix in cells.items()}
        if len(pts):
            keys = np.array(list(self._cells))
            self._cmin = keys.min(axis=0)
            self._cmax = keys.max(axis=0)

    def __len__(self):
        return len(self.points)

    def _cell(self, x, y):
        return (math.floor(x / self.cell_size), math.floor(y / self.cell_size))

    def nearest(self, p) -> tuple[int, float]:
        """Index of and distance to the nearest junction."""
        if not len(self.points):
            raise NoJunctionError("junction index is empty")
        px, py = float(p[0]), float(p[1])
        cx, cy = self._cell(px, py)
        max_ring = int(max(
            abs(cx - self._cmin[0]), abs(cx - self._cmax[0]),
            abs(cy - self._cmin[1]), abs(cy - self._cmax[1]),
        ))
        best_i, best_d = -1, math.inf
        for ring in range(max_ring + 1):
            for cell in _ring_cells(cx, cy, ring):
                ix = self._cells.get(cell)
                if ix is None:
                    continue
                d = _dist(self.points[ix], px, py)
                j = int(np.argmin(d))
                if d[j] < best_d or (d[j] == best_d and ix[j] < best_i):
                    best_i, best_d = int(ix[j]), float(d[j])
            # anything beyond this ring is at least ring * cell_size away
            if best_d <= ring * self.cell_size:
                break
        return best_i, best_d

    def distances(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=float).reshape(-1, 2)
        return np.array([self.nearest(p)[1] for p in xy])


def _dist(pts, px, py):
    dx = pts[:, 0] - px
    dy = pts[:, 1] - py
    return np.sqrt(dx * dx + dy * dy)


def _ring_cells(cx, cy, ring):
    if ring == 0:
        yield (cx, cy)
        return
    for dx in range(-ring, ring + 1):
        yield (cx + dx, cy - ring)
        yield (cx + dx, cy + ring)
    for dy in range(-ring + 1, ring):
        yield (cx - ring, cy + dy)
        yield (cx + ring, cy + dy)


def build_index(junctions: Sequence[GeoPoint], origin: GeoPoint, cell_size: float = GRID_CELL_M) -> JunctionIndex:
    if not junctions:
        return JunctionIndex(np.empty((0, 2)), cell_size)
    lat = np.array([j.lat for j in junctions])
    lon = np.array([j.lon for j in junctions])
    x, y = project_arrays(origin, lat, lon)
    return JunctionIndex(np.column_stack([x, y]), cell_size)


def nearest_junction_distance(index: JunctionIndex, p: LocalPoint) -> float:
    return index.nearest(tuple(p))[1]


@dataclass(frozen=True)
class JunctionStats:
    min_m: float
    max_m: float
    mean_m: float


def junction_distance_stats(traj: Trajectory, index: JunctionIndex) -> JunctionStats:
    """Min, max and sample mean of nearest-junction distance along ``traj``."""
    d = index.distances(traj.xy)
    # clamp guards the mean against last-bit rounding outside [min, max]
    lo, hi = float(d.min()), float(d.max())
    return JunctionStats(lo, hi, min(hi, max(lo, float(d.mean()))))


def is_junction_scenario(
    robot_stats: JunctionStats, ped_stats: JunctionStats, threshold_m: float = JUNCTION_THRESHOLD_M
) -> bool:
    """Both entities came strictly closer than ``threshold_m`` to a junction."""
    return robot_stats.min_m < threshold_m and ped_stats.min_m < threshold_m
