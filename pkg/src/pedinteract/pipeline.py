"""Pipeline stages (extract, cluster, assess) over files in an output directory.

Each stage reads its inputs, computes everything in memory and only then
writes its outputs, so a failing stage leaves no partial files behind.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analytics import (
    FeatureMatrix,
    compare_partitions,
    pca_fit,
    pca_transform,
    select_k,
    zscore_apply,
    zscore_fit,
)
from .analytics.assessment import DiscriminatoryPower
from .errors import InvalidInputError, InvalidKError, PipelineError
from .geometry import GeoPoint, angle_between
from .io import csv_text, dumps_json, load_mission, parse_bool, read_csv, sha256_file, write_outputs
from .roadgraph import build_index, extract_junctions, is_junction_scenario, load_graph
from .scenario import (
    FEATURE_COLUMNS,
    FILTER_MODES,
    OMEGA_MODES,
    extract_context_features,
    extract_passerby_features,
    extract_robot_features,
    assemble_vector,
    passes_linearity,
    segment_scenarios,
)

log = logging.getLogger(__name__)

SCENARIOS_CSV = "scenarios.csv"
FEATURES_CSV = "features.csv"
SKIPPED_CSV = "skipped.csv"
EXTRACT_JSON = "extract.json"
PCA_CSV = "pca.csv"
LABELS_CSV = "labels.csv"
KSELECT_CSV = "kselect.csv"
CLUSTER_JSON = "cluster.json"
ECDF_CLUSTERS_CSV = "ecdf_clusters.csv"
ECDF_JUNCTION_CSV = "ecdf_junction.csv"
SCATTER_CSV = "scatter.csv"
CROSSTAB_CSV = "crosstab.csv"
ASSESS_JSON = "assessment.json"
REPORT_JSON = "report.json"

SCENARIO_COLUMNS = (
    "scenario_id", "mission_id", "track_id", "t_first_s", "t_last_s",
    "robot_pearson_r", "ped_pearson_r", "alpha_rad", "d_robot_m", "is_junction", "kept",
)

# magnitudes observed on the original robot dataset; reported for orientation only
REFERENCE_MAGNITUDES = {
    "raw_scenarios": 987,
    "removed_by_filter": 201,
    "kept": 786,
    "best_k": 5,
    "max_dn": 0.23,
    "weakest_pair_dn": 0.08,
    "weakest_pair_p": 0.91,
}


@dataclass
class PipelineConfig:
    output_dir: str
    missions: list = field(default_factory=list)
    graph: Optional[str] = None
    origin: Optional[tuple] = None
    r_threshold: float = 0.5
    junction_threshold_m: float = 8.0
    k_range: tuple = (3, 9)
    pca_components: int = 2
    seed: Optional[int] = None
    restarts: int = 10
    filter_mode: str = "both"
    omega_mode: str = "abs"
    aggregate: str = "max"

    def __post_init__(self):
        self.k_range = tuple(int(k) for k in self.k_range)
        if self.r_threshold <= 0 or self.junction_threshold_m <= 0:
            raise InvalidInputError("thresholds must be positive")
        if len(self.k_range) != 2 or not 1 <= self.k_range[0] <= self.k_range[1]:
            raise InvalidInputError("k_range must be [k_min, k_max] with 1 <= k_min <= k_max")
        if self.pca_components < 1 or self.restarts < 1:
            raise InvalidInputError("pca_components and restarts must be >= 1")
        if self.filter_mode not in FILTER_MODES:
            raise InvalidInputError(f"filter_mode must be one of {FILTER_MODES}")
        if self.omega_mode not in OMEGA_MODES:
            raise InvalidInputError(f"omega_mode must be one of {OMEGA_MODES}")
        if self.aggregate not in ("max", "min"):
            raise InvalidInputError("aggregate must be 'max' or 'min'")
        if self.origin is not None:
            self.origin = tuple(float(v) for v in self.origin)
            GeoPoint(*self.origin)

    def require_seed(self) -> int:
        if self.seed is None:
            raise InvalidInputError("a seed is required (no implicit default)")
        return int(self.seed)

    @property
    def out(self) -> Path:
        return Path(self.output_dir)


# --------------------------------------------------------------------------- extract

def extract(config: PipelineConfig) -> dict:
    """Scenario extraction, feature assembly and the linearity filter."""
    if not config.graph:
        raise InvalidInputError("extract needs a road graph (--graph)")
    graph = load_graph(config.graph)
    junctions = extract_junctions(graph)
    origin = GeoPoint(*config.origin) if config.origin else None
    rows, features, skipped = [], [], []
    for path in config.missions:
        mission = load_mission(path, origin)
        index = build_index(junctions, mission.origin)
        scenarios, skips = segment_scenarios(mission)
        skipped += [(s.mission_id, s.track_id, s.reason) for s in skips]
        for sc in scenarios:
            try:
                robot = extract_robot_features(sc, mission, config.omega_mode)
                ped = extract_passerby_features(sc)
                ctx = extract_context_features(sc, index)
            except PipelineError as exc:
                log.warning("scenario %s skipped: %s", sc.scenario_id, exc)
                skipped.append((sc.mission_id, sc.track_id, str(exc)))
                continue
            fv = assemble_vector(sc, robot, ped, ctx)
            kept = passes_linearity(sc, config.r_threshold, config.filter_mode)
            rows.append((
                sc.scenario_id, sc.mission_id, sc.track_id, sc.window[0], sc.window[1],
                sc.robot_fit.pearson_r, sc.ped_fit.pearson_r, angle_between(sc.robot_fit, sc.ped_fit),
                sc.d_robot, is_junction_scenario(ctx["robot"], ctx["ped"], config.junction_threshold_m), kept,
            ))
            if kept:
                features.append((sc.scenario_id, *fv.as_array()))
    if not rows:
        warnings.warn("no interaction scenarios extracted", stacklevel=2)
    n_kept = sum(1 for r in rows if r[-1])
    summary = {
        "raw_scenarios": len(rows),
        "removed_by_filter": len(rows) - n_kept,
        "kept": n_kept,
        "skipped_tracks": len(skipped),
        "r_threshold": config.r_threshold,
        "filter_mode": config.filter_mode,
        "junction_threshold_m": config.junction_threshold_m,
    }
    files = {
        SCENARIOS_CSV: csv_text(SCENARIO_COLUMNS, rows),
        FEATURES_CSV: csv_text(("scenario_id",) + FEATURE_COLUMNS, features),
        SKIPPED_CSV: csv_text(("mission_id", "track_id", "reason"), skipped),
        EXTRACT_JSON: dumps_json(summary),
    }
    write_outputs(config.out, files)
    return summary


def read_scenarios(out: Path) -> list[dict]:
    _, rows = read_csv(_need(out, SCENARIOS_CSV, "extract"))
    for r in rows:
        for k in ("t_first_s", "t_last_s", "robot_pearson_r", "ped_pearson_r", "alpha_rad", "d_robot_m"):
            r[k] = float(r[k])
        r["is_junction"] = parse_bool(r["is_junction"])
        r["kept"] = parse_bool(r["kept"])
    return rows


def read_features(out: Path) -> FeatureMatrix:
    header, rows = read_csv(_need(out, FEATURES_CSV, "extract"))
    columns = tuple(header[1:])
    if columns != FEATURE_COLUMNS:
        raise InvalidInputError(f"{FEATURES_CSV}: unexpected columns {columns}")
    values = np.array([[float(r[c]) for c in columns] for r in rows]).reshape(len(rows), len(columns))
    return FeatureMatrix(values, columns, tuple(r["scenario_id"] for r in rows))


def _need(out: Path, name: str, stage: str) -> Path:
    p = Path(out) / name
    if not p.exists():
        raise MissingStageError(f"{p} not found; run the '{stage}' stage first")
    return p


class MissingStageError(PipelineError, FileNotFoundError):
    pass


# --------------------------------------------------------------------------- cluster

def _power_fields(power: Optional[DiscriminatoryPower]) -> list:
    if power is None:
        return [None] * 8
    return [power.max_dn, power.max_pair.p_value, f"{power.max_pair.a}-{power.max_pair.b}",
            power.min_dn, power.min_pair.p_value, f"{power.min_pair.a}-{power.min_pair.b}",
            max(p.w1 for p in power.pairs), min(p.w1 for p in power.pairs)]


def cluster(config: PipelineConfig) -> dict:
    """Z-score, PCA and K-means over the configured range of k."""
    seed = config.require_seed()
    fm = read_features(config.out)
    d_by_id = {r["scenario_id"]: r["d_robot_m"] for r in read_scenarios(config.out)}
    d_robot = np.array([d_by_id[i] for i in fm.row_ids])
    n = len(fm)
    if n < max(config.k_range) or n < 2:
        raise InvalidKError(f"{n} scenario(s) cannot be clustered with k up to {max(config.k_range)}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        params = zscore_fit(fm)
        z = zscore_apply(fm, params)
    constant = [str(w.message) for w in caught]
    for msg in constant:
        log.warning(msg)
    model = pca_fit(z, config.pca_components)
    pcs = pca_transform(z, model)
    sel = select_k(pcs.values, d_robot, config.k_range, seed, config.restarts, config.aggregate)

    ks = [r.k for r in sel.reports]
    pc_cols = [f"pc{i}" for i in range(config.pca_components)]
    files = {
        PCA_CSV: csv_text(["scenario_id", *pc_cols], [(rid, *row) for rid, row in zip(fm.row_ids, pcs.values)]),
        LABELS_CSV: csv_text(
            ["scenario_id", *[f"k{k}" for k in ks]],
            [(rid, *[int(r.clustering.labels[i]) for r in sel.reports]) for i, rid in enumerate(fm.row_ids)],
        ),
        KSELECT_CSV: csv_text(
            ("k", "inertia", "iterations", "max_dn", "max_dn_p", "max_dn_pair",
             "min_dn", "min_dn_p", "min_dn_pair", "max_w1", "min_w1"),
            [(r.k, r.clustering.inertia, r.clustering.iterations, *_power_fields(r.power)) for r in sel.reports],
        ),
    }
    meta = {
        "best_k": sel.best_k,
        "k_range": list(config.k_range),
        "seed": seed,
        "restarts": config.restarts,
        "aggregate": config.aggregate,
        "discriminatory_power_available": sel.power_available,
        "discriminative": sel.discriminative,
        "n_scenarios": n,
        "zscore": {"columns": list(fm.columns), "mu": params.mu.tolist(), "sigma": params.sigma.tolist()},
        "constant_columns_warning": constant,
        "pca": {
            "components": model.components.tolist(),
            "explained_variance": model.explained_variance.tolist(),
            "explained_variance_ratio": (model.explained_variance / model.total_variance).tolist()
            if model.total_variance > 0 else [0.0] * config.pca_components,
        },
    }
    files[CLUSTER_JSON] = dumps_json(meta)
    write_outputs(config.out, files)
    return meta


# --------------------------------------------------------------------------- assess

def _ecdf_rows(ecdfs: dict):
    rows = []
    for cls, e in ecdfs.items():
        xs, fs = e.steps()
        rows += [(_label(cls), x, f) for x, f in zip(xs, fs)]
    return rows


def _label(v):
    if isinstance(v, (bool, np.bool_)):
        return "junction" if v else "non_junction"
    return str(v)


def _power_json(power: Optional[DiscriminatoryPower]):
    if power is None:
        return None
    return {
        "max_dn": power.max_dn,
        "min_dn": power.min_dn,
        "max_pair": [_label(power.max_pair.a), _label(power.max_pair.b)],
        "min_pair": [_label(power.min_pair.a), _label(power.min_pair.b)],
        "excluded": [_label(c) for c in power.excluded],
        "pairs": [
            {"a": _label(p.a), "b": _label(p.b), "n_a": p.n_a, "n_b": p.n_b,
             "d_n": p.d_n, "p_value": p.p_value, "w1": p.w1}
            for p in power.pairs
        ],
    }


def assess(config: PipelineConfig) -> dict:
    """ECDFs, scatter table, junction cross-tab and the consolidated run report."""
    out = config.out
    scen = read_scenarios(out)
    meta = json.loads(_need(out, CLUSTER_JSON, "cluster").read_text(encoding="utf-8"))
    _, label_rows = read_csv(_need(out, LABELS_CSV, "cluster"))
    _, kselect = read_csv(_need(out, KSELECT_CSV, "cluster"))
    extract_summary = json.loads(_need(out, EXTRACT_JSON, "extract").read_text(encoding="utf-8"))
    best_k = int(meta["best_k"])
    by_id = {r["scenario_id"]: r for r in scen}
    ids = [r["scenario_id"] for r in label_rows]
    labels = np.array([int(r[f"k{best_k}"]) for r in label_rows])
    junction = np.array([by_id[i]["is_junction"] for i in ids], dtype=bool)
    d_robot = np.array([by_id[i]["d_robot_m"] for i in ids])
    cmp = compare_partitions(labels, junction, d_robot)

    crosstab_rows = []
    for i, c in enumerate(cmp.classes_a):
        n_j = n_nj = 0
        for j, b in enumerate(cmp.classes_b):
            if b:
                n_j = int(cmp.counts[i, j])
            else:
                n_nj = int(cmp.counts[i, j])
        total = n_j + n_nj
        crosstab_rows.append((int(c), n_j, n_nj, total, n_j / total if total else 0.0))
    n_total = len(ids)
    n_junction = int(junction.sum())
    global_ratio = n_junction / n_total if n_total else 0.0

    per_k = []
    for r in kselect:
        entry = {"k": int(r["k"]), "inertia": float(r["inertia"]), "iterations": int(r["iterations"])}
        for key in ("max_dn", "max_dn_p", "min_dn", "min_dn_p", "max_w1", "min_w1"):
            entry[key] = float(r[key]) if r[key] else None
        entry["max_dn_pair"] = r["max_dn_pair"] or None
        entry["min_dn_pair"] = r["min_dn_pair"] or None
        per_k.append(entry)

    assessment = {
        "best_k": best_k,
        "clusters": _power_json(cmp.power_a),
        "junction_classes": _power_json(cmp.power_b),
        "crosstab": {
            "columns": ["cluster", "junction", "non_junction", "total", "junction_ratio"],
            "rows": [list(r) for r in crosstab_rows],
            "global_junction_ratio": global_ratio,
        },
    }
    files = {
        ECDF_CLUSTERS_CSV: csv_text(("cluster", "d_robot_m", "ecdf"), _ecdf_rows(cmp.ecdfs_a)),
        ECDF_JUNCTION_CSV: csv_text(("class", "d_robot_m", "ecdf"), _ecdf_rows(cmp.ecdfs_b)),
        SCATTER_CSV: csv_text(
            ("scenario_id", "alpha_rad", "d_robot_m", "cluster", "is_junction"),
            [(i, by_id[i]["alpha_rad"], by_id[i]["d_robot_m"], int(c), bool(j))
             for i, c, j in zip(ids, labels, junction)],
        ),
        CROSSTAB_CSV: csv_text(assessment["crosstab"]["columns"], crosstab_rows),
        ASSESS_JSON: dumps_json(assessment),
    }
    write_outputs(out, files)

    manifest = {}
    for name in sorted(p.name for p in out.iterdir() if p.is_file() and p.name != REPORT_JSON):
        manifest[name] = sha256_file(out / name)
    report = {
        "version": __version__,
        "counts": {
            "raw_scenarios": extract_summary["raw_scenarios"],
            "removed_by_filter": extract_summary["removed_by_filter"],
            "kept": extract_summary["kept"],
            "skipped_tracks": extract_summary["skipped_tracks"],
        },
        "per_k": per_k,
        "best_k": best_k,
        "discriminatory_power_available": meta["discriminatory_power_available"],
        "discriminative": meta["discriminative"],
        "junction": {
            "n_junction": n_junction,
            "n_total": n_total,
            "global_ratio": global_ratio,
            "crosstab": assessment["crosstab"]["rows"],
            "junction_partition_max_dn": None if cmp.power_b is None else cmp.power_b.max_dn,
            "cluster_partition_max_dn": None if cmp.power_a is None else cmp.power_a.max_dn,
        },
        "reference_magnitudes": REFERENCE_MAGNITUDES,
        "manifest": manifest,
    }
    write_outputs(out, {REPORT_JSON: dumps_json(report)})
    return report


def run(config: PipelineConfig) -> dict:
    config.require_seed()
    extract(config)
    cluster(config)
    return assess(config)


def config_dict(config: PipelineConfig) -> dict:
    return asdict(config)
