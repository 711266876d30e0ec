"""Command line entry point: ``pedinteract {synth,extract,cluster,assess,run}``.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import pipeline
from .errors import InvalidInputError, PipelineError
from .io import csv_text, dumps_json, write_outputs
from .roadgraph import graph_to_document
from .synth import generate_dataset

log = logging.getLogger("pedinteract")

MISSION_FILE = "mission.json"
GRAPH_FILE = "graph.json"
TRUTH_FILE = "truth.csv"


def _fraction(s: str) -> float:
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{s} is not within [0, 1]")
    return v


def _non_negative(s: str) -> float:
    v = float(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{s} must be >= 0")
    return v


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{s} must be >= 1")
    return v


def _origin(s: str):
    try:
        lat, lon = (float(p) for p in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("origin must be LAT,LON") from None
    return lat, lon


def _pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with PipelineConfig fields; flags override it")
    p.add_argument("--missions", nargs="+", help="mission log JSON file(s)")
    p.add_argument("--graph", help="road graph JSON/JSONL file")
    p.add_argument("--origin", type=_origin, help="projection origin override LAT,LON")
    p.add_argument("--r-threshold", dest="r_threshold", type=float)
    p.add_argument("--junction-threshold", dest="junction_threshold_m", type=float)
    p.add_argument("--k-range", dest="k_range", type=int, nargs=2, metavar=("K_MIN", "K_MAX"))
    p.add_argument("--pca-components", dest="pca_components", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=_positive_int)
    p.add_argument("--filter-mode", dest="filter_mode", choices=("both", "pedestrian", "robot"))
    p.add_argument("--omega-mode", dest="omega_mode", choices=("abs", "signed"))
    p.add_argument("--aggregate", choices=("max", "min"), help="per-k KS aggregate used to choose k")
    p.add_argument("--output-dir", dest="output_dir", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pedinteract", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic mission, graph and ground truth")
    s.add_argument("--n-per-kind", type=_positive_int, default=50)
    s.add_argument("--junction-fraction", type=_fraction, default=0.5)
    s.add_argument("--noise-sigma", type=_non_negative, default=0.0)
    s.add_argument("--n-circular", type=int, default=0, help="extra pedestrians walking circular arcs")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--output-dir", required=True)

    for name, text in (
        ("extract", "segment scenarios and build feature vectors"),
        ("cluster", "z-score, PCA and K-means over the k range"),
        ("assess", "ECDFs, junction cross-tab and run report"),
        ("run", "extract, cluster and assess in sequence"),
    ):
        _pipeline_flags(sub.add_parser(name, help=text))
    return parser


def load_config(args: argparse.Namespace) -> pipeline.PipelineConfig:
    values = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(values, dict):
            raise InvalidInputError("config file must contain an object")
        if isinstance(values.get("origin"), dict):
            values["origin"] = (values["origin"]["lat"], values["origin"]["lon"])
    known = {f.name for f in fields(pipeline.PipelineConfig)}
    unknown = set(values) - known
    if unknown:
        raise InvalidInputError(f"unknown config field(s): {sorted(unknown)}")
    for name in known:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return pipeline.PipelineConfig(**values)


def cmd_synth(args) -> int:
    ds = generate_dataset(args.n_per_kind, args.junction_fraction, args.noise_sigma, args.seed,
                          n_circular=args.n_circular)
    truth = csv_text(
        ("scenario_id", "kind", "is_junction", "alpha_true_rad", "d_robot_true_m"),
        [(t.scenario_id, t.kind, t.is_junction, t.alpha_rad, t.d_robot_m) for t in ds.truth],
    )
    write_outputs(args.output_dir, {
        MISSION_FILE: dumps_json(ds.mission_doc),
        GRAPH_FILE: dumps_json(graph_to_document(ds.graph)),
        TRUTH_FILE: truth,
    })
    print(f"wrote {len(ds.truth)} encounters to {args.output_dir}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return cmd_synth(args)
        try:
            config = load_config(args)
            if args.command in ("cluster", "run"):
                config.require_seed()
        except (InvalidInputError, TypeError) as exc:
            parser.error(str(exc))
        stage = {"extract": pipeline.extract, "cluster": pipeline.cluster,
                 "assess": pipeline.assess, "run": pipeline.run}[args.command]
        result = stage(config)
        if args.command in ("assess", "run"):
            print(f"best_k={result['best_k']} counts={result['counts']}")
        elif args.command == "cluster":
            print(f"best_k={result['best_k']}")
        else:
            print(f"counts={result}")
        return 0
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
