import json

import pytest

from pedinteract.cli import main
from pedinteract.io import read_csv, sha256_file

STAGE_FILES = ("scenarios.csv", "features.csv", "pca.csv", "labels.csv", "kselect.csv", "report.json")


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--n-per-kind", "8", "--junction-fraction", "0.5", "--seed", "5", "--output-dir", str(d)]) == 0
    return d


def flags(dataset, out, *extra):
    return ["--missions", str(dataset / "mission.json"), "--graph", str(dataset / "graph.json"),
            "--seed", "1", "--k-range", "2", "4", "--restarts", "3", "--output-dir", str(out), *extra]


def test_synth_files(dataset):
    header, rows = read_csv(dataset / "truth.csv")
    assert header == ["scenario_id", "kind", "is_junction", "alpha_true_rad", "d_robot_true_m"]
    assert len(rows) == 24 and sum(r["is_junction"] == "true" for r in rows) == 12


def test_synth_twice_same_hashes(dataset, tmp_path):
    main(["synth", "--n-per-kind", "8", "--junction-fraction", "0.5", "--seed", "5", "--output-dir", str(tmp_path)])
    for name in ("mission.json", "graph.json", "truth.csv"):
        assert sha256_file(tmp_path / name) == sha256_file(dataset / name)


def test_bad_fraction_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--junction-fraction", "1.5", "--seed", "1", "--output-dir", str(tmp_path)])
    assert exc.value.code == 2


def test_missing_seed_is_usage_error(dataset, tmp_path):
    args = flags(dataset, tmp_path)
    i = args.index("--seed")
    del args[i:i + 2]
    with pytest.raises(SystemExit) as exc:
        main(["run", *args])
    assert exc.value.code == 2


def test_missing_inputs_exit_one(tmp_path):
    assert main(["extract", "--missions", str(tmp_path / "nope.json"), "--graph", str(tmp_path / "g.json"),
                 "--output-dir", str(tmp_path / "o")]) == 1


def test_assess_without_upstream_names_stage(tmp_path, capsys):
    assert main(["assess", "--output-dir", str(tmp_path)]) == 1
    assert "extract" in capsys.readouterr().err


def test_cluster_with_too_few_rows(dataset, tmp_path):
    assert main(["extract", *flags(dataset, tmp_path)]) == 0
    assert main(["cluster", *flags(dataset, tmp_path)[:-2], "--k-range", "3", "40", "--output-dir", str(tmp_path)]) == 1


def test_rerun_identical_manifest(dataset, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", *flags(dataset, a)]) == 0
    assert main(["run", *flags(dataset, b)]) == 0
    ra = json.loads((a / "report.json").read_text())
    rb = json.loads((b / "report.json").read_text())
    assert ra["manifest"] == rb["manifest"]
    for name, digest in ra["manifest"].items():
        assert sha256_file(a / name) == digest


def test_stagewise_equals_run(dataset, tmp_path):
    whole, staged = tmp_path / "whole", tmp_path / "staged"
    assert main(["run", *flags(dataset, whole)]) == 0
    for stage in ("extract", "cluster", "assess"):
        assert main([stage, *flags(dataset, staged)]) == 0
    names = sorted(p.name for p in whole.iterdir())
    assert names == sorted(p.name for p in staged.iterdir())
    for name in names:
        assert (whole / name).read_bytes() == (staged / name).read_bytes(), name


def test_report_counts_identity(dataset, tmp_path):
    main(["run", *flags(dataset, tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text())
    c = report["counts"]
    assert c["raw_scenarios"] == c["removed_by_filter"] + c["kept"]
    assert [r["k"] for r in report["per_k"]] == [2, 3, 4]


def test_k_range_single(dataset, tmp_path):
    args = flags(dataset, tmp_path)
    i = args.index("--k-range")
    args[i + 1:i + 3] = ["1", "1"]
    assert main(["run", *args]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["best_k"] == 1 and report["discriminatory_power_available"] is False


def test_config_file(dataset, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "missions": [str(dataset / "mission.json")], "graph": str(dataset / "graph.json"),
        "seed": 1, "k_range": [2, 4], "restarts": 3,
    }))
    assert main(["run", "--config", str(cfg), "--output-dir", str(tmp_path / "a")]) == 0
    assert main(["run", *flags(dataset, tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", str(cfg), "--seed", "1", "--output-dir", str(tmp_path / "c")])
    assert exc.value.code == 2


def test_empty_mission(tmp_path, dataset):
    m = tmp_path / "empty.json"
    m.write_text(json.dumps({
        "mission_id": "e",
        "robot_poses": [{"t": 0, "lat": 50.9, "lon": 13.3, "heading": 0}, {"t": 1, "lat": 50.9, "lon": 13.3, "heading": 0}],
        "odometry": [], "tracks": [],
    }))
    with pytest.warns(UserWarning):
        rc = main(["extract", "--missions", str(m), "--graph", str(dataset / "graph.json"), "--output-dir", str(tmp_path / "o")])
    assert rc == 0
    header, rows = read_csv(tmp_path / "o" / "features.csv")
    assert rows == [] and header[0] == "scenario_id"


def test_exports_round_trip(dataset, tmp_path):
    main(["run", *flags(dataset, tmp_path)])
    _, feats = read_csv(tmp_path / "features.csv")
    _, scen = read_csv(tmp_path / "scenarios.csv")
    kept = [r["scenario_id"] for r in scen if r["kept"] == "true"]
    assert [r["scenario_id"] for r in feats] == kept
    header, pca = read_csv(tmp_path / "pca.csv")
    assert header[:3] == ["scenario_id", "pc0", "pc1"] and len(pca) == len(feats)
    for name in ("ecdf_clusters.csv", "ecdf_junction.csv", "scatter.csv", "crosstab.csv", "kselect.csv"):
        h, rows = read_csv(tmp_path / name)
        assert h and all(len(r) == len(h) for r in rows)
    json.loads((tmp_path / "assessment.json").read_text())
