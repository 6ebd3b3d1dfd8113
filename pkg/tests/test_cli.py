import json

import numpy as np
import pytest
from click.testing import CliRunner

from rbu import parse_csv, parse_keel
from rbu.cli import main
from rbu.grids import preset_grids

KEEL_IMBALANCED_HEADER = (
    "@relation toy\n"
    "@attribute x real\n"
    "@attribute y real\n"
    "@attribute class {negative, positive}\n"
    "@data\n"
)


def keel_blob_file(tmp_path, name="toy.dat", n_majority=30, n_minority=10, seed=5):
    rng = np.random.default_rng(seed)
    lines = [KEEL_IMBALANCED_HEADER.rstrip("\n")]
    for _ in range(n_majority):
        x, y = rng.normal(0.0, 1.0, 2)
        lines.append(f"{x:.6f}, {y:.6f}, negative")
    for _ in range(n_minority):
        x, y = rng.normal(3.0, 1.0, 2)
        lines.append(f"{x:.6f}, {y:.6f}, positive")
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def runner():
    return CliRunner()


class TestResample:
    def test_rbu_ratio_one_balances(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        out = tmp_path / "out.dat"
        result = runner.invoke(
            main,
            ["resample", str(data), "--method", "rbu", "--gamma", "0.1",
             "--ratio", "1.0", "-o", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert "majority: 30 -> 10" in result.output
        ds = parse_keel(out.read_text())
        labels = list(ds.labels)
        assert labels.count("negative") == 10 and labels.count("positive") == 10

    def test_unknown_method_exits_2_with_usage(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        result = runner.invoke(main, ["resample", str(data), "--method", "bogus"])
        assert result.exit_code == 2
        assert "Usage" in result.output or "Usage" in (result.stderr or "")

    def test_same_seed_byte_identical(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        out1, out2 = tmp_path / "a.dat", tmp_path / "b.dat"
        for out in (out1, out2):
            result = runner.invoke(
                main,
                ["resample", str(data), "--method", "rus", "--ratio", "1.0",
                 "--seed", "7", "-o", str(out)],
            )
            assert result.exit_code == 0, result.output
        assert out1.read_bytes() == out2.read_bytes()

    def test_surviving_rows_keep_exact_values(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        out = tmp_path / "out.dat"
        runner.invoke(
            main,
            ["resample", str(data), "--method", "tomek", "-o", str(out)],
        )
        source = parse_keel(data.read_text())
        emitted = parse_keel(out.read_text())
        original_rows = {
            (tuple(source.features[i].astype(float)), source.labels[i])
            for i in range(source.n)
        }
        for i in range(emitted.n):
            row = (tuple(emitted.features[i].astype(float)), emitted.labels[i])
            assert row in original_rows  # exact float round trip, no synthesis

    def test_smote_appends_synthetic_minority(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        out = tmp_path / "out.dat"
        result = runner.invoke(
            main,
            ["resample", str(data), "--method", "smote", "--ratio", "1.0",
             "--k", "3", "-o", str(out)],
        )
        assert result.exit_code == 0, result.output
        ds = parse_keel(out.read_text())
        labels = list(ds.labels)
        assert labels.count("positive") == 30 and labels.count("negative") == 30

    def test_csv_format_autodetected(self, runner, tmp_path):
        rng = np.random.default_rng(1)
        rows = ["x,y,class"]
        rows += [f"{rng.normal():.4f},{rng.normal():.4f},neg" for _ in range(20)]
        rows += [f"{rng.normal(3):.4f},{rng.normal(3):.4f},pos" for _ in range(8)]
        path = tmp_path / "d.csv"
        path.write_text("\n".join(rows) + "\n")
        out = tmp_path / "out.csv"
        result = runner.invoke(
            main, ["resample", str(path), "--method", "rus", "--ratio", "1.0", "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        ds = parse_csv(out.read_text())
        assert list(ds.labels).count("neg") == 8

    def test_unknown_extension_needs_format_flag(self, runner, tmp_path):
        path = tmp_path / "d.binary"
        path.write_text("x,y,class\n1,2,a\n3,4,b\n")
        result = runner.invoke(main, ["resample", str(path), "--method", "none"])
        assert result.exit_code == 2

    def test_parse_error_exits_1(self, runner, tmp_path):
        path = tmp_path / "broken.dat"
        path.write_text("@relation x\n@attribute a real\n@attribute c {p, n}\n@data\n1\n")
        result = runner.invoke(main, ["resample", str(path), "--method", "none"])
        assert result.exit_code == 1

    def test_io_error_exits_3(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        result = runner.invoke(
            main,
            ["resample", str(data), "--method", "none", "-o", "/nonexistent/dir/out.dat"],
        )
        assert result.exit_code == 3

    def test_env_seed_respected_and_flag_wins(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        out_env = tmp_path / "env.dat"
        out_flag = tmp_path / "flag.dat"
        out_pinned = tmp_path / "pin.dat"
        runner.invoke(
            main, ["resample", str(data), "--method", "rus", "--ratio", "1.0", "-o", str(out_env)],
            env={"RR_SEED": "1234"},
        )
        runner.invoke(
            main,
            ["resample", str(data), "--method", "rus", "--ratio", "1.0",
             "--seed", "1234", "-o", str(out_pinned)],
        )
        runner.invoke(
            main,
            ["resample", str(data), "--method", "rus", "--ratio", "1.0",
             "--seed", "9", "-o", str(out_flag)],
            env={"RR_SEED": "1234"},
        )
        assert out_env.read_bytes() == out_pinned.read_bytes()
        flag_vs_pinned_differ = out_flag.read_bytes() != out_pinned.read_bytes()
        assert flag_vs_pinned_differ  # the explicit flag overrode the env seed


class TestTypify:
    def test_lonely_minority_point_is_outlier(self, runner, tmp_path):
        lines = [KEEL_IMBALANCED_HEADER.rstrip("\n")]
        for i in range(8):
            lines.append(f"{i / 10:.2f}, 0.0, negative")
        lines.append("0.35, 0.01, positive")
        path = tmp_path / "t.dat"
        path.write_text("\n".join(lines) + "\n")
        result = runner.invoke(main, ["typify", str(path)])
        assert result.exit_code == 0, result.output
        assert result.output.strip().splitlines()[-1] == "0.00 0.00 0.00 100.00"

    def test_tight_minority_cluster_is_safe(self, runner, tmp_path):
        lines = [KEEL_IMBALANCED_HEADER.rstrip("\n")]
        rng = np.random.default_rng(2)
        for _ in range(10):
            x, y = rng.normal(50.0, 0.5, 2)
            lines.append(f"{x:.3f}, {y:.3f}, negative")
        for a in np.linspace(0, 2 * np.pi, 6, endpoint=False):
            lines.append(f"{0.01 * np.cos(a):.6f}, {0.01 * np.sin(a):.6f}, positive")
        path = tmp_path / "t.dat"
        path.write_text("\n".join(lines) + "\n")
        result = runner.invoke(main, ["typify", str(path)])
        assert result.exit_code == 0, result.output
        assert result.output.strip().splitlines()[-1] == "100.00 0.00 0.00 0.00"

    def test_per_object_csv(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        per = tmp_path / "types.csv"
        result = runner.invoke(main, ["typify", str(data), "--per-object", str(per)])
        assert result.exit_code == 0
        lines = per.read_text().strip().splitlines()
        assert lines[0] == "row,category"
        assert len(lines) == 1 + 10


class TestStats:
    def test_summary_line(self, runner, tmp_path):
        data = keel_blob_file(tmp_path, n_majority=30, n_minority=10)
        result = runner.invoke(main, ["stats", str(data)])
        assert result.exit_code == 0
        line = result.output.strip()
        assert line.startswith("ir=3.00 samples=40 features=2 safe=")


class TestPotentialGrid:
    def test_grid_cell_count(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        out = tmp_path / "grid.csv"
        result = runner.invoke(
            main,
            ["potential-grid", str(data), "--gamma", "1.0", "--resolution", "50",
             "-o", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert len(out.read_text().strip().splitlines()) == 1 + 2500

    def test_resolution_one_exits_2(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        result = runner.invoke(
            main, ["potential-grid", str(data), "--gamma", "1.0", "--resolution", "1"]
        )
        assert result.exit_code == 2

    def test_non_2d_exits_2(self, runner, tmp_path):
        path = tmp_path / "d3.csv"
        path.write_text("a,b,c,class\n1,2,3,x\n4,5,6,y\n7,8,9,x\n")
        result = runner.invoke(main, ["potential-grid", str(path), "--gamma", "1.0"])
        assert result.exit_code == 2

    def test_class_swap_negates_cells(self, runner, tmp_path):
        data = keel_blob_file(tmp_path, n_majority=10, n_minority=10, seed=9)
        args = ["potential-grid", str(data), "--gamma", "2.0", "--resolution", "6",
                "--bounds", "-2,5,-2,5"]
        one = runner.invoke(main, args + ["--minority-label", "positive"])
        other = runner.invoke(main, args + ["--minority-label", "negative"])
        assert one.exit_code == 0 and other.exit_code == 0
        a = np.array([[float(v) for v in line.split(",")]
                      for line in one.output.strip().splitlines()[1:]])
        b = np.array([[float(v) for v in line.split(",")]
                      for line in other.output.strip().splitlines()[1:]])
        np.testing.assert_allclose(a[:, 2], -b[:, 2], atol=1e-12)

    def test_json_output(self, runner, tmp_path):
        data = keel_blob_file(tmp_path)
        out = tmp_path / "grid.json"
        result = runner.invoke(
            main,
            ["potential-grid", str(data), "--gamma", "1.0", "--resolution", "4",
             "-o", str(out)],
        )
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["resolution"] == 4
        assert len(doc["values"]) == 4


class TestEvaluateAndSweep:
    def test_evaluate_none_and_rus_knn(self, runner, tmp_path):
        data = keel_blob_file(tmp_path, n_majority=36, n_minority=12)
        out = tmp_path / "rep"
        result = runner.invoke(
            main,
            ["evaluate", str(data), "--method", "none", "--method", "rus",
             "--classifier", "knn", "--seed", "3", "-o", str(out)],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads((tmp_path / "rep.json").read_text())
        assert len(doc["runs"]) == 20
        assert (tmp_path / "rep.csv").exists()

    def test_sweep_with_grid_file(self, runner, tmp_path):
        data = keel_blob_file(tmp_path, n_majority=36, n_minority=12)
        grid_file = tmp_path / "grid.json"
        grid_file.write_text(json.dumps({
            "methods": [
                {"name": "none", "method": "none"},
                {"name": "rbu", "method": "rbu",
                 "grid": {"gamma": [0.1, 1.0], "ratio": [1.0]}},
            ]
        }))
        out = tmp_path / "rep"
        result = runner.invoke(
            main,
            ["sweep", str(data), "--grid-file", str(grid_file),
             "--classifier", "gnb", "--seed", "3", "-o", str(out)],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads((tmp_path / "rep.json").read_text())
        assert doc["methods"] == ["none", "rbu"]
        specs = {r["spec"] for r in doc["runs"] if r["method"] == "rbu"}
        assert specs <= {"rbu(gamma=0.1, ratio=1.0)", "rbu(gamma=1.0, ratio=1.0)"}

    def test_sweep_unknown_filter_method(self, runner, tmp_path):
        data = keel_blob_file(tmp_path, n_majority=36, n_minority=12)
        result = runner.invoke(
            main, ["sweep", str(data), "--method", "madeup", "--seed", "3"]
        )
        assert result.exit_code == 2

    def test_directory_input(self, runner, tmp_path):
        folder = tmp_path / "data"
        folder.mkdir()
        keel_blob_file(folder, "a.dat", 30, 10, seed=1)
        keel_blob_file(folder, "b.dat", 30, 10, seed=2)
        out = tmp_path / "rep"
        result = runner.invoke(
            main,
            ["evaluate", str(folder), "--method", "none", "--classifier", "knn",
             "--seed", "3", "-o", str(out)],
        )
        assert result.exit_code == 0, result.output
        doc = json.loads((tmp_path / "rep.json").read_text())
        assert doc["datasets"] == ["a", "b"]


class TestPresetGrids:
    def test_final_preset_matches_published_grids(self):
        grids = preset_grids("paper-final")
        rbu_grid = grids["rbu"]
        assert len(rbu_grid) == 12
        gammas = sorted({s.params["gamma"] for s in rbu_grid})
        ratios = sorted({s.params["ratio"] for s in rbu_grid})
        assert gammas == [0.01, 0.1, 1.0, 10.0]
        assert ratios == [0.5, 0.75, 1.0]
        assert {s.params["k"] for s in grids["smote"]} == {1, 3, 5, 7, 9}
        assert {s.params["k"] for s in grids["enn"]} == {1, 3, 5, 7}
        assert len(grids["stl"]) == 15 and len(grids["senn"]) == 15
        assert set(grids) == {
            "none", "rbu", "rus", "ros", "smote", "enn", "renn", "tomek", "nm",
            "stl", "senn",
        }

    def test_prelim_preset_matches_published_grids(self):
        grids = preset_grids("paper-prelim")
        rbu_grid = grids["rbu"]
        assert len(rbu_grid) == 36
        assert sorted({s.params["gamma"] for s in rbu_grid}) == [
            0.001, 0.01, 0.1, 1.0, 10.0, 100.0,
        ]
        assert sorted({s.params["ratio"] for s in rbu_grid}) == [
            0.0, 0.2, 0.4, 0.6, 0.8, 1.0,
        ]
