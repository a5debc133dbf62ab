import json
import subprocess
import sys

import numpy as np
import pytest

from axialmap.cli import main
from conftest import jittered_city


@pytest.fixture
def city_file(tmp_path):
    rng = np.random.default_rng(2025)
    lines = jittered_city(rng, 7, 7, spacing=150.0, jitter=14.0)
    features = [{"type": "Feature", "properties": {},
                 "geometry": {"type": "LineString",
                              "coordinates": [[p.x, p.y] for p in line]}}
                for line in lines]
    path = tmp_path / "city.geojson"
    path.write_text(json.dumps({"type": "FeatureCollection",
                                "features": features}))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSubcommands:
    def test_topology(self, capsys, city_file, tmp_path):
        out_path = tmp_path / "arcs.geojson"
        code, out, err = run(capsys, ["topology", city_file,
                                      "--output", str(out_path)])
        assert code == 0
        assert "nodes:" in out and "arcs:" in out
        assert "stage planarize" in err
        assert out_path.exists()

    def test_streets_with_report(self, capsys, city_file, tmp_path):
        report = tmp_path / "bends.csv"
        out_path = tmp_path / "streets.geojson"
        code, out, err = run(capsys, ["streets", city_file,
                                      "--report", str(report),
                                      "--output", str(out_path)])
        assert code == 0
        assert "natural streets:" in out
        assert "mean(x)" in out
        header = report.read_text().splitlines()[0]
        assert header == "street_id,arc_count,length_m,closed,baseline_d_m,offset_x_m,ratio"
        assert out_path.exists()

    def test_axial_export_and_stage_report(self, capsys, city_file, tmp_path):
        out_path = tmp_path / "axial.geojson"
        code, out, err = run(capsys, ["axial", city_file,
                                      "--output", str(out_path)])
        assert code == 0
        assert "axial lines:" in out
        assert "mean(x)" in out and "min merge angle" in out
        for stage in ("planarize", "natural-streets", "thresholds", "chop", "merge"):
            assert "stage %s" % stage in err
        parsed = json.loads(out_path.read_text())
        assert parsed["features"]

    def test_axial_deterministic_output(self, capsys, city_file, tmp_path):
        a = tmp_path / "a.geojson"
        b = tmp_path / "b.geojson"
        assert run(capsys, ["axial", city_file, "--output", str(a)])[0] == 0
        assert run(capsys, ["axial", city_file, "--output", str(b)])[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_metrics_table(self, capsys, city_file, tmp_path):
        table = tmp_path / "metrics.csv"
        code, out, err = run(capsys, ["metrics", city_file,
                                      "--units", "streets",
                                      "--table", str(table)])
        assert code == 0
        assert "units:" in out and "breaks:" in out
        rows = table.read_text().splitlines()
        assert rows[0] == "unit_id,connectivity,local_integration,global_integration,class_index"
        assert len(rows) > 1

    def test_distfit_writes_figure_and_table(self, capsys, city_file, tmp_path):
        report = tmp_path / "dist.csv"
        code, out, err = run(capsys, ["distfit", city_file,
                                      "--output", str(report)])
        assert code == 0
        assert "x: mu=" in out and "x/d: mu=" in out
        assert report.exists()
        assert (tmp_path / "dist.png").exists()
        assert "figure written" in err

    def test_distfit_no_figure_flag(self, capsys, city_file, tmp_path):
        report = tmp_path / "dist.csv"
        code, out, err = run(capsys, ["distfit", city_file,
                                      "--output", str(report), "--no-figure"])
        assert code == 0
        assert not (tmp_path / "dist.png").exists()

    def test_correlate_end_to_end(self, capsys, city_file, tmp_path):
        # gate flows proportional to coordinates still give a valid report
        rng = np.random.default_rng(9)
        lines = json.loads(open(city_file).read())["features"]
        gates = ["x,y,flow"]
        for k in range(12):
            coords = lines[k % len(lines)]["geometry"]["coordinates"]
            mx = (coords[0][0] + coords[1][0]) / 2
            my = (coords[0][1] + coords[1][1]) / 2
            gates.append("%.3f,%.3f,%d" % (mx + 1.0, my + 1.0, rng.integers(10, 500)))
        gate_path = tmp_path / "gates.csv"
        gate_path.write_text("\n".join(gates) + "\n")
        report = tmp_path / "corr.csv"
        code, out, err = run(capsys, ["correlate", city_file,
                                      "--gates", str(gate_path),
                                      "--output", str(report)])
        assert code == 0
        assert "r_squared:" in out
        assert "t_statistic:" in out
        assert "significant_at_5pct:" in out
        assert report.exists()
        assert (tmp_path / "corr.png").exists()

    def test_config_file_flag(self, capsys, city_file, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("join_threshold_degrees=30\nclass_count=4\n")
        code, out, err = run(capsys, ["streets", city_file,
                                      "--config", str(conf)])
        assert code == 0


class TestExitCodes:
    def test_unknown_flag_usage_error(self, capsys, city_file):
        code, out, err = run(capsys, ["axial", city_file, "--bogus"])
        assert code == 1
        assert "usage error" in err

    def test_bad_flag_value_usage_error(self, capsys, city_file):
        code, out, err = run(capsys, ["axial", city_file,
                                      "--join-threshold", "not-a-number"])
        assert code == 1

    def test_invalid_config_value_usage_error(self, capsys, city_file):
        code, out, err = run(capsys, ["axial", city_file,
                                      "--join-threshold", "400"])
        assert code == 1

    def test_missing_input_file(self, capsys):
        code, out, err = run(capsys, ["axial", "/does/not/exist.geojson"])
        assert code == 2
        assert "input error" in err

    def test_bad_gate_table(self, capsys, city_file, tmp_path):
        gate_path = tmp_path / "gates.csv"
        gate_path.write_text("a,b\n1,2\n")
        code, out, err = run(capsys, ["correlate", city_file,
                                      "--gates", str(gate_path)])
        assert code == 2

    def test_module_entry_point(self, city_file, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "axialmap",
                               "topology", city_file],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "nodes:" in proc.stdout
