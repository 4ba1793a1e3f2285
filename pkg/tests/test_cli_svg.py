import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from dikinlab.cli import run
from dikinlab.stability import fixed_point_r
from dikinlab.svg import SvgScatter, UsageError, read_points, render_scatter

SVG_NS = "{http://www.w3.org/2000/svg}"


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def circles(path):
    return ET.parse(path).getroot().findall(f".//{SVG_NS}circle")


def test_sweep_800_steps(tmp_path):
    out = tmp_path / "sweep.csv"
    code = run(["dikin-sweep", "--dim", "3", "--theta-min", "0.6", "--theta-max", "1.0", "--steps", "800",
                "--projection", "sorted-middle", "--seed", "7", "--out", str(out)])
    assert code == 0
    rows = rows_of(out)
    assert len(rows) - 1 >= 800
    thetas = sorted({float(r[0]) for r in rows[1:]})
    assert len(thetas) == 800 and thetas[0] == 0.6 and thetas[-1] < 1.0


def test_analytic_thresholds(capsys, tmp_path):
    assert run(["analytic", "--report", "thresholds", "--out", str(tmp_path / "t.csv")]) == 0
    text = capsys.readouterr().out
    vals = dict(r for r in csv.reader(text.splitlines()[1:]))
    assert abs(float(vals["period_two_onset"]) - 2 / 3) < 1e-10
    assert abs(float(vals["superstable_period_two"]) - (1 + 5 ** 0.5) / 4) < 1e-10
    assert abs(float(vals["period_four_onset"]) - 0.8499377796) <= 1e-8
    assert (tmp_path / "t.csv").read_text() == text


def test_attractor_command(tmp_path):
    out, svg = tmp_path / "y.csv", tmp_path / "y.svg"
    assert run(["attractor", "--lp", "castillo-barnes", "--theta", "0.94", "--out", str(out), "--svg", str(svg)]) == 0
    rows = rows_of(out)
    assert rows[0] == ["start", "iter", "gap", "y_1", "y_2"]
    assert len(rows) > 500
    assert all(float(r[2]) <= 1e-3 for r in rows[1:])
    assert len(circles(svg)) == len(rows) - 1


def test_analytic_reports(capsys):
    assert run(["analytic", "--report", "period-two", "--theta", "0.75"]) == 0
    vals = dict(csv.reader(capsys.readouterr().out.splitlines()[1:]))
    assert float(vals["r"]) == fixed_point_r(0.75)
    assert run(["analytic", "--report", "near-one", "--dim", "3", "--theta", "0.97"]) == 0
    vals = dict(csv.reader(capsys.readouterr().out.splitlines()[1:]))
    assert float(vals["ek_beta"]) < 1
    assert 0 < float(vals["cycle_y1"]) < float(vals["cycle_y2"]) < 1


def test_analytic_missing_theta_is_usage():
    assert run(["analytic", "--report", "period-two"]) == 2


def test_uncertifiable_orbit_is_numeric_failure(capsys):
    assert run(["analytic", "--report", "near-one", "--dim", "4", "--theta", "0.99"]) == 1
    assert "PreconditionViolated" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["dikin-sweep", "--theta-min", "0.6", "--theta-max", "0.7", "--steps", "2", "--out", "x.csv"],
    ["dikin-orbit", "--theta", "0.5", "--out", "x.csv"],
    ["dikin-orbit", "--theta", "0.5", "--seed", "1", "--out", "x.csv", "--bogus"],
    ["dikin-orbit", "--theta", "1.5", "--seed", "1", "--out", "x.csv"],
    ["dikin-orbit", "--theta", "0.5", "--w0", "1,-2", "--out", "x.csv"],
    ["dikin-orbit", "--theta", "0.5", "--seed", "1", "--projection", "fixed-index:9", "--out", "x.csv"],
    ["dikin-orbit", "--theta", "0.5", "--seed", "1", "--keep", "10", "--out", "x.csv"],
    ["dikin-sweep", "--theta-min", "0.6", "--theta-max", "1.2", "--steps", "2", "--seed", "1", "--out", "x.csv"],
    ["afs-solve", "--theta", "0.5", "--lp", "no-such-file.json", "--out", "x.csv"],
    ["render", "--csv", "missing.csv", "--x", "a", "--y", "b", "--svg", "x.svg"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 2


def test_orbit_command_and_svg(tmp_path, capsys):
    out, svg = tmp_path / "o.csv", tmp_path / "o.svg"
    assert run(["dikin-orbit", "--theta", "0.7", "--dim", "2", "--seed", "3", "--out", str(out), "--svg", str(svg)]) == 0
    assert "classification=periodic period=2" in capsys.readouterr().out
    rows = rows_of(out)
    assert rows[0] == ["index", "w_1", "w_2"] and len(rows) == 3
    assert len(circles(svg)) == 4


def test_afs_solve_success_and_failure(tmp_path):
    out = tmp_path / "t.csv"
    assert run(["afs-solve", "--theta", "0.5", "--out", str(out)]) == 0
    rows = rows_of(out)
    assert float(rows[-1][rows[0].index("gap")]) <= 1e-10
    assert run(["afs-solve", "--theta", "0.5", "--max-iters", "3", "--out", str(out)]) == 1
    assert len(rows_of(out)) == 5


def test_afs_sweep(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["afs-sweep", "--theta-min", "0.5", "--theta-max", "0.9", "--steps", "2",
                "--log10-epsilon", "-1000", "--max-iters", "100000", "--out", str(out)]) == 0
    rows = rows_of(out)
    assert [r[2] for r in rows[1:]] == ["converged-point", "periodic"]
    assert rows[2][3] == "2"


def test_outputs_byte_deterministic(tmp_path):
    def go(tag):
        out, svg = tmp_path / f"{tag}.csv", tmp_path / f"{tag}.svg"
        run(["dikin-sweep", "--theta-min", "0.8", "--theta-max", "0.9", "--steps", "10", "--seed", "5",
             "--seeds-per-theta", "2", "--burn-in", "5000", "--out", str(out), "--svg", str(svg)])
        return out.read_bytes(), svg.read_bytes()
    assert go("a") == go("b")


def test_sweep_csv_round_trips_through_render(tmp_path):
    out, svg = tmp_path / "s.csv", tmp_path / "f.svg"
    run(["dikin-sweep", "--theta-min", "0.6", "--theta-max", "0.9", "--steps", "6", "--seed", "1",
         "--burn-in", "5000", "--out", str(out)])
    n_values = sum(1 for r in rows_of(out)[1:] for v in r[4:] if v != "")
    assert run(["render", "--csv", str(out), "--x", "theta", "--y", "value_*", "--svg", str(svg)]) == 0
    assert len(circles(svg)) == n_values > 6


def test_render_empty_csv_gives_axes(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    assert render_scatter(empty, "x", "y", tmp_path / "e.svg") == 0
    root = ET.parse(tmp_path / "e.svg").getroot()
    assert root.tag == f"{SVG_NS}svg"
    assert len(root.findall(f".//{SVG_NS}line")) == 2
    assert not root.findall(f".//{SVG_NS}circle")


def test_render_header_only(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("x,y\n")
    assert render_scatter(p, "x", "y", tmp_path / "h.svg") == 0
    ET.parse(tmp_path / "h.svg")


def test_render_missing_column(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("x,y\n1,2\n")
    with pytest.raises(UsageError):
        read_points(p, "x", "z")
    assert run(["render", "--csv", str(p), "--x", "x", "--y", "z", "--svg", str(tmp_path / "a.svg")]) == 2


def test_svg_escapes_and_parses():
    svg = SvgScatter([(0.0, 1.0), (1.0, 0.0)], title="a < b & c", x_label="<x>").to_svg()
    root = ET.fromstring(svg.encode())
    texts = [t.text for t in root.iter(f"{SVG_NS}text")]
    assert "a < b & c" in texts and "<x>" in texts


def test_svg_constant_and_nonfinite(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("x,y\n1,5\n2,5\n3,nan\n4,\n")
    assert read_points(p, "x", "y") == [(1.0, 5.0), (2.0, 5.0)]
    svg = SvgScatter([(1.0, 5.0), (1.0, 5.0)]).to_svg()
    assert svg.count("<circle") == 2
    ET.fromstring(svg.encode())


def test_render_deterministic(tmp_path):
    p = tmp_path / "r.csv"
    rng = np.random.default_rng(0)
    p.write_text("x,y\n" + "".join(f"{a!r},{b!r}\n" for a, b in rng.uniform(size=(50, 2))))
    render_scatter(p, "x", "y", tmp_path / "1.svg")
    render_scatter(p, "x", "y", tmp_path / "2.svg")
    assert (tmp_path / "1.svg").read_bytes() == (tmp_path / "2.svg").read_bytes()
