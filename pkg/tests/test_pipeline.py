import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from kerrtda import cli
from kerrtda.config import build_config, dump_config, parse_config_text
from kerrtda.errors import ConfigError
from kerrtda.export import (diagram_csv, export_artifacts, grid_csv, heatmap_svg,
                            diagram_svg, read_diagram_csv, read_grid_csv,
                            read_series_csv, series_csv)
from kerrtda.homology import PersistenceDiagram
from kerrtda.pipeline import (CHAOTIC_POINTS, REGULAR_POINTS, PhaseDiagramGrid,
                              SweepConfig, cell_seed, preset, robustness_study,
                              run_cell, sweep_phase_diagram)
from kerrtda.series import TimeSeries

SVG = "{http://www.w3.org/2000/svg}"

# short windows keep these plumbing tests fast; physics lives in the acceptance suite
FAST = dict(transient_periods=20.0, end_periods=80.0, subsample=120)


def fast_config(**kw):
    return SweepConfig(**{**FAST, **kw})


# configuration

def test_config_validation():
    with pytest.raises(ConfigError):
        SweepConfig(mode="quantum")
    with pytest.raises(ConfigError):
        SweepConfig(a_count=0)
    with pytest.raises(ConfigError):
        SweepConfig(a_max=6.0)
    SweepConfig(a_max=6.0, check_ranges=False)
    with pytest.raises(ConfigError):
        SweepConfig(transient_periods=10.0, end_periods=10.0)
    with pytest.raises(ConfigError):
        SweepConfig(samples_per_period=7)
    with pytest.raises(ConfigError):
        preset("laptop")


def test_presets():
    desk, full = preset("desk"), preset("full")
    assert (desk.a_count, desk.t_count) == (8, 8)
    assert (desk.transient_periods, desk.end_periods) == (100.0, 300.0)
    assert (full.a_count, full.t_count, full.n_trunc) == (50, 50, 300)
    assert desk.a_values[-1] == 5.0 and desk.t_values[-1] == 50.0


def test_config_grammar_and_round_trip():
    text = """
    # desk run
    preset = desk
    mode = quantum-x   # trailing comment
    n-trunc = 200
    tau = auto
    d = 3
    conjugate_nonlinearity = off
    """
    cfg = build_config(parse_config_text(text))
    assert cfg.mode == "quantum-x" and cfg.n_trunc == 200
    assert cfg.tau is None and cfg.d == 3 and cfg.conjugate_nonlinearity is False
    assert cfg.a_count == 8
    assert build_config(parse_config_text(dump_config(cfg))) == cfg


def test_flags_override_file():
    file_values = parse_config_text("seed = 3\nmode = classical\n")
    cfg = build_config(file_values, {"seed": "11", "mode": "quantum-x"})
    assert cfg.seed == 11 and cfg.mode == "quantum-x"


@pytest.mark.parametrize("text", ["no equals sign", "= 3", "bogus = 1", "a-count = x",
                                  "check_ranges = maybe"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        build_config(parse_config_text(text))


def test_cell_seed_stable_and_distinct():
    seeds = [cell_seed(0, k) for k in range(100)]
    assert len(set(seeds)) == 100
    assert cell_seed(5, 3) == cell_seed(5, 3) and cell_seed(5, 3) != cell_seed(6, 3)


# cells and sweeps

def test_one_by_one_grid_equals_run_cell():
    cfg = fast_config(mode="quantum-x", n_trunc=80, a_min=1.0, a_max=1.0, a_count=1,
                      t_min=8.0, t_max=8.0, t_count=1, seed=4)
    grid = sweep_phase_diagram(cfg)
    cell = run_cell(1.0, 8.0, cfg, seed=cell_seed(4, 0))
    assert grid.l_avg.shape == (1, 1)
    assert grid.l_avg[0, 0] == cell.l_avg
    assert diagram_csv(grid.cell(0, 0).diagram) == diagram_csv(cell.diagram)


def test_sweep_cells_are_independent():
    cfg = fast_config(mode="quantum-x", n_trunc=80, a_min=0.5, a_max=1.0, a_count=2,
                      t_min=6.0, t_max=8.0, t_count=2, seed=9)
    grid = sweep_phase_diagram(cfg)
    i, j = 1, 0
    alone = run_cell(0.5, 8.0, cfg, seed=cell_seed(9, i * 2 + j))
    assert grid.cell(i, j).l_avg == alone.l_avg
    assert (grid.cell(i, j).amplitude, grid.cell(i, j).period) == (0.5, 8.0)


@pytest.mark.parametrize("mode", ["classical", "quantum-x", "quantum-photon-count"])
def test_undriven_column_has_no_cycles(mode):
    cfg = fast_config(mode=mode, n_trunc=20, a_min=0.0, a_max=0.0, a_count=1,
                      t_min=5.0, t_max=20.0, t_count=3, check_ranges=False)
    grid = sweep_phase_diagram(cfg)
    assert grid.failures == 0
    assert np.all(grid.l_avg < 1e-12)


def test_diagnostics_report_hyperparameters():
    cell = run_cell(1.0, 8.0, fast_config())
    d = cell.diagnostics
    assert {"tau", "d", "points", "tau_time", "seed"} <= set(d)
    assert d["d"] >= 2 and d["tau_source"] == "mutual-information"
    fixed = run_cell(1.0, 8.0, fast_config(tau=5, d=3))
    assert (fixed.diagnostics["tau"], fixed.diagnostics["d"]) == (5, 3)
    assert fixed.diagnostics["tau_source"] == "fixed"


def test_truncation_breach_is_flagged_not_raised():
    cfg = fast_config(mode="quantum-x", n_trunc=12, a_min=4.5, a_max=4.5, a_count=1,
                      t_min=8.0, t_max=8.0, t_count=1)
    grid = sweep_phase_diagram(cfg)
    assert grid.status[0, 0] == "truncation-breach" and grid.failures == 1
    assert math.isnan(grid.l_avg[0, 0])
    assert grid_csv(grid).splitlines()[1].endswith(",,truncation-breach")


def test_trajectory_average():
    cfg = fast_config(mode="quantum-x", n_trunc=80, trajectories=3)
    cell = run_cell(1.0, 8.0, cfg, seed=2)
    runs = cell.diagnostics["l_avg_runs"]
    assert len(runs) == 3 and cell.l_avg == pytest.approx(np.mean(runs))


def test_robustness_single_point_has_zero_std():
    rows = robustness_study(fast_config(), [REGULAR_POINTS[0]], [CHAOTIC_POINTS[0]],
                            tau_values=[3, 7], d_values=[2, 3])
    assert [(r.parameter, r.value) for r in rows] == [("tau", 3), ("tau", 7), ("d", 2), ("d", 3)]
    assert all(r.regular_std == 0.0 and r.chaotic_std == 0.0 for r in rows)
    with pytest.raises(ConfigError):
        robustness_study(fast_config(), [], [CHAOTIC_POINTS[0]])


# export

def test_diagram_row_format():
    dgm = PersistenceDiagram.from_pairs({1: [(1.0, math.sqrt(2))]})
    assert diagram_csv(dgm) == "dim,birth,death\n1,1.0,1.4142135623730951\n"
    inf = PersistenceDiagram.from_pairs({0: [(0.0, math.inf)]})
    assert diagram_csv(inf).splitlines()[1] == "0,0.0,inf"


def test_empty_grid_is_header_only():
    empty = PhaseDiagramGrid(np.array([]), np.array([]), np.zeros((0, 0)),
                             np.zeros((0, 0), dtype=object))
    assert grid_csv(empty) == "A,T,L_avg,status\n"


def _toy_grid():
    a, t = np.array([1.0, 2.0, 3.0]), np.array([5.0, 10.0])
    l_avg = np.array([[0.1, 0.2, np.nan], [0.3, 0.4, 0.5]])
    status = np.array([["ok", "ok", "diverged"], ["ok"] * 3], dtype=object)
    return PhaseDiagramGrid(a, t, l_avg, status)


def test_heatmap_svg_structure():
    root = ET.fromstring(heatmap_svg(_toy_grid()))
    assert len(root.findall(f"{SVG}rect")) == 6
    labels = [t.text for t in root.iter(f"{SVG}text")]
    assert "A" in labels and "T" in labels


def test_diagram_svg_has_diagonal():
    dgm = PersistenceDiagram.from_pairs({0: [(0.0, 1.0), (0.0, math.inf)],
                                        1: [(1.0, 1.5)]})
    root = ET.fromstring(diagram_svg(dgm))
    assert len(root.findall(f"{SVG}circle")) == 3
    diag = root.findall(f"{SVG}line")[0]
    assert float(diag.get("x1")) - float(diag.get("y2")) == pytest.approx(
        float(diag.get("x2")) - float(diag.get("y1")))


def test_csv_round_trips(tmp_path):
    grid = _toy_grid()
    (tmp_path / "g.csv").write_text(grid_csv(grid))
    back = read_grid_csv(tmp_path / "g.csv")
    np.testing.assert_array_equal(back.l_avg, grid.l_avg)
    assert (back.status == grid.status).all()
    series = TimeSeries(0.0, 0.1, np.array([0.1, 1 / 3, -2e-17]))
    (tmp_path / "s.csv").write_text(series_csv(series))
    assert np.array_equal(read_series_csv(tmp_path / "s.csv").values, series.values)
    dgm = PersistenceDiagram.from_pairs({0: [(0.0, math.inf)], 1: [(0.1, 0.7)]})
    (tmp_path / "d.csv").write_text(diagram_csv(dgm))
    assert diagram_csv(read_diagram_csv(tmp_path / "d.csv")) == diagram_csv(dgm)


def test_reruns_are_byte_identical(tmp_path):
    cfg = fast_config(mode="quantum-x", n_trunc=80, a_min=0.5, a_max=1.0, a_count=2,
                      t_min=8.0, t_max=8.0, t_count=1, seed=21)
    first = export_artifacts(sweep_phase_diagram(cfg), tmp_path / "a", config=cfg)
    second = export_artifacts(sweep_phase_diagram(cfg), tmp_path / "b", config=cfg)
    assert [p.name for p in first] == [p.name for p in second]
    assert any(p.name.startswith("grid-" + cfg.digest()) for p in first)
    for p, q in zip(first, second):
        assert p.read_bytes() == q.read_bytes()


def test_export_io_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match=str(blocker)):
        export_artifacts(_toy_grid(), blocker / "sub")


# command line

def test_cli_cell_and_export(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["cell", "-A", "1", "-T", "8", "--out", str(out),
                   "--set", "transient_periods=20", "--set", "end_periods=80"])
    assert rc == 0
    diagrams = sorted(out.glob("diagram-*.csv"))
    assert diagrams and (out / diagrams[0].name.replace(".csv", ".svg")).exists()
    assert cli.main(["export", str(diagrams[0]), "--out", str(tmp_path / "svg")]) == 0
    ET.parse(tmp_path / "svg" / (diagrams[0].stem + ".svg"))


def test_cli_simulate_embed_ph(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["classical-sim", "-A", "1", "-T", "8", "--periods", "60",
                     "--out", str(out)]) == 0
    series = next(out.glob("series-*-re_xi.csv"))
    assert cli.main(["embed", str(series), "--tau", "4", "--dim", "2", "--out", str(out)]) == 0
    cloud = next(out.glob("cloud-*.csv"))
    assert cli.main(["ph", str(cloud), "--subsample", "100", "--out", str(out)]) == 0
    assert list(out.glob("diagram-*.csv"))


def test_cli_sweep_exit_codes(tmp_path):
    ok = cli.main(["sweep", "--out", str(tmp_path / "a"), "--set", "a_count=1",
                   "--set", "t_count=1", "--set", "a_min=1", "--set", "a_max=1",
                   "--set", "t_min=8", "--set", "t_max=8",
                   "--set", "transient_periods=20", "--set", "end_periods=60"])
    assert ok == 0
    assert len(read_grid_csv(next((tmp_path / "a").glob("grid-*.csv"))).cells) == 0
    flagged = cli.main(["sweep", "--mode", "quantum-x", "--out", str(tmp_path / "b"),
                        "--set", "n_trunc=12", "--set", "a_count=1", "--set", "t_count=1",
                        "--set", "a_min=4.5", "--set", "a_max=4.5", "--set", "t_min=8",
                        "--set", "t_max=8", "--set", "transient_periods=2",
                        "--set", "end_periods=6"])
    assert flagged == 2
    assert list((tmp_path / "b").glob("grid-*.csv"))


def test_cli_config_errors(tmp_path, capsys):
    assert cli.main(["cell", "-A", "1", "-T", "8", "--set", "bogus=1"]) == 1
    assert cli.main(["cell", "-A", "1", "-T", "8", "--config",
                     str(tmp_path / "missing.cfg")]) == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["cell", "-A", "1", "-T", "8", "--mode", "quantum"])
    assert exc.value.code == 1
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 3\nend_periods = 60\ntransient_periods = 20\n")
    assert cli.main(["cell", "-A", "1", "-T", "8", "--config", str(cfg), "--seed", "5",
                     "--out", str(tmp_path / "o")]) == 0
    assert '"seed": 5' in next((tmp_path / "o").glob("cell-*.json")).read_text()
