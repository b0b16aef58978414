"""CSV and SVG output.

CSV floats are written with ``repr`` so they round-trip exactly; essential
features are written as ``inf`` and flagged grid cells leave ``L_avg``
empty. SVGs are built with ElementTree, so they are always well-formed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .homology import PersistenceDiagram
from .pipeline import CellResult, PhaseDiagramGrid, RobustnessRow, SweepConfig
from .series import TimeSeries

# linear interpolation between these stops (low -> high)
COLOR_STOPS = ((68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37))
FLAGGED_COLOR = "#bbbbbb"


def fmt_float(x) -> str:
    """Round-trip decimal; ``inf`` stays ``inf``, NaN becomes empty."""
    x = float(x)
    return repr(x) if math.isfinite(x) or math.isinf(x) else ""


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def grid_csv(grid: PhaseDiagramGrid) -> str:
    rows = []
    for i, t in enumerate(grid.t_values):
        for j, a in enumerate(grid.a_values):
            ok = grid.status[i, j] == "ok"
            rows.append([fmt_float(a), fmt_float(t), fmt_float(grid.l_avg[i, j]) if ok else "",
                         grid.status[i, j]])
    return csv_text(["A", "T", "L_avg", "status"], rows)


def diagram_csv(diagram: PersistenceDiagram) -> str:
    return csv_text(["dim", "birth", "death"],
                    [[d, fmt_float(b), fmt_float(e)] for d, b, e in diagram.rows()])


def series_csv(series: TimeSeries) -> str:
    return csv_text(["t", "value"],
                    [[fmt_float(t), fmt_float(v)] for t, v in zip(series.times, series.values)])


def cloud_csv(cloud: np.ndarray) -> str:
    cloud = np.atleast_2d(cloud)
    header = [f"x{k}" for k in range(cloud.shape[1])]
    return csv_text(header, [[fmt_float(v) for v in row] for row in cloud])


def robustness_csv(rows) -> str:
    return csv_text(
        ["parameter", "value", "regular_mean", "regular_std", "chaotic_mean", "chaotic_std"],
        [[r.parameter, r.value, fmt_float(r.regular_mean), fmt_float(r.regular_std),
          fmt_float(r.chaotic_mean), fmt_float(r.chaotic_std)] for r in rows])


def _read_rows(path):
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    return rows[0], rows[1:]


def read_series_csv(path) -> TimeSeries:
    header, rows = _read_rows(path)
    if header != ["t", "value"]:
        raise ValueError(f"{path}: expected header t,value")
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two samples")
    t = np.array([float(r[0]) for r in rows])
    v = np.array([float(r[1]) for r in rows])
    return TimeSeries(float(t[0]), float(t[1] - t[0]), v)


def read_cloud_csv(path) -> np.ndarray:
    _, rows = _read_rows(path)
    return np.array([[float(x) for x in r] for r in rows], dtype=np.float64)


def read_diagram_csv(path) -> PersistenceDiagram:
    header, rows = _read_rows(path)
    if header != ["dim", "birth", "death"]:
        raise ValueError(f"{path}: expected header dim,birth,death")
    by_dim = {}
    for r in rows:
        by_dim.setdefault(int(r[0]), []).append((float(r[1]), float(r[2])))
    return PersistenceDiagram.from_pairs(by_dim)


def read_grid_csv(path) -> PhaseDiagramGrid:
    header, rows = _read_rows(path)
    if header != ["A", "T", "L_avg", "status"]:
        raise ValueError(f"{path}: expected header A,T,L_avg,status")
    a_vals = sorted({float(r[0]) for r in rows})
    t_vals = sorted({float(r[1]) for r in rows})
    l_avg = np.full((len(t_vals), len(a_vals)), np.nan)
    status = np.full(l_avg.shape, "error", dtype=object)
    for r in rows:
        i, j = t_vals.index(float(r[1])), a_vals.index(float(r[0]))
        status[i, j] = r[3]
        if r[2]:
            l_avg[i, j] = float(r[2])
    return PhaseDiagramGrid(np.array(a_vals), np.array(t_vals), l_avg, status)


def _color(u: float) -> str:
    u = min(max(u, 0.0), 1.0) * (len(COLOR_STOPS) - 1)
    k = min(int(u), len(COLOR_STOPS) - 2)
    f = u - k
    lo, hi = COLOR_STOPS[k], COLOR_STOPS[k + 1]
    return "#%02x%02x%02x" % tuple(round(a + f * (b - a)) for a, b in zip(lo, hi))


def _svg(width, height):
    return ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                      width=str(width), height=str(height),
                      viewBox=f"0 0 {width} {height}")


def _text(parent, x, y, text, **attrs):
    el = ET.SubElement(parent, "text", x=f"{x:.2f}", y=f"{y:.2f}",
                       attrib={"font-size": "12", "font-family": "sans-serif", **attrs})
    el.text = text
    return el


def _tostring(root) -> str:
    return ET.tostring(root, encoding="unicode") + "\n"


def heatmap_svg(grid: PhaseDiagramGrid, title: str = "L_avg") -> str:
    """One ``rect`` per cell, A along x, T along y (increasing upwards)."""
    n_t, n_a = grid.l_avg.shape
    cell, left, top = 24, 60, 30
    width, height = left + n_a * cell + 20, top + n_t * cell + 50
    root = _svg(width, height)
    ok = grid.status == "ok"
    vals = grid.l_avg[ok] if ok.any() else np.zeros(1)
    lo, hi = float(np.min(vals)), float(np.max(vals))
    span = hi - lo if hi > lo else 1.0
    for i in range(n_t):
        for j in range(n_a):
            y = top + (n_t - 1 - i) * cell
            fill = _color((grid.l_avg[i, j] - lo) / span) if ok[i, j] else FLAGGED_COLOR
            ET.SubElement(root, "rect", x=str(left + j * cell), y=str(y),
                          width=str(cell), height=str(cell), fill=fill)
    _text(root, left + n_a * cell / 2, height - 8, "A", **{"text-anchor": "middle"})
    _text(root, 14, top + n_t * cell / 2, "T", **{"text-anchor": "middle"})
    for j in (0, n_a - 1):
        _text(root, left + (j + 0.5) * cell, top + n_t * cell + 16,
              f"{grid.a_values[j]:.3g}", **{"text-anchor": "middle"})
    for i in (0, n_t - 1):
        _text(root, left - 6, top + (n_t - 1 - i + 0.6) * cell,
              f"{grid.t_values[i]:.3g}", **{"text-anchor": "end"})
    _text(root, left, 18, f"{title}: {lo:.3g} .. {hi:.3g}")
    return _tostring(root)


def diagram_svg(diagram: PersistenceDiagram, title: str = "persistence") -> str:
    """Birth/death scatter with the diagonal; essential features sit on a
    dashed line above the finite ones."""
    size, pad = 320, 40
    root = _svg(size + 2 * pad, size + 2 * pad)
    finite = np.isfinite(diagram.deaths)
    top = float(max(diagram.deaths[finite].max(initial=0.0),
                    diagram.births.max(initial=0.0)))
    top = top * 1.1 if top > 0 else 1.0
    inf_y = top * 1.05

    def px(v):
        return pad + size * v / (top * 1.1)

    def py(v):
        return pad + size - size * v / (top * 1.1)

    ET.SubElement(root, "line", x1=f"{px(0):.2f}", y1=f"{py(0):.2f}",
                  x2=f"{px(top):.2f}", y2=f"{py(top):.2f}", stroke="black")
    if (~finite).any():
        ET.SubElement(root, "line", x1=f"{px(0):.2f}", y1=f"{py(inf_y):.2f}",
                      x2=f"{px(top):.2f}", y2=f"{py(inf_y):.2f}", stroke="gray",
                      attrib={"stroke-dasharray": "4 3"})
    colors = {0: "#1f77b4", 1: "#ff7f0e"}
    for d, b, e in diagram.rows():
        y = inf_y if math.isinf(e) else e
        ET.SubElement(root, "circle", cx=f"{px(b):.2f}", cy=f"{py(y):.2f}", r="3",
                      fill=colors.get(d, "black"), attrib={"fill-opacity": "0.7"})
    _text(root, pad + size / 2, size + 2 * pad - 8, "birth", **{"text-anchor": "middle"})
    _text(root, 12, pad + size / 2, "death", **{"text-anchor": "middle"})
    _text(root, pad, 20, title)
    return _tostring(root)


def _write(path: Path, text: str, manifest: list):
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None
    manifest.append(path)


def _stable_diagnostics(diag: dict) -> str:
    # wall-clock time would break byte-identical reruns
    clean = {k: v for k, v in diag.items() if k != "seconds"}
    return json.dumps(clean, sort_keys=True, indent=1, default=float) + "\n"


def export_artifacts(results, out_dir, formats=("csv", "svg"),
                     config: SweepConfig | None = None, tag: str = "") -> list[Path]:
    """Write ``results`` under ``out_dir`` and return the written paths.

    ``results`` may be a :class:`PhaseDiagramGrid`, a :class:`CellResult`,
    a :class:`PersistenceDiagram`, a :class:`TimeSeries`, a dict of named
    series or a list of :class:`RobustnessRow`. File names are
    ``<kind>-<config digest><tag>.<ext>``, so reruns overwrite in place.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out}: {exc.strerror}") from None
    stem = (config.digest() if config is not None else "run") + tag
    formats = set(formats)
    manifest: list[Path] = []

    if isinstance(results, PhaseDiagramGrid):
        if "csv" in formats:
            _write(out / f"grid-{stem}.csv", grid_csv(results), manifest)
            for k, c in enumerate(results.cells):
                if c.diagram is not None:
                    _write(out / f"diagram-{stem}-c{k:04d}.csv",
                           diagram_csv(c.diagram), manifest)
        if "svg" in formats:
            _write(out / f"heatmap-{stem}.svg", heatmap_svg(results), manifest)
    elif isinstance(results, CellResult):
        if results.diagram is not None:
            if "csv" in formats:
                _write(out / f"diagram-{stem}.csv", diagram_csv(results.diagram), manifest)
            if "svg" in formats:
                _write(out / f"diagram-{stem}.svg", diagram_svg(
                    results.diagram, f"A={results.amplitude:g}, T={results.period:g}"),
                    manifest)
        _write(out / f"cell-{stem}.json", _stable_diagnostics(
            dict(results.diagnostics, A=results.amplitude, T=results.period,
                 L_avg=results.l_avg, status=results.status)), manifest)
    elif isinstance(results, PersistenceDiagram):
        if "csv" in formats:
            _write(out / f"diagram-{stem}.csv", diagram_csv(results), manifest)
        if "svg" in formats:
            _write(out / f"diagram-{stem}.svg", diagram_svg(results), manifest)
    elif isinstance(results, TimeSeries):
        _write(out / f"series-{stem}.csv", series_csv(results), manifest)
    elif isinstance(results, dict):
        for name in sorted(results):
            _write(out / f"series-{stem}-{name}.csv", series_csv(results[name]), manifest)
    elif isinstance(results, list) and all(isinstance(r, RobustnessRow) for r in results):
        _write(out / f"robustness-{stem}.csv", robustness_csv(results), manifest)
    else:
        raise TypeError(f"cannot export {type(results).__name__}")
    return manifest
