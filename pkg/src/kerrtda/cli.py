"""Command-line entry point: ``kerrtda <subcommand> [options]``.

Exit status is 0 on success, 1 for configuration or usage errors and 2 when
a sweep or robustness run finished with flagged cells (partial results are
still written).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import export
from .classical import ClassicalParams, DriveProfile, bifurcation_scan, integrate_classical
from .config import build_config, dump_config, read_config_file
from .embedding import delay_embed
from .errors import ConfigError, KerrTDAError
from .homology import average_lifetime, cloud_persistence
from .pipeline import (MODES, PRESETS, SweepConfig, embedding_parameters,
                       robustness_study, run_cell, sweep_phase_diagram)
from .quantum import QuantumParams, bin_jump_counts, evolve_trajectory

EXIT_OK, EXIT_CONFIG, EXIT_CELLS = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", type=Path, help="key = value settings file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")


def _cell_args(p):
    p.add_argument("-A", "--amplitude", type=float, required=True)
    p.add_argument("-T", "--period", type=float, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kerrtda",
                     description="Topological chaos detection for the pulse-driven Kerr cavity.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classical-sim", help="mean-field trajectory to CSV")
    _common(p)
    _cell_args(p)
    p.add_argument("--periods", type=float, help="duration in drive periods")

    p = sub.add_parser("quantum-sim", help="one quantum-jump trajectory to CSV")
    _common(p)
    _cell_args(p)
    p.add_argument("--periods", type=float, help="duration in drive periods")

    p = sub.add_parser("bifurcation", help="stroboscopic Re(xi) against A")
    _common(p)
    p.add_argument("-T", "--period", type=float, default=10.0)
    p.add_argument("--a-min", type=float, default=0.05)
    p.add_argument("--a-max", type=float, default=5.0)
    p.add_argument("--a-count", type=int, default=100)
    p.add_argument("--n-min", type=int, default=40)
    p.add_argument("--n-max", type=int, default=100)

    p = sub.add_parser("embed", help="delay-embed a t,value CSV")
    _common(p)
    p.add_argument("input", type=Path)
    p.add_argument("--tau", type=int)
    p.add_argument("--dim", type=int)

    p = sub.add_parser("ph", help="H0/H1 persistence of a point-cloud CSV")
    _common(p)
    p.add_argument("input", type=Path)
    p.add_argument("--subsample", type=int)
    p.add_argument("--max-radius", type=float)

    p = sub.add_parser("cell", help="full pipeline for one (A, T)")
    _common(p)
    _cell_args(p)

    p = sub.add_parser("sweep", help="L_avg over the (A, T) grid")
    _common(p)

    p = sub.add_parser("robustness", help="L_avg against tau and d on labeled points")
    _common(p)
    p.add_argument("--tau-values", default="2-12", help="e.g. 2-12 or 2,4,7")
    p.add_argument("--d-values", default="2,3,4")

    p = sub.add_parser("export", help="render SVGs from grid or diagram CSVs")
    _common(p)
    p.add_argument("inputs", type=Path, nargs="+")
    return parser


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition("-")
        out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    return out


def _config(args) -> SweepConfig:
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    for name in ("mode", "seed", "workers"):
        if getattr(args, name) is not None:
            overrides[name] = getattr(args, name)
    return build_config(file_values, overrides, args.preset)


def _tag(args) -> str:
    return f"-A{args.amplitude!r}-T{args.period!r}"


def _report(paths):
    for p in paths:
        print(p)


def cmd_classical_sim(args, config):
    drive = DriveProfile(args.amplitude, args.period)
    periods = args.periods or config.end_periods
    params = ClassicalParams(config.chi, config.gamma, config.conjugate_nonlinearity)
    re, im = integrate_classical(0j, params, drive, periods * args.period,
                                 sample_interval=args.period / config.samples_per_period)
    _report(export.export_artifacts({"re_xi": re, "im_xi": im}, args.out,
                                    config=config, tag=_tag(args)))
    return EXIT_OK


def cmd_quantum_sim(args, config):
    drive = DriveProfile(args.amplitude, args.period)
    t_end = (args.periods or config.end_periods) * args.period
    traj = evolve_trajectory(QuantumParams(config.chi, config.gamma, config.n_trunc),
                             drive, t_end, seed=config.seed,
                             sample_interval=args.period / config.samples_per_period)
    counts = bin_jump_counts(traj.jumps, config.bin_width, config.bin_stride,
                             t_start=0.0, t_end=t_end)
    series = {"x": traj.x, "re_a": traj.re_a, "im_a": traj.im_a, "n": traj.n,
              "photon_counts": counts}
    paths = export.export_artifacts(series, args.out, config=config, tag=_tag(args))
    jumps = args.out / f"jumps-{config.digest()}{_tag(args)}.csv"
    jumps.write_text(export.csv_text(["t"], [[export.fmt_float(t)] for t in traj.jumps.times]))
    _report(paths + [jumps])
    return EXIT_OK


def cmd_bifurcation(args, config):
    amps = np.linspace(args.a_min, args.a_max, args.a_count)
    params = ClassicalParams(config.chi, config.gamma, config.conjugate_nonlinearity)
    rows = bifurcation_scan(amps, args.period, params, args.n_min, args.n_max)
    out = []
    for r in rows:
        for n, v in zip(range(args.n_min + 1, args.n_max), r.samples):
            out.append([export.fmt_float(r.amplitude), n, export.fmt_float(v)])
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"bifurcation-{config.digest()}-T{args.period!r}.csv"
    path.write_text(export.csv_text(["A", "n", "re_xi"], out))
    bad = [r.amplitude for r in rows if not r.ok]
    if bad:
        print(f"diverged at A = {bad}", file=sys.stderr)
    _report([path])
    return EXIT_OK


def cmd_embed(args, config):
    series = export.read_series_csv(args.input)
    fixed = {"tau": args.tau, "d": args.dim}
    config = replace(config, **{k: v for k, v in fixed.items() if v is not None})
    tau, d = embedding_parameters(series, config)
    cloud = delay_embed(series, tau, d)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"cloud-{args.input.stem}-tau{tau}-d{d}.csv"
    path.write_text(export.cloud_csv(cloud))
    print(f"tau={tau} ({tau * series.dt!r} time units) d={d} points={len(cloud)}")
    _report([path])
    return EXIT_OK


def cmd_ph(args, config):
    cloud = export.read_cloud_csv(args.input)
    k = args.subsample or config.subsample
    diagram = cloud_persistence(cloud, k=k, max_radius=args.max_radius)
    print(f"L_avg(H1) = {average_lifetime(diagram, 1)!r}")
    _report(export.export_artifacts(diagram, args.out, config=config,
                                    tag=f"-{args.input.stem}"))
    return EXIT_OK


def cmd_cell(args, config):
    res = run_cell(args.amplitude, args.period, config)
    print(f"L_avg = {res.l_avg!r}  tau={res.diagnostics['tau']} d={res.diagnostics['d']}")
    _report(export.export_artifacts(res, args.out, config=config, tag=_tag(args)))
    return EXIT_OK


def cmd_sweep(args, config):
    total = config.a_count * config.t_count

    def progress(cell, done=[0]):
        done[0] += 1
        value = "" if math.isnan(cell.l_avg) else f"{cell.l_avg:.4g}"
        print(f"[{done[0]}/{total}] A={cell.amplitude:.4g} T={cell.period:.4g} "
              f"{cell.status} {value}", file=sys.stderr, flush=True)

    grid = sweep_phase_diagram(config, progress)
    _report(export.export_artifacts(grid, args.out, config=config))
    (args.out / f"config-{config.digest()}.txt").write_text(dump_config(config))
    return EXIT_CELLS if grid.failures else EXIT_OK


def cmd_robustness(args, config):
    rows = robustness_study(config, tau_values=_int_list(args.tau_values),
                            d_values=_int_list(args.d_values))
    for r in rows:
        print(f"{r.parameter}={r.value:<3d} regular {r.regular_mean:.4g}+-{r.regular_std:.3g}"
              f"  chaotic {r.chaotic_mean:.4g}+-{r.chaotic_std:.3g}")
    _report(export.export_artifacts(rows, args.out, config=config))
    failed = any(math.isnan(r.regular_mean) or math.isnan(r.chaotic_mean) for r in rows)
    return EXIT_CELLS if failed else EXIT_OK


def cmd_export(args, config):
    args.out.mkdir(parents=True, exist_ok=True)
    written = []
    for path in args.inputs:
        header = path.read_text().split("\n", 1)[0].strip()
        if header == "A,T,L_avg,status":
            svg = export.heatmap_svg(export.read_grid_csv(path))
        elif header == "dim,birth,death":
            svg = export.diagram_svg(export.read_diagram_csv(path), path.stem)
        else:
            raise ConfigError(f"{path}: not a grid or diagram CSV")
        target = args.out / f"{path.stem}.svg"
        target.write_text(svg)
        written.append(target)
    _report(written)
    return EXIT_OK


COMMANDS = {
    "classical-sim": cmd_classical_sim,
    "quantum-sim": cmd_quantum_sim,
    "bifurcation": cmd_bifurcation,
    "embed": cmd_embed,
    "ph": cmd_ph,
    "cell": cmd_cell,
    "sweep": cmd_sweep,
    "robustness": cmd_robustness,
    "export": cmd_export,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config(args)
        return COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"kerrtda: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KerrTDAError, ValueError, OSError) as exc:
        print(f"kerrtda: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CELLS if args.command in ("cell",) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
