"""Experiment composition: single cells, (A, T) sweeps and robustness tables.

A cell runs simulate -> observable series -> delay embedding -> maxmin
subsample -> Rips persistence -> average H1 lifetime. Everything a cell
needs is in :class:`SweepConfig`, so cells are independent and can run in
any order or in separate processes.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .classical import ClassicalParams, DriveProfile, integrate_classical
from .embedding import delay_embed, estimate_delay_mi, estimate_dimension_fnn
from .errors import (ConfigError, KerrTDAError, NonFiniteState, NormIncrease,
                     StepTooLarge, TruncationBreach)
from .homology import (DEFAULT_SUBSAMPLE, PersistenceDiagram, average_lifetime,
                       cloud_persistence)
from .quantum import QuantumParams, bin_jump_counts, evolve_trajectory
from .series import TimeSeries

MODES = ("classical", "quantum-x", "quantum-photon-count")
STATUSES = ("ok", "truncation-breach", "diverged", "error")

# labeled (A, T) cells for the robustness study and the observable
# comparison: period-1 stroboscopic orbits vs. aperiodic ones of the
# classical map at the drive periods used for the example figures
REGULAR_POINTS = ((1.0, 8.0), (1.5, 8.0), (1.0, 10.0))
CHAOTIC_POINTS = ((4.5, 8.0), (4.0, 8.0), (2.75, 10.0))


@dataclass(frozen=True)
class SweepConfig:
    """Everything needed to reproduce a cell, a sweep or a robustness table.

    Windows are in drive periods, so one config covers every ``T`` of a
    grid. ``tau``/``d`` of ``None`` mean "estimate per cell" (mutual
    information and false nearest neighbors respectively).
    """

    mode: str = "classical"
    a_min: float = 0.1
    a_max: float = 5.0
    a_count: int = 50
    t_min: float = 1.0
    t_max: float = 50.0
    t_count: int = 50
    chi: float = 0.008
    gamma: float = 0.05
    n_trunc: int = 300
    conjugate_nonlinearity: bool = False
    tau: int | None = None
    d: int | None = None
    max_tau: int = 60
    max_d: int = 6
    subsample: int = DEFAULT_SUBSAMPLE
    seed: int = 0
    transient_periods: float = 400.0
    end_periods: float = 1000.0
    samples_per_period: int = 20
    bin_width: float = 9.0
    bin_stride: float | None = None
    trajectories: int = 1
    workers: int = 1
    check_ranges: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.a_count < 1 or self.t_count < 1:
            raise ConfigError("grid counts must be >= 1")
        if self.a_min > self.a_max or self.t_min > self.t_max:
            raise ConfigError("grid minimum exceeds maximum")
        if self.check_ranges and not (0 < self.a_min and self.a_max <= 5
                                      and 0 < self.t_min and self.t_max <= 50):
            raise ConfigError("grid outside 0 < A <= 5, 0 < T <= 50 "
                              "(set check_ranges = false to override)")
        if self.t_min <= 0:
            raise ConfigError("drive period must be positive")
        if not 0 <= self.transient_periods < self.end_periods:
            raise ConfigError("need 0 <= transient_periods < end_periods")
        if self.tau is not None and self.tau < 1:
            raise ConfigError("tau must be >= 1")
        if self.d is not None and self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.subsample < 1 or self.trajectories < 1 or self.workers < 1:
            raise ConfigError("subsample, trajectories and workers must be >= 1")
        if self.samples_per_period < 2 or self.samples_per_period % 2:
            raise ConfigError("samples_per_period must be a positive even number")
        if self.bin_width <= 0 or (self.bin_stride is not None and self.bin_stride <= 0):
            raise ConfigError("bin width and stride must be positive")

    @property
    def a_values(self) -> np.ndarray:
        return np.linspace(self.a_min, self.a_max, self.a_count)

    @property
    def t_values(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_count)

    def digest(self) -> str:
        """Stable hash of every field; used for output file names."""
        text = ";".join(f"{k}={v!r}" for k, v in sorted(asdict(self).items()))
        return hashlib.sha256(text.encode()).hexdigest()[:12]


PRESETS = {
    # N = 120 (the nominal desk truncation) breaches the population check at
    # chaotic cells, where <n> reaches ~90; see the decisions ledger
    "desk": dict(a_min=5 / 8, a_max=5.0, a_count=8, t_min=50 / 8, t_max=50.0,
                 t_count=8, n_trunc=300, transient_periods=100.0,
                 end_periods=300.0),
    "full": dict(a_min=0.1, a_max=5.0, a_count=50, t_min=1.0, t_max=50.0,
                 t_count=50, n_trunc=300, transient_periods=400.0,
                 end_periods=1000.0),
}


def preset(name: str, **overrides) -> SweepConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return SweepConfig(**{**PRESETS[name], **overrides})


def cell_seed(seed: int, index: int) -> int:
    """``seed XOR hash(index)`` with a hash that is stable across runs."""
    h = hashlib.blake2b(str(index).encode(), digest_size=8).digest()
    return (seed ^ int.from_bytes(h, "little")) & 0xFFFF_FFFF_FFFF_FFFF


@dataclass
class CellResult:
    amplitude: float
    period: float
    l_avg: float
    diagram: PersistenceDiagram | None
    status: str = "ok"
    diagnostics: dict = field(default_factory=dict)


def simulate_observable(amplitude: float, period: float, config: SweepConfig,
                        seed: int = 0):
    """Post-transient observable series for one cell, plus diagnostics."""
    drive = DriveProfile(amplitude, period)
    t_end = config.end_periods * period
    t_start = config.transient_periods * period
    sample = period / config.samples_per_period
    diag = {}
    if config.mode == "classical":
        params = ClassicalParams(config.chi, config.gamma, config.conjugate_nonlinearity)
        re, _ = integrate_classical(0j, params, drive, t_end, sample_interval=sample)
        return re.after(t_start), diag
    params = QuantumParams(config.chi, config.gamma, config.n_trunc)
    traj = evolve_trajectory(params, drive, t_end, sample_interval=sample, seed=seed)
    diag["mean_n"] = float(traj.n.after(t_start).values.mean())
    diag["jumps"] = len(traj.jumps)
    diag["max_top_population"] = traj.max_top_population
    if config.mode == "quantum-x":
        return traj.x.after(t_start), diag
    counts = bin_jump_counts(traj.jumps, config.bin_width, config.bin_stride,
                             t_start=t_start, t_end=t_end)
    return counts, diag


def embedding_parameters(series: TimeSeries, config: SweepConfig):
    """``(tau, d)`` from the config or, where unset, the MI/FNN heuristics.

    The estimated dimension is raised to 2: a 1-D cloud has no cycles, and
    FNN returns 1 for a periodic orbit sampled commensurately with its
    period (every point then has an exact twin).
    """
    tau = config.tau
    if tau is None:
        tau = estimate_delay_mi(series, max_tau=min(config.max_tau, len(series) // 4))
    d = config.d
    if d is None:
        d = max(2, estimate_dimension_fnn(series, tau, max_d=config.max_d))
    return tau, d


def lifetime_of(series: TimeSeries, tau: int, d: int, subsample: int):
    cloud = delay_embed(series, tau, d)
    diagram = cloud_persistence(cloud, k=subsample)
    return average_lifetime(diagram, 1), diagram, len(cloud)


def run_cell(amplitude: float, period: float, config: SweepConfig,
             seed: int | None = None) -> CellResult:
    """Full pipeline for one ``(A, T)`` cell.

    ``seed`` defaults to ``config.seed``. With ``config.trajectories > 1``
    the quantum trajectories use seeds ``cell_seed(seed, m)`` and L_avg is
    their mean; the returned diagram is the first trajectory's. Module
    errors propagate; :func:`sweep_phase_diagram` turns them into flags.
    """
    seed = config.seed if seed is None else seed
    start = time.perf_counter()
    runs = 1 if config.mode == "classical" else config.trajectories
    values, first, diag = [], None, {}
    for m in range(runs):
        traj_seed = seed if runs == 1 else cell_seed(seed, m)
        series, sim_diag = simulate_observable(amplitude, period, config, traj_seed)
        tau, d = embedding_parameters(series, config)
        l_avg, diagram, n_points = lifetime_of(series, tau, d, config.subsample)
        values.append(l_avg)
        if first is None:
            first = diagram
            diag = dict(sim_diag, tau=tau, d=d, points=n_points,
                        tau_time=tau * series.dt,
                        tau_source="fixed" if config.tau else "mutual-information",
                        d_source="fixed" if config.d else "false-nearest-neighbors")
    diag["seed"] = seed
    diag["l_avg_runs"] = values
    diag["seconds"] = time.perf_counter() - start
    return CellResult(amplitude, period, float(np.mean(values)), first, "ok", diag)


def status_of(exc: Exception) -> str:
    if isinstance(exc, TruncationBreach):
        return "truncation-breach"
    if isinstance(exc, (NonFiniteState, NormIncrease, StepTooLarge)):
        return "diverged"
    return "error"


def _guarded_cell(args):
    amplitude, period, config, seed = args
    try:
        return run_cell(amplitude, period, config, seed)
    except (KerrTDAError, ValueError, FloatingPointError) as exc:
        return CellResult(amplitude, period, math.nan, None, status_of(exc),
                          {"seed": seed, "error": f"{type(exc).__name__}: {exc}"})


@dataclass
class PhaseDiagramGrid:
    """L_avg over the grid; ``l_avg[i, j]`` is at ``T = t_values[i]``,
    ``A = a_values[j]``. Flagged cells hold NaN."""

    a_values: np.ndarray
    t_values: np.ndarray
    l_avg: np.ndarray
    status: np.ndarray
    cells: list = field(default_factory=list)

    @property
    def failures(self) -> int:
        return int(np.sum(self.status != "ok"))

    def cell(self, i: int, j: int) -> CellResult:
        return self.cells[i * len(self.a_values) + j]


def sweep_phase_diagram(config: SweepConfig, progress=None) -> PhaseDiagramGrid:
    """Evaluate :func:`run_cell` on the whole grid.

    Cell ``(i, j)`` has index ``i * len(A) + j`` and seed
    ``cell_seed(config.seed, index)``. Failures are flagged per cell and
    never stop the sweep. ``progress`` is called with each finished
    :class:`CellResult`, in cell order.
    """
    a_vals, t_vals = config.a_values, config.t_values
    jobs = [(float(a), float(t), config, cell_seed(config.seed, i * len(a_vals) + j))
            for i, t in enumerate(t_vals) for j, a in enumerate(a_vals)]
    if config.workers == 1:
        results = map(_guarded_cell, jobs)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=config.workers)
        results = pool.map(_guarded_cell, jobs)
    cells = []
    try:
        for res in results:
            cells.append(res)
            if progress is not None:
                progress(res)
    finally:
        if pool is not None:
            pool.shutdown()
    shape = (len(t_vals), len(a_vals))
    l_avg = np.array([c.l_avg for c in cells]).reshape(shape)
    status = np.array([c.status for c in cells], dtype=object).reshape(shape)
    return PhaseDiagramGrid(a_vals, t_vals, l_avg, status, cells)


@dataclass(frozen=True)
class RobustnessRow:
    parameter: str  # "tau" or "d"
    value: int
    regular_mean: float
    regular_std: float
    chaotic_mean: float
    chaotic_std: float

    @property
    def separated(self) -> bool:
        return self.chaotic_mean > self.regular_mean


def robustness_study(config: SweepConfig, regular_points=REGULAR_POINTS,
                     chaotic_points=CHAOTIC_POINTS, tau_values=range(2, 13),
                     d_values=(2, 3, 4), fixed_d: int = 2,
                     fixed_tau: int = 7) -> list[RobustnessRow]:
    """Per-phase mean and std of L_avg while sweeping ``tau`` then ``d``.

    Each labeled point is simulated once (seed ``cell_seed(config.seed, k)``
    for the ``k``-th point, regular first) and the series is re-embedded
    for every hyperparameter value. Points that fail are left out of the
    statistics; a phase with no usable point gives NaN rows.
    """
    if not regular_points or not chaotic_points:
        raise ConfigError("need at least one point per phase")
    labeled = [(p, "regular") for p in regular_points] + \
              [(p, "chaotic") for p in chaotic_points]
    series = []
    for k, ((amp, per), phase) in enumerate(labeled):
        try:
            s, _ = simulate_observable(float(amp), float(per), config,
                                       cell_seed(config.seed, k))
        except KerrTDAError:
            s = None
        series.append((s, phase))

    def row(parameter, value, tau, d):
        vals = {"regular": [], "chaotic": []}
        for s, phase in series:
            if s is not None:
                vals[phase].append(lifetime_of(s, tau, d, config.subsample)[0])
        stats = []
        for phase in ("regular", "chaotic"):
            v = np.asarray(vals[phase])
            stats += [float(v.mean()), float(v.std())] if len(v) else [math.nan] * 2
        return RobustnessRow(parameter, int(value), *stats)

    rows = [row("tau", t, t, fixed_d) for t in tau_values]
    rows += [row("d", d, fixed_tau, d) for d in d_values]
    return rows


def config_from_mapping(values: dict, base: SweepConfig | None = None) -> SweepConfig:
    """Apply string or typed overrides to ``base`` (default config)."""
    base = base or SweepConfig()
    known = {f.name: f for f in fields(SweepConfig)}
    typed = {}
    for key, raw in values.items():
        name = key.replace("-", "_")
        if name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        typed[name] = _coerce(name, raw, getattr(base, name))
    try:
        return replace(base, **typed)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


_OPTIONAL_INT = {"tau", "d"}
_OPTIONAL_FLOAT = {"bin_stride"}


def _coerce(name, raw, current):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if name in _OPTIONAL_INT or name in _OPTIONAL_FLOAT:
            if text.lower() in ("auto", "none", ""):
                return None
            return int(text) if name in _OPTIONAL_INT else float(text)
        if isinstance(current, bool):
            if text.lower() in ("true", "on", "yes", "1"):
                return True
            if text.lower() in ("false", "off", "no", "0"):
                return False
            raise ValueError(text)
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return text
