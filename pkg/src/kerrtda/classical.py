"""Classical mean-field dynamics of the pulse-driven Kerr cavity.

The complex amplitude obeys

    dxi/dt = -(gamma/2) xi + F(t) - i chi |xi|^2 N(xi)

with ``N(xi) = xi`` (the mean-field limit of the Kerr Hamiltonian) or, with
``conjugate_nonlinearity=True``, ``N(xi) = conj(xi)``. The conjugated variant
is kept for comparison only: it is not norm-preserving and blows up in
finite time under any drive.

``F(t)`` is a train of rectangular pulses, ``A`` on ``[0, T/2)`` and zero on
``[T/2, T)`` of every period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import NonFiniteState
from .series import TimeSeries

STEPS_PER_PERIOD = 2000
SAMPLES_PER_PERIOD = 20
OVERFLOW_GUARD = 1e8


@dataclass(frozen=True)
class DriveProfile:
    amplitude: float
    period: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("drive period must be positive")
        if not self.amplitude >= 0:
            raise ValueError("drive amplitude must be non-negative")


@dataclass(frozen=True)
class ClassicalParams:
    chi: float = 0.008
    gamma: float = 0.05
    conjugate_nonlinearity: bool = False

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")


def drive_value(profile: DriveProfile, t: float) -> float:
    """Pulse-train value at time ``t``; on during ``[0, T/2)`` of each period."""
    phase = math.fmod(t, profile.period)
    if phase < 0:
        phase += profile.period
    return profile.amplitude if phase < 0.5 * profile.period else 0.0


def drive_at_step(profile: DriveProfile, step: int, steps_per_period: int) -> float:
    """Drive value on the step grid, exact for any integer ``step``."""
    half = steps_per_period // 2
    return profile.amplitude if step % steps_per_period < half else 0.0


def classical_rhs(xi: complex, t: float, params: ClassicalParams,
                  drive: DriveProfile) -> complex:
    nl = xi.conjugate() if params.conjugate_nonlinearity else xi
    return (-0.5 * params.gamma * xi + drive_value(drive, t)
            - 1j * params.chi * abs(xi) ** 2 * nl)


def step_grid(period: float, dt: float, sample_interval: float | None = None):
    """Return ``(steps_per_period, sample_every)`` for a pulse-aligned grid.

    ``dt`` must divide ``T/2`` and ``sample_interval`` must be a multiple of
    ``dt``; both are checked to a relative tolerance of 1e-9.
    """
    spp = period / dt
    spp_int = int(round(spp))
    if spp_int < 2 or spp_int % 2 or abs(spp - spp_int) > 1e-9 * spp:
        raise ValueError(f"dt={dt} does not put pulse edges on step boundaries "
                         f"for T={period}")
    if sample_interval is None:
        return spp_int, None
    every = sample_interval / dt
    every_int = int(round(every))
    if every_int < 1 or abs(every - every_int) > 1e-9 * every:
        raise ValueError("sample_interval must be an integer multiple of dt")
    return spp_int, every_int


def integrate_classical(initial: complex, params: ClassicalParams,
                        drive: DriveProfile, t_end: float,
                        dt: float | None = None,
                        sample_interval: float | None = None,
                        backend: str | None = None):
    """Fixed-step RK4 trajectory of ``xi`` from ``t = 0`` to ``t_end``.

    Parameters
    ----------
    initial : complex
        State at ``t = 0``.
    dt : float, optional
        Step size; defaults to ``T / 2000``. Must divide ``T/2``.
    sample_interval : float, optional
        Spacing of returned samples; defaults to ``T / 20``.
    backend : {"compiled", "python"}, optional
        Kernel override; the import-time selection is used by default.

    Returns
    -------
    (TimeSeries, TimeSeries)
        Real and imaginary parts sampled at ``0, s, 2s, ...`` up to ``t_end``.

    Raises
    ------
    NonFiniteState
        If ``|xi|`` becomes non-finite or exceeds the overflow guard.
    """
    period = drive.period
    if dt is None:
        dt = period / STEPS_PER_PERIOD
    if sample_interval is None:
        sample_interval = period / SAMPLES_PER_PERIOD
    spp, every = step_grid(period, dt, sample_interval)
    n_steps = int(round(t_end / dt))
    kernels = _backend.kernels if backend is None else _backend.load(backend)
    xi, samples, status = kernels.classical_run(
        complex(initial), params.chi, params.gamma, drive.amplitude, spp, dt,
        0, n_steps, every, params.conjugate_nonlinearity, OVERFLOW_GUARD)
    if status:
        raise NonFiniteState(
            f"|xi| left the overflow guard before t={t_end} "
            f"(A={drive.amplitude}, T={period})")
    traj = np.concatenate([[complex(initial)], samples])
    step = every * dt
    return TimeSeries(0.0, step, traj.real), TimeSeries(0.0, step, traj.imag)


@dataclass
class BifurcationRow:
    amplitude: float
    samples: np.ndarray  # Re(xi(nT)) for n_min < n < n_max; empty if invalid
    ok: bool = True

    @property
    def spread(self) -> float:
        return float(np.ptp(self.samples)) if self.ok and len(self.samples) else math.nan


def bifurcation_scan(amplitudes, period: float, params: ClassicalParams,
                     n_min: int = 40, n_max: int = 100, initial: complex = 0j,
                     dt: float | None = None) -> list[BifurcationRow]:
    """Stroboscopic ``Re(xi(nT))`` for ``n_min < n < n_max`` at each amplitude.

    Cells that diverge are returned with ``ok=False`` and the scan continues.
    """
    if not n_min < n_max:
        raise ValueError("need n_min < n_max")
    rows = []
    for amp in amplitudes:
        drive = DriveProfile(float(amp), period)
        try:
            re, _ = integrate_classical(initial, params, drive, n_max * period,
                                        dt=dt, sample_interval=period)
        except NonFiniteState:
            rows.append(BifurcationRow(float(amp), np.empty(0), ok=False))
            continue
        rows.append(BifurcationRow(float(amp), re.values[n_min + 1:n_max].copy()))
    return rows
