"""Quantum-jump trajectories of the damped, pulse-driven Kerr cavity.

Units have hbar = 1. In the frame rotating at the cavity frequency

    H(t)  = (chi/2) a^dag^2 a^2 + i F(t) (a^dag - a)
    H_MC  = H - (i gamma / 2) a^dag a

and the only collapse operator is ``L = sqrt(gamma) a``. Trajectories follow
the waiting-time form of the Monte Carlo wavefunction method: the
unnormalized state evolves under ``H_MC`` until its squared norm falls to a
uniform random threshold, the crossing time is located by bisection, ``a``
is applied and a fresh threshold is drawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _backend
from .classical import DriveProfile, STEPS_PER_PERIOD, SAMPLES_PER_PERIOD, step_grid
from .errors import (DimensionTooLarge, InvalidDimension, NormIncrease,
                     StepTooLarge, TraceDrift, TruncationBreach)
from .series import TimeSeries

# position quadrature x = (a + a^dag) / X_SCALE
X_SCALE = math.sqrt(2.0)
TRUNCATION_TOL = 1e-6
TOP_LEVELS = 5
MAX_JUMP_PROBABILITY = 0.1
MASTER_EQUATION_MAX_DIM = 64
# RK4 is stable for |lambda dt| below 2*sqrt(2) on the imaginary axis
STABILITY_MARGIN = 2.5


@dataclass(frozen=True)
class FockOperators:
    """Sparse ladder operators on the truncated space ``|0>, ..., |N-1>``."""

    dim: int
    a: sp.csr_matrix
    adag: sp.csr_matrix
    num: sp.csr_matrix
    kerr: sp.csr_matrix
    x: sp.csr_matrix


def build_operators(dim: int) -> FockOperators:
    if dim < 2:
        raise InvalidDimension(f"Fock dimension must be >= 2, got {dim}")
    m = np.arange(dim, dtype=np.float64)
    a = sp.diags(np.sqrt(m[1:]), 1, shape=(dim, dim), format="csr",
                 dtype=np.complex128)
    adag = a.conj().T.tocsr()
    num = sp.diags(m, 0, format="csr", dtype=np.complex128)
    kerr = sp.diags(m * (m - 1), 0, format="csr", dtype=np.complex128)
    x = ((a + adag) / X_SCALE).tocsr()
    return FockOperators(dim, a, adag, num, kerr, x)


@dataclass(frozen=True)
class QuantumParams:
    chi: float = 0.008
    gamma: float = 0.05
    n_trunc: int = 300

    def __post_init__(self):
        if self.n_trunc < 2:
            raise InvalidDimension("n_trunc must be >= 2")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")


def hamiltonian(ops: FockOperators, params: QuantumParams, force: float):
    return 0.5 * params.chi * ops.kerr + 1j * force * (ops.adag - ops.a)


def effective_hamiltonian(ops: FockOperators, params: QuantumParams, force: float):
    return hamiltonian(ops, params, force) - 0.5j * params.gamma * ops.num


def basis(dim: int, m: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=np.complex128)
    psi[m] = 1.0
    return psi


def coherent(dim: int, alpha: complex) -> np.ndarray:
    """Coherent state truncated to ``dim`` levels and renormalized."""
    m = np.arange(dim)
    logfact = np.array([math.lgamma(k + 1) for k in m])
    amp = np.zeros(dim, dtype=np.complex128)
    if alpha == 0:
        amp[0] = 1.0
        return amp
    logmag = m * math.log(abs(alpha)) - 0.5 * logfact
    amp = np.exp(logmag - logmag.max()) * np.exp(1j * m * np.angle(alpha))
    return amp / np.linalg.norm(amp)


@dataclass
class JumpRecord:
    times: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self):
        return len(self.times)


@dataclass
class Trajectory:
    x: TimeSeries
    re_a: TimeSeries
    im_a: TimeSeries
    n: TimeSeries
    jumps: JumpRecord
    max_top_population: float


def spectral_bound(params: QuantumParams, amplitude: float) -> float:
    """Upper bound on the spectral radius of H_MC with the drive on."""
    top = params.n_trunc - 1
    return (0.5 * params.chi * top * (top - 1) + 0.5 * params.gamma * top
            + 2.0 * amplitude * math.sqrt(top))


def default_dt(params: QuantumParams, drive: DriveProfile) -> float:
    """``T/2000``, refined when needed so RK4 stays stable at this truncation.

    The number of steps per period is kept even so pulse edges stay on the
    grid, and a multiple of 20 so the default sampling stays aligned.
    """
    dt = drive.period / STEPS_PER_PERIOD
    limit = STABILITY_MARGIN / spectral_bound(params, drive.amplitude)
    if dt <= limit:
        return dt
    spp = SAMPLES_PER_PERIOD * math.ceil(drive.period / (limit * SAMPLES_PER_PERIOD))
    return drive.period / spp


def _generator(seed):
    # counter-based stream: (seed, draw index) fully determines every draw
    return np.random.Generator(np.random.Philox(seed))


def evolve_trajectory(params: QuantumParams, drive: DriveProfile, t_end: float,
                      dt: float | None = None,
                      sample_interval: float | None = None,
                      seed: int = 0, initial: np.ndarray | None = None,
                      rng=None, truncation_tol: float | None = TRUNCATION_TOL,
                      backend: str | None = None) -> Trajectory:
    """Run one quantum-jump trajectory from ``t = 0`` to ``t_end``.

    ``dt`` defaults to :func:`default_dt`. Observables are sampled every
    ``sample_interval`` (default ``T/20``) from the normalized state,
    starting at ``t = 0``. ``rng`` overrides the seeded
    generator; anything with a ``random()`` method works. Pass
    ``truncation_tol=None`` to disable the top-level population check.

    Raises
    ------
    TruncationBreach
        Top five Fock levels hold more than ``truncation_tol`` at a sample.
    StepTooLarge
        ``gamma <n> dt`` reached 0.1 at a sample.
    NormIncrease
        The unnormalized norm grew across a step.
    """
    dim = params.n_trunc
    period = drive.period
    if dt is None:
        dt = default_dt(params, drive)
    if sample_interval is None:
        sample_interval = period / SAMPLES_PER_PERIOD
    spp, every = step_grid(period, dt, sample_interval)
    n_steps = int(round(t_end / dt))
    kernels = _backend.kernels if backend is None else _backend.load(backend)
    if rng is None:
        rng = _generator(seed)

    m = np.arange(dim, dtype=np.float64)
    # -i H_MC restricted to its diagonal part
    diag = (-1j * (0.5 * params.chi * m * (m - 1))
            - 0.5 * params.gamma * m).astype(np.complex128)
    sq = np.sqrt(m)
    sq_up = np.sqrt(m[1:])
    top = min(TOP_LEVELS, dim)

    psi = basis(dim, 0) if initial is None else np.array(initial, dtype=np.complex128)
    psi /= np.linalg.norm(psi)

    n_samples = n_steps // every + 1
    a_vals = np.empty(n_samples, dtype=np.complex128)
    n_vals = np.empty(n_samples)
    jumps = []
    max_top = 0.0

    def record(k):
        nonlocal max_top
        prob = (psi.real ** 2 + psi.imag ** 2)
        prob /= prob.sum()
        nrm = 1.0 / np.sqrt(np.vdot(psi, psi).real)
        a_vals[k] = np.vdot(psi[:-1], sq_up * psi[1:]) * nrm * nrm
        n_vals[k] = float(np.dot(m, prob))
        pop = float(prob[-top:].sum())
        max_top = max(max_top, pop)
        t = k * every * dt
        if truncation_tol is not None and pop > truncation_tol:
            raise TruncationBreach(
                f"top {top} levels hold {pop:.3g} at t={t:.6g} "
                f"(N={dim}, A={drive.amplitude}, T={period})")
        if params.gamma * n_vals[k] * dt >= MAX_JUMP_PROBABILITY:
            raise StepTooLarge(f"gamma*<n>*dt = {params.gamma * n_vals[k] * dt:.3g}")

    record(0)
    step = 0
    offset = 0.0
    threshold = rng.random()
    tol = dt / 100.0
    while step < n_steps:
        target = min((step // every + 1) * every, n_steps)
        done, jumped, offset, status = kernels.mcwf_propagate(
            psi, diag, sq, drive.amplitude, spp, dt, step, offset,
            target - step, threshold, tol)
        step += done
        if status:
            raise NormIncrease(f"norm increased during step {step}; dt too large?")
        if jumped:
            jumps.append(step * dt + offset)
            new = np.zeros_like(psi)
            new[:-1] = sq_up * psi[1:]
            psi[:] = new / np.linalg.norm(new)
            threshold = rng.random()
            continue
        if step % every == 0:
            record(step // every)

    k = len(n_vals)
    step_t = every * dt
    x_vals = X_SCALE * a_vals.real
    return Trajectory(
        x=TimeSeries(0.0, step_t, x_vals[:k]),
        re_a=TimeSeries(0.0, step_t, a_vals.real),
        im_a=TimeSeries(0.0, step_t, a_vals.imag),
        n=TimeSeries(0.0, step_t, n_vals),
        jumps=JumpRecord(np.asarray(jumps, dtype=np.float64)),
        max_top_population=max_top,
    )


def evolve_unnormalized(psi0: np.ndarray, params: QuantumParams,
                        drive: DriveProfile, t_end: float,
                        dt: float | None = None,
                        sample_interval: float | None = None,
                        backend: str | None = None):
    """Evolve under ``H_MC`` alone (no jumps, no renormalization).

    Returns the final unnormalized state and the squared norm sampled every
    ``sample_interval``, starting from ``t = 0``.
    """
    dim = params.n_trunc
    period = drive.period
    if dt is None:
        dt = default_dt(params, drive)
    if sample_interval is None:
        sample_interval = period / SAMPLES_PER_PERIOD
    spp, every = step_grid(period, dt, sample_interval)
    n_steps = int(round(t_end / dt))
    kernels = _backend.kernels if backend is None else _backend.load(backend)
    m = np.arange(dim, dtype=np.float64)
    diag = (-1j * (0.5 * params.chi * m * (m - 1))
            - 0.5 * params.gamma * m).astype(np.complex128)
    sq = np.sqrt(m)
    psi = np.array(psi0, dtype=np.complex128)
    if psi.shape != (dim,):
        raise InvalidDimension(f"state must have length {dim}")
    norms = [float(np.vdot(psi, psi).real)]
    step = 0
    while step < n_steps:
        chunk = min(every, n_steps - step)
        done, _, _, status = kernels.mcwf_propagate(
            psi, diag, sq, drive.amplitude, spp, dt, step, 0.0, chunk, -1.0, dt)
        step += done
        if status:
            raise NormIncrease(f"norm increased during step {step}; dt too large?")
        if step % every == 0:
            norms.append(float(np.vdot(psi, psi).real))
    return psi, TimeSeries(0.0, every * dt, np.array(norms))


def integrate_master_equation(rho0: np.ndarray, params: QuantumParams,
                              drive: DriveProfile, t_end: float,
                              dt: float | None = None,
                              sample_interval: float | None = None):
    """Dense RK4 solution of the Lindblad equation, for small truncations.

    Returns ``(n, x)`` time series sampled like :func:`evolve_trajectory`.
    """
    dim = params.n_trunc
    if dim > MASTER_EQUATION_MAX_DIM:
        raise DimensionTooLarge(
            f"master equation limited to N <= {MASTER_EQUATION_MAX_DIM}")
    rho = np.array(rho0, dtype=np.complex128)
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix must be {dim}x{dim}")
    if not np.allclose(rho, rho.conj().T, atol=1e-12):
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1) > 1e-10:
        raise ValueError("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix must be positive semidefinite")

    period = drive.period
    if dt is None:
        dt = period / STEPS_PER_PERIOD
    if sample_interval is None:
        sample_interval = period / SAMPLES_PER_PERIOD
    spp, every = step_grid(period, dt, sample_interval)
    n_steps = int(round(t_end / dt))
    half = spp // 2

    ops = build_operators(dim)
    a = ops.a.toarray()
    adag = ops.adag.toarray()
    num = ops.num.toarray()
    xop = ops.x.toarray()
    kerr_h = 0.5 * params.chi * ops.kerr.toarray()
    drive_op = 1j * (adag - a)
    g = params.gamma

    def rhs(r, force):
        h = kerr_h + force * drive_op
        hr = h @ r
        out = -1j * (hr - hr.conj().T)
        ar = a @ r
        nr = num @ r
        out += g * (ar @ adag - 0.5 * (nr + nr.conj().T))
        return out

    n_out = [np.trace(num @ rho).real]
    x_out = [np.trace(xop @ rho).real]
    for s in range(n_steps):
        force = drive.amplitude if s % spp < half else 0.0
        k1 = rhs(rho, force)
        k2 = rhs(rho + 0.5 * dt * k1, force)
        k3 = rhs(rho + 0.5 * dt * k2, force)
        k4 = rhs(rho + dt * k3, force)
        rho = rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (s + 1) % every == 0:
            tr = np.trace(rho).real
            if abs(tr - 1) > 1e-6:
                raise TraceDrift(f"trace drifted to {tr} at t={(s + 1) * dt}")
            n_out.append(np.trace(num @ rho).real)
            x_out.append(np.trace(xop @ rho).real)
    step_t = every * dt
    return TimeSeries(0.0, step_t, np.array(n_out)), TimeSeries(0.0, step_t, np.array(x_out))


def bin_jump_counts(record: JumpRecord, width: float = 9.0,
                    stride: float | None = None, t_start: float = 0.0,
                    t_end: float | None = None) -> TimeSeries:
    """Count jumps in windows ``[t_start + k*stride, t_start + k*stride + width)``.

    Only windows lying entirely before ``t_end`` are kept. ``stride``
    defaults to ``width`` (disjoint bins); a smaller stride gives a sliding
    window.
    """
    if stride is None:
        stride = width
    times = np.asarray(record.times, dtype=np.float64)
    if t_end is None:
        t_end = float(times.max()) if len(times) else t_start + width
    if not (width > 0 and stride > 0):
        raise ValueError("width and stride must be positive")
    if not t_end > t_start:
        raise ValueError("need t_end > t_start")
    n_win = int(math.floor((t_end - t_start - width) / stride + 1e-9)) + 1
    n_win = max(n_win, 0)
    left = t_start + stride * np.arange(n_win)
    counts = (np.searchsorted(times, left + width, side="left")
              - np.searchsorted(times, left, side="left"))
    return TimeSeries(t_start, stride, counts.astype(np.float64))
