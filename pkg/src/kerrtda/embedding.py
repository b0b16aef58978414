"""Takens delay embedding and the usual heuristics for its parameters.

Delays are integer sample counts; the physical delay is ``tau * series.dt``.
"""

from __future__ import annotations

import numpy as np

from .errors import SeriesTooShort
from .series import TimeSeries


def _values(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=np.float64)


def delay_embed(series, tau: int, d: int) -> np.ndarray:
    """Point cloud of delay vectors ``(x[i], x[i-tau], ..., x[i-(d-1)tau])``.

    Returns an array of shape ``(len(series) - (d-1)*tau, d)`` in time order.
    """
    x = _values(series)
    if tau < 1 or d < 1:
        raise ValueError("tau and d must be >= 1")
    span = (d - 1) * tau
    if len(x) <= span:
        raise SeriesTooShort(f"need more than {span} samples, got {len(x)}")
    n = len(x) - span
    cols = [x[span - j * tau: span - j * tau + n] for j in range(d)]
    return np.column_stack(cols)


def _quantile_codes(x: np.ndarray, n_bins: int) -> np.ndarray:
    # equal-count bins on ranks; ties share a bin
    edges = np.quantile(x, np.linspace(0, 1, n_bins + 1)[1:-1])
    return np.searchsorted(edges, x, side="right")


def mutual_information(x: np.ndarray, tau: int, n_bins: int = 16) -> float:
    """Histogram estimate of I(x_t; x_{t-tau}) in nats."""
    codes = _quantile_codes(x, n_bins)
    a, b = codes[tau:], codes[:-tau]
    joint = np.zeros((n_bins, n_bins))
    np.add.at(joint, (a, b), 1.0)
    joint /= joint.sum()
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log(joint[nz] / np.outer(pa, pb)[nz])))


def mi_curve(series, max_tau: int, n_bins: int = 16) -> np.ndarray:
    """``I(tau)`` for ``tau = 1 .. max_tau`` (index 0 is ``tau = 1``)."""
    x = _values(series)
    return np.array([mutual_information(x, t, n_bins) for t in range(1, max_tau + 1)])


def first_local_minimum(curve: np.ndarray) -> int | None:
    """Index of the first strict local minimum, with plateaus resolved to
    their first element; ``None`` if there is none."""
    n = len(curve)
    i = 1
    while i < n - 1:
        j = i
        while j + 1 < n and curve[j + 1] == curve[i]:
            j += 1
        if j + 1 < n and curve[i - 1] > curve[i] and curve[j + 1] > curve[i]:
            return i
        i = j + 1
    return None


def estimate_delay_mi(series, max_tau: int = 60, n_bins: int = 16) -> int:
    """First local minimum of the mutual information, in samples.

    Falls back to the global argmin over ``1..max_tau`` when the curve has no
    interior minimum (e.g. white noise).
    """
    x = _values(series)
    if max_tau < 2:
        raise ValueError("max_tau must be >= 2")
    if len(x) < 4 * max_tau:
        raise SeriesTooShort(f"need at least {4 * max_tau} samples, got {len(x)}")
    curve = mi_curve(x, max_tau, n_bins)
    idx = first_local_minimum(curve)
    if idx is None:
        idx = int(np.argmin(curve))
    return idx + 1


def _nearest_neighbors(points: np.ndarray, floor: float = 0.0, chunk: int = 512):
    """Brute-force nearest neighbor at distance > ``floor``.

    Returns indices and distances; points with no such neighbor get index
    -1 and distance ``inf``.
    """
    n = len(points)
    sq = np.einsum("ij,ij->i", points, points)
    idx = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    for s in range(0, n, chunk):
        blk = points[s:s + chunk]
        d2 = sq[s:s + chunk, None] + sq[None, :] - 2.0 * blk @ points.T
        np.maximum(d2, 0.0, out=d2)
        d2[d2 <= floor * floor] = np.inf
        rows = np.arange(len(blk))
        d2[rows, s + rows] = np.inf
        j = np.argmin(d2, axis=1)
        best = d2[rows, j]
        idx[s:s + chunk] = np.where(np.isfinite(best), j, -1)
        dist[s:s + chunk] = np.sqrt(best)
    return idx, dist


# distances below this fraction of the series spread count as coincident
DUPLICATE_FLOOR = 1e-9


def fnn_fraction(x: np.ndarray, tau: int, d: int, r_tol: float = 15.0) -> float:
    """Fraction of false nearest neighbors when going from ``d`` to ``d+1``.

    A neighbor is false if the extra coordinate separates the pair by more
    than ``r_tol`` times their distance in ``d`` dimensions. Neighbors
    within ``DUPLICATE_FLOOR`` times the spread of ``x`` are skipped: a
    periodic orbit sampled commensurately repeats its points up to rounding,
    and such repeats say nothing about the dimension. A point with no
    distinct neighbor is not false.
    """
    x = _values(x)
    emb = delay_embed(x, tau, d + 1)
    low = emb[:, :d]
    extra = emb[:, d]
    j, r = _nearest_neighbors(low, DUPLICATE_FLOOR * float(np.ptp(x)))
    has = j >= 0
    false = np.abs(extra[has] - extra[j[has]]) > r_tol * r[has]
    return float(np.sum(false)) / len(low)


def estimate_dimension_fnn(series, tau: int, max_d: int = 6,
                           r_tol: float = 15.0, threshold: float = 0.01,
                           max_points: int = 3000) -> int:
    """Smallest embedding dimension whose FNN fraction is below ``threshold``.

    Only the first ``max_points`` delay vectors are used so the brute-force
    neighbor search stays quadratic in a bounded size. Returns ``max_d`` if
    no smaller dimension qualifies.
    """
    x = _values(series)
    if max_d < 2:
        raise ValueError("max_d must be >= 2")
    if len(x) <= max_d * tau + 1:
        raise SeriesTooShort(f"series too short to embed at d={max_d}, tau={tau}")
    x = x[: max_points + max_d * tau]
    for d in range(1, max_d):
        if fnn_fraction(x, tau, d, r_tol) < threshold:
            return d
    return max_d
