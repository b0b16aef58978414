"""Vietoris-Rips persistent homology in dimensions 0 and 1 over Z/2.

Edges enter at their length, triangles at their longest edge and vertices
at zero. The reduction itself lives in the compiled core (with a pure-Python
twin); this module handles distances, subsampling, thresholds and the
diagram type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import EmptyCloud, RadiusNonPositive, SizeCap

DEFAULT_SUBSAMPLE = 400
DEFAULT_MAX_SIMPLICES = 50_000_000
METHODS = ("cohomology", "homology")


def distance_matrix(cloud) -> np.ndarray:
    pts = np.asarray(cloud, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    sq = np.einsum("ij,ij->i", pts, pts)
    d2 = sq[:, None] + sq[None, :] - 2.0 * pts @ pts.T
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    # recompute exactly where cancellation could matter (tiny distances)
    close = d < 1e-6 * max(1.0, float(np.sqrt(sq.max(initial=0.0))))
    if close.any():
        ii, jj = np.nonzero(close)
        d[ii, jj] = np.linalg.norm(pts[ii] - pts[jj], axis=1)
    np.fill_diagonal(d, 0.0)
    return np.ascontiguousarray(np.maximum(d, d.T))


def maxmin_indices(cloud, k: int, start_index: int = 0) -> np.ndarray:
    """Greedy farthest-point selection order; ties go to the lowest index."""
    pts = np.asarray(cloud, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = len(pts)
    if n == 0:
        raise EmptyCloud("cannot subsample an empty cloud")
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, n)
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = start_index
    mind = np.linalg.norm(pts - pts[start_index], axis=1)
    mind[start_index] = -1.0
    for s in range(1, k):
        nxt = int(np.argmax(mind))
        chosen[s] = nxt
        np.minimum(mind, np.linalg.norm(pts - pts[nxt], axis=1), out=mind)
        mind[chosen[: s + 1]] = -1.0
    return chosen


def maxmin_subsample(cloud, k: int, start_index: int = 0) -> np.ndarray:
    """``min(k, n)`` well-spread landmark points, in selection order."""
    pts = np.asarray(cloud, dtype=np.float64)
    return pts[maxmin_indices(pts, k, start_index)]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Features as parallel arrays; ``death`` is ``inf`` for essential ones."""

    dims: np.ndarray
    births: np.ndarray
    deaths: np.ndarray

    @classmethod
    def from_pairs(cls, by_dim):
        dims, births, deaths = [], [], []
        for dim, pairs in by_dim.items():
            pairs = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
            dims.append(np.full(len(pairs), dim, dtype=np.int64))
            births.append(pairs[:, 0])
            deaths.append(pairs[:, 1])
        if not dims:
            return cls(np.empty(0, np.int64), np.empty(0), np.empty(0))
        dims = np.concatenate(dims)
        births = np.concatenate(births)
        deaths = np.concatenate(deaths)
        order = np.lexsort((deaths, births, dims))
        return cls(dims[order], births[order], deaths[order])

    def __len__(self):
        return len(self.dims)

    def features(self, dim: int) -> np.ndarray:
        sel = self.dims == dim
        return np.column_stack([self.births[sel], self.deaths[sel]])

    def lifetimes(self, dim: int, finite: bool = True) -> np.ndarray:
        f = self.features(dim)
        life = f[:, 1] - f[:, 0]
        return life[np.isfinite(life)] if finite else life

    def scaled(self, factor: float) -> "PersistenceDiagram":
        return PersistenceDiagram(self.dims, self.births * factor, self.deaths * factor)

    def rows(self):
        for d, b, e in zip(self.dims, self.births, self.deaths):
            yield int(d), float(b), float(e)


def enclosing_radius(dist: np.ndarray) -> float:
    """Smallest radius at which the Rips complex is a cone (hence acyclic)."""
    return float(dist.max(axis=1).min()) if len(dist) else 0.0


def rips_persistence(dist, max_dim: int = 1, max_radius: float | None = None,
                     max_simplices: int = DEFAULT_MAX_SIMPLICES,
                     method: str = "cohomology",
                     backend: str | None = None) -> PersistenceDiagram:
    """Persistence diagram of the Rips filtration of a distance matrix.

    Parameters
    ----------
    dist : (n, n) array
        Symmetric, non-negative, zero diagonal.
    max_dim : {0, 1}
    max_radius : float, optional
        Filtration cut-off; defaults to the largest pairwise distance, in
        which case every H1 class is finite. Classes alive at the cut-off are
        reported with ``death = inf``.
    method : {"cohomology", "homology"}
        Which matrix is reduced. Both give identical pairs; the coboundary
        reduction with clearing is far cheaper on dense clouds.

    Notes
    -----
    The complex is cut at ``min(max_radius, enclosing radius)``: beyond the
    enclosing radius the complex is a cone, so nothing is born or dies
    there and the diagram is unchanged. Zero-length H1 pairs are dropped;
    H0 always has one feature per point.
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    n = len(dist)
    if max_dim not in (0, 1):
        raise ValueError("max_dim must be 0 or 1")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if n == 0:
        return PersistenceDiagram.from_pairs({})
    if max_radius is None:
        max_radius = float(dist.max())
    elif not max_radius > 0:
        raise RadiusNonPositive(f"max_radius must be positive, got {max_radius}")
    threshold = min(max_radius, enclosing_radius(dist))
    kernels = _backend.kernels if backend is None else _backend.load(backend)
    reduce = kernels.rips_pairs_cohomology if method == "cohomology" else kernels.rips_pairs
    h0, h1, status = reduce(dist, threshold, max_simplices)
    if status:
        raise SizeCap(f"Rips complex on {n} points exceeds {max_simplices} "
                      f"simplices; subsample first")
    if threshold < max_radius:
        # classes still alive at the enclosing radius cannot exist
        h1 = h1[np.isfinite(h1[:, 1])]
    by_dim = {0: h0}
    if max_dim >= 1:
        by_dim[1] = h1
    return PersistenceDiagram.from_pairs(by_dim)


def cloud_persistence(cloud, k: int | None = DEFAULT_SUBSAMPLE, start_index: int = 0,
                      **kwargs) -> PersistenceDiagram:
    """Maxmin-subsample a point cloud to ``k`` points, then :func:`rips_persistence`."""
    pts = np.asarray(cloud, dtype=np.float64)
    if k is not None:
        pts = maxmin_subsample(pts, k, start_index)
    return rips_persistence(distance_matrix(pts), **kwargs)


def average_lifetime(diagram: PersistenceDiagram, dim: int) -> float:
    """Mean ``death - birth`` over the finite features of one dimension."""
    if dim not in (0, 1):
        raise ValueError("dim must be 0 or 1")
    life = diagram.lifetimes(dim, finite=True)
    return float(life.mean()) if len(life) else 0.0


def betti_at(diagram: PersistenceDiagram, dim: int, eps: float) -> int:
    """Number of features of ``dim`` alive at scale ``eps`` (``b <= eps < d``)."""
    f = diagram.features(dim)
    return int(np.sum((f[:, 0] <= eps) & (eps < f[:, 1])))
