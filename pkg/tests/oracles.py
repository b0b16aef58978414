"""Independent reference implementations used only by the tests.

Written from the definitions, sharing no code with the package: the full
Rips filtration is listed explicitly and the whole boundary matrix is
reduced left to right with no clearing, no truncation tricks and no
cohomology.
"""

import itertools
import math

import numpy as np


def rips_filtration(dist, max_radius=math.inf):
    """All simplices of dimension <= 2 as ``(value, dim, vertices)``, sorted."""
    n = len(dist)
    simplices = [(0.0, 0, (i,)) for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        if dist[i][j] <= max_radius:
            simplices.append((float(dist[i][j]), 1, (i, j)))
    for i, j, k in itertools.combinations(range(n), 3):
        v = max(dist[i][j], dist[i][k], dist[j][k])
        if v <= max_radius:
            simplices.append((float(v), 2, (i, j, k)))
    simplices.sort()
    return simplices


def brute_force_diagram(dist, max_radius=math.inf):
    """``{0: [(b, d), ...], 1: [...]}`` from a naive Z/2 column reduction.

    Zero-length H1 pairs are dropped; H0 keeps one entry per vertex.
    """
    simplices = rips_filtration(dist, max_radius)
    index = {s[2]: k for k, s in enumerate(simplices)}
    columns = []
    for value, dim, verts in simplices:
        faces = [index[f] for f in itertools.combinations(verts, dim)] if dim else []
        columns.append(set(faces))
    low_owner = {}
    for j, col in enumerate(columns):
        while col:
            low = max(col)
            if low not in low_owner:
                low_owner[low] = j
                break
            col ^= columns[low_owner[low]]
    out = {0: [], 1: []}
    killed = set(low_owner)
    for low, j in low_owner.items():
        b, dim = simplices[low][0], simplices[low][1]
        d = simplices[j][0]
        if dim == 0 or d > b:
            out[dim].append((b, d))
    for k, (value, dim, _) in enumerate(simplices):
        if dim < 2 and not columns[k] and k not in killed:
            out[dim].append((value, math.inf))
    return {d: sorted(v) for d, v in out.items()}


def _rank_z2(rows):
    """Rank over Z/2 of a matrix given as a list of Python-int bit rows."""
    rank = 0
    rows = [r for r in rows if r]
    while rows:
        pivot = rows.pop()
        if not pivot:
            continue
        rank += 1
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
        rows = [r for r in rows if r]
    return rank


def betti_numbers(dist, eps):
    """``(b0, b1)`` of the Rips complex at scale ``eps`` by rank counting."""
    n = len(dist)
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if dist[i][j] <= eps]
    eidx = {e: k for k, e in enumerate(edges)}
    tris = [t for t in itertools.combinations(range(n), 3)
            if all(dist[a][b] <= eps for a, b in itertools.combinations(t, 2))]
    d1 = [(1 << i) | (1 << j) for i, j in edges]
    d2 = [sum(1 << eidx[f] for f in itertools.combinations(t, 2)) for t in tris]
    r1, r2 = _rank_z2(d1), _rank_z2(d2)
    return n - r1, len(edges) - r1 - r2


def histogram_mi(x, tau, n_bins):
    """Mutual information with equal-count bins, counted with dictionaries."""
    x = np.asarray(x, dtype=float)
    cuts = np.quantile(x, [k / n_bins for k in range(1, n_bins)])

    def code(v):
        return sum(1 for c in cuts if v >= c)

    a = [code(v) for v in x[tau:]]
    b = [code(v) for v in x[:-tau]]
    m = len(a)
    joint, pa, pb = {}, {}, {}
    for u, v in zip(a, b):
        joint[u, v] = joint.get((u, v), 0) + 1
        pa[u] = pa.get(u, 0) + 1
        pb[v] = pb.get(v, 0) + 1
    return sum(c / m * math.log(c * m / (pa[u] * pb[v])) for (u, v), c in joint.items())


def false_neighbor_fraction(x, tau, d, r_tol, floor):
    """Kennel's test with an O(n^2) Python neighbor search; neighbors at
    distance <= ``floor`` are ignored."""
    x = list(map(float, x))
    span = d * tau
    pts = [[x[i - k * tau] for k in range(d + 1)] for i in range(span, len(x))]
    false = 0
    for i, p in enumerate(pts):
        best, bj = math.inf, -1
        for j, q in enumerate(pts):
            if j != i:
                r = math.sqrt(sum((p[k] - q[k]) ** 2 for k in range(d)))
                if floor < r < best:
                    best, bj = r, j
        if bj >= 0:
            false += abs(p[d] - pts[bj][d]) > r_tol * best
    return false / len(pts)
