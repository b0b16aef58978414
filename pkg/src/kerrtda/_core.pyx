# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels: fixed-step RK4 loops and Z/2 Rips reduction.

Every function here has a pure-Python twin in :mod:`kerrtda._pure` with the
same signature and the same arithmetic order, so both backends agree to
rounding on the integrators and exactly on the persistence pairs.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, isfinite
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort as cpp_sort
from libcpp.unordered_map cimport unordered_map
from libcpp.queue cimport priority_queue
from libc.stdint cimport int64_t

cnp.import_array()

ctypedef double complex cplx


# --------------------------------------------------------------------------
# classical mean-field equation
# --------------------------------------------------------------------------

cdef inline cplx _crhs(cplx x, double chi, double gamma, double force, bint conj) nogil:
    cdef double m2 = x.real * x.real + x.imag * x.imag
    cdef cplx nl
    if conj:
        nl = x.real - 1j * x.imag
    else:
        nl = x
    return -0.5 * gamma * x + force - 1j * chi * m2 * nl


def classical_run(cplx xi, double chi, double gamma, double amp,
                  long steps_per_period, double dt, long step0, long n_steps,
                  long sample_every, bint conj, double guard):
    """Advance ``xi`` by ``n_steps`` RK4 steps starting at global step ``step0``.

    Returns ``(xi, samples, status)``; ``samples`` holds the state after every
    step whose global index is a multiple of ``sample_every``. ``status`` is 0
    on success and 1 when ``|xi|`` left the guard.
    """
    cdef long half = steps_per_period // 2
    cdef long n_samples = 0
    cdef long s, g
    for s in range(step0 + 1, step0 + n_steps + 1):
        if s % sample_every == 0:
            n_samples += 1
    out = np.empty(n_samples, dtype=np.complex128)
    cdef cplx[::1] o = out
    cdef cplx k1, k2, k3, k4
    cdef double force
    cdef long k = 0
    cdef int status = 0
    with nogil:
        for s in range(n_steps):
            g = step0 + s
            force = amp if (g % steps_per_period) < half else 0.0
            k1 = _crhs(xi, chi, gamma, force, conj)
            k2 = _crhs(xi + 0.5 * dt * k1, chi, gamma, force, conj)
            k3 = _crhs(xi + 0.5 * dt * k2, chi, gamma, force, conj)
            k4 = _crhs(xi + dt * k3, chi, gamma, force, conj)
            xi = xi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not (isfinite(xi.real) and isfinite(xi.imag)) or \
                    xi.real * xi.real + xi.imag * xi.imag > guard * guard:
                status = 1
                break
            if (g + 1) % sample_every == 0:
                o[k] = xi
                k += 1
    return xi, out[:k], status


# --------------------------------------------------------------------------
# Monte Carlo wavefunction propagation
# --------------------------------------------------------------------------

cdef void _qderiv(const cplx* psi, cplx* out, const cplx* diag, const double* sq,
                  double force, long n) nogil:
    # d psi/dt = -i H_MC psi with H_MC = diag + i F (a^dag - a)
    cdef long m
    if force == 0.0 or n < 2:
        for m in range(n):
            out[m] = diag[m] * psi[m]
        return
    out[0] = diag[0] * psi[0] - force * sq[1] * psi[1]
    for m in range(1, n - 1):
        out[m] = diag[m] * psi[m] + force * sq[m] * psi[m - 1] - force * sq[m + 1] * psi[m + 1]
    out[n - 1] = diag[n - 1] * psi[n - 1] + force * sq[n - 1] * psi[n - 2]


cdef double _rk4(const cplx* src, cplx* dst, const cplx* diag, const double* sq,
                 double force, double h, long n,
                 cplx* k1, cplx* k2, cplx* k3, cplx* k4, cplx* tmp) nogil:
    cdef long m
    cdef double nrm = 0.0
    cdef double h2 = 0.5 * h
    cdef double h6 = h / 6.0
    _qderiv(src, k1, diag, sq, force, n)
    for m in range(n):
        tmp[m] = src[m] + h2 * k1[m]
    _qderiv(tmp, k2, diag, sq, force, n)
    for m in range(n):
        tmp[m] = src[m] + h2 * k2[m]
    _qderiv(tmp, k3, diag, sq, force, n)
    for m in range(n):
        tmp[m] = src[m] + h * k3[m]
    _qderiv(tmp, k4, diag, sq, force, n)
    for m in range(n):
        dst[m] = src[m] + h6 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])
        nrm += dst[m].real * dst[m].real + dst[m].imag * dst[m].imag
    return nrm


def mcwf_propagate(cplx[::1] psi, cplx[::1] diag, double[::1] sq, double amp,
                   long steps_per_period, double dt, long step, double offset,
                   long n_steps, double threshold, double tol):
    """Evolve the unnormalized state under the non-Hermitian generator.

    Starts at global step ``step`` with ``offset`` of that step already
    elapsed and runs until ``n_steps`` step boundaries have been crossed or
    the squared norm falls to ``threshold``. In the latter case the crossing
    is bracketed by bisection to within ``tol`` and the state is left at the
    crossing time.

    Returns ``(steps_completed, jumped, offset, status)``; status 1 flags a
    norm increase across a step.
    """
    cdef long n = psi.shape[0]
    cdef long half = steps_per_period // 2
    cdef cnp.ndarray[cplx, ndim=1] work = np.empty(6 * n, dtype=np.complex128)
    cdef cplx* w = &work[0]
    cdef cplx* k1 = w
    cdef cplx* k2 = w + n
    cdef cplx* k3 = w + 2 * n
    cdef cplx* k4 = w + 3 * n
    cdef cplx* tmp = w + 4 * n
    cdef cplx* start = w + 5 * n
    cdef cplx* p = &psi[0]
    cdef cplx* dg = &diag[0]
    cdef double* sqp = &sq[0]
    cdef long done = 0, m, g
    cdef double force, h, nrm, prev, lo, hi, mid
    cdef bint jumped = False
    cdef int status = 0
    with nogil:
        prev = 0.0
        for m in range(n):
            prev += p[m].real * p[m].real + p[m].imag * p[m].imag
        while done < n_steps:
            g = step + done
            force = amp if (g % steps_per_period) < half else 0.0
            h = dt - offset
            for m in range(n):
                start[m] = p[m]
            nrm = _rk4(start, p, dg, sqp, force, h, n, k1, k2, k3, k4, tmp)
            if nrm > prev * (1.0 + 1e-12):
                status = 1
                break
            if nrm <= threshold:
                lo = 0.0
                hi = h
                while hi - lo > tol:
                    mid = 0.5 * (lo + hi)
                    nrm = _rk4(start, p, dg, sqp, force, mid, n, k1, k2, k3, k4, tmp)
                    if nrm <= threshold:
                        hi = mid
                    else:
                        lo = mid
                _rk4(start, p, dg, sqp, force, hi, n, k1, k2, k3, k4, tmp)
                offset = offset + hi
                jumped = True
                break
            prev = nrm
            offset = 0.0
            done += 1
    return done, jumped, offset, status


# --------------------------------------------------------------------------
# Vietoris-Rips persistence, Z/2 coefficients
# --------------------------------------------------------------------------

cdef struct Edge:
    double value
    int i
    int j

cdef bint _edge_less(const Edge& a, const Edge& b) nogil:
    if a.value != b.value:
        return a.value < b.value
    if a.i != b.i:
        return a.i < b.i
    return a.j < b.j

cdef struct Tri:
    int i
    int j
    int k
    int e_ij
    int e_ik
    int e_jk

cdef bint _tri_less(const Tri& a, const Tri& b) nogil:
    if a.i != b.i:
        return a.i < b.i
    if a.j != b.j:
        return a.j < b.j
    return a.k < b.k


cdef void _xor_into(vector[int]& col, const vector[int]& other, vector[int]& buf) nogil:
    # both sorted descending; col <- col xor other
    cdef size_t a = 0, b = 0
    buf.clear()
    while a < col.size() and b < other.size():
        if col[a] > other[b]:
            buf.push_back(col[a]); a += 1
        elif col[a] < other[b]:
            buf.push_back(other[b]); b += 1
        else:
            a += 1; b += 1
    while a < col.size():
        buf.push_back(col[a]); a += 1
    while b < other.size():
        buf.push_back(other[b]); b += 1
    col.swap(buf)


cdef void _sort3desc(vector[int]& col) nogil:
    cdef int t
    if col[0] < col[1]:
        t = col[0]; col[0] = col[1]; col[1] = t
    if col[1] < col[2]:
        t = col[1]; col[1] = col[2]; col[2] = t
    if col[0] < col[1]:
        t = col[0]; col[0] = col[1]; col[1] = t


def rips_pairs(double[:, ::1] dist, double threshold, long max_simplices):
    """Persistence pairs of the Rips filtration up to ``threshold``.

    Returns ``(h0, h1, status)`` where ``h0``/``h1`` are ``(m, 2)`` arrays of
    (birth, death) with ``inf`` for essential classes; zero-length pairs are
    omitted from ``h1`` but kept in ``h0`` so that it always has one row per
    vertex. ``status`` 1 means the simplex budget was exceeded.
    """
    cdef int n = dist.shape[0]
    cdef vector[Edge] edges
    cdef Edge e
    cdef int i, j, k, a, b
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                if dist[i, j] <= threshold:
                    e.value = dist[i, j]; e.i = i; e.j = j
                    edges.push_back(e)
        cpp_sort(edges.begin(), edges.end(), _edge_less)
    cdef long n_edges = edges.size()
    if n + n_edges > max_simplices:
        return None, None, 1

    # edge index lookup, -1 when absent
    eidx_arr = np.full((n, n), -1, dtype=np.int32)
    cdef int[:, ::1] eidx = eidx_arr
    cdef long q
    for q in range(n_edges):
        eidx[edges[q].i, edges[q].j] = q
        eidx[edges[q].j, edges[q].i] = q

    # triangles, reduced in filtration order; columns over edge rows
    cdef vector[int] pivot_col   # edge -> slot in stored, -1 if none
    pivot_col.assign(n_edges, -1)
    cdef vector[vector[int]] stored
    cdef vector[double] death_of  # per stored column: triangle value
    cdef vector[Tri] group
    cdef Tri t
    cdef vector[int] col, buf
    cdef long start = 0, stop, g
    cdef double val
    cdef long n_tris = 0
    cdef int status = 0
    cdef int piv, slot
    col.resize(3)
    h1 = []
    with nogil:
        while start < n_edges:
            val = edges[start].value
            stop = start
            while stop < n_edges and edges[stop].value == val:
                stop += 1
            group.clear()
            for q in range(start, stop):
                i = edges[q].i; j = edges[q].j
                for k in range(n):
                    if k == i or k == j:
                        continue
                    a = eidx[i, k]
                    b = eidx[j, k]
                    if a < 0 or b < 0 or a > q or b > q:
                        continue
                    if k < i:
                        t.i = k; t.j = i; t.k = j
                        t.e_ij = a; t.e_ik = b; t.e_jk = q
                    elif k < j:
                        t.i = i; t.j = k; t.k = j
                        t.e_ij = a; t.e_ik = q; t.e_jk = b
                    else:
                        t.i = i; t.j = j; t.k = k
                        t.e_ij = q; t.e_ik = a; t.e_jk = b
                    group.push_back(t)
            n_tris += group.size()
            if n + n_edges + n_tris > max_simplices:
                status = 1
                break
            cpp_sort(group.begin(), group.end(), _tri_less)
            for g in range(<long> group.size()):
                col.resize(3)
                col[0] = group[g].e_ij; col[1] = group[g].e_ik; col[2] = group[g].e_jk
                _sort3desc(col)
                while col.size() > 0:
                    piv = col[0]
                    slot = pivot_col[piv]
                    if slot < 0:
                        break
                    _xor_into(col, stored[slot], buf)
                if col.size() > 0:
                    pivot_col[col[0]] = stored.size()
                    stored.push_back(col)
                    death_of.push_back(val)
            start = stop
    if status:
        return None, None, 1

    # edges with clearing: skip edges that are pivots of triangle columns
    parent = np.arange(n, dtype=np.int64)
    cdef long[::1] par = parent
    cdef vector[int] vpivot_col
    vpivot_col.assign(n, -1)
    cdef vector[vector[int]] vstored
    cdef vector[int] vcol
    vcol.resize(2)
    cdef double inf = float("inf")
    h0 = []
    positive = []
    for q in range(n_edges):
        if pivot_col[q] >= 0:
            slot = pivot_col[q]
            if death_of[slot] > edges[q].value:
                h1.append((edges[q].value, death_of[slot]))
            continue
        vcol.resize(2)
        vcol[0] = edges[q].j; vcol[1] = edges[q].i
        while vcol.size() > 0:
            slot = vpivot_col[vcol[0]]
            if slot < 0:
                break
            _xor_into(vcol, vstored[slot], buf)
        if vcol.size() > 0:
            vpivot_col[vcol[0]] = vstored.size()
            vstored.push_back(vcol)
            h0.append((0.0, edges[q].value))
        else:
            h1.append((edges[q].value, inf))
    for i in range(n):
        if vpivot_col[i] < 0:
            h0.append((0.0, inf))
    return (np.array(h0, dtype=np.float64).reshape(-1, 2),
            np.array(h1, dtype=np.float64).reshape(-1, 2), 0)


cdef inline int64_t _tri_key(int q, int a, int b, int i, int j, int k, int n) nogil:
    # order triangles by diameter edge, then by the vertex opposite to it
    if q > a and q > b:
        return <int64_t> q * n + k
    if a > b:
        return <int64_t> a * n + j
    return <int64_t> b * n + i


def rips_pairs_cohomology(double[:, ::1] dist, double threshold, long max_simplices):
    """Same contract as :func:`rips_pairs`, computed on the coboundary matrix.

    Edge columns are reduced in reverse filtration order; edges that kill an
    H0 class are cleared up front. Pairs are identical to the boundary-matrix
    reduction, only much cheaper on dense clouds.
    """
    cdef int n = dist.shape[0]
    cdef vector[Edge] edges
    cdef Edge e
    cdef int i, j
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                if dist[i, j] <= threshold:
                    e.value = dist[i, j]; e.i = i; e.j = j
                    edges.push_back(e)
        cpp_sort(edges.begin(), edges.end(), _edge_less)
    cdef long n_edges = edges.size()
    if n + n_edges > max_simplices:
        return None, None, 1
    eidx_arr = np.full((n, n), -1, dtype=np.int32)
    cdef int[:, ::1] eidx = eidx_arr
    cdef long q
    for q in range(n_edges):
        eidx[edges[q].i, edges[q].j] = q
        eidx[edges[q].j, edges[q].i] = q

    # H0 by boundary reduction of the edge columns; marks the cleared edges
    cdef vector[int] vpivot_col
    vpivot_col.assign(n, -1)
    cdef vector[vector[int]] vstored
    cdef vector[int] vcol, vbuf
    cdef vector[char] cleared
    cleared.assign(n_edges, 0)
    cdef int slot
    h0 = []
    for q in range(n_edges):
        vcol.resize(2)
        vcol[0] = edges[q].j; vcol[1] = edges[q].i
        while vcol.size() > 0:
            slot = vpivot_col[vcol[0]]
            if slot < 0:
                break
            _xor_into(vcol, vstored[slot], vbuf)
        if vcol.size() > 0:
            vpivot_col[vcol[0]] = vstored.size()
            vstored.push_back(vcol)
            cleared[q] = 1
            h0.append((0.0, edges[q].value))
    for i in range(n):
        if vpivot_col[i] < 0:
            h0.append((0.0, float("inf")))

    # H1 by coboundary reduction, youngest edge first. The working column is
    # a heap with lazy Z/2 cancellation; finished columns are stored as the
    # list of edges whose coboundaries sum to them.
    cdef unordered_map[int64_t, int] owner
    cdef vector[vector[int]] reductions
    cdef vector[int] red, ored
    cdef priority_queue[int64_t] heap
    cdef int64_t piv, best, key
    cdef int k, a, b, o, m, oe
    cdef long n_cofaces = 0
    cdef long qq
    cdef vector[int] pair_edge
    cdef vector[int64_t] pair_tri
    cdef vector[int] essential
    cdef int status = 0
    with nogil:
        for qq in range(n_edges - 1, -1, -1):
            if cleared[qq]:
                continue
            i = edges[qq].i; j = edges[qq].j
            # pivot of the unreduced column without building it
            best = -1
            for k in range(n):
                if k == i or k == j:
                    continue
                a = eidx[i, k]
                b = eidx[j, k]
                if a < 0 or b < 0:
                    continue
                n_cofaces += 1
                key = _tri_key(<int> qq, a, b, i, j, k, n)
                if best < 0 or key < best:
                    best = key
            if n_cofaces / 3 + n + n_edges > max_simplices:
                status = 1
                break
            if best < 0:
                essential.push_back(<int> qq)
                continue
            red.clear()
            red.push_back(<int> qq)
            if owner.count(best) == 0:
                owner[best] = reductions.size()
                reductions.push_back(red)
                pair_edge.push_back(<int> qq)
                pair_tri.push_back(best)
                continue
            while not heap.empty():
                heap.pop()
            _push_coboundary(<int> qq, i, j, eidx, n, heap)
            while True:
                piv = _heap_pivot(heap)
                if piv < 0 or owner.count(piv) == 0:
                    break
                o = owner[piv]
                ored = reductions[o]
                for m in range(<int> ored.size()):
                    oe = ored[m]
                    _push_coboundary(oe, edges[oe].i, edges[oe].j, eidx, n, heap)
                    red.push_back(oe)
            if piv >= 0:
                cpp_sort(red.begin(), red.end())
                _cancel_pairs(red)
                owner[piv] = reductions.size()
                reductions.push_back(red)
                pair_edge.push_back(<int> qq)
                pair_tri.push_back(piv)
            else:
                essential.push_back(<int> qq)
    if status:
        return None, None, 1
    h1 = []
    cdef double birth, death
    for m in range(<int> pair_edge.size()):
        birth = edges[pair_edge[m]].value
        death = edges[pair_tri[m] // n].value
        if death > birth:
            h1.append((birth, death))
    for m in range(<int> essential.size()):
        h1.append((edges[essential[m]].value, float("inf")))
    return (np.array(h0, dtype=np.float64).reshape(-1, 2),
            np.array(h1, dtype=np.float64).reshape(-1, 2), 0)



cdef void _push_coboundary(int q, int i, int j, const int[:, ::1] eidx, int n,
                           priority_queue[int64_t]& heap) nogil:
    # keys are negated so the max-heap yields the smallest triangle first
    cdef int k, a, b
    for k in range(n):
        if k == i or k == j:
            continue
        a = eidx[i, k]
        b = eidx[j, k]
        if a < 0 or b < 0:
            continue
        heap.push(-_tri_key(q, a, b, i, j, k, n))


cdef int64_t _heap_pivot(priority_queue[int64_t]& heap) nogil:
    # smallest key with odd multiplicity, left on the heap; -1 if none
    cdef int64_t p
    while not heap.empty():
        p = heap.top()
        heap.pop()
        if not heap.empty() and heap.top() == p:
            heap.pop()
            continue
        heap.push(p)
        return -p
    return -1


cdef void _cancel_pairs(vector[int]& v) nogil:
    # v sorted; keep elements occurring an odd number of times
    cdef size_t r = 0, w = 0, s
    while r < v.size():
        s = r
        while r < v.size() and v[r] == v[s]:
            r += 1
        if (r - s) % 2 == 1:
            v[w] = v[s]
            w += 1
    v.resize(w)
