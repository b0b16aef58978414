"""Pure-Python versions of the compiled kernels in ``_core.pyx``.

Used when the extension is not built or ``KERRTDA_PURE=1`` is set. Slow, but
step-for-step identical in algorithm so the test-suite can cross-check the
two backends.
"""

import math

import numpy as np


def _crhs(x, chi, gamma, force, conj):
    m2 = x.real * x.real + x.imag * x.imag
    nl = x.conjugate() if conj else x
    return -0.5 * gamma * x + force - 1j * chi * m2 * nl


def classical_run(xi, chi, gamma, amp, steps_per_period, dt, step0, n_steps,
                  sample_every, conj, guard):
    half = steps_per_period // 2
    xi = complex(xi)
    out = []
    for s in range(n_steps):
        g = step0 + s
        force = amp if (g % steps_per_period) < half else 0.0
        k1 = _crhs(xi, chi, gamma, force, conj)
        k2 = _crhs(xi + 0.5 * dt * k1, chi, gamma, force, conj)
        k3 = _crhs(xi + 0.5 * dt * k2, chi, gamma, force, conj)
        k4 = _crhs(xi + dt * k3, chi, gamma, force, conj)
        xi = xi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not (math.isfinite(xi.real) and math.isfinite(xi.imag)) or abs(xi) > guard:
            return xi, np.array(out, dtype=np.complex128), 1
        if (g + 1) % sample_every == 0:
            out.append(xi)
    return xi, np.array(out, dtype=np.complex128), 0


def _qderiv(psi, diag, sq, force):
    out = diag * psi
    if force == 0.0:
        return out
    out[1:] += force * sq[1:] * psi[:-1]
    out[:-1] -= force * sq[1:] * psi[1:]
    return out


def _rk4(src, diag, sq, force, h):
    k1 = _qderiv(src, diag, sq, force)
    k2 = _qderiv(src + (0.5 * h) * k1, diag, sq, force)
    k3 = _qderiv(src + (0.5 * h) * k2, diag, sq, force)
    k4 = _qderiv(src + h * k3, diag, sq, force)
    dst = src + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return dst, float(np.vdot(dst, dst).real)


def mcwf_propagate(psi, diag, sq, amp, steps_per_period, dt, step, offset,
                   n_steps, threshold, tol):
    half = steps_per_period // 2
    prev = float(np.vdot(psi, psi).real)
    done = 0
    jumped = False
    status = 0
    while done < n_steps:
        g = step + done
        force = amp if (g % steps_per_period) < half else 0.0
        h = dt - offset
        start = psi.copy()
        new, nrm = _rk4(start, diag, sq, force, h)
        if nrm > prev * (1.0 + 1e-12):
            psi[:] = new
            status = 1
            break
        if nrm <= threshold:
            lo, hi = 0.0, h
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                _, nrm = _rk4(start, diag, sq, force, mid)
                if nrm <= threshold:
                    hi = mid
                else:
                    lo = mid
            new, _ = _rk4(start, diag, sq, force, hi)
            psi[:] = new
            offset = offset + hi
            jumped = True
            break
        psi[:] = new
        prev = nrm
        offset = 0.0
        done += 1
    return done, jumped, offset, status


def _xor(col, other):
    # both sorted descending
    return sorted(set(col).symmetric_difference(other), reverse=True)


def rips_pairs(dist, threshold, max_simplices):
    n = dist.shape[0]
    edges = sorted(
        (float(dist[i, j]), i, j)
        for i in range(n) for j in range(i + 1, n) if dist[i, j] <= threshold
    )
    n_edges = len(edges)
    if n + n_edges > max_simplices:
        return None, None, 1
    eidx = {}
    for q, (_, i, j) in enumerate(edges):
        eidx[i, j] = q
        eidx[j, i] = q

    pivot_col = {}
    stored = []
    death_of = []
    n_tris = 0
    start = 0
    while start < n_edges:
        val = edges[start][0]
        stop = start
        while stop < n_edges and edges[stop][0] == val:
            stop += 1
        group = []
        for q in range(start, stop):
            _, i, j = edges[q]
            for k in range(n):
                if k == i or k == j:
                    continue
                a = eidx.get((i, k), -1)
                b = eidx.get((j, k), -1)
                if a < 0 or b < 0 or a > q or b > q:
                    continue
                group.append((tuple(sorted((i, j, k))), (a, b, q)))
        n_tris += len(group)
        if n + n_edges + n_tris > max_simplices:
            return None, None, 1
        group.sort()
        for _, faces in group:
            col = sorted(faces, reverse=True)
            while col and col[0] in pivot_col:
                col = _xor(col, stored[pivot_col[col[0]]])
            if col:
                pivot_col[col[0]] = len(stored)
                stored.append(col)
                death_of.append(val)
        start = stop

    vpivot_col = {}
    vstored = []
    h0 = []
    h1 = []
    for q, (val, i, j) in enumerate(edges):
        if q in pivot_col:
            death = death_of[pivot_col[q]]
            if death > val:
                h1.append((val, death))
            continue
        col = [j, i]
        while col and col[0] in vpivot_col:
            col = _xor(col, vstored[vpivot_col[col[0]]])
        if col:
            vpivot_col[col[0]] = len(vstored)
            vstored.append(col)
            h0.append((0.0, val))
        else:
            h1.append((val, math.inf))
    for i in range(n):
        if i not in vpivot_col:
            h0.append((0.0, math.inf))
    return (np.array(h0, dtype=np.float64).reshape(-1, 2),
            np.array(h1, dtype=np.float64).reshape(-1, 2), 0)


def _tri_key(q, a, b, i, j, k, n):
    if q > a and q > b:
        return q * n + k
    if a > b:
        return a * n + j
    return b * n + i


def _coboundary(q, edges, eidx, n):
    _, i, j = edges[q]
    out = []
    for k in range(n):
        if k == i or k == j:
            continue
        a = eidx.get((i, k), -1)
        b = eidx.get((j, k), -1)
        if a < 0 or b < 0:
            continue
        out.append(_tri_key(q, a, b, i, j, k, n))
    return out


def rips_pairs_cohomology(dist, threshold, max_simplices):
    n = dist.shape[0]
    edges = sorted(
        (float(dist[i, j]), i, j)
        for i in range(n) for j in range(i + 1, n) if dist[i, j] <= threshold
    )
    n_edges = len(edges)
    if n + n_edges > max_simplices:
        return None, None, 1
    eidx = {}
    for q, (_, i, j) in enumerate(edges):
        eidx[i, j] = q
        eidx[j, i] = q

    vpivot_col = {}
    vstored = []
    cleared = set()
    h0 = []
    for q, (val, i, j) in enumerate(edges):
        col = [j, i]
        while col and col[0] in vpivot_col:
            col = _xor(col, vstored[vpivot_col[col[0]]])
        if col:
            vpivot_col[col[0]] = len(vstored)
            vstored.append(col)
            cleared.add(q)
            h0.append((0.0, val))
    for i in range(n):
        if i not in vpivot_col:
            h0.append((0.0, math.inf))

    owner = {}
    reductions = []
    h1 = []
    n_cofaces = 0
    for q in range(n_edges - 1, -1, -1):
        if q in cleared:
            continue
        work = set()
        for key in _coboundary(q, edges, eidx, n):
            work ^= {key}
        n_cofaces += len(work)
        if n_cofaces // 3 + n + n_edges > max_simplices:
            return None, None, 1
        red = {q}
        while work:
            piv = min(work)
            if piv not in owner:
                break
            for oe in reductions[owner[piv]]:
                work ^= set(_coboundary(oe, edges, eidx, n))
                red ^= {oe}
        birth = edges[q][0]
        if work:
            piv = min(work)
            owner[piv] = len(reductions)
            reductions.append(sorted(red))
            death = edges[piv // n][0]
            if death > birth:
                h1.append((birth, death))
        else:
            h1.append((birth, math.inf))
    return (np.array(h0, dtype=np.float64).reshape(-1, 2),
            np.array(h1, dtype=np.float64).reshape(-1, 2), 0)
