"""Numba-jitted kernel implementations.

Import fails cleanly when numba is missing; uespace.kernels falls back to
the pure-numpy backend in that case. All kernels are cached to disk so CLI
processes after the first pay no compile cost.
"""

import numpy as np
from numba import njit, prange

_U64 = np.uint64


@njit(cache=True)
def cholesky_lower(a, tol):
    n = a.shape[0]
    lower = np.zeros_like(a)
    for j in range(n):
        s = 0.0
        for k in range(j):
            s += lower[j, k] * lower[j, k]
        d = a[j, j] - s
        if d <= tol:
            return lower, j
        ljj = np.sqrt(d)
        lower[j, j] = ljj
        for i in range(j + 1, n):
            s = 0.0
            for k in range(j):
                s += lower[i, k] * lower[j, k]
            lower[i, j] = (a[i, j] - s) / ljj
    return lower, -1


@njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j] * a[i, j]
    return np.sqrt(acc)


@njit(cache=True)
def jacobi_eigh(a, off_tol, max_sweeps):
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    sweeps = 0
    while sweeps < max_sweeps:
        if not _off_norm(a) > off_tol:
            return np.diag(a).copy(), v, sweeps, True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = c * aip - s * aiq
                        a[p, i] = a[i, p]
                        a[i, q] = s * aip + c * aiq
                        a[q, i] = a[i, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip - s * viq
                    v[i, q] = s * vip + c * viq
        sweeps += 1
    return np.diag(a).copy(), v, sweeps, _off_norm(a) <= off_tol


@njit(cache=True)
def _trial_dot_serial(enroll_rows, test_rows, enroll_idx, test_idx):
    n = enroll_idx.shape[0]
    dim = enroll_rows.shape[1]
    scores = np.empty(n, dtype=np.float64)
    for k in range(n):
        e = enroll_idx[k]
        t = test_idx[k]
        acc = 0.0
        for j in range(dim):
            acc += enroll_rows[e, j] * test_rows[t, j]
        scores[k] = acc
    return scores


@njit(cache=True, parallel=True)
def _trial_dot_parallel(enroll_rows, test_rows, enroll_idx, test_idx):
    n = enroll_idx.shape[0]
    dim = enroll_rows.shape[1]
    scores = np.empty(n, dtype=np.float64)
    for k in prange(n):
        e = enroll_idx[k]
        t = test_idx[k]
        acc = 0.0
        for j in range(dim):
            acc += enroll_rows[e, j] * test_rows[t, j]
        scores[k] = acc
    return scores


def trial_dot(enroll_rows, test_rows, enroll_idx, test_idx, parallel=False):
    # each trial is an independent accumulation, so the parallel variant is
    # bitwise identical to the serial one
    if parallel:
        return _trial_dot_parallel(enroll_rows, test_rows, enroll_idx, test_idx)
    return _trial_dot_serial(enroll_rows, test_rows, enroll_idx, test_idx)


@njit(cache=True)
def xoshiro_block(states, count):
    n = states.shape[0]
    out = np.empty((n, count), dtype=_U64)
    for r in range(n):
        s0 = states[r, 0]
        s1 = states[r, 1]
        s2 = states[r, 2]
        s3 = states[r, 3]
        for i in range(count):
            tmp = s0 + s3
            out[r, i] = ((tmp << _U64(23)) | (tmp >> _U64(41))) + s0
            t = s1 << _U64(17)
            s2 = s2 ^ s0
            s3 = s3 ^ s1
            s1 = s1 ^ s2
            s0 = s0 ^ s3
            s2 = s2 ^ t
            s3 = (s3 << _U64(45)) | (s3 >> _U64(19))
        states[r, 0] = s0
        states[r, 1] = s1
        states[r, 2] = s2
        states[r, 3] = s3
    return out
