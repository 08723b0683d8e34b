"""Pure-numpy kernel implementations.

Fallback backend used when numba is unavailable or when the environment
selects it via UESPACE_BACKEND=numpy. Same call signatures and semantics
as uespace.kernels.jit; results agree with the jit backend to rounding
for float kernels and bit-exactly for the integer PRNG kernel.
"""

import numpy as np

_U64 = np.uint64


def cholesky_lower(a, tol):
    """Lower-triangular Cholesky factor of symmetric ``a``.

    Returns (L, fail_col): fail_col is -1 on success, otherwise the index
    of the first column whose pivot fell at or below ``tol``.
    """
    n = a.shape[0]
    lower = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - np.dot(lower[j, :j], lower[j, :j])
        if d <= tol:
            return lower, j
        ljj = np.sqrt(d)
        lower[j, j] = ljj
        if j + 1 < n:
            lower[j + 1:, j] = (a[j + 1:, j] - lower[j + 1:, :j] @ lower[j, :j]) / ljj
    return lower, -1


def jacobi_eigh(a, off_tol, max_sweeps):
    """Cyclic Jacobi eigendecomposition of symmetric ``a``.

    Returns (w, v, sweeps, converged) with raw (unsorted) eigenvalues ``w``
    and eigenvectors in the columns of ``v``. Converged means the
    off-diagonal Frobenius norm dropped below ``off_tol``.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    sweeps = 0
    while sweeps < max_sweeps:
        off = np.sqrt(np.sum(a * a) - np.sum(np.diag(a) ** 2))
        if not off > off_tol:
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
                # A <- J^T A J applied as a column then a row rotation.
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                # re-mirror the touched rows so rounding cannot break symmetry
                a[:, p] = a[p, :]
                a[:, q] = a[q, :]
                v_p = v[:, p].copy()
                v_q = v[:, q].copy()
                v[:, p] = c * v_p - s * v_q
                v[:, q] = s * v_p + c * v_q
        sweeps += 1
    off = np.sqrt(np.sum(a * a) - np.sum(np.diag(a) ** 2))
    return np.diag(a).copy(), v, sweeps, bool(off <= off_tol)


def trial_dot(enroll_rows, test_rows, enroll_idx, test_idx, parallel=False):
    """Row-wise dot products for trial pairs, chunked to bound memory.

    ``parallel`` is accepted for signature parity with the jit backend and
    ignored here.
    """
    n = enroll_idx.shape[0]
    scores = np.empty(n, dtype=np.float64)
    chunk = 65536
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        e = enroll_rows[enroll_idx[start:stop]]
        t = test_rows[test_idx[start:stop]]
        scores[start:stop] = np.einsum("ij,ij->i", e, t)
    return scores


def xoshiro_block(states, count):
    """Advance xoshiro256++ streams in lockstep; returns (n_streams, count) uint64.

    ``states`` has shape (n_streams, 4) and is updated in place.
    """
    s0 = states[:, 0].copy()
    s1 = states[:, 1].copy()
    s2 = states[:, 2].copy()
    s3 = states[:, 3].copy()
    out = np.empty((states.shape[0], count), dtype=np.uint64)
    k23, k45, k17 = _U64(23), _U64(45), _U64(17)
    k41, k19, k47 = _U64(41), _U64(19), _U64(47)
    for i in range(count):
        tmp = s0 + s3
        out[:, i] = ((tmp << k23) | (tmp >> k41)) + s0
        t = s1 << k17
        s2 = s2 ^ s0
        s3 = s3 ^ s1
        s1 = s1 ^ s2
        s0 = s0 ^ s3
        s2 = s2 ^ t
        s3 = (s3 << k45) | (s3 >> k19)
    states[:, 0] = s0
    states[:, 1] = s1
    states[:, 2] = s2
    states[:, 3] = s3
    return out
