# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels in ``_pykernels``.

Signatures and results match the NumPy fallback; see that module for the
contract of each function.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef void _scaled_sqdist(const double[:, ::1] xv, const double[:, ::1] yv, Py_ssize_t i0,
                         double scale, double[:, ::1] o) noexcept nogil:
    # o[i - i0, j] = scale * |x_i - y_j|^2 for the rows covered by o
    cdef Py_ssize_t i, j, a, d = xv.shape[1]
    cdef double acc, diff
    for i in range(o.shape[0]):
        for j in range(o.shape[1]):
            acc = 0.0
            for a in range(d):
                diff = xv[i0 + i, a] - yv[j, a]
                acc = acc + diff * diff
            o[i, j] = scale * acc


def se_cross(X, Y, double sigma0_sq, double length_scale):
    # distances are compiled; the exponential goes through NumPy's vectorized exp
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0], n = yv.shape[0]
    out = np.empty((m, n), dtype=np.float64)
    if m == 0 or n == 0:
        return out
    if yv.shape[1] != xv.shape[1]:
        raise ValueError("dimension mismatch: %d vs %d" % (xv.shape[1], yv.shape[1]))
    cdef double[:, ::1] o = out
    with nogil:
        _scaled_sqdist(xv, yv, 0, -0.5 / (length_scale * length_scale), o)
    np.exp(out, out=out)
    out *= sigma0_sq
    return out


def rank1_downdate_rowsq(double[:, ::1] D, const double[::1] v,
                         const double[::1] w, double[::1] rowsq):
    cdef Py_ssize_t m = D.shape[0], n = D.shape[1]
    cdef Py_ssize_t i, j
    cdef double vi, acc, x
    with nogil:
        for i in range(m):
            vi = v[i]
            acc = 0.0
            for j in range(n):
                x = D[i, j] - vi * w[j]
                D[i, j] = x
                acc = acc + x * x
            rowsq[i] = acc


def residual_rowsq(Phi, V, W, double[::1] rowsq):
    # the k-inner product is delegated to BLAS; only the fused subtract/square is compiled
    cdef cnp.ndarray R
    if V.shape[0]:
        R = np.ascontiguousarray(V.T @ W)
    else:
        R = np.zeros_like(Phi)
    cdef const double[:, ::1] p = np.ascontiguousarray(Phi, dtype=np.float64)
    cdef const double[:, ::1] r = R
    cdef Py_ssize_t m = p.shape[0], n = p.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc, x
    with nogil:
        for i in range(m):
            acc = 0.0
            for j in range(n):
                x = p[i, j] - r[i, j]
                acc = acc + x * x
            rowsq[i] = acc


def greedy_cliques(adj):
    cdef const cnp.uint8_t[:, ::1] a = np.ascontiguousarray(adj, dtype=np.uint8)
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.uint8_t[::1] cand = np.empty(n, dtype=np.uint8)
    cdef Py_ssize_t[::1] members = np.empty(max(n, 1), dtype=np.intp)
    cdef Py_ssize_t v, u, t, size
    out = []
    for v in range(n):
        with nogil:
            for u in range(n):
                cand[u] = a[v, u]
            cand[v] = 0
            members[0] = v
            size = 1
            for u in range(n):
                if cand[u]:
                    members[size] = u
                    size += 1
                    # earlier indices are already scanned; prune only the tail
                    for t in range(u + 1, n):
                        if cand[t] and not a[u, t]:
                            cand[t] = 0
        out.append(np.sort(np.asarray(members[:size]).copy()))
    return out


def se_cross_matvec(X, Y, double sigma0_sq, double length_scale, w):
    cdef const double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] yv = np.ascontiguousarray(Y, dtype=np.float64)
    wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0], n = yv.shape[0]
    out = np.zeros(m, dtype=np.float64)
    if m == 0 or n == 0:
        return out
    if yv.shape[1] != xv.shape[1] or wv.shape[0] != n:
        raise ValueError("shape mismatch in se_cross_matvec")
    cdef double scale = -0.5 / (length_scale * length_scale)
    cdef Py_ssize_t block = max(1, 262144 // n), start, stop
    buf = np.empty((min(block, m), n), dtype=np.float64)
    cdef double[:, ::1] bv
    for start in range(0, m, block):
        stop = min(start + block, m)
        chunk = buf[:stop - start]
        bv = chunk
        with nogil:
            _scaled_sqdist(xv, yv, start, scale, bv)
        np.exp(chunk, out=chunk)
        np.dot(chunk, wv, out=out[start:stop])
    out *= sigma0_sq
    return out
