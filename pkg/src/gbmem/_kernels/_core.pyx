# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: scatter XOR, flooding min-sum BP, packed GF(2) RREF.

Same contracts and arithmetic as pyfallback.py (segment sums run in the
same order, so results agree with the fallback); see that module for the
layout conventions.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs

cnp.import_array()

cdef double MESSAGE_CLAMP = 1e6


def scatter_xor(cnp.uint64_t[:, ::1] buf,
                cnp.int64_t[::1] shot_idx,
                cnp.uint64_t[:, ::1] rows,
                cnp.int64_t[::1] mech_idx):
    """XOR packed rows into packed shot buffers (see pyfallback.scatter_xor)."""
    cdef Py_ssize_t nk = shot_idx.shape[0]
    cdef Py_ssize_t nw = buf.shape[1]
    cdef Py_ssize_t k, w, s, r
    for k in range(nk):
        s = shot_idx[k]
        r = mech_idx[k]
        for w in range(nw):
            buf[s, w] ^= rows[r, w]


cdef bint _syndrome_ok(cnp.uint8_t[::1] hard,
                       cnp.int64_t[::1] row_ptr,
                       cnp.int32_t[::1] col_idx,
                       cnp.uint8_t[::1] syndrome,
                       Py_ssize_t m) noexcept:
    cdef Py_ssize_t i, e
    cdef int par
    for i in range(m):
        par = 0
        for e in range(row_ptr[i], row_ptr[i + 1]):
            par ^= hard[col_idx[e]]
        if par != syndrome[i]:
            return 0
    return 1


def bp_min_sum(cnp.int64_t[::1] row_ptr,
               cnp.int32_t[::1] col_idx,
               cnp.int64_t[::1] col_ptr,
               cnp.int64_t[::1] edge_rm,
               cnp.float64_t[::1] llr,
               cnp.uint8_t[::1] syndrome,
               int max_iters,
               double ms_scale,
               cnp.float64_t[::1] posterior,
               cnp.uint8_t[::1] hard):
    """Flooding min-sum BP (see pyfallback.bp_min_sum for the contract)."""
    cdef Py_ssize_t m = row_ptr.shape[0] - 1
    cdef Py_ssize_t n = col_ptr.shape[0] - 1
    cdef Py_ssize_t nnz = col_idx.shape[0]
    if m <= 0 or n <= 0:
        raise ValueError("bp_min_sum needs at least one check and one variable")
    cdef Py_ssize_t i, j, e, k, it
    for i in range(m):
        if row_ptr[i + 1] - row_ptr[i] <= 0:
            raise ValueError("bp_min_sum requires every check and variable to touch an edge")
    for j in range(n):
        if col_ptr[j + 1] - col_ptr[j] <= 0:
            raise ValueError("bp_min_sum requires every check and variable to touch an edge")

    for j in range(n):
        posterior[j] = llr[j]
        hard[j] = 1 if llr[j] < 0.0 else 0
    if _syndrome_ok(hard, row_ptr, col_idx, syndrome, m):
        return True, 0

    cdef cnp.float64_t[::1] nu = np.empty(nnz, dtype=np.float64)
    cdef cnp.float64_t[::1] mu = np.empty(nnz, dtype=np.float64)
    cdef double a, m1, m2, excl, tot
    cdef int nmin, par, sgn
    for e in range(nnz):
        nu[e] = llr[col_idx[e]]

    for it in range(max_iters):
        # check-to-variable: signed excluded minimum per row
        for i in range(m):
            m1 = INFINITY
            m2 = INFINITY
            nmin = 0
            par = syndrome[i]
            for e in range(row_ptr[i], row_ptr[i + 1]):
                a = fabs(nu[e])
                if nu[e] < 0.0:
                    par ^= 1
                if a < m1:
                    m2 = m1
                    m1 = a
                    nmin = 1
                elif a == m1:
                    nmin += 1
                elif a < m2:
                    m2 = a
            for e in range(row_ptr[i], row_ptr[i + 1]):
                a = fabs(nu[e])
                excl = m2 if (a == m1 and nmin == 1) else m1
                if excl > MESSAGE_CLAMP:
                    excl = MESSAGE_CLAMP
                sgn = par ^ (1 if nu[e] < 0.0 else 0)
                mu[e] = (-excl if sgn else excl) * ms_scale

        # variable-to-check and posterior; accumulate starting from the
        # prior in edge order, matching the fallback bit for bit
        for j in range(n):
            tot = llr[j]
            for k in range(col_ptr[j], col_ptr[j + 1]):
                tot += mu[edge_rm[k]]
            posterior[j] = tot
            hard[j] = 1 if tot < 0.0 else 0
            for k in range(col_ptr[j], col_ptr[j + 1]):
                nu[edge_rm[k]] = tot - mu[edge_rm[k]]

        if _syndrome_ok(hard, row_ptr, col_idx, syndrome, m):
            return True, it + 1

    return False, max_iters


def gf2_rref_packed(cnp.uint64_t[:, ::1] mat, cnp.int64_t[::1] col_order):
    """In-place full RREF of a packed GF(2) matrix (see pyfallback)."""
    cdef Py_ssize_t rows = mat.shape[0]
    cdef Py_ssize_t words = mat.shape[1]
    cdef Py_ssize_t ncand = col_order.shape[0]
    if rows == 0 or ncand == 0:
        return 0, np.empty(0, dtype=np.int64)
    pivots_arr = np.empty(rows if rows < ncand else ncand, dtype=np.int64)
    cdef cnp.int64_t[::1] pivots = pivots_arr
    cdef Py_ssize_t rank = 0
    cdef Py_ssize_t idx, c, w, r, k, p
    cdef cnp.uint64_t b, tmp
    for idx in range(ncand):
        c = col_order[idx]
        w = c >> 6
        b = <cnp.uint64_t> (c & 63)
        p = -1
        for r in range(rank, rows):
            if (mat[r, w] >> b) & <cnp.uint64_t> 1:
                p = r
                break
        if p < 0:
            continue
        if p != rank:
            for k in range(words):
                tmp = mat[rank, k]
                mat[rank, k] = mat[p, k]
                mat[p, k] = tmp
        for r in range(rows):
            if r != rank and ((mat[r, w] >> b) & <cnp.uint64_t> 1):
                for k in range(words):
                    mat[r, k] ^= mat[rank, k]
        pivots[rank] = c
        rank += 1
        if rank == rows:
            break
    return rank, pivots_arr[:rank].copy()
