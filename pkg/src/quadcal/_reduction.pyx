# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled node-elimination kernels; mirror ``_reduction_py``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

from libc.math cimport INFINITY
from scipy.linalg.cython_lapack cimport dgelqf, dormlq

# Gaussian reduction of the pending null vectors divides by the pivot
# entry; entries below this (after unit max-norm scaling) would amplify
# rounding error, so the round stops and fresh null vectors are computed.
cdef double PIVOT_TOL = 0.01


class EliminationError(RuntimeError):
    pass


cdef struct Candidate:
    double alpha
    int count
    int pivot
    bint has_free
    bint valid


cdef Candidate _scan(double[::1] w, double[::1] c1, unsigned char[::1] protect,
                     bint positive) noexcept:
    """Endpoint of the admissible alpha interval for one sign of c1."""
    cdef Candidate cand
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t k
    cdef double ratio
    cand.valid = False
    cand.count = 0
    cand.pivot = -1
    cand.has_free = False
    cand.alpha = -INFINITY if positive else INFINITY
    # First pass: the binding ratio (min over c1>0, max over c1<0).
    cdef bint first = True
    for k in range(m):
        if positive and c1[k] > 0.0:
            ratio = w[k] / c1[k]
            if first or ratio < cand.alpha:
                cand.alpha = ratio
                first = False
        elif (not positive) and c1[k] < 0.0:
            ratio = w[k] / c1[k]
            if first or ratio > cand.alpha:
                cand.alpha = ratio
                first = False
    if first:
        return cand
    cand.valid = True
    # Second pass: columns hitting zero at this alpha.
    for k in range(m):
        if (positive and c1[k] > 0.0) or ((not positive) and c1[k] < 0.0):
            if w[k] / c1[k] == cand.alpha:
                cand.count += 1
                if not protect[k]:
                    if not cand.has_free:
                        cand.pivot = <int>k
                    cand.has_free = True
                elif cand.pivot < 0:
                    cand.pivot = <int>k
    return cand


def reduce_block(double[:, ::1] C, double[::1] w, unsigned char[::1] protect):
    """Run one elimination step per null vector in C, in place.

    Same contract as the pure-Python kernel: returns pivot indices.
    """
    cdef Py_ssize_t B = C.shape[0]
    cdef Py_ssize_t m = C.shape[1]
    cdef Py_ssize_t j, k, i
    cdef double scale, alpha, factor, piv_val
    cdef Candidate cmax, cmin, best
    cdef bint use_max
    cdef cnp.ndarray pivots_arr = np.empty(B, dtype=np.int64)
    cdef long[::1] pivots = pivots_arr
    cdef Py_ssize_t npiv = 0
    cdef double[::1] c1

    for j in range(B):
        c1 = C[j]
        scale = 0.0
        for k in range(m):
            if c1[k] > scale:
                scale = c1[k]
            elif -c1[k] > scale:
                scale = -c1[k]
        if scale == 0.0:
            continue
        for k in range(m):
            c1[k] /= scale

        cmax = _scan(w, c1, protect, True)
        cmin = _scan(w, c1, protect, False)
        if not cmax.valid and not cmin.valid:
            raise EliminationError(
                "null vector has no nonzero entries on active columns")
        if cmax.valid and cmin.valid:
            # Prefer an endpoint zeroing an unprotected column, then the
            # one zeroing the most columns, ties toward the upper endpoint.
            if cmax.has_free != cmin.has_free:
                use_max = cmax.has_free
            elif cmax.count != cmin.count:
                use_max = cmax.count > cmin.count
            else:
                use_max = True
        else:
            use_max = cmax.valid
        if use_max:
            best = cmax
        else:
            best = cmin
        alpha = best.alpha

        for k in range(m):
            if ((use_max and c1[k] > 0.0) or ((not use_max) and c1[k] < 0.0)) \
                    and w[k] / c1[k] == alpha:
                w[k] = 0.0
            else:
                w[k] -= alpha * c1[k]
                if w[k] < 0.0:
                    w[k] = 0.0
        w[best.pivot] = 0.0
        pivots[npiv] = best.pivot
        npiv += 1

        piv_val = c1[best.pivot]
        if piv_val < PIVOT_TOL and -piv_val < PIVOT_TOL:
            break
        for i in range(j + 1, B):
            factor = C[i, best.pivot] / piv_val
            if factor != 0.0:
                for k in range(m):
                    C[i, k] -= factor * c1[k]
            C[i, best.pivot] = 0.0
            scale = 0.0
            for k in range(m):
                if C[i, k] > scale:
                    scale = C[i, k]
                elif -C[i, k] > scale:
                    scale = -C[i, k]
            if scale < (1.0 + (factor if factor > 0.0 else -factor)) * 1e-10:
                for k in range(m):
                    C[i, k] = 0.0

    return pivots_arr[:npiv]


cdef Py_ssize_t _eliminate(double* C, double* w, Py_ssize_t B, Py_ssize_t m,
                           unsigned char* removed) except -1:
    """Inline elimination over B null vectors (rows of C, row-major), no
    protected columns.  Marks pivoted columns in `removed`; returns the
    number of pivots."""
    cdef Py_ssize_t j, k, i, npiv = 0, pivot
    cdef double scale, alpha, factor, piv_val, ratio
    cdef double amax, amin
    cdef Py_ssize_t cntmax, cntmin, pivmax, pivmin
    cdef bint havemax, havemin, use_max
    cdef double* c1
    for j in range(B):
        c1 = C + j * m
        scale = 0.0
        for k in range(m):
            if c1[k] > scale:
                scale = c1[k]
            elif -c1[k] > scale:
                scale = -c1[k]
        if scale == 0.0:
            continue
        for k in range(m):
            c1[k] /= scale
        # Admissible endpoints of the step interval.
        havemax = False
        havemin = False
        amax = 0.0
        amin = 0.0
        for k in range(m):
            if c1[k] > 0.0:
                ratio = w[k] / c1[k]
                if (not havemax) or ratio < amax:
                    amax = ratio
                    havemax = True
            elif c1[k] < 0.0:
                ratio = w[k] / c1[k]
                if (not havemin) or ratio > amin:
                    amin = ratio
                    havemin = True
        if not havemax and not havemin:
            raise EliminationError(
                "null vector has no nonzero entries on active columns")
        cntmax = 0
        cntmin = 0
        pivmax = -1
        pivmin = -1
        for k in range(m):
            if havemax and c1[k] > 0.0 and w[k] / c1[k] == amax:
                cntmax += 1
                if pivmax < 0:
                    pivmax = k
            elif havemin and c1[k] < 0.0 and w[k] / c1[k] == amin:
                cntmin += 1
                if pivmin < 0:
                    pivmin = k
        if havemax and havemin:
            use_max = cntmax >= cntmin
        else:
            use_max = havemax
        if use_max:
            alpha = amax
            pivot = pivmax
        else:
            alpha = amin
            pivot = pivmin
        for k in range(m):
            if ((use_max and c1[k] > 0.0) or ((not use_max) and c1[k] < 0.0)) \
                    and w[k] / c1[k] == alpha:
                w[k] = 0.0
            else:
                w[k] -= alpha * c1[k]
                if w[k] < 0.0:
                    w[k] = 0.0
        w[pivot] = 0.0
        removed[pivot] = 1
        npiv += 1
        piv_val = c1[pivot]
        if piv_val < PIVOT_TOL and -piv_val < PIVOT_TOL:
            break
        for i in range(j + 1, B):
            factor = C[i * m + pivot] / piv_val
            if factor != 0.0:
                for k in range(m):
                    C[i * m + k] -= factor * c1[k]
            C[i * m + pivot] = 0.0
            scale = 0.0
            for k in range(m):
                if C[i * m + k] > scale:
                    scale = C[i * m + k]
                elif -C[i * m + k] > scale:
                    scale = -C[i * m + k]
            if scale < (1.0 + (factor if factor > 0.0 else -factor)) * 1e-10:
                for k in range(m):
                    C[i * m + k] = 0.0
    return npiv


def streaming_reduce(double[:, ::1] V, double[::1] weights, Py_ssize_t block):
    """Streaming Caratheodory elimination over all sample columns.

    V is the (n_basis, K) Vandermonde matrix; `weights` (K,) is updated in
    place.  Keeps at most n_basis surviving columns at a time, repeatedly
    appending the next `block` fresh columns and eliminating back down.
    Returns the surviving column indices (ascending).

    Null vectors per round come from an LQ factorization of the window
    matrix A (n_basis x m): with A = [L 0] Q, the last m - n_basis rows of
    Q are an orthonormal basis of the null space (for any rank of A).
    """
    cdef Py_ssize_t n_basis = V.shape[0]
    cdef Py_ssize_t K = V.shape[1]
    cdef Py_ssize_t m_max = n_basis + block
    cdef Py_ssize_t b_max = m_max - n_basis
    cdef Py_ssize_t pos = 0, ns = 0, take, m, n_remove, i, j, npiv
    cdef int info = 0, lwork, mm, nn, kk, lda, ldc
    cdef char side = b'R'
    cdef char trans = b'N'

    cdef cnp.ndarray win_arr = np.empty(m_max, dtype=np.int64)
    cdef long* win = <long*>cnp.PyArray_DATA(win_arr)
    cdef cnp.ndarray a_arr = np.empty(max(n_basis * m_max, 1), dtype=np.float64)
    cdef double* a = <double*>cnp.PyArray_DATA(a_arr)
    cdef cnp.ndarray tau_arr = np.empty(max(n_basis, 1), dtype=np.float64)
    cdef double* tau = <double*>cnp.PyArray_DATA(tau_arr)
    cdef cnp.ndarray cf_arr = np.empty(max(b_max * m_max, 1), dtype=np.float64)
    cdef double* cf = <double*>cnp.PyArray_DATA(cf_arr)
    cdef cnp.ndarray C_arr = np.empty(max(b_max * m_max, 1), dtype=np.float64)
    cdef double* C = <double*>cnp.PyArray_DATA(C_arr)
    cdef cnp.ndarray w_arr = np.empty(m_max, dtype=np.float64)
    cdef double* w = <double*>cnp.PyArray_DATA(w_arr)
    cdef cnp.ndarray rem_arr = np.empty(m_max, dtype=np.uint8)
    cdef unsigned char* removed = <unsigned char*>cnp.PyArray_DATA(rem_arr)

    # Workspace query at the largest shapes used by either routine.
    cdef double wk1 = 0.0, wk2 = 0.0
    mm = <int>n_basis
    nn = <int>m_max
    lda = mm
    lwork = -1
    dgelqf(&mm, &nn, a, &lda, tau, &wk1, &lwork, &info)
    if info != 0:
        raise EliminationError("LQ workspace query failed")
    mm = <int>b_max
    nn = <int>m_max
    kk = <int>n_basis
    ldc = mm
    lwork = -1
    dormlq(&side, &trans, &mm, &nn, &kk, a, &lda, tau, cf, &ldc, &wk2,
           &lwork, &info)
    if info != 0:
        raise EliminationError("LQ workspace query failed")
    lwork = <int>(wk1 if wk1 > wk2 else wk2) + 1
    cdef cnp.ndarray work_arr = np.empty(lwork, dtype=np.float64)
    cdef double* work = <double*>cnp.PyArray_DATA(work_arr)

    while pos < K or ns > n_basis:
        take = n_basis + block - ns
        if take > K - pos:
            take = K - pos
        m = ns + take
        for j in range(take):
            win[ns + j] = pos + j
        pos += take
        n_remove = m - n_basis
        if n_remove <= 0:
            ns = m
            break
        # Gather the window columns into a Fortran-order buffer.
        for j in range(m):
            for i in range(n_basis):
                a[i + j * n_basis] = V[i, win[j]]
        mm = <int>n_basis
        nn = <int>m
        lda = mm
        dgelqf(&mm, &nn, a, &lda, tau, work, &lwork, &info)
        if info != 0:
            raise EliminationError("LQ factorization failed")
        # Last n_remove rows of Q: apply Q from the right to the matching
        # rows of the identity (cf is column-major n_remove x m).
        for j in range(m):
            for i in range(n_remove):
                cf[i + j * n_remove] = 1.0 if j == n_basis + i else 0.0
        mm = <int>n_remove
        nn = <int>m
        kk = <int>n_basis
        ldc = mm
        dormlq(&side, &trans, &mm, &nn, &kk, a, &lda, tau, cf, &ldc, work,
               &lwork, &info)
        if info != 0:
            raise EliminationError("null-space construction failed")
        for i in range(n_remove):
            for j in range(m):
                C[i * m + j] = cf[i + j * n_remove]
        for j in range(m):
            w[j] = weights[win[j]]
            removed[j] = 0
        npiv = _eliminate(C, w, n_remove, m, removed)
        if npiv == 0:
            raise EliminationError("elimination made no progress")
        ns = 0
        for j in range(m):
            weights[win[j]] = w[j]
            if not removed[j]:
                win[ns] = win[j]
                ns += 1
    return win_arr[:ns].copy()
