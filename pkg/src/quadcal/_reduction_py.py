"""Pure-Python node-elimination kernels.

Reference implementation of the weight-elimination loops; the compiled
extension in ``_reduction.pyx`` implements the same contract.  The active
kernel is selected at import time in ``implicit``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# Gaussian reduction of the pending null vectors divides by the pivot
# entry; entries below this (after unit max-norm scaling) would amplify
# rounding error, so the round stops and fresh null vectors are computed.
PIVOT_TOL = 0.01


class EliminationError(RuntimeError):
    pass


def choose_alpha(w: np.ndarray, c1: np.ndarray, protect: np.ndarray):
    """Pick the step size along a null vector.

    Returns (alpha, pivot, zeroed) where `zeroed` are the columns whose
    weights hit exactly zero.  Both admissible endpoints keep all weights
    non-negative; preference order: an endpoint that zeroes an
    unprotected column, then the endpoint zeroing the most columns at
    once, ties broken toward the upper endpoint, then the lowest index.
    """
    protect = np.asarray(protect).astype(bool)
    pos = c1 > 0.0
    neg = c1 < 0.0
    candidates = []
    if np.any(pos):
        ratios = w[pos] / c1[pos]
        alpha = ratios.min()
        zeroed = np.flatnonzero(pos)[ratios == alpha]
        candidates.append((alpha, zeroed, True))
    if np.any(neg):
        ratios = w[neg] / c1[neg]
        alpha = ratios.max()
        zeroed = np.flatnonzero(neg)[ratios == alpha]
        candidates.append((alpha, zeroed, False))
    if not candidates:
        raise EliminationError("null vector has no nonzero entries on active columns")

    def rank(item):
        _, zeroed, is_max = item
        unprotected = int(np.any(~protect[zeroed]))
        return (unprotected, len(zeroed), is_max)

    candidates.sort(key=rank, reverse=True)
    alpha, zeroed, _ = candidates[0]
    free = zeroed[~protect[zeroed]]
    pivot = int(free[0]) if free.size else int(zeroed[0])
    return float(alpha), pivot, zeroed


def reduce_block(C: np.ndarray, w: np.ndarray, protect: np.ndarray) -> np.ndarray:
    """Run one elimination step per null vector in `C`, in place.

    `C` is (B, m): B null vectors of the window Vandermonde matrix.
    `w` is modified in place; pivoted columns are assigned exactly zero.
    Returns the array of pivot column indices (possibly fewer than B if a
    null vector degenerates to zero during the Gaussian reduction).
    """
    B, m = C.shape
    pivots = []
    for j in range(B):
        c1 = C[j]
        scale = np.abs(c1).max()
        if scale == 0.0:
            continue
        c1 /= scale
        alpha, pivot, zeroed = choose_alpha(w, c1, protect)
        w -= alpha * c1
        w[w < 0.0] = 0.0
        w[zeroed] = 0.0
        pivots.append(pivot)
        # Gaussian reduction: keep the pivot column zero in later steps.
        # A small pivot entry would amplify rounding error through the
        # remaining null vectors, so stop early instead; the caller
        # recomputes fresh null vectors for the surviving columns.
        if abs(c1[pivot]) < PIVOT_TOL:
            break
        if j + 1 < B:
            factors = C[j + 1 :, pivot] / c1[pivot]
            C[j + 1 :] -= factors[:, None] * c1
            C[j + 1 :, pivot] = 0.0
            # Rows dominated by cancellation are no longer reliable null
            # vectors; zero them so they are skipped.
            scale_new = np.abs(C[j + 1 :]).max(axis=1)
            bad = scale_new < (1.0 + np.abs(factors)) * 1e-10
            C[j + 1 :][bad] = 0.0
    return np.asarray(pivots, dtype=np.int64)


def streaming_reduce(V: np.ndarray, weights: np.ndarray, block: int) -> np.ndarray:
    """Streaming Caratheodory elimination over all sample columns.

    Same contract as the compiled kernel: keeps at most ``V.shape[0]``
    surviving columns at a time, appending `block` fresh columns per round
    and eliminating back down.  `weights` is updated in place; returns the
    surviving column indices (ascending).
    """
    n_basis, K = V.shape
    active = np.empty(0, dtype=np.int64)
    pos = 0
    while pos < K or active.size > n_basis:
        take = min(max(n_basis + block - active.size, 0), K - pos)
        window = np.concatenate([active, np.arange(pos, pos + take, dtype=np.int64)])
        pos += take
        n_remove = window.size - n_basis
        if n_remove <= 0:
            active = window
            break
        # Orthonormal null basis of the window matrix A from the full QR
        # of A^T: the trailing columns of Q are orthogonal to range(A^T).
        q, _ = scipy.linalg.qr(V[:, window].T, mode="full")
        C = np.ascontiguousarray(q[:, n_basis:].T)
        w_win = np.ascontiguousarray(weights[window])
        protect = np.zeros(window.size, dtype=bool)
        pivots = reduce_block(C, w_win, protect)
        if pivots.size == 0:
            raise EliminationError("elimination made no progress")
        weights[window] = w_win
        keep = np.ones(window.size, dtype=bool)
        keep[pivots] = False
        active = window[keep]
    return active
