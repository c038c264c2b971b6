"""Implicit quadrature rule construction.

Given nodes that must be kept (they carry model evaluations) and a large
sample set from a proposal density, build a positive-weight rule that
matches all sample moments of the monomial basis while putting nonzero
weight on at most ``len(basis)`` sample points.  Nodes are removed one
per null vector of the Vandermonde system; the step size along each null
vector is chosen so some weight hits exactly zero while all others stay
non-negative.

The elimination inner loop is the hot path and runs in a compiled kernel
when available (set QUADCAL_PURE_PYTHON=1 to force the NumPy fallback).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.spatial

from . import _reduction_py
from .basis import MultiIndexBasis, vandermonde
from .rules import QuadratureRule, node_identity_tol

if os.environ.get("QUADCAL_PURE_PYTHON"):
    _kernel = _reduction_py
    HAVE_COMPILED_KERNEL = False
else:
    try:
        from . import _reduction as _kernel  # type: ignore[no-redef]

        HAVE_COMPILED_KERNEL = True
    except ImportError:
        _kernel = _reduction_py
        HAVE_COMPILED_KERNEL = False

TOL_NULL = 1e-10
TOL_EXACT = 1e-8

# Fresh columns handled per elimination round: larger blocks amortize the
# factorization cost of each round, smaller blocks keep the
# Gaussian-reduction work bounded.  Growing the block with the basis size
# keeps the per-column cost near-constant for large bases.
_BLOCK_MIN = 32


def _block_size(n_basis: int) -> int:
    return max(_BLOCK_MIN, n_basis // 8)


class ImplicitRuleError(RuntimeError):
    pass


@dataclass(frozen=True)
class SampleMoments:
    values: np.ndarray


@dataclass(frozen=True)
class ReductionState:
    """Intermediate state of the elimination: extended nodes, original
    weights, the accumulated null-space combination, and which columns
    still carry (potential) weight."""

    nodes: np.ndarray
    weights: np.ndarray
    accumulated_c: np.ndarray
    active_columns: np.ndarray
    pending: int

    @property
    def current_weights(self) -> np.ndarray:
        return self.weights - self.accumulated_c


def sample_moments(basis: MultiIndexBasis, samples) -> SampleMoments:
    """Mean of every basis monomial over the sample set."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        raise ImplicitRuleError("empty sample set")
    return SampleMoments(values=vandermonde(basis, samples).mean(axis=1))


def extend_rule(retained: QuadratureRule | None, samples, exactness_count: int | None = None) -> ReductionState:
    """Extended rule: retained nodes at weight zero followed by the
    samples at uniform weight 1/(K+1).  Matches all sample moments by
    construction."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        raise ImplicitRuleError("empty sample set")
    if retained is not None and len(retained) > 0:
        nodes = np.vstack([retained.nodes, samples])
        n_retained = len(retained)
    else:
        nodes = samples
        n_retained = 0
    n = nodes.shape[0]
    weights = np.zeros(n)
    weights[n_retained:] = 1.0 / samples.shape[0]
    pending = 0 if exactness_count is None else max(0, n - exactness_count)
    return ReductionState(
        nodes=nodes,
        weights=weights,
        accumulated_c=np.zeros(n),
        active_columns=np.arange(n, dtype=np.int64),
        pending=pending,
    )


def null_vector(submatrix: np.ndarray, tol_null: float = TOL_NULL) -> np.ndarray:
    """A null vector of a matrix with more columns than rows, normalized
    to unit max-norm, with deterministic sign."""
    submatrix = np.atleast_2d(np.asarray(submatrix, dtype=float))
    rows, cols = submatrix.shape
    if cols <= rows:
        raise ImplicitRuleError("submatrix must have more columns than rows")
    _, s, vh = scipy.linalg.svd(submatrix)
    v = vh[-1]
    norm = np.abs(v).max()
    v = v / norm
    peak = int(np.abs(v).argmax())
    if v[peak] < 0:
        v = -v
    resid = np.linalg.norm(submatrix @ v)
    scale = (s[0] if s.size else 1.0) * np.linalg.norm(v)
    if resid > tol_null * max(scale, 1.0):
        raise ImplicitRuleError(
            f"null vector residual {resid:.3e} exceeds tolerance"
        )
    return v


def elimination_step(state: ReductionState, null_vec: np.ndarray, protect_count: int) -> ReductionState:
    """One elimination: move along `null_vec` until a weight hits zero.

    `null_vec` must be supported on the active columns.  The zeroed
    column is assigned exactly zero and removed from the active set; the
    first `protect_count` columns are preferred survivors.
    """
    null_vec = np.asarray(null_vec, dtype=float)
    w_cur = state.current_weights
    active = state.active_columns
    protect = np.zeros(len(active), dtype=bool)
    protect[active < protect_count] = True
    alpha, pivot_local, zeroed_local = _reduction_py.choose_alpha(
        w_cur[active], null_vec[active], protect
    )
    c_new = state.accumulated_c + alpha * null_vec
    pivot = int(active[pivot_local])
    zeroed = active[zeroed_local]
    c_new[zeroed] = state.weights[zeroed]
    new_active = active[active != pivot]
    return replace(
        state,
        accumulated_c=c_new,
        active_columns=new_active,
        pending=max(0, state.pending - 1),
    )


def _dedup_samples(samples: np.ndarray, retained_nodes: np.ndarray | None, tol: float) -> np.ndarray:
    _, first = np.unique(samples, axis=0, return_index=True)
    keep = np.zeros(samples.shape[0], dtype=bool)
    keep[np.sort(first)] = True
    if retained_nodes is not None and retained_nodes.shape[0] > 0:
        if samples.shape[1] == 1:
            anchors = np.sort(retained_nodes[:, 0])
            idx = np.clip(
                np.searchsorted(anchors, samples[:, 0]), 1, anchors.size - 1
            )
            dist = np.minimum(
                np.abs(samples[:, 0] - anchors[idx - 1]),
                np.abs(samples[:, 0] - anchors[np.minimum(idx, anchors.size - 1)]),
            )
        else:
            dist, _ = scipy.spatial.cKDTree(retained_nodes).query(samples)
        keep &= dist > tol
    return samples[keep]


def construct_implicit_rule(
    retained: QuadratureRule | None,
    samples,
    basis: MultiIndexBasis,
    tol_exact: float = TOL_EXACT,
) -> QuadratureRule:
    """Positive-weight rule matching the sample moments of `basis`.

    The returned rule keeps every retained node (model evaluations stay
    usable, possibly at zero weight) and draws at most ``len(basis)``
    weighted nodes from `samples`.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n_basis = len(basis)
    n_retained = 0 if retained is None else len(retained)
    if retained is not None and retained.evaluated_count != n_retained:
        raise ImplicitRuleError("retained rule must be fully evaluated")

    if basis.box is not None:
        lo, hi = basis.box
        tol = node_identity_tol(float(np.linalg.norm(hi - lo)))
    else:
        tol = node_identity_tol()
    samples = _dedup_samples(
        samples, retained.nodes if retained is not None else None, tol
    )
    n_samples = samples.shape[0]
    if n_samples <= n_basis:
        raise ImplicitRuleError(
            f"need more than {n_basis} distinct samples, got {n_samples}"
        )

    V = vandermonde(basis, samples)
    mu = V.mean(axis=1)

    weights = np.full(n_samples, 1.0 / n_samples)
    block = _block_size(n_basis)

    # Streaming elimination: keep at most n_basis surviving columns, add
    # the next block of fresh sample columns, and eliminate back down to
    # n_basis.  Every pass conserves the moments of the full sample set.
    try:
        active = np.asarray(
            _kernel.streaming_reduce(np.ascontiguousarray(V), weights, block),
            dtype=np.int64,
        )
    except _kernel.EliminationError as exc:
        raise ImplicitRuleError(str(exc)) from exc

    survivors = active[weights[active] > 0.0]
    w_out = weights[survivors]
    err = np.abs(V[:, survivors] @ w_out - mu).max()
    if err > tol_exact * max(1.0, np.abs(mu).max()):
        raise ImplicitRuleError(
            f"moment mismatch {err:.3e} exceeds tolerance {tol_exact:.1e}"
        )

    if n_retained:
        nodes = np.vstack([retained.nodes, samples[survivors]])
        full_weights = np.concatenate([np.zeros(n_retained), w_out])
    else:
        nodes = samples[survivors]
        full_weights = w_out
    return QuadratureRule(
        nodes=nodes,
        weights=full_weights,
        exactness_count=n_basis,
        evaluated_count=n_retained,
    )
