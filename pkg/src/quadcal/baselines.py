"""Reference integrators: Clenshaw-Curtis, tensor grids, Smolyak sparse
grids, and self-normalized ratio estimators over prior nodes/samples."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb

import numpy as np

from .bayes import PriorBox
from .rules import QuadratureRule

MAX_NODES = 10_000_000


@dataclass(frozen=True)
class UnivariateRule:
    """Nodes and weights on [-1, 1]; weights sum to the interval length."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.shape[0]


def clenshaw_curtis(n: int) -> UnivariateRule:
    """Clenshaw-Curtis rule with n points on [-1, 1].

    Chebyshev extrema nodes; exact for polynomials of degree n - 1 (and
    degree n for odd n).  n = 1 is the midpoint rule.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return UnivariateRule(nodes=np.array([0.0]), weights=np.array([2.0]))
    m = n - 1
    k = np.arange(n)
    nodes = np.cos(np.pi * k / m)
    c = np.where((k == 0) | (k == m), 1.0, 2.0)
    j = np.arange(1, m // 2 + 1)
    b = np.where(j == m / 2, 1.0, 2.0)
    corrections = (b / (4.0 * j**2 - 1.0))[None, :] * np.cos(
        2.0 * np.pi * np.outer(k, j) / m
    )
    weights = (c / m) * (1.0 - corrections.sum(axis=1))
    order = np.argsort(nodes)
    return UnivariateRule(nodes=nodes[order], weights=weights[order])


def _map_to_box(nodes_unit: np.ndarray, box: PriorBox) -> np.ndarray:
    return box.lower + 0.5 * (nodes_unit + 1.0) * (box.upper - box.lower)


def tensor_grid(counts, box: PriorBox) -> QuadratureRule:
    """Tensor product of Clenshaw-Curtis rules on the prior box, weights
    normalized to sum to one."""
    counts = [int(c) for c in np.atleast_1d(counts)]
    if len(counts) != box.dimension:
        raise ValueError("one point count per dimension required")
    if any(c < 1 for c in counts):
        raise ValueError("counts must be >= 1")
    total = int(np.prod(counts))
    if total > MAX_NODES:
        raise ValueError(f"tensor grid with {total} nodes exceeds the cap")
    rules = [clenshaw_curtis(c) for c in counts]
    nodes = np.array(
        [pt for pt in product(*(r.nodes for r in rules))], dtype=float
    )
    weights = np.array(
        [np.prod(ws) for ws in product(*(r.weights for r in rules))], dtype=float
    )
    weights /= weights.sum()
    return QuadratureRule(
        nodes=_map_to_box(nodes, box),
        weights=weights,
        exactness_count=0,
    )


def smolyak(d: int, level: int, box: PriorBox) -> QuadratureRule:
    """Smolyak combination of the linearly growing Clenshaw-Curtis
    sequence (n_l = l points at level index l - 1).  Weights may be
    negative; the rule is flagged accordingly."""
    if level < 0:
        raise ValueError("level must be >= 0")
    if d != box.dimension:
        raise ValueError("dimension mismatch with the prior box")
    q = d + level
    combined: dict[tuple, float] = {}
    for ell in product(*[range(1, q - d + 2)] * d):
        total = sum(ell)
        if not (q - d + 1 <= total <= q):
            continue
        coeff = (-1) ** (q - total) * comb(d - 1, q - total)
        if coeff == 0:
            continue
        rules = [clenshaw_curtis(li) for li in ell]
        for pt, ws in zip(
            product(*(r.nodes for r in rules)),
            product(*(r.weights for r in rules)),
        ):
            key = tuple(round(x, 13) for x in pt)
            combined[key] = combined.get(key, 0.0) + coeff * float(np.prod(ws)) / 2**d
    if len(combined) > MAX_NODES:
        raise ValueError("sparse grid exceeds the node cap")
    items = sorted(combined.items())
    nodes = np.array([k for k, _ in items], dtype=float)
    weights = np.array([w for _, w in items], dtype=float)
    return QuadratureRule(
        nodes=_map_to_box(nodes, box),
        weights=weights,
        exactness_count=0,
        allow_negative=True,
    )


def _ratio_estimate(weights, f_values, log_likelihoods):
    f_values = np.atleast_2d(np.asarray(f_values, dtype=float).T).T
    log_likelihoods = np.asarray(log_likelihoods, dtype=float)
    weights = np.asarray(weights, dtype=float)
    # Shift by the peak over nodes that actually carry weight so the
    # normalization cannot underflow to zero when the likelihood is
    # sharply peaked at a zero-weight node.
    carrying = weights != 0.0
    if not np.any(carrying):
        raise ValueError("rule has no nonzero weights")
    wl = np.zeros_like(weights)
    wl[carrying] = weights[carrying] * np.exp(
        log_likelihoods[carrying] - log_likelihoods[carrying].max()
    )
    return (wl @ f_values) / wl.sum()


def prior_rule_posterior_estimate(rule_on_prior: QuadratureRule, f_values, log_likelihoods) -> np.ndarray:
    """Self-normalized posterior estimate over a prior-weighted rule:
    sum w_k L_k f_k / sum w_k L_k with peak-shifted likelihoods L_k."""
    if len(rule_on_prior) != np.asarray(f_values).shape[0]:
        raise ValueError("value list must align with the rule nodes")
    return _ratio_estimate(rule_on_prior.weights, f_values, log_likelihoods)


def monte_carlo_posterior_mean(f_values, log_likelihoods) -> np.ndarray:
    """Same ratio estimator over plain prior samples (uniform weights)."""
    f_values = np.asarray(f_values, dtype=float)
    if f_values.shape[0] == 0:
        raise ValueError("empty sample set")
    return _ratio_estimate(np.ones(f_values.shape[0]), f_values, log_likelihoods)
