"""Quadrature rule value type: evaluation, nesting checks, serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Weights in [-NEG_WEIGHT_TOL, 0) are floating-point noise and are clamped
# to zero; anything more negative indicates a construction bug.
NEG_WEIGHT_TOL = 1e-12


class RuleError(ValueError):
    pass


def node_identity_tol(box_diameter: float = 0.0) -> float:
    """Tolerance for deciding two nodes are the same point."""
    return 1e-12 * (1.0 + box_diameter)


def clamp_weights(weights: np.ndarray) -> np.ndarray:
    """Clamp tiny negative weights to zero; reject genuine negatives."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < -NEG_WEIGHT_TOL):
        worst = float(weights.min())
        raise RuleError(f"negative weight {worst} below tolerance {-NEG_WEIGHT_TOL}")
    return np.where(weights < 0.0, 0.0, weights)


@dataclass(frozen=True)
class QuadratureRule:
    """Positive-weight quadrature rule.

    ``nodes`` has shape (n, d); ``weights`` has shape (n,).  The first
    ``evaluated_count`` nodes carry cached model evaluations elsewhere;
    ``exactness_count`` is the size of the monomial basis whose sample
    moments the rule matches.
    """

    nodes: np.ndarray
    weights: np.ndarray
    exactness_count: int
    evaluated_count: int = 0
    # Sparse-grid baselines legitimately carry negative weights and are
    # exempt from the positivity invariant.
    allow_negative: bool = False

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        if self.allow_negative:
            weights = np.asarray(self.weights, dtype=float)
        else:
            weights = clamp_weights(self.weights)
        if weights.shape != (nodes.shape[0],):
            raise RuleError("weights and nodes must have the same length")
        if not (0 <= self.evaluated_count <= nodes.shape[0]):
            raise RuleError("evaluated_count out of range")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.shape[0]

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class RuleEstimate:
    value: np.ndarray
    normalization: float


def apply(rule: QuadratureRule, values_at_nodes) -> RuleEstimate:
    """Weighted sum of (possibly vector-valued) integrand values."""
    values = np.asarray(values_at_nodes, dtype=float)
    if values.shape[0] != len(rule):
        raise RuleError(
            f"{values.shape[0]} values for a rule with {len(rule)} nodes"
        )
    return RuleEstimate(
        value=rule.weights @ values, normalization=rule.total_weight
    )


def apply_normalized(rule: QuadratureRule, values_at_nodes) -> np.ndarray:
    """Self-normalized estimate: the posterior expectation with the
    evidence folded out of the weights."""
    est = apply(rule, values_at_nodes)
    if est.normalization <= 0.0:
        raise RuleError("total weight is zero")
    return est.value / est.normalization


def is_nested(coarse: QuadratureRule, fine: QuadratureRule, tol: float | None = None) -> bool:
    """True iff every node of `coarse` appears in `fine` within `tol`."""
    if coarse.dimension != fine.dimension:
        raise RuleError("dimension mismatch")
    if tol is None:
        span = fine.nodes.max(axis=0) - fine.nodes.min(axis=0) if len(fine) else 0.0
        tol = node_identity_tol(float(np.linalg.norm(span)))
    diffs = np.abs(coarse.nodes[:, None, :] - fine.nodes[None, :, :])
    return bool(np.all(np.any(np.all(diffs <= tol, axis=2), axis=1)))


def serialize(rule: QuadratureRule) -> bytes:
    """JSON byte stream with full round-trip float precision."""
    payload = {
        "dimension": rule.dimension,
        "nodes": rule.nodes.tolist(),
        "weights": rule.weights.tolist(),
        "exactness_count": rule.exactness_count,
        "evaluated_count": rule.evaluated_count,
    }
    return json.dumps(payload).encode("utf-8")


def deserialize(data: bytes) -> QuadratureRule:
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RuleError(f"malformed rule data: {exc}") from exc
    try:
        dim = int(payload["dimension"])
        nodes = np.asarray(payload["nodes"], dtype=float)
        weights = np.asarray(payload["weights"], dtype=float)
        exactness_count = int(payload["exactness_count"])
        evaluated_count = int(payload["evaluated_count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise RuleError(f"malformed rule data: {exc}") from exc
    if nodes.ndim != 2 or nodes.shape[1] != dim:
        raise RuleError("node array does not match declared dimension")
    return QuadratureRule(
        nodes=nodes,
        weights=weights,
        exactness_count=exactness_count,
        evaluated_count=evaluated_count,
    )
