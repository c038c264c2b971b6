"""Adaptive loop: alternate between building a positive-weight rule from
surrogate samples and refining the surrogate with the new model values.

Each iteration draws a large sample set from the current nearest-neighbor
posterior surrogate, constructs an implicit rule nested over the previous
nodes, evaluates the model only at the newly added nodes, and rebuilds
the surrogate on the enlarged anchor set.  Convergence is tracked by the
2-norm difference of consecutive normalized estimates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Literal

import numpy as np

from .basis import enumerate_basis
from .bayes import PriorBox
from .implicit import construct_implicit_rule
from .proposal import ProposalSurrogate
from .rules import QuadratureRule, apply_normalized


class AdaptiveError(RuntimeError):
    pass


@dataclass(frozen=True)
class GrowthSchedule:
    """Per-iteration exactness target D_i.

    linear: D_i = base + step * i; exponential: D_i = base * 2^i;
    total_degree: all monomials of total degree <= base + step * i.
    An optional cap freezes D_i once reached, so later iterations keep
    refining the node set at a fixed exactness target.
    """

    kind: Literal["linear", "exponential", "total_degree"] = "linear"
    base: int = 0
    step: int = 1
    cap: int | None = None

    def exactness_count(self, iteration: int, dimension: int) -> int:
        if self.kind == "exponential":
            level = max(1, self.base) * 2**iteration
        else:
            level = self.base + self.step * iteration
        if self.cap is not None:
            level = min(level, self.cap)
        if self.kind == "total_degree":
            return comb(level + dimension, dimension)
        if self.kind in ("linear", "exponential"):
            return level + 1
        raise ValueError(f"unknown schedule kind {self.kind!r}")


@dataclass
class BuiltinModel:
    """Deterministic in-process model: batch callable plus output size."""

    fn: Callable[[np.ndarray], np.ndarray]
    output_dim: int
    name: str = "builtin"

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.atleast_2d(np.asarray(self.fn(points), dtype=float))
        if out.shape != (points.shape[0], self.output_dim):
            raise AdaptiveError(
                f"model returned shape {out.shape}, expected "
                f"({points.shape[0]}, {self.output_dim})"
            )
        if not np.all(np.isfinite(out)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(out), axis=1))[0])
            raise AdaptiveError(f"model returned non-finite output at point {bad}")
        return out


@dataclass(frozen=True)
class AdaptiveConfig:
    prior: PriorBox
    model: object  # anything with evaluate(points) -> (n, output_dim)
    log_posterior: Callable[[np.ndarray, np.ndarray], float]
    schedule: GrowthSchedule
    sample_count: int = 100_000
    seed: int = 0
    max_iterations: int = 20
    e_threshold: float = 0.0
    quantity: Literal["coordinates", "model"] = "coordinates"


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    exactness_count: int
    node_count: int
    new_nodes: int
    estimate: np.ndarray
    e_n: float
    wall_time_s: float
    seed: int


@dataclass
class AdaptiveState:
    iteration: int
    rule: QuadratureRule
    anchors: np.ndarray
    outputs: np.ndarray
    log_posteriors: np.ndarray
    history: list[IterationRecord] = field(default_factory=list)

    @property
    def model_evaluations(self) -> int:
        return self.anchors.shape[0]


def _iteration_seed(seed: int, iteration: int) -> int:
    return int(np.random.SeedSequence([seed, iteration]).generate_state(1)[0])


def _estimate(config: AdaptiveConfig, rule: QuadratureRule, outputs: np.ndarray) -> np.ndarray:
    values = rule.nodes if config.quantity == "coordinates" else outputs
    return apply_normalized(rule, values)


def init(config: AdaptiveConfig) -> AdaptiveState:
    """Single prior-drawn node with weight one, model evaluated there."""
    rng = np.random.Generator(np.random.Philox(key=_iteration_seed(config.seed, 0)))
    node = config.prior.sample(rng, 1)
    outputs = config.model.evaluate(node)
    log_post = config.log_posterior(outputs[0], node[0])
    rule = QuadratureRule(
        nodes=node, weights=np.array([1.0]), exactness_count=1, evaluated_count=1
    )
    return AdaptiveState(
        iteration=0,
        rule=rule,
        anchors=node,
        outputs=outputs,
        log_posteriors=np.array([log_post]),
    )


def step(state: AdaptiveState, config: AdaptiveConfig) -> AdaptiveState:
    """One refinement: sample the surrogate, build a nested rule, evaluate
    the model at the new nodes only, refresh the surrogate.

    Raises without mutating `state` if any stage fails.
    """
    t0 = time.perf_counter()
    i = state.iteration + 1
    d = config.prior.dimension
    count = config.schedule.exactness_count(i, d)

    surrogate = ProposalSurrogate(
        anchor_nodes=state.anchors,
        log_likelihoods=state.log_posteriors,
        prior=config.prior,
    )
    seed_i = _iteration_seed(config.seed, i)
    samples = surrogate.sample(config.sample_count, seed_i)
    basis = enumerate_basis(d, count, box=(config.prior.lower, config.prior.upper))
    rule = construct_implicit_rule(state.rule, samples, basis)

    n_old = len(state.rule)
    new_nodes = rule.nodes[n_old:]
    if new_nodes.shape[0] > count:
        raise AdaptiveError("more new nodes than the exactness count permits")
    new_outputs = config.model.evaluate(new_nodes) if new_nodes.shape[0] else np.empty(
        (0, state.outputs.shape[1])
    )
    new_log_posts = np.array(
        [config.log_posterior(out, x) for out, x in zip(new_outputs, new_nodes)]
    )

    rule = QuadratureRule(
        nodes=rule.nodes,
        weights=rule.weights,
        exactness_count=rule.exactness_count,
        evaluated_count=len(rule),
    )
    outputs = np.vstack([state.outputs, new_outputs])
    log_posts = np.concatenate([state.log_posteriors, new_log_posts])
    estimate = _estimate(config, rule, outputs)
    if state.history:
        e_n = float(np.linalg.norm(estimate - state.history[-1].estimate))
    else:
        e_n = float("nan")
    record = IterationRecord(
        iteration=i,
        exactness_count=count,
        node_count=len(rule),
        new_nodes=new_nodes.shape[0],
        estimate=estimate,
        e_n=e_n,
        wall_time_s=time.perf_counter() - t0,
        seed=seed_i,
    )
    return AdaptiveState(
        iteration=i,
        rule=rule,
        anchors=rule.nodes,
        outputs=outputs,
        log_posteriors=log_posts,
        history=state.history + [record],
    )


def consecutive_difference(state: AdaptiveState) -> float:
    """2-norm difference of the last two normalized estimates."""
    if len(state.history) < 2:
        raise AdaptiveError("need at least two iterations")
    return float(
        np.linalg.norm(state.history[-1].estimate - state.history[-2].estimate)
    )


def run(config: AdaptiveConfig) -> AdaptiveState:
    """Iterate until max_iterations or the consecutive difference drops
    below the configured threshold."""
    state = init(config)
    for _ in range(config.max_iterations):
        state = step(state, config)
        if (
            config.e_threshold > 0.0
            and len(state.history) >= 2
            and state.history[-1].e_n < config.e_threshold
        ):
            break
    return state
