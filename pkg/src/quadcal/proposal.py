"""Nearest-neighbor posterior surrogate and acceptance-rejection sampling.

The surrogate interpolates cached log-likelihood values at the anchor
nodes (piecewise constant on Voronoi cells) and multiplies by the prior.
All densities are handled in log space, shifted by the peak
log-likelihood: estimates downstream are self-normalized, so the shift
drops out, and it keeps the acceptance-rejection envelope tight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .bayes import PriorBox

ACCEPTANCE_FLOOR = 1e-6
_CHUNK = 1 << 16


class DegenerateSurrogateError(RuntimeError):
    pass


def nearest_index(anchors: np.ndarray, x: np.ndarray) -> int:
    """Index of the Euclidean-nearest anchor; ties go to the lowest index."""
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    d2 = np.sum((anchors - np.asarray(x, dtype=float)) ** 2, axis=1)
    return int(d2.argmin())


def nearest_indices(anchors: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Vectorized nearest-anchor lookup for a batch of points."""
    points = np.atleast_2d(points)
    # (p, a) squared distances without forming (p, a, d) intermediates
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ anchors.T
        + np.sum(anchors**2, axis=1)[None, :]
    )
    return d2.argmin(axis=1)


@dataclass(frozen=True)
class ProposalSurrogate:
    anchor_nodes: np.ndarray
    log_likelihoods: np.ndarray
    prior: PriorBox

    def __post_init__(self):
        anchors = np.atleast_2d(np.asarray(self.anchor_nodes, dtype=float))
        lls = np.asarray(self.log_likelihoods, dtype=float)
        if anchors.shape[0] < 1:
            raise ValueError("at least one anchor required")
        if lls.shape != (anchors.shape[0],):
            raise ValueError("one log-likelihood per anchor required")
        if not np.all(np.isfinite(np.max(lls, keepdims=True))):
            raise ValueError("peak log-likelihood must be finite")
        object.__setattr__(self, "anchor_nodes", anchors)
        object.__setattr__(self, "log_likelihoods", lls)

    @property
    def max_log_likelihood(self) -> float:
        return float(self.log_likelihoods.max())

    def log_density(self, x) -> float:
        """Shifted log surrogate density; -inf outside the prior box."""
        x = np.asarray(x, dtype=float)
        lp = self.prior.log_density(x)
        if lp == -np.inf:
            return -np.inf
        k = nearest_index(self.anchor_nodes, x)
        return float(self.log_likelihoods[k]) - self.max_log_likelihood + lp

    def sample(self, count: int, rng_seed: int) -> np.ndarray:
        """Draw `count` points by acceptance-rejection against the prior.

        The envelope equals the peak of the shifted surrogate, so every
        accepted batch is an exact sample from the normalized surrogate.
        Raises if the empirical acceptance rate degenerates.
        """
        rng = np.random.Generator(np.random.Philox(key=rng_seed))
        shifted = self.log_likelihoods - self.max_log_likelihood
        accept_prob = np.exp(shifted)
        if self.prior.dimension == 1:
            # 1-D Voronoi cells are intervals: locate by bisection on the
            # midpoints of the sorted anchors.
            order = np.argsort(self.anchor_nodes[:, 0], kind="stable")
            sorted_anchors = self.anchor_nodes[order, 0]
            mids = 0.5 * (sorted_anchors[1:] + sorted_anchors[:-1])
            locate = lambda pts: order[np.searchsorted(mids, pts[:, 0])]
        else:
            tree = cKDTree(self.anchor_nodes)
            locate = lambda pts: tree.query(pts)[1]
        out = np.empty((count, self.prior.dimension))
        got = 0
        proposed = 0
        while got < count:
            n = min(_CHUNK, max(count - got, 1024))
            pts = self.prior.sample(rng, n)
            cells = locate(pts)
            accept = rng.random(n) < accept_prob[cells]
            taken = pts[accept]
            take = min(taken.shape[0], count - got)
            out[got : got + take] = taken[:take]
            got += take
            proposed += n
            if proposed >= max(1_000_000, 100 * count) and got / proposed < ACCEPTANCE_FLOOR:
                raise DegenerateSurrogateError(
                    f"acceptance rate {got / proposed:.2e} below floor; "
                    "surrogate mass is degenerate relative to the prior box"
                )
        return out
