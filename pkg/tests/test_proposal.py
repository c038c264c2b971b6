import numpy as np
import pytest

from quadcal.bayes import PriorBox
from quadcal.proposal import (
    DegenerateSurrogateError,
    ProposalSurrogate,
    nearest_index,
    nearest_indices,
)


def test_nearest_index_ties_lowest():
    anchors = np.array([[0.0], [2.0], [4.0]])
    assert nearest_index(anchors, [1.0]) == 0  # tie between 0 and 1
    assert nearest_index(anchors, [3.2]) == 2


def test_nearest_indices_matches_scalar(rng):
    anchors = rng.random((20, 3))
    pts = rng.random((50, 3))
    batch = nearest_indices(anchors, pts)
    for k in range(50):
        assert batch[k] == nearest_index(anchors, pts[k])


def _surrogate_1d(lls):
    anchors = np.linspace(0.1, 0.9, len(lls))[:, None]
    return ProposalSurrogate(
        anchor_nodes=anchors,
        log_likelihoods=np.asarray(lls, dtype=float),
        prior=PriorBox(lower=[0.0], upper=[1.0]),
    )


def test_validation():
    prior = PriorBox(lower=[0.0], upper=[1.0])
    with pytest.raises(ValueError):
        ProposalSurrogate(
            anchor_nodes=np.empty((0, 1)), log_likelihoods=np.empty(0), prior=prior
        )
    with pytest.raises(ValueError):
        ProposalSurrogate(
            anchor_nodes=np.array([[0.5]]),
            log_likelihoods=np.array([0.0, 1.0]),
            prior=prior,
        )
    with pytest.raises(ValueError):
        ProposalSurrogate(
            anchor_nodes=np.array([[0.5]]),
            log_likelihoods=np.array([-np.inf]),
            prior=prior,
        )


def test_log_density():
    s = _surrogate_1d([-1.0, -3.0])
    # inside: shifted nearest log-likelihood plus the (zero) prior term
    assert s.log_density([0.2]) == pytest.approx(0.0)
    assert s.log_density([0.8]) == pytest.approx(-2.0)
    assert s.log_density([1.5]) == -np.inf


def test_sample_shape_and_support():
    s = _surrogate_1d([0.0, -1.0, -0.5])
    pts = s.sample(500, rng_seed=3)
    assert pts.shape == (500, 1)
    assert np.all((pts >= 0.0) & (pts <= 1.0))


def test_sample_deterministic():
    s = _surrogate_1d([0.0, -1.0])
    a = s.sample(256, rng_seed=7)
    b = s.sample(256, rng_seed=7)
    c = s.sample(256, rng_seed=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_cell_frequencies_match_acceptance():
    # two anchors at 0.25/0.75 split the box into equal Voronoi cells;
    # acceptance probabilities 1 and e^-2 set the expected mass ratio
    prior = PriorBox(lower=[0.0], upper=[1.0])
    s = ProposalSurrogate(
        anchor_nodes=np.array([[0.25], [0.75]]),
        log_likelihoods=np.array([0.0, -2.0]),
        prior=prior,
    )
    pts = s.sample(40_000, rng_seed=11)
    frac_hi = np.mean(pts[:, 0] < 0.5)
    expected = 1.0 / (1.0 + np.exp(-2.0))
    assert frac_hi == pytest.approx(expected, abs=0.01)


def test_sample_multidimensional_cells():
    prior = PriorBox(lower=[0.0, 0.0], upper=[1.0, 1.0])
    s = ProposalSurrogate(
        anchor_nodes=np.array([[0.25, 0.5], [0.75, 0.5]]),
        log_likelihoods=np.array([0.0, -50.0]),
        prior=prior,
    )
    pts = s.sample(2000, rng_seed=1)
    # the right half-plane cell has acceptance e^-50: essentially no draws
    assert np.mean(pts[:, 0] > 0.5) < 0.01


def test_degenerate_acceptance_raises():
    prior = PriorBox(lower=[0.0], upper=[1.0])
    # the finite-likelihood cell covers ~5e-8 of the box
    s = ProposalSurrogate(
        anchor_nodes=np.array([[0.0], [1e-7]]),
        log_likelihoods=np.array([0.0, -1e9]),
        prior=prior,
    )
    with pytest.raises(DegenerateSurrogateError):
        s.sample(100, rng_seed=0)
