"""Priors, likelihoods, and hyperparameter marginalization.

Everything works on unnormalized log densities: the evidence is never
needed because every downstream estimate rescales the quadrature weights
to sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import logsumexp


@dataclass(frozen=True)
class PriorBox:
    """Uniform prior on an axis-aligned box."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be vectors of equal length")
        if not np.all(lo < hi):
            raise ValueError("lower bounds must be strictly below upper bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def log_density(self, x) -> float:
        if not self.contains(x):
            return -np.inf
        return -float(np.log(self.volume))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        u = rng.random((count, self.dimension))
        return self.lower + u * (self.upper - self.lower)

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class GaussianIIDLikelihood:
    """i.i.d. Gaussian measurement noise around a scalar model output."""

    data: np.ndarray
    sigma: float

    def __post_init__(self):
        data = np.atleast_1d(np.asarray(self.data, dtype=float))
        if data.size < 1:
            raise ValueError("need at least one measurement")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class GPDiscrepancyLikelihood:
    """Gaussian likelihood whose covariance combines i.i.d. measurement
    noise with a squared-exponential model-discrepancy process governed
    by hyperparameters (amplitude A, log length-scale exponent l)."""

    data: np.ndarray
    locations: np.ndarray
    sigma_meas: float
    length_scale_base: float
    hyper_prior_A: tuple[float, float]
    hyper_prior_l: tuple[float, float]
    include_logdet: bool = False

    def __post_init__(self):
        data = np.atleast_1d(np.asarray(self.data, dtype=float))
        locs = np.atleast_1d(np.asarray(self.locations, dtype=float))
        if data.shape != locs.shape:
            raise ValueError("data and locations must align")
        if self.sigma_meas <= 0 or self.length_scale_base <= 0:
            raise ValueError("sigma_meas and length_scale_base must be positive")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "locations", locs)


def log_gaussian_iid(model_output: float, likelihood: GaussianIIDLikelihood) -> float:
    """Unnormalized log-likelihood -1/2 sum_k (u - z_k)^2 / sigma^2."""
    r = model_output - likelihood.data
    return -0.5 * float(np.sum(r * r)) / likelihood.sigma**2


def squared_exponential_cov(s, s_prime, A: float, l: float, L: float) -> float:
    """A * exp(-((s - s') / (L * 10^l))^2)."""
    scaled = (np.asarray(s, dtype=float) - np.asarray(s_prime, dtype=float)) / (L * 10.0**l)
    return A * np.exp(-(scaled**2))


def _gp_covariance(likelihood: GPDiscrepancyLikelihood, A: float, l: float) -> np.ndarray:
    s = likelihood.locations
    C = squared_exponential_cov(s[:, None], s[None, :], A, l, likelihood.length_scale_base)
    return C + likelihood.sigma_meas**2 * np.eye(s.size)


def log_gp_discrepancy(model_outputs, likelihood: GPDiscrepancyLikelihood, A: float, l: float) -> float:
    """-1/2 d^T K^-1 d for misfit d and covariance K = sigma^2 I + C(A, l);
    optionally includes the -1/2 log det K term."""
    outputs = np.atleast_1d(np.asarray(model_outputs, dtype=float))
    if outputs.shape != likelihood.data.shape:
        raise ValueError("model outputs must align with the data vector")
    d = likelihood.data - outputs
    K = _gp_covariance(likelihood, A, l)
    try:
        factor = scipy.linalg.cho_factor(K, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise RuntimeError(f"covariance factorization failed at (A={A}, l={l})") from exc
    quad = float(d @ scipy.linalg.cho_solve(factor, d))
    result = -0.5 * quad
    if likelihood.include_logdet:
        result -= float(np.log(np.diag(factor[0])).sum())
    return result


def _gl_points(interval: tuple[float, float], n: int):
    """Gauss-Legendre nodes on the interval and weights normalized to sum 1."""
    a, b = interval
    t, w = np.polynomial.legendre.leggauss(n)
    return a + 0.5 * (b - a) * (t + 1.0), 0.5 * w


def marginalize_hyperparameters(model_outputs, likelihood: GPDiscrepancyLikelihood, grid: tuple[int, int] = (12, 12)) -> float:
    """Log of the average of exp(log_gp_discrepancy) over the (A, l)
    hyper-prior box, via a tensor Gauss-Legendre grid in log-sum-exp
    arithmetic.  Equal to the log marginal likelihood up to the constant
    hyper-prior normalization."""
    n_A, n_l = grid
    if n_A < 1 or n_l < 1:
        raise ValueError("grid sizes must be positive")
    A_nodes, A_weights = _gl_points(likelihood.hyper_prior_A, n_A)
    l_nodes, l_weights = _gl_points(likelihood.hyper_prior_l, n_l)
    logs = np.empty((n_A, n_l))
    for i, A in enumerate(A_nodes):
        for j, l in enumerate(l_nodes):
            logs[i, j] = log_gp_discrepancy(model_outputs, likelihood, A, l)
    if np.all(logs == -np.inf):
        raise RuntimeError("all hyperparameter grid evaluations vanished")
    weights = np.outer(A_weights, l_weights).ravel()
    return float(logsumexp(logs.ravel(), b=weights))


@dataclass(frozen=True)
class StatisticalModel:
    """Prior box plus likelihood; the bridge from model outputs to the
    log posterior values anchoring the proposal surrogate."""

    prior: PriorBox
    likelihood: GaussianIIDLikelihood | GPDiscrepancyLikelihood
    hyper_grid: tuple[int, int] = field(default=(12, 12))

    def log_likelihood(self, model_outputs) -> float:
        if isinstance(self.likelihood, GaussianIIDLikelihood):
            outputs = np.atleast_1d(np.asarray(model_outputs, dtype=float))
            if outputs.size != 1:
                raise ValueError("i.i.d. Gaussian likelihood expects a scalar model")
            return log_gaussian_iid(float(outputs[0]), self.likelihood)
        return marginalize_hyperparameters(model_outputs, self.likelihood, self.hyper_grid)


def log_posterior_unnormalized(model_outputs, model_spec: StatisticalModel, x) -> float:
    """log likelihood(model outputs) + log prior(x); -inf outside the box."""
    lp = model_spec.prior.log_density(x)
    if lp == -np.inf:
        return -np.inf
    return model_spec.log_likelihood(model_outputs) + lp
