"""Genz test-function catalog and synthetic calibration data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FAMILIES = (
    "oscillatory",
    "product_peak",
    "corner_peak",
    "gaussian",
    "c0",
    "discontinuous",
)


@dataclass(frozen=True)
class GenzFunction:
    family: str
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape:
            raise ValueError("a and b must have the same length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("a and b must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dimension(self) -> int:
        return self.a.shape[0]


def evaluate_genz(fn: GenzFunction, x) -> np.ndarray:
    """Evaluate on a batch of points (n, d); returns shape (n,)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != fn.dimension:
        raise ValueError("point dimension mismatch")
    a, b = fn.a, fn.b
    d = fn.dimension
    if fn.family == "oscillatory":
        return np.cos(2.0 * np.pi * b[0] + x @ a)
    if fn.family == "product_peak":
        return np.prod(1.0 / (a**-2 + (x - b) ** 2), axis=1)
    if fn.family == "corner_peak":
        return (1.0 + x @ a) ** (-(d + 1))
    if fn.family == "gaussian":
        return np.exp(-np.sum(a**2 * (x - b) ** 2, axis=1))
    if fn.family == "c0":
        return np.exp(-np.sum(a * np.abs(x - b), axis=1))
    # discontinuous: zero past the translation point in x1 OR x2
    vals = np.exp(x @ a)
    mask = x[:, 0] > b[0]
    if d >= 2:
        mask |= x[:, 1] > b[1]
    vals[mask] = 0.0
    return vals


def discontinuous_and_2d(x, b=0.6) -> np.ndarray:
    """Two-dimensional discontinuous variant: zero only where BOTH
    coordinates exceed the threshold, exp(x1 + x2) otherwise."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    vals = np.exp(x.sum(axis=1))
    vals[(x[:, 0] > b) & (x[:, 1] > b)] = 0.0
    return vals


def two_dim_fixture(name: str) -> GenzFunction:
    """The two-dimensional calibration fixtures: product peak with unit
    quarter-width, C0 bump, both centered at 1/2."""
    if name == "product_peak":
        return GenzFunction("product_peak", a=[2.0, 2.0], b=[0.5, 0.5])
    if name == "c0":
        return GenzFunction("c0", a=[1.0, 1.0], b=[0.5, 0.5])
    raise ValueError(f"no two-dimensional fixture named {name!r}")


def random_genz(family: str, d: int, rng: np.random.Generator, scale: float = 2.5) -> GenzFunction:
    """Random shape/translation vectors from the unit hypercube, with the
    shape vector rescaled to the requested 2-norm."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    a = rng.random(d)
    while np.linalg.norm(a) == 0.0:
        a = rng.random(d)
    b = rng.random(d)
    a = a * (scale / np.linalg.norm(a))
    return GenzFunction(family, a=a, b=b)


@dataclass(frozen=True)
class SyntheticDataset:
    z: np.ndarray
    truth_point: np.ndarray
    sigma: float


def generate_data(fn, x_star, sigma: float, m: int, rng: np.random.Generator) -> SyntheticDataset:
    """m noisy measurements of the model value at the truth point.

    `fn` is a GenzFunction or any batch callable mapping (n, d) -> (n,).
    """
    if m < 1:
        raise ValueError("need at least one measurement")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    if isinstance(fn, GenzFunction):
        value = float(evaluate_genz(fn, x_star[None, :])[0])
    else:
        value = float(np.asarray(fn(x_star[None, :]))[0])
    z = value + sigma * rng.standard_normal(m)
    return SyntheticDataset(
        z=z, truth_point=np.atleast_1d(np.asarray(x_star, dtype=float)), sigma=sigma
    )
