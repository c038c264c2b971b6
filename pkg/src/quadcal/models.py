"""Builtin test models for the calibration pipeline.

The seven-parameter prior box covers the closure-coefficient ranges of a
one-equation turbulence model (each coefficient varied between half and
1.5 times its nominal value).  The toy surface-pressure model is a cheap
smooth vector-valued stand-in for a flow solver: it maps the seven
coefficients to a pressure-like curve sampled at fixed chord locations.
"""

from __future__ import annotations

import numpy as np

from .adaptive import BuiltinModel
from .bayes import PriorBox

# kappa, sigma, c_b1, c_b2, c_v1, c_w2, c_w3
CALIBRATION_LOWER = np.array([0.205, 1.0 / 3.0, 0.0678, 0.311, 3.55, 0.2, 1.0])
CALIBRATION_UPPER = np.array([0.615, 1.0, 0.2033, 0.933, 10.65, 0.4, 3.0])


def calibration_prior_box() -> PriorBox:
    return PriorBox(lower=CALIBRATION_LOWER, upper=CALIBRATION_UPPER)


def default_locations(count: int = 16) -> np.ndarray:
    """Chord-normalized measurement locations in [0, 1]."""
    if count < 1:
        raise ValueError("need at least one location")
    return np.linspace(0.0, 1.0, count)


def _features(s: np.ndarray) -> np.ndarray:
    """Feature curves (7, m) giving each parameter its own smooth
    fingerprint along the chord."""
    return np.stack(
        [
            np.sin(np.pi * s),
            np.cos(np.pi * s),
            np.sin(2.0 * np.pi * s),
            np.cos(2.0 * np.pi * s),
            s,
            s**2,
            np.ones_like(s),
        ]
    )


def toy_pressure_curve(theta: np.ndarray, locations: np.ndarray) -> np.ndarray:
    """Pressure-like curves for a batch of parameter vectors.

    theta: (n, 7) points inside the calibration box; returns (n, m).
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if theta.shape[1] != 7:
        raise ValueError("expected seven parameters")
    s = np.asarray(locations, dtype=float)
    t = (theta - CALIBRATION_LOWER) / (CALIBRATION_UPPER - CALIBRATION_LOWER)
    base = -0.5 * np.cos(np.pi * s)
    linear = 0.2 * ((t - 0.5) @ _features(s))
    cross = 0.05 * np.outer(t[:, 0] * t[:, 1], np.sin(3.0 * np.pi * s))
    return base[None, :] + linear + cross


def toy_pressure_model(locations: np.ndarray) -> BuiltinModel:
    locations = np.asarray(locations, dtype=float)
    return BuiltinModel(
        fn=lambda pts: toy_pressure_curve(pts, locations),
        output_dim=locations.shape[0],
        name="toy_pressure",
    )


# Normalized truth coordinates used when synthesizing calibration data.
TRUTH_UNIT = np.array([0.55, 0.45, 0.6, 0.5, 0.4, 0.65, 0.35])


def truth_parameters() -> np.ndarray:
    return CALIBRATION_LOWER + TRUTH_UNIT * (CALIBRATION_UPPER - CALIBRATION_LOWER)
