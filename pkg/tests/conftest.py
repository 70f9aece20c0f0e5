"""Shared fixtures and golden constants for the test suite."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from logitboot import EncodedDataset, FitResult, sigmoid

# Numeric properties should fail reproducibly, not probabilistically.
settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# Reference model used across the golden tests, in the encoded column order
# (Intercept, Age, Emp, Gender): the 5-decimal display form and the
# full-precision estimates it was rounded from, with the matching odds.
GOLDEN_COEFFICIENTS = (1.56097, -0.07492, 1.64392, 0.08356)
GOLDEN_COEFFICIENTS_FULL = (1.56096913, -0.074924, 1.64391607, 0.08355517)
GOLDEN_ODDS = (4.7634354, 0.9278142, 5.1753971, 1.0871452)

# Reference 300-row training fit used as a golden input for prediction ops.
GOLDEN_TRAIN_COEFFICIENTS = (1.30131, -0.06921, 1.67899, 0.15188)


def make_fit(coefficients, names=("Intercept", "Age", "Emp", "Gender")) -> FitResult:
    """Coefficients-only FitResult carrier for prediction-side tests."""
    theta = np.asarray(coefficients, dtype=float)
    width = theta.size
    return FitResult(
        coefficients=theta,
        standard_errors=np.zeros(width),
        covariance=np.zeros((width, width)),
        log_likelihood=0.0,
        deviance=0.0,
        iterations=0,
        converged=True,
        column_names=tuple(names),
    )


def random_dataset(seed: int, n: int, k: int, coef_scale: float = 1.0):
    """Random design (intercept + k standard-normal columns), Bernoulli
    response drawn from a random coefficient vector.  Returns
    ``(dataset, theta)``; the response is guaranteed to contain both
    classes.
    """
    rng = np.random.default_rng(seed)
    design = np.column_stack([np.ones(n), rng.normal(size=(n, k))])
    theta = rng.normal(scale=coef_scale, size=k + 1)
    probs = sigmoid(design @ theta)
    response = (rng.random(n) < probs).astype(float)
    # Flip two entries if a tiny draw came out single-class.
    if response.sum() == 0:
        response[0] = 1.0
    elif response.sum() == n:
        response[0] = 0.0
    return EncodedDataset(design, response), theta


def fd_gradient(f, theta: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    grad = np.zeros_like(theta)
    for j in range(theta.size):
        bump = np.zeros_like(theta)
        bump[j] = h
        grad[j] = (f(theta + bump) - f(theta - bump)) / (2.0 * h)
    return grad


@pytest.fixture
def golden_fit():
    return make_fit(GOLDEN_COEFFICIENTS)
