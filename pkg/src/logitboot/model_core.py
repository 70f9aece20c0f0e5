"""Logistic link algebra and the Newton-Raphson maximum-likelihood fitter.

The model is Bernoulli with a logistic link: each observation carries a
covariate row ``x`` whose first entry is the intercept constant 1, and

    P(y = 1 | x) = sigmoid(theta @ x).

Fitting maximizes the log-likelihood

    l(theta) = sum_i y_i * eta_i - sum_i ln(1 + exp(eta_i)),   eta = X @ theta

by full Newton steps.  The score is ``X' (y - H)`` and the observed
information is ``X' W X`` with ``W = diag(H (1 - H))``; because the logistic
link is canonical, the observed information equals the expected (Fisher)
information, so Newton-Raphson and Fisher scoring coincide here.

Numerical policy: probabilities never exponentiate a large positive
argument.  ``sigmoid`` branches on the sign of its argument, and
``ln(1 + exp(t))`` is computed as ``max(t, 0) + log1p(exp(-|t|))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateResponseError,
    DimensionMismatchError,
    DomainError,
    NotConvergedError,
    SeparationError,
)

# Iterates beyond this magnitude mean the likelihood is still improving as
# the coefficient runs away: perfect or quasi-separation, no finite MLE.
COEFFICIENT_BOUND = 30.0

# Information matrices with a condition estimate beyond this are treated as
# numerically singular (collinear predictors).
CONDITION_LIMIT = 1e12

MAX_STEP_HALVINGS = 10

# Closed-interval clamp keeping sigmoid output strictly inside (0, 1).
_P_LO = np.nextafter(0.0, 1.0)
_P_HI = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class EncodedDataset:
    """Immutable design matrix plus 0/1 response vector.

    ``design`` is ``n x (k+1)`` with column 0 identically 1 (the intercept);
    ``response`` holds exactly the values 0.0 and 1.0.  Arrays are copied on
    construction and marked read-only, so instances can be shared freely
    between threads.

    Parameters
    ----------
    design : array_like
        Covariate matrix including the intercept column.
    response : array_like
        Binary outcomes, one per design row.
    column_names : sequence of str, optional
        One label per design column.  Defaults to ``Intercept, x1, x2, ...``.
    """

    design: np.ndarray
    response: np.ndarray
    column_names: tuple[str, ...] = ()

    def __post_init__(self):
        design = np.array(self.design, dtype=float)
        response = np.array(self.response, dtype=float)
        if design.ndim != 2:
            raise DimensionMismatchError("design must be a 2-d matrix")
        if response.ndim != 1 or response.shape[0] != design.shape[0]:
            raise DimensionMismatchError(
                "response must be 1-d with one entry per design row"
            )
        n, width = design.shape
        if width < 1 or n < width:
            raise DomainError(
                f"need at least as many rows ({n}) as parameters ({width})"
            )
        if not np.all(np.isfinite(design)):
            raise DomainError("design contains non-finite entries")
        if not np.all((response == 0.0) | (response == 1.0)):
            raise DomainError("response entries must be exactly 0 or 1")
        if not np.all(design[:, 0] == 1.0):
            raise DomainError("design column 0 must be the intercept (all ones)")
        names = tuple(str(c) for c in self.column_names)
        if not names:
            names = ("Intercept",) + tuple(f"x{j}" for j in range(1, width))
        if len(names) != width:
            raise DimensionMismatchError(
                f"{len(names)} column names for {width} design columns"
            )
        design.setflags(write=False)
        response.setflags(write=False)
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "response", response)
        object.__setattr__(self, "column_names", names)

    @property
    def n_observations(self) -> int:
        return self.design.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True)
class FitConfig:
    """Solver knobs for :func:`fit_mle`.

    ``tolerance`` bounds the largest absolute score component at
    convergence.  ``initial_coefficients`` defaults to the zero vector.
    """

    max_iterations: int = 25
    tolerance: float = 1e-8
    initial_coefficients: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")
        if not (self.tolerance > 0.0):
            raise DomainError("tolerance must be positive")
        if self.initial_coefficients is not None:
            start = tuple(float(v) for v in self.initial_coefficients)
            if not all(np.isfinite(start)):
                raise DomainError("initial coefficients must be finite")
            object.__setattr__(self, "initial_coefficients", start)


@dataclass(frozen=True)
class FitResult:
    """Converged (or abandoned) state of a maximum-likelihood fit.

    ``covariance`` is the inverse of the observed information at the final
    iterate, ``standard_errors`` the square roots of its diagonal, and
    ``deviance`` equals ``-2 * log_likelihood``.  ``converged`` is False
    when the iteration budget ran out before the score dropped below
    tolerance; downstream inference refuses such fits.
    """

    coefficients: np.ndarray
    standard_errors: np.ndarray
    covariance: np.ndarray
    log_likelihood: float
    deviance: float
    iterations: int
    converged: bool
    column_names: tuple[str, ...]

    def __post_init__(self):
        theta = np.array(self.coefficients, dtype=float)
        se = np.array(self.standard_errors, dtype=float)
        cov = np.array(self.covariance, dtype=float)
        width = theta.shape[0]
        if theta.ndim != 1 or se.shape != (width,) or cov.shape != (width, width):
            raise DimensionMismatchError("inconsistent result dimensions")
        if len(self.column_names) != width:
            raise DimensionMismatchError("one column name per coefficient required")
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-12):
            raise DomainError("covariance must be symmetric")
        if not np.allclose(se * se, np.diag(cov), rtol=1e-8, atol=1e-12):
            raise DomainError("standard errors must match the covariance diagonal")
        if abs(self.deviance + 2.0 * self.log_likelihood) > 1e-8 * (
            1.0 + abs(self.deviance)
        ):
            raise DomainError("deviance must equal -2 * log_likelihood")
        for arr in (theta, se, cov):
            arr.setflags(write=False)
        object.__setattr__(self, "coefficients", theta)
        object.__setattr__(self, "standard_errors", se)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "column_names", tuple(self.column_names))


def _sigmoid_core(eta: np.ndarray) -> np.ndarray:
    # Branch on sign so exp() only ever sees non-positive arguments.
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ez = np.exp(eta[~pos])
    out[~pos] = ez / (1.0 + ez)
    # Keep the output strictly inside (0, 1) even where exp() underflows.
    np.clip(out, _P_LO, _P_HI, out=out)
    return out


def _log1pexp(eta: np.ndarray) -> np.ndarray:
    # ln(1 + exp(t)) = max(t, 0) + log1p(exp(-|t|)), stable for any t.
    return np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))


def sigmoid(eta):
    """Logistic response ``1 / (1 + exp(-eta))``, elementwise.

    Accepts a scalar or array of finite values and returns values strictly
    inside the open interval (0, 1).  Large positive arguments are never
    exponentiated directly.

    Raises
    ------
    DomainError
        If any input entry is NaN or infinite.
    """
    arr = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("sigmoid requires finite input")
    scalar = arr.ndim == 0
    out = _sigmoid_core(np.atleast_1d(arr))
    return float(out[0]) if scalar else out


def logit(p):
    """Log-odds ``ln(p / (1 - p))``, the inverse of :func:`sigmoid`.

    Defined on the open interval (0, 1) only.

    Raises
    ------
    DomainError
        If any entry is NaN or lies outside (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(arr) | (arr <= 0.0) | (arr >= 1.0)
    if np.any(bad):
        raise DomainError("logit requires probabilities strictly inside (0, 1)")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.log(arr) - np.log1p(-arr)
    return float(out[0]) if scalar else out


def linear_predictor(coefficients, row) -> float:
    """Inner product of a coefficient vector with one covariate row."""
    theta = np.asarray(coefficients, dtype=float)
    x = np.asarray(row, dtype=float)
    if theta.ndim != 1 or theta.shape != x.shape:
        raise DimensionMismatchError(
            f"coefficient shape {theta.shape} does not match row shape {x.shape}"
        )
    return float(theta @ x)


def _check_theta(coefficients, data: EncodedDataset) -> np.ndarray:
    theta = np.asarray(coefficients, dtype=float)
    if theta.shape != (data.n_parameters,):
        raise DimensionMismatchError(
            f"expected {data.n_parameters} coefficients, got shape {theta.shape}"
        )
    return theta


def log_likelihood(coefficients, data: EncodedDataset) -> float:
    """Bernoulli log-likelihood of ``coefficients`` on ``data``.

    Always non-positive; equals the log of the product of per-observation
    probabilities ``H_i^y_i (1 - H_i)^(1 - y_i)``.
    """
    theta = _check_theta(coefficients, data)
    eta = data.design @ theta
    return float(data.response @ eta - _log1pexp(eta).sum())


def score(coefficients, data: EncodedDataset) -> np.ndarray:
    """Gradient of the log-likelihood: ``X' (y - H)``."""
    theta = _check_theta(coefficients, data)
    h = _sigmoid_core(data.design @ theta)
    return data.design.T @ (data.response - h)


def observed_information(coefficients, data: EncodedDataset) -> np.ndarray:
    """Negative Hessian of the log-likelihood: ``X' W X``, ``W = H (1 - H)``.

    Symmetric and positive semi-definite for every coefficient vector.
    """
    theta = _check_theta(coefficients, data)
    h = _sigmoid_core(data.design @ theta)
    return _information_from_probs(data.design, h)


def _information_from_probs(design: np.ndarray, h: np.ndarray) -> np.ndarray:
    w = h * (1.0 - h)
    info = design.T @ (design * w[:, None])
    # Symmetrize to wash out last-bit asymmetry from the matmul.
    return (info + info.T) * 0.5


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        factor = scipy.linalg.cho_factor(matrix, check_finite=False)
        return scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SeparationError(f"information matrix is not invertible: {exc}") from exc


def fit_mle(data: EncodedDataset, config: FitConfig | None = None) -> FitResult:
    """Maximize the Bernoulli log-likelihood by Newton-Raphson.

    Full Newton steps, halved up to ten times whenever a step would lower
    the log-likelihood by more than rounding noise.  Convergence means the
    largest absolute score component is at most ``config.tolerance``.
    Exhausting the iteration budget returns a result with
    ``converged=False`` rather than raising.

    Raises
    ------
    DegenerateResponseError
        If the response is all zeros or all ones.
    SeparationError
        If an iterate's magnitude crosses ``COEFFICIENT_BOUND`` or the
        information matrix has condition estimate above ``CONDITION_LIMIT``.
    """
    if config is None:
        config = FitConfig()
    y = data.response
    positives = y.sum()
    if positives == 0 or positives == y.size:
        raise DegenerateResponseError(
            "response contains a single class; the MLE is not finite"
        )
    width = data.n_parameters
    if config.initial_coefficients is not None:
        theta = np.array(config.initial_coefficients, dtype=float)
        if theta.shape != (width,):
            raise DimensionMismatchError(
                f"expected {width} initial coefficients, got {theta.shape[0]}"
            )
    else:
        theta = np.zeros(width)

    design = data.design
    eta = design @ theta
    loglik = float(y @ eta - _log1pexp(eta).sum())
    h = _sigmoid_core(eta)
    grad = design.T @ (y - h)
    iterations = 0
    converged = bool(np.max(np.abs(grad)) <= config.tolerance)

    while not converged and iterations < config.max_iterations:
        info = _information_from_probs(design, h)
        if np.linalg.cond(info) > CONDITION_LIMIT:
            raise SeparationError(
                "information matrix is numerically singular "
                f"(condition estimate exceeds {CONDITION_LIMIT:.0e})"
            )
        step = _solve_spd(info, grad)
        candidate = theta + step
        cand_eta = design @ candidate
        cand_loglik = float(y @ cand_eta - _log1pexp(cand_eta).sum())
        halvings = 0
        # Halve only on decreases beyond the rounding noise of the
        # log-likelihood; reacting to one-ulp regressions near the optimum
        # would defeat Newton's quadratic tail.
        slack = 8.0 * np.finfo(float).eps * (1.0 + abs(loglik))
        while cand_loglik < loglik - slack and halvings < MAX_STEP_HALVINGS:
            step = 0.5 * step
            candidate = theta + step
            cand_eta = design @ candidate
            cand_loglik = float(y @ cand_eta - _log1pexp(cand_eta).sum())
            halvings += 1
        theta, eta, loglik = candidate, cand_eta, cand_loglik
        iterations += 1
        if np.max(np.abs(theta)) > COEFFICIENT_BOUND:
            raise SeparationError(
                f"coefficient magnitude exceeded {COEFFICIENT_BOUND:g}; "
                "the data are separated and the MLE is not finite"
            )
        h = _sigmoid_core(eta)
        grad = design.T @ (y - h)
        converged = bool(np.max(np.abs(grad)) <= config.tolerance)

    info = _information_from_probs(design, h)
    if np.linalg.cond(info) > CONDITION_LIMIT:
        raise SeparationError(
            "information matrix is numerically singular at the final iterate"
        )
    covariance = _solve_spd(info, np.eye(width))
    covariance = (covariance + covariance.T) * 0.5
    return FitResult(
        coefficients=theta,
        standard_errors=np.sqrt(np.diag(covariance)),
        covariance=covariance,
        log_likelihood=loglik,
        deviance=-2.0 * loglik,
        iterations=iterations,
        converged=converged,
        column_names=data.column_names,
    )


def deviance_residuals(fit: FitResult, data: EncodedDataset) -> np.ndarray:
    """Signed square-root contributions of each observation to the deviance.

    ``r_i = sign(y_i - H_i) * sqrt(-2 * l_i)`` where ``l_i`` is observation
    i's log-likelihood term, so ``sum(r_i ** 2)`` equals the fit deviance.

    Raises
    ------
    NotConvergedError
        If ``fit.converged`` is False.
    """
    if not fit.converged:
        raise NotConvergedError("deviance residuals require a converged fit")
    theta = _check_theta(fit.coefficients, data)
    eta = data.design @ theta
    y = data.response
    # Per-observation log-likelihood in the same stable form as the total:
    # y=1 gives -log1pexp(-eta), y=0 gives -log1pexp(eta).
    terms = -_log1pexp(np.where(y == 1.0, -eta, eta))
    h = _sigmoid_core(eta)
    return np.sign(y - h) * np.sqrt(-2.0 * terms)
