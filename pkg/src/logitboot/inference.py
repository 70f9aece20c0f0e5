"""Bootstrap resampling, interval estimates, and odds-ratio reporting.

The bootstrap here is case resampling: replicate ``b`` redraws ``n`` row
indices with replacement and refits the model on the resampled rows.  The
index stream is a pure function of ``(master_seed, b)`` so results are
bit-reproducible no matter how replicates are scheduled:

    rng = numpy.random.default_rng(numpy.random.SeedSequence((master_seed, b)))
    indices = rng.integers(0, n, size=n)

:func:`resample_indices` exposes exactly that recipe so external code can
regenerate any replicate's rows without rerunning the bootstrap.

Replicates whose refit degenerates (single-class resample), separates, or
fails to converge are dropped and counted; intervals are computed from the
survivors.  Quantiles of the replicate distribution use linear
interpolation between order statistics: the level-``q`` quantile sits at
1-based position ``q * (R - 1) + 1`` of the sorted survivors, which is
``numpy.quantile``'s default rule.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.stats

from .errors import (
    DegenerateResponseError,
    DomainError,
    InsufficientReplicatesError,
    NotConvergedError,
    ResamplingInstabilityError,
    SeparationError,
    UnknownPredictorError,
)
from .model_core import EncodedDataset, FitConfig, FitResult, fit_mle

MIN_PERCENTILE_REPLICATES = 100
MIN_BCA_REPLICATES = 1000

# Below this surviving fraction the resampling distribution is untrustworthy.
MIN_SURVIVING_FRACTION = 0.5


@dataclass(frozen=True)
class BootstrapResult:
    """Coefficient replicates from a case-resampling bootstrap.

    ``replicates`` has one row per surviving replicate, in replicate-index
    order; ``replicate_ids`` holds the original replicate indices of those
    rows, so row ``i`` was produced by ``resample_indices(master_seed,
    replicate_ids[i], n)``.
    """

    replicates: np.ndarray
    replicate_ids: np.ndarray
    requested: int
    master_seed: int
    original_fit: FitResult

    def __post_init__(self):
        reps = np.array(self.replicates, dtype=float)
        ids = np.array(self.replicate_ids, dtype=np.int64)
        if reps.ndim != 2 or reps.shape[1] != self.original_fit.coefficients.size:
            raise DomainError("replicate matrix shape does not match the fit")
        if ids.shape != (reps.shape[0],):
            raise DomainError("one replicate id per replicate row required")
        if reps.shape[0] > self.requested:
            raise DomainError("more surviving replicates than requested")
        if not np.all(np.isfinite(reps)):
            raise DomainError("replicates contain non-finite coefficients")
        reps.setflags(write=False)
        ids.setflags(write=False)
        object.__setattr__(self, "replicates", reps)
        object.__setattr__(self, "replicate_ids", ids)

    @property
    def converged(self) -> int:
        """Number of surviving replicates."""
        return self.replicates.shape[0]

    @property
    def dropped(self) -> int:
        return self.requested - self.converged


@dataclass(frozen=True)
class IntervalEstimate:
    """One two-sided confidence interval for one coefficient.

    ``scale`` is ``"log_odds"`` for raw coefficients or ``"odds"`` after
    :func:`odds_scale`.  ``fallback`` is True only on a BCa interval whose
    bias correction was undefined and which therefore carries plain
    percentile bounds.
    """

    coefficient_index: int
    method: str
    level: float
    lower: float
    upper: float
    scale: str = "log_odds"
    fallback: bool = False

    def __post_init__(self):
        if not (0.0 < self.level < 1.0):
            raise DomainError("confidence level must lie strictly in (0, 1)")
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise DomainError("interval bounds must be finite")
        if self.lower > self.upper:
            raise DomainError("interval lower bound exceeds upper bound")


@dataclass(frozen=True)
class OddsEntry:
    """One coefficient on both scales: ``odds_ratio = exp(log_odds)``."""

    name: str
    log_odds: float
    odds_ratio: float


@dataclass(frozen=True)
class ScaledOddsEntry:
    """Odds multiplier for a ``delta``-unit change in one predictor.

    ``multiplier = exp(delta * coefficient)``: e.g. the odds factor for an
    age difference of 15 years under an Age coefficient.
    """

    name: str
    coefficient_index: int
    delta: float
    multiplier: float


@dataclass(frozen=True)
class OddsReport:
    entries: tuple[OddsEntry, ...]
    scaled: tuple[ScaledOddsEntry, ...] = ()


def resample_indices(master_seed: int, replicate: int, n: int) -> np.ndarray:
    """Row indices drawn by bootstrap replicate ``replicate``.

    Deterministic function of its arguments: a PCG64 generator is seeded
    with ``SeedSequence((master_seed, replicate))`` and asked for ``n``
    integers uniform on ``[0, n)``.
    """
    if master_seed < 0 or replicate < 0:
        raise DomainError("seeds and replicate indices must be non-negative")
    if n < 1:
        raise DomainError("need at least one row to resample")
    rng = np.random.default_rng(np.random.SeedSequence((master_seed, replicate)))
    return rng.integers(0, n, size=n)


def _replicate_coefficients(
    data: EncodedDataset, config: FitConfig | None, master_seed: int, b: int
) -> np.ndarray | None:
    idx = resample_indices(master_seed, b, data.n_observations)
    response = data.response[idx]
    total = response.sum()
    if total == 0 or total == response.size:
        return None
    sub = EncodedDataset(data.design[idx], response, data.column_names)
    try:
        fit = fit_mle(sub, config)
    except (DegenerateResponseError, SeparationError):
        return None
    return fit.coefficients if fit.converged else None


def bootstrap_fit(
    data: EncodedDataset,
    config: FitConfig | None = None,
    replicates: int = 10_000,
    master_seed: int = 0,
    workers: int = 1,
) -> BootstrapResult:
    """Case-resampling bootstrap of the maximum-likelihood fit.

    Fits the full dataset first (propagating any failure), then refits each
    of ``replicates`` resamples.  Replicates that degenerate, separate, or
    fail to converge are dropped and counted via ``result.dropped``.
    Results are identical for any ``workers`` value: replicate ``b``
    depends only on ``(master_seed, b)`` and rows are assembled in
    replicate order.

    Raises
    ------
    ResamplingInstabilityError
        If fewer than half of the requested replicates survive.
    """
    if replicates < 1:
        raise DomainError("replicates must be at least 1")
    if workers < 1:
        raise DomainError("workers must be at least 1")
    original = fit_mle(data, config)

    def one(b: int) -> np.ndarray | None:
        return _replicate_coefficients(data, config, master_seed, b)

    if workers == 1:
        outcomes = [one(b) for b in range(replicates)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, range(replicates)))

    ids = [b for b, coef in enumerate(outcomes) if coef is not None]
    kept = [outcomes[b] for b in ids]
    if len(kept) < MIN_SURVIVING_FRACTION * replicates:
        raise ResamplingInstabilityError(
            f"only {len(kept)} of {replicates} bootstrap replicates converged"
        )
    matrix = np.array(kept, dtype=float).reshape(len(kept), data.n_parameters)
    return BootstrapResult(
        replicates=matrix,
        replicate_ids=np.array(ids, dtype=np.int64),
        requested=replicates,
        master_seed=master_seed,
        original_fit=original,
    )


def _check_level(level: float) -> None:
    if not (0.0 < level < 1.0):
        raise DomainError("confidence level must lie strictly in (0, 1)")


def wald_ci(fit: FitResult, level: float = 0.95) -> list[IntervalEstimate]:
    """Normal-theory intervals ``theta_j +/- z * se_j`` for every coefficient.

    ``z`` is the standard-normal quantile at ``(1 + level) / 2``.

    Raises
    ------
    NotConvergedError
        If the fit did not converge.
    """
    _check_level(level)
    if not fit.converged:
        raise NotConvergedError("Wald intervals require a converged fit")
    z = float(scipy.stats.norm.ppf((1.0 + level) / 2.0))
    out = []
    for j, (theta, se) in enumerate(zip(fit.coefficients, fit.standard_errors)):
        out.append(
            IntervalEstimate(
                coefficient_index=j,
                method="wald",
                level=level,
                lower=float(theta - z * se),
                upper=float(theta + z * se),
            )
        )
    return out


def _check_survivors(result: BootstrapResult, minimum: int, method: str) -> None:
    if result.converged < minimum:
        raise InsufficientReplicatesError(
            f"{method} interval needs at least {minimum} surviving replicates, "
            f"have {result.converged}"
        )


def percentile_ci(
    result: BootstrapResult, coefficient_index: int, level: float = 0.95
) -> IntervalEstimate:
    """Equal-tailed percentile interval from the replicate distribution.

    Bounds are the ``(1 - level) / 2`` and ``(1 + level) / 2`` quantiles of
    the surviving replicates, linearly interpolated between order
    statistics (see the module docstring for the exact rule).

    Raises
    ------
    InsufficientReplicatesError
        With fewer than 100 surviving replicates.
    """
    _check_level(level)
    _check_survivors(result, MIN_PERCENTILE_REPLICATES, "percentile")
    column = result.replicates[:, coefficient_index]
    alpha = (1.0 - level) / 2.0
    lower, upper = np.quantile(column, [alpha, 1.0 - alpha])
    return IntervalEstimate(
        coefficient_index=coefficient_index,
        method="percentile",
        level=level,
        lower=float(lower),
        upper=float(upper),
    )


def jackknife_estimates(
    data: EncodedDataset, config: FitConfig | None = None
) -> np.ndarray:
    """Leave-one-out coefficient estimates, one row per deleted observation.

    Rows whose refit fails or does not converge are omitted.
    """
    n = data.n_observations
    keep_rows = []
    mask = np.ones(n, dtype=bool)
    for i in range(n):
        mask[i] = False
        response = data.response[mask]
        total = response.sum()
        if 0 < total < response.size:
            sub = EncodedDataset(data.design[mask], response, data.column_names)
            try:
                fit = fit_mle(sub, config)
                if fit.converged:
                    keep_rows.append(fit.coefficients)
            except (DegenerateResponseError, SeparationError):
                pass
        mask[i] = True
    if len(keep_rows) < 2:
        raise InsufficientReplicatesError(
            "fewer than two leave-one-out refits succeeded"
        )
    return np.array(keep_rows, dtype=float)


def acceleration_from_jackknife(values: np.ndarray) -> float:
    """Skewness-based acceleration from leave-one-out estimates of one
    coefficient:

        a = sum(d_i^3) / (6 * (sum(d_i^2))^1.5),   d_i = mean(values) - values_i

    Zero spread yields ``a = 0``.
    """
    values = np.asarray(values, dtype=float)
    d = values.mean() - values
    denom = 6.0 * np.sum(d * d) ** 1.5
    if denom == 0.0:
        return 0.0
    return float(np.sum(d**3) / denom)


def jackknife_acceleration(
    data: EncodedDataset, config: FitConfig | None, coefficient_index: int
) -> float:
    """Acceleration constant for one coefficient via leave-one-out refits."""
    estimates = jackknife_estimates(data, config)
    return acceleration_from_jackknife(estimates[:, coefficient_index])


def bca_ci(
    result: BootstrapResult,
    data: EncodedDataset,
    config: FitConfig | None,
    coefficient_index: int,
    level: float = 0.95,
    bias_correction: float | None = None,
    acceleration: float | None = None,
) -> IntervalEstimate:
    """Bias-corrected and accelerated interval for one coefficient.

    The bias correction is ``z0 = ppf(F)`` where ``F`` is the fraction of
    surviving replicates strictly below the original estimate; the
    acceleration ``a`` comes from leave-one-out refits.  Replicate
    quantiles are then read at the adjusted tail probabilities

        alpha_1 = cdf(z0 + (z0 + z_lo) / (1 - a * (z0 + z_lo)))
        alpha_2 = cdf(z0 + (z0 + z_hi) / (1 - a * (z0 + z_hi)))

    with ``z_lo, z_hi`` the standard-normal quantiles of the unadjusted
    tails.  When ``z0 = 0`` and ``a = 0`` the adjustment vanishes and the
    interval equals :func:`percentile_ci` exactly.  If every replicate
    falls on one side of the original estimate the correction is undefined;
    the interval then carries percentile bounds and ``fallback=True``.

    ``bias_correction`` and ``acceleration`` override the estimated values
    when given (useful for sensitivity checks).

    Raises
    ------
    InsufficientReplicatesError
        With fewer than 1000 surviving replicates.
    """
    _check_level(level)
    _check_survivors(result, MIN_BCA_REPLICATES, "BCa")
    column = result.replicates[:, coefficient_index]

    if bias_correction is None:
        below = np.count_nonzero(
            column < result.original_fit.coefficients[coefficient_index]
        )
        fraction = below / column.size
        if fraction == 0.0 or fraction == 1.0:
            base = percentile_ci(result, coefficient_index, level)
            return IntervalEstimate(
                coefficient_index=coefficient_index,
                method="bca",
                level=level,
                lower=base.lower,
                upper=base.upper,
                fallback=True,
            )
        z0 = float(scipy.stats.norm.ppf(fraction))
    else:
        z0 = float(bias_correction)

    if acceleration is None:
        a = jackknife_acceleration(data, config, coefficient_index)
    else:
        a = float(acceleration)

    alpha = (1.0 - level) / 2.0
    if z0 == 0.0 and a == 0.0:
        # The adjustment is the identity; read the plain tails so the
        # degenerate case matches percentile_ci bit for bit.
        alpha_lo, alpha_hi = alpha, 1.0 - alpha
    else:
        z_lo, z_hi = scipy.stats.norm.ppf([alpha, 1.0 - alpha])
        alpha_lo = float(scipy.stats.norm.cdf(z0 + (z0 + z_lo) / (1.0 - a * (z0 + z_lo))))
        alpha_hi = float(scipy.stats.norm.cdf(z0 + (z0 + z_hi) / (1.0 - a * (z0 + z_hi))))
    lower, upper = np.quantile(column, [alpha_lo, alpha_hi])
    return IntervalEstimate(
        coefficient_index=coefficient_index,
        method="bca",
        level=level,
        lower=float(lower),
        upper=float(upper),
    )


def odds_scale(interval: IntervalEstimate) -> IntervalEstimate:
    """Map a log-odds interval to the odds scale by exponentiating bounds."""
    if interval.scale != "log_odds":
        raise DomainError("interval is already on the odds scale")
    return IntervalEstimate(
        coefficient_index=interval.coefficient_index,
        method=interval.method,
        level=interval.level,
        lower=float(np.exp(interval.lower)),
        upper=float(np.exp(interval.upper)),
        scale="odds",
        fallback=interval.fallback,
    )


def odds_report(
    fit: FitResult, scaled: tuple[tuple[str, float], ...] = ()
) -> OddsReport:
    """Per-coefficient odds ratios, plus optional scaled multipliers.

    Each ``(name, delta)`` pair in ``scaled`` adds the odds factor
    ``exp(delta * theta_name)`` for a ``delta``-unit change in that
    predictor.

    Raises
    ------
    NotConvergedError
        If the fit did not converge.
    """
    if not fit.converged:
        raise NotConvergedError("odds report requires a converged fit")
    entries = tuple(
        OddsEntry(name=name, log_odds=float(theta), odds_ratio=float(np.exp(theta)))
        for name, theta in zip(fit.column_names, fit.coefficients)
    )
    extras = []
    for name, delta in scaled:
        try:
            j = fit.column_names.index(name)
        except ValueError:
            raise UnknownPredictorError(f"model has no predictor named {name!r}")
        extras.append(
            ScaledOddsEntry(
                name=name,
                coefficient_index=j,
                delta=float(delta),
                multiplier=float(np.exp(delta * fit.coefficients[j])),
            )
        )
    return OddsReport(entries=entries, scaled=tuple(extras))
