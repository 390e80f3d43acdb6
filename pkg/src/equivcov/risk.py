"""Stein loss, closed-form risk gaps and the Monte Carlo risk harness."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from .config import SimulationConfig
from .errors import ConfigurationError, DomainError, NumericalError
from .models import (
    SeedSpec,
    SpectrumSpec,
    population_covariance,
    random_orthogonal,
    realize_spectrum,
    sample_gaussian,
)
from .shrinkers import EstimatorKind, shrink
from .spectral import as_symmetric, assemble, eigh, sample_covariance

__all__ = [
    "DISPERSION_RATIO",
    "DispersedGap",
    "DominanceGaps",
    "EigenRatioReport",
    "RiskRow",
    "RiskTable",
    "dominance_gaps",
    "eigen_loss",
    "eigen_ratio_check",
    "gap_stein_dispersed",
    "mc_risk",
    "stein_loss",
]

# adjacent population-eigenvalue ratio treated as "widely dispersed"
DISPERSION_RATIO = 100.0
_ROTATION_DOMAIN = 1


def _cholesky(a: NDArray[np.float64], what: str) -> NDArray[np.float64]:
    try:
        return cholesky(a, lower=True, check_finite=True)
    except (LinAlgError, ValueError):
        raise DomainError(f"{what} is not positive definite") from None


def stein_loss(est: ArrayLike, sigma: ArrayLike, normalized: bool = False) -> float:
    """``tr(Sigma^-1 est) - log det(Sigma^-1 est) - p``, optionally divided by ``p``.

    Evaluated on ``M = L^-1 est L^-T`` with ``Sigma = L L^T``; the log
    determinant comes from the Cholesky diagonal of ``M``.
    """
    e = as_symmetric(est).entries
    s = as_symmetric(sigma).entries
    if e.shape != s.shape:
        raise DomainError(f"shape mismatch: {e.shape} vs {s.shape}")
    p = s.shape[0]
    ls = _cholesky(s, "Sigma")
    half = solve_triangular(ls, e, lower=True)
    m = solve_triangular(ls, half.T, lower=True)
    m = 0.5 * (m + m.T)
    lm = _cholesky(m, "estimate")
    loss = float(np.trace(m) - 2.0 * np.sum(np.log(np.diag(lm))) - p)
    return loss / p if normalized else loss


def eigen_loss(psi: ArrayLike, gamma: ArrayLike, normalized: bool = False) -> float:
    """``sum_i psi_i/gamma_i - log(psi_i/gamma_i) - 1`` for matching eigenbases."""
    a = np.asarray(psi, dtype=np.float64)
    g = np.asarray(gamma, dtype=np.float64)
    if a.shape != g.shape or a.ndim != 1:
        raise DomainError("psi and gamma must be vectors of the same length")
    if np.any(a <= 0) or np.any(g <= 0):
        raise DomainError("psi and gamma must be strictly positive")
    r = a / g
    loss = float(np.sum(r - np.log(r) - 1.0))
    return loss / a.size if normalized else loss


def _excess(u: NDArray[np.float64]) -> NDArray[np.float64]:
    # x - log x - 1 written in terms of u = x - 1, accurate near x = 1
    return u - np.log1p(u)


class DispersedGap(NamedTuple):
    direct: float
    via_v: float
    lower_bound: float


class DominanceGaps(NamedTuple):
    gap_stein0_vs_tsai: float
    gap_sample_vs_tsai: float


def _check_np(n: int, p: int) -> None:
    if p < 1 or n <= p:
        raise DomainError(f"need n > p >= 1, got n={n}, p={p}")


def gap_stein_dispersed(n: int, p: int) -> DispersedGap:
    """Risk excess (unnormalized Stein loss) of the dispersed Stein rule over the sample rule.

    ``direct`` sums over every index, ``via_v`` pairs index ``i`` with
    ``p + 1 - i`` and ``lower_bound`` is ``2 sum (v_i - log v_i - 1)``.
    """
    _check_np(n, p)
    # scalar loops: p is small and this runs over whole (n, p) grids
    direct = 0.0
    for k in range(p - 1, -p, -2):  # k = p - 2i + 1, i = 1..p
        u = -k / (n + k)
        direct += u - math.log1p(u)
    via_v = half_lower = 0.0
    for k in range(p - 1, 0, -2):  # i = 1..floor(p/2)
        r2 = (k / n) ** 2
        v_minus_1 = r2 / (1.0 - r2)
        log_v = math.log1p(v_minus_1)
        via_v += 2.0 * v_minus_1 - log_v
        half_lower += v_minus_1 - log_v
    lower = 2.0 * half_lower
    return DispersedGap(direct, via_v, lower)


def dominance_gaps(n: int, p: int) -> DominanceGaps:
    """Normalized-loss risk excess of the dispersed Stein rule and of the sample rule over the tsai rule."""
    _check_np(n, p)
    i = np.arange(1, p + 1)
    x_minus_1 = (i - p) / (n + p - 2 * i + 1)
    y_minus_1 = (1 - i) / n
    return DominanceGaps(float(np.mean(_excess(x_minus_1))), float(np.mean(_excess(y_minus_1))))


@dataclass(frozen=True)
class RiskRow:
    mean_risk: float
    std_error: float
    trials: int
    failures: int

    @property
    def excluded(self) -> bool:
        return self.failures > 0


@dataclass(frozen=True)
class RiskTable:
    """Per-estimator Monte Carlo risk with closed-form gap predictions.

    ``losses`` keeps the per-trial losses (NaN where the rule failed) in
    trial order.  A rule with any failure is excluded: its mean and standard
    error are NaN and ``failures`` says why.
    """

    config: SimulationConfig
    rows: dict[EstimatorKind, RiskRow]
    gaps: dict[str, float]
    losses: dict[EstimatorKind, NDArray[np.float64]] = field(repr=False)

    def paired_gap(self, a: EstimatorKind | str, b: EstimatorKind | str) -> tuple[float, float]:
        """Mean and standard error of ``loss(a) - loss(b)`` over common trials."""
        d = self.losses[EstimatorKind.parse(a)] - self.losses[EstimatorKind.parse(b)]
        if np.any(np.isnan(d)):
            return float("nan"), float("nan")
        return float(np.mean(d)), float(np.std(d, ddof=1) / math.sqrt(d.size))

    def paired_gaps(self) -> dict[str, tuple[float, float]]:
        pairs = [
            (EstimatorKind.STEIN_DISPERSED, EstimatorKind.SAMPLE),
            (EstimatorKind.STEIN_DISPERSED, EstimatorKind.TSAI),
            (EstimatorKind.SAMPLE, EstimatorKind.TSAI),
        ]
        return {
            f"{a.value}-{b.value}": self.paired_gap(a, b)
            for a, b in pairs
            if a in self.losses and b in self.losses
        }


def _closed_form_gaps(n: int, p: int) -> dict[str, float]:
    g = gap_stein_dispersed(n, p)
    d = dominance_gaps(n, p)
    return {
        "gap_stein_dispersed_direct": g.direct,
        "gap_stein_dispersed_via_v": g.via_v,
        "gap_stein_dispersed_lower_bound": g.lower_bound,
        "gap_stein0_vs_tsai": d.gap_stein0_vs_tsai,
        "gap_sample_vs_tsai": d.gap_sample_vs_tsai,
    }


def _population(config: SimulationConfig) -> tuple[NDArray[np.float64], NDArray[np.float64] | None]:
    gamma = realize_spectrum(config.spectrum)
    rotation = None
    if config.rotate_population:
        rotation = random_orthogonal(config.p, SeedSpec(config.master_seed, 0, _ROTATION_DOMAIN))
    return gamma, rotation


def _trial_losses(
    config: SimulationConfig,
    gamma: NDArray[np.float64],
    rotation: NDArray[np.float64] | None,
    sigma: NDArray[np.float64],
    t: int,
) -> NDArray[np.float64]:
    x = sample_gaussian(gamma, config.n, SeedSpec(config.master_seed, t), rotation)
    decomp = eigh(sample_covariance(x))
    out = np.full(len(config.estimators), np.nan)
    for k, kind in enumerate(config.estimators):
        try:
            shrunk = shrink(kind, decomp, config.n, oracle_sigma=sigma)
            est = assemble(decomp, shrunk.values)
            out[k] = stein_loss(est, sigma, normalized=config.normalized)
        except (DomainError, NumericalError):
            pass
    return out


def mc_risk(config: SimulationConfig, workers: int = 1) -> RiskTable:
    """Monte Carlo Stein risk of every configured estimator.

    Trial ``t`` draws its data from stream ``t`` of ``master_seed``, so the
    table does not depend on ``workers``.
    """
    if config.trials < 2:
        raise ConfigurationError("trials: at least 2 trials are needed for a standard error")
    gamma, rotation = _population(config)
    sigma = population_covariance(gamma, rotation)

    def run(t: int) -> NDArray[np.float64]:
        return _trial_losses(config, gamma, rotation, sigma, t)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(config.trials)))
    else:
        results = [run(t) for t in range(config.trials)]
    table = np.vstack(results)

    rows: dict[EstimatorKind, RiskRow] = {}
    losses: dict[EstimatorKind, NDArray[np.float64]] = {}
    for k, kind in enumerate(config.estimators):
        col = table[:, k].copy()
        col.setflags(write=False)
        losses[kind] = col
        failures = int(np.sum(np.isnan(col)))
        if failures:
            rows[kind] = RiskRow(float("nan"), float("nan"), config.trials, failures)
        else:
            se = float(np.std(col, ddof=1) / math.sqrt(col.size))
            rows[kind] = RiskRow(float(np.mean(col)), se, config.trials, 0)
    return RiskTable(config, rows, _closed_form_gaps(config.n, config.p), losses)


@dataclass(frozen=True)
class EigenRatioReport:
    """Monte Carlo mean of ``l_i / gamma_i`` next to the prediction ``(n - i + 1) / n``."""

    mean: NDArray[np.float64]
    std_error: NDArray[np.float64]
    predicted: NDArray[np.float64]
    trials: int
    min_adjacent_ratio: float

    @property
    def dispersed(self) -> bool:
        return self.min_adjacent_ratio >= DISPERSION_RATIO

    @property
    def z_scores(self) -> NDArray[np.float64]:
        return (self.mean - self.predicted) / self.std_error


def eigen_ratio_check(n: int, p: int, spectrum: SpectrumSpec, trials: int, seed: int) -> EigenRatioReport:
    """Report ``E[l_i / gamma_i]`` against ``(n - i + 1) / n``.

    The prediction only applies to widely dispersed spectra; ``dispersed``
    is False otherwise and the report should be read as a warning.
    """
    _check_np(n, p)
    if spectrum.p != p:
        raise ConfigurationError(f"spectrum.p={spectrum.p} does not match p={p}")
    if trials < 2:
        raise ConfigurationError("trials: at least 2 trials are needed for a standard error")
    gamma = realize_spectrum(spectrum)
    ratios = np.empty((trials, p))
    for t in range(trials):
        x = sample_gaussian(gamma, n, SeedSpec(seed, t))
        ratios[t] = eigh(sample_covariance(x)).values / gamma
    i = np.arange(1, p + 1)
    adj = float(np.min(gamma[:-1] / gamma[1:])) if p > 1 else float("inf")
    return EigenRatioReport(
        mean=ratios.mean(axis=0),
        std_error=ratios.std(axis=0, ddof=1) / math.sqrt(trials),
        predicted=(n - i + 1) / n,
        trials=trials,
        min_adjacent_ratio=adj,
    )
