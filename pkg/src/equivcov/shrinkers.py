"""Eigenvalue shrinkage rules for orthogonally equivariant covariance estimators.

Each rule maps a descending sample spectrum ``l`` (and the sample size
``n``) to new eigenvalues; :func:`equivcov.spectral.assemble` turns those into
a covariance estimate that keeps the sample eigenvectors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.optimize import isotonic_regression

from .errors import ConfigurationError, DomainError, SingularityError
from .spectral import SpectralDecomposition, as_symmetric
from .stieltjes import _check_gaps, _gap_sums

__all__ = [
    "ISO_FLOOR",
    "EstimatorKind",
    "ShrunkSpectrum",
    "isotonize",
    "oracle_projection",
    "shrink",
    "shrink_sample",
    "shrink_stein_dispersed",
    "shrink_stein_iso",
    "shrink_stein_raw",
    "shrink_tsai",
]

# relative floor applied to raw Stein values before isotonization
ISO_FLOOR = 1e-8


class EstimatorKind(str, enum.Enum):
    SAMPLE = "sample"
    STEIN_RAW = "stein_raw"
    STEIN_ISO = "stein_iso"
    STEIN_DISPERSED = "stein_dispersed"
    TSAI = "tsai"
    ORACLE_PROJECTION = "oracle_projection"
    ORACLE_PROJECTION_INV = "oracle_projection_inv"

    @property
    def is_oracle(self) -> bool:
        return self in (EstimatorKind.ORACLE_PROJECTION, EstimatorKind.ORACLE_PROJECTION_INV)

    @classmethod
    def parse(cls, value: str | EstimatorKind) -> EstimatorKind:
        try:
            return cls(value)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ConfigurationError(f"unknown estimator {value!r}; expected one of: {names}") from None


@dataclass(frozen=True)
class ShrunkSpectrum:
    """Shrunk eigenvalues plus per-index diagnostics."""

    values: NDArray[np.float64]
    kind: EstimatorKind
    negative_denominator: NDArray[np.bool_] = field(default=None)  # type: ignore[assignment]
    isotonized: NDArray[np.bool_] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        if not np.all(np.isfinite(v)):
            raise DomainError("shrunk eigenvalues must be finite", rule=self.kind.value)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        for name in ("negative_denominator", "isotonized"):
            flags = getattr(self, name)
            flags = np.zeros(v.size, dtype=bool) if flags is None else np.array(flags, dtype=bool)
            flags.setflags(write=False)
            object.__setattr__(self, name, flags)

    @property
    def non_monotone(self) -> NDArray[np.bool_]:
        """Indices ``i`` with ``values[i] < values[i + 1]``."""
        out = np.zeros(self.values.size, dtype=bool)
        out[:-1] = np.diff(self.values) > 0
        return out

    def diagnostics(self) -> dict[str, list[int]]:
        return {
            "negative_denominator": np.flatnonzero(self.negative_denominator).tolist(),
            "isotonized": np.flatnonzero(self.isotonized).tolist(),
            "non_monotone": np.flatnonzero(self.non_monotone).tolist(),
            "nonpositive": np.flatnonzero(self.values <= 0).tolist(),
        }


def _spectrum(l: ArrayLike) -> NDArray[np.float64]:
    x = np.asarray(l, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("sample eigenvalues must be a non-empty vector")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("sample eigenvalues must be finite and positive")
    if np.any(np.diff(x) > 0):
        raise DomainError("sample eigenvalues must be in descending order")
    return x


def _check_n(n: int, p: int, rule: str) -> None:
    if n <= p:
        raise DomainError(f"{rule} requires n > p (n={n}, p={p})", rule=rule)


def shrink_sample(l: ArrayLike) -> ShrunkSpectrum:
    return ShrunkSpectrum(_spectrum(l).copy(), EstimatorKind.SAMPLE)


def _stein_denominators(x: NDArray[np.float64], n: int, factor: float) -> NDArray[np.float64]:
    return (n - x.size + 1) - factor * x * _gap_sums(x)


def shrink_stein_raw(l: ArrayLike, n: int) -> ShrunkSpectrum:
    """Stein's rule ``n l_i / (n - p + 1 - 2 l_i sum_{j != i} 1/(l_j - l_i))``.

    Values are returned unrepaired; they can be negative or out of order.
    """
    x = _spectrum(l)
    _check_n(n, x.size, "stein_raw")
    _check_gaps(x, np.arange(x.size))
    denom = _stein_denominators(x, n, 2.0)
    if np.any(denom == 0):
        i = int(np.flatnonzero(denom == 0)[0])
        raise SingularityError(f"stein_raw denominator vanishes at index {i}", rule="stein_raw", index=i)
    return ShrunkSpectrum(n * x / denom, EstimatorKind.STEIN_RAW, negative_denominator=denom < 0)


def isotonize(raw: ArrayLike, l: ArrayLike) -> NDArray[np.float64]:
    """Floor ``raw`` at ``ISO_FLOOR * l`` and fit the closest non-increasing sequence (least squares)."""
    raw = np.asarray(raw, dtype=np.float64)
    l = np.asarray(l, dtype=np.float64)
    floored = np.maximum(raw, ISO_FLOOR * l)
    return np.asarray(isotonic_regression(floored, increasing=False).x, dtype=np.float64)


def shrink_stein_iso(l: ArrayLike, n: int) -> ShrunkSpectrum:
    """Stein's rule projected back onto the positive descending cone.

    Raw values are floored at ``ISO_FLOOR * l_i`` and then pooled with
    unweighted pool-adjacent-violators.
    """
    x = _spectrum(l)
    raw = shrink_stein_raw(x, n)
    values = isotonize(raw.values, x)
    return ShrunkSpectrum(
        values,
        EstimatorKind.STEIN_ISO,
        negative_denominator=raw.negative_denominator,
        isotonized=values != raw.values,
    )


def shrink_stein_dispersed(l: ArrayLike, n: int) -> ShrunkSpectrum:
    """Stein's rule for widely dispersed spectra: ``n l_i / (n + p - 2i + 1)`` (1-based i)."""
    x = _spectrum(l)
    p = x.size
    i = np.arange(1, p + 1)
    denom = n + p - 2 * i + 1
    if np.any(denom <= 0):
        raise DomainError(f"stein_dispersed needs n + p - 2i + 1 > 0 (n={n}, p={p})", rule="stein_dispersed")
    return ShrunkSpectrum(n * x / denom, EstimatorKind.STEIN_DISPERSED)


def shrink_tsai(l: ArrayLike, n: int) -> ShrunkSpectrum:
    """Quantile-map rule ``n l_i / (n - p + 1 - l_i sum_{j != i} 1/(l_j - l_i))``.

    Stein's rule without the factor 2.  A non-positive denominator raises
    :class:`DomainError` naming the first offending index.
    """
    x = _spectrum(l)
    _check_n(n, x.size, "tsai")
    _check_gaps(x, np.arange(x.size))
    denom = _stein_denominators(x, n, 1.0)
    bad = denom <= 0
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(
            f"tsai denominator is non-positive at index {i} ({denom[i]!r}); "
            f"{int(bad.sum())} of {x.size} indices affected",
            rule="tsai",
            index=i,
        )
    return ShrunkSpectrum(n * x / denom, EstimatorKind.TSAI)


def oracle_projection(u: ArrayLike, sigma: ArrayLike, inverse: bool = False) -> NDArray[np.float64]:
    """``diag(U^T Sigma U)``, or ``diag(U^T Sigma^-1 U)`` when ``inverse`` is set."""
    s = as_symmetric(sigma).entries
    u = np.asarray(u, dtype=np.float64)
    if u.shape != s.shape:
        raise DomainError(f"U has shape {u.shape} but Sigma has shape {s.shape}")
    try:
        factor = cho_factor(s, lower=True)
    except LinAlgError:
        raise DomainError("Sigma must be positive definite", rule="oracle_projection") from None
    if inverse:
        return np.einsum("ij,ij->j", u, cho_solve(factor, u))
    return np.einsum("ij,ij->j", u, s @ u)


def shrink(
    kind: EstimatorKind | str,
    decomp: SpectralDecomposition,
    n: int,
    oracle_sigma: ArrayLike | None = None,
) -> ShrunkSpectrum:
    """Dispatch to the rule named by ``kind``.

    ``oracle_projection_inv`` returns ``1 / a*_i`` so that, like every other
    kind, it estimates covariance eigenvalues rather than precision ones.
    """
    kind = EstimatorKind.parse(kind)
    l = decomp.values
    if kind.is_oracle:
        if oracle_sigma is None:
            raise ConfigurationError(f"{kind.value} needs the true covariance (oracle_sigma)")
        if kind is EstimatorKind.ORACLE_PROJECTION:
            return ShrunkSpectrum(oracle_projection(decomp.vectors, oracle_sigma), kind)
        return ShrunkSpectrum(1.0 / oracle_projection(decomp.vectors, oracle_sigma, inverse=True), kind)
    if kind is EstimatorKind.SAMPLE:
        return shrink_sample(l)
    if kind is EstimatorKind.STEIN_RAW:
        return shrink_stein_raw(l, n)
    if kind is EstimatorKind.STEIN_ISO:
        return shrink_stein_iso(l, n)
    if kind is EstimatorKind.STEIN_DISPERSED:
        return shrink_stein_dispersed(l, n)
    return shrink_tsai(l, n)
