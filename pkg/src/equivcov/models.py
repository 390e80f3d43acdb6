"""Population spectra and reproducible Gaussian data generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigurationError, DomainError

__all__ = [
    "SeedSpec",
    "SpectrumSpec",
    "generator",
    "population_covariance",
    "random_orthogonal",
    "realize_spectrum",
    "sample_gaussian",
]

_KINDS = ("identity", "geometric", "explicit", "atoms")


@dataclass(frozen=True)
class SpectrumSpec:
    """Declarative population eigenvalue profile.

    ``identity``   all ones
    ``geometric``  ``(r^(p-1), ..., r, 1)``
    ``explicit``   the given ``values``
    ``atoms``      ``values`` repeated ``round(weight * p)`` times

    Every profile is multiplied by ``scale``.
    """

    kind: str
    p: int
    scale: float = 1.0
    ratio: float | None = None
    values: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigurationError(f"spectrum.kind must be one of {_KINDS}, got {self.kind!r}")
        if int(self.p) != self.p or self.p < 1:
            raise ConfigurationError(f"spectrum.p must be a positive integer, got {self.p!r}")
        if self.kind == "geometric" and (self.ratio is None or not self.ratio > 1):
            raise ConfigurationError("spectrum.ratio must be > 1 for a geometric spectrum")
        if self.kind == "explicit" and len(self.values) != self.p:
            raise ConfigurationError(f"spectrum.values must have length p={self.p}")
        if self.kind == "atoms":
            if not self.values or len(self.values) != len(self.weights):
                raise ConfigurationError("spectrum.values and spectrum.weights must be non-empty and equal length")
            if any(w <= 0 for w in self.weights) or not np.isclose(sum(self.weights), 1.0):
                raise ConfigurationError("spectrum.weights must be positive and sum to 1")

    @classmethod
    def identity(cls, p: int, scale: float = 1.0) -> SpectrumSpec:
        return cls("identity", p, scale)

    @classmethod
    def geometric(cls, p: int, ratio: float, scale: float = 1.0) -> SpectrumSpec:
        return cls("geometric", p, scale, ratio=ratio)

    @classmethod
    def explicit(cls, values: ArrayLike, scale: float = 1.0) -> SpectrumSpec:
        vals = tuple(float(v) for v in np.ravel(values))
        return cls("explicit", len(vals), scale, values=vals)

    @classmethod
    def atoms(cls, values: ArrayLike, weights: ArrayLike, p: int, scale: float = 1.0) -> SpectrumSpec:
        return cls(
            "atoms", p, scale,
            values=tuple(float(v) for v in np.ravel(values)),
            weights=tuple(float(w) for w in np.ravel(weights)),
        )

    @classmethod
    def from_dict(cls, d: dict[str, Any], p: int | None = None) -> SpectrumSpec:
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigurationError("spectrum must be an object with a 'kind' field")
        p = d.get("p", p)
        if p is None:
            raise ConfigurationError("spectrum.p is required")
        return cls(
            kind=d["kind"],
            p=p,
            scale=float(d.get("scale", 1.0)),
            ratio=None if d.get("ratio") is None else float(d["ratio"]),
            values=tuple(float(v) for v in d.get("values", ())),
            weights=tuple(float(w) for w in d.get("weights", ())),
        )

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "p": self.p, "scale": self.scale}
        if self.ratio is not None:
            d["ratio"] = self.ratio
        if self.values:
            d["values"] = list(self.values)
        if self.weights:
            d["weights"] = list(self.weights)
        return d

    @property
    def min_adjacent_ratio(self) -> float:
        """Smallest ratio between consecutive realized eigenvalues (inf for p = 1)."""
        g = realize_spectrum(self)
        return float(np.min(g[:-1] / g[1:])) if g.size > 1 else float("inf")


def _atom_counts(weights: NDArray[np.float64], p: int) -> NDArray[np.int64]:
    # largest-remainder rounding so the counts sum to p
    raw = weights * p
    counts = np.floor(raw).astype(np.int64)
    short = p - int(counts.sum())
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def realize_spectrum(spec: SpectrumSpec) -> NDArray[np.float64]:
    """Descending, strictly positive population eigenvalues described by ``spec``."""
    if not spec.scale > 0:
        raise DomainError(f"spectrum scale must be positive, got {spec.scale!r}")
    p = spec.p
    if spec.kind == "identity":
        g = np.ones(p)
    elif spec.kind == "geometric":
        g = float(spec.ratio) ** np.arange(p - 1, -1, -1, dtype=np.float64)
    elif spec.kind == "explicit":
        g = np.sort(np.asarray(spec.values, dtype=np.float64))[::-1]
    else:
        vals = np.asarray(spec.values, dtype=np.float64)
        counts = _atom_counts(np.asarray(spec.weights, dtype=np.float64), p)
        order = np.argsort(-vals, kind="stable")
        g = np.repeat(vals[order], counts[order])
    g = spec.scale * g
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise DomainError("population eigenvalues must be finite and strictly positive")
    return g


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one independent random stream: ``(master_seed, domain, stream_id)``.

    ``stream_id`` is normally the trial index; ``domain`` separates streams
    used for different purposes (data draws vs population rotations).
    """

    master_seed: int
    stream_id: int = 0
    domain: int = field(default=0)

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError("master_seed must be a 64-bit unsigned integer")
        if self.stream_id < 0 or self.domain < 0:
            raise ConfigurationError("stream_id and domain must be non-negative")


def generator(seed: SeedSpec) -> np.random.Generator:
    """Counter-based Philox generator keyed by the seed triple."""
    ss = np.random.SeedSequence(seed.master_seed, spawn_key=(seed.domain, seed.stream_id))
    return np.random.Generator(np.random.Philox(ss))


def random_orthogonal(p: int, seed: SeedSpec) -> NDArray[np.float64]:
    """Haar-distributed orthogonal matrix via sign-corrected QR of a Gaussian matrix."""
    if p < 1:
        raise DomainError("p must be at least 1")
    z = generator(seed).standard_normal((p, p))
    q, r = np.linalg.qr(z)
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs


def sample_gaussian(
    gamma: ArrayLike,
    n: int,
    seed: SeedSpec,
    rotation: ArrayLike | None = None,
) -> NDArray[np.float64]:
    """Draw ``n`` rows ``x_i = Sigma^(1/2) z_i`` with ``Sigma = V diag(gamma) V^T``.

    ``Sigma^(1/2)`` is the symmetric square root.  With no rotation ``V`` is
    the identity and each coordinate is simply scaled by ``sqrt(gamma)``.
    """
    g = np.asarray(gamma, dtype=np.float64)
    if g.ndim != 1 or g.size < 1 or np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise DomainError("gamma must be a non-empty vector of positive finite values")
    if n < 1:
        raise DomainError("n must be at least 1")
    z = generator(seed).standard_normal((n, g.size))
    if rotation is None:
        return z * np.sqrt(g)
    v = np.asarray(rotation, dtype=np.float64)
    if v.shape != (g.size, g.size):
        raise DomainError(f"rotation must be {g.size} x {g.size}")
    root = (v * np.sqrt(g)) @ v.T
    return z @ root


def population_covariance(gamma: ArrayLike, rotation: ArrayLike | None = None) -> NDArray[np.float64]:
    g = np.asarray(gamma, dtype=np.float64)
    if rotation is None:
        return np.diag(g)
    v = np.asarray(rotation, dtype=np.float64)
    sigma = (v * g) @ v.T
    return 0.5 * (sigma + sigma.T)
