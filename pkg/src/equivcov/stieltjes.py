"""Stieltjes transforms, principal values and the asymptotic eigenvalue maps.

Conventions: ``eigs`` is a descending sample spectrum, indices are 0-based,
``c = p / n`` lies in ``(0, 1)`` and complex points are plain ``complex``.
The Marchenko-Pastur helpers cover the identity population only.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ClusteredSpectrumError, DomainError, PoleError, SingularityError
from .spectral import CLUSTER_RTOL

__all__ = [
    "BOUNDARY_ETA",
    "check_concentration",
    "mp_boundary",
    "mp_density",
    "mp_real_boundary",
    "mp_stieltjes",
    "mp_support",
    "oracle_delta",
    "oracle_delta_inv",
    "phi_asymptotic",
    "principal_value",
    "principal_values",
    "quantile_map",
    "stieltjes_empirical",
]

# vertical offset used for boundary values outside the closed-form region
BOUNDARY_ETA = 1e-6


def check_concentration(c: float) -> float:
    c = float(c)
    if not 0.0 < c < 1.0:
        raise DomainError(f"concentration c must lie in (0, 1), got {c!r}")
    return c


def _eigs(eigs: ArrayLike) -> NDArray[np.float64]:
    e = np.asarray(eigs, dtype=np.float64)
    if e.ndim != 1 or e.size == 0:
        raise DomainError("eigenvalues must be a non-empty vector")
    return e


def stieltjes_empirical(eigs: ArrayLike, z: complex) -> complex:
    """``(1/p) sum_i 1/(l_i - z)``, i.e. ``p^-1 tr (S - zI)^-1``."""
    e = _eigs(eigs)
    z = complex(z)
    if z.imag == 0 and np.any(e == z.real):
        raise PoleError(f"z = {z.real!r} coincides with an eigenvalue")
    return complex(np.mean(1.0 / (e - z)))


def _check_gaps(e: NDArray[np.float64], idx: NDArray[np.int64]) -> None:
    for i in idx:
        for j in (i - 1, i + 1):
            if 0 <= j < e.size:
                if abs(e[i] - e[j]) <= CLUSTER_RTOL * max(abs(e[i]), abs(e[j])):
                    pair = (int(min(i, j)), int(max(i, j)))
                    raise ClusteredSpectrumError(
                        f"eigenvalues {pair[0]} and {pair[1]} are clustered "
                        f"({e[pair[0]]!r}, {e[pair[1]]!r})",
                        pair=pair,
                    )


def _gap_sums(e: NDArray[np.float64]) -> NDArray[np.float64]:
    # sum_{j != i} 1 / (l_j - l_i) for every i
    d = e[np.newaxis, :] - e[:, np.newaxis]
    np.fill_diagonal(d, np.inf)
    return np.sum(1.0 / d, axis=1)


def principal_values(eigs: ArrayLike) -> NDArray[np.float64]:
    """Empirical principal value ``(1/p) sum_{j != i} 1/(l_j - l_i)`` at every ``l_i``."""
    e = _eigs(eigs)
    _check_gaps(e, np.arange(e.size))
    return _gap_sums(e) / e.size


def principal_value(eigs: ArrayLike, i: int) -> float:
    """Empirical principal value at the single index ``i``."""
    e = _eigs(eigs)
    if not 0 <= i < e.size:
        raise IndexError(f"index {i} out of range for {e.size} eigenvalues")
    _check_gaps(e, np.array([i]))
    others = np.delete(e, i)
    return float(np.sum(1.0 / (others - e[i])) / e.size)


def mp_support(c: float) -> tuple[float, float]:
    c = check_concentration(c)
    return (1.0 - math.sqrt(c)) ** 2, (1.0 + math.sqrt(c)) ** 2


def mp_density(l: ArrayLike, c: float) -> NDArray[np.float64]:
    """Marchenko-Pastur density for the identity population (no atom since c < 1)."""
    lo, hi = mp_support(c)
    x = np.asarray(l, dtype=np.float64)
    inside = (x > lo) & (x < hi)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((hi - xi) * (xi - lo)) / (2.0 * math.pi * c * xi)
    return out


def mp_stieltjes(z: complex, c: float) -> complex:
    """Closed-form Stieltjes transform of the Marchenko-Pastur law, ``Im z > 0``.

    Of the two roots of ``c z m^2 + (z - 1 + c) m + 1 = 0`` the one in the
    upper half plane is returned.
    """
    c = check_concentration(c)
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"mp_stieltjes needs Im z > 0, got {z!r}")
    root = np.sqrt(complex((z - 1.0 - c) ** 2 - 4.0 * c))
    a = (1.0 - c) - z
    m1 = (a + root) / (2.0 * c * z)
    m2 = (a - root) / (2.0 * c * z)
    return complex(m1 if m1.imag > m2.imag else m2)


def mp_real_boundary(l: float, c: float) -> float:
    """Real part of the boundary value ``(1 - c - l) / (2 c l)`` inside the bulk."""
    lo, hi = mp_support(c)
    if not lo < l < hi:
        raise DomainError(f"l = {l!r} is outside the open support ({lo!r}, {hi!r})")
    return (1.0 - c - l) / (2.0 * c * l)


def mp_boundary(l: float, c: float) -> complex:
    """Boundary value of the Marchenko-Pastur Stieltjes transform at real ``l``.

    Inside the bulk the closed form (real part above, imaginary part
    ``pi * density``) is used; elsewhere the transform is evaluated at
    ``l + i * BOUNDARY_ETA``.
    """
    lo, hi = mp_support(c)
    if lo < l < hi:
        return complex(mp_real_boundary(l, c), math.pi * float(mp_density(l, c)))
    return mp_stieltjes(complex(l, BOUNDARY_ETA), c)


def oracle_delta(l: float, m_boundary: complex, c: float) -> float:
    """``l / |1 - c - c l m(l)|^2``, the limit of ``u_i^T Sigma u_i``."""
    c = check_concentration(c)
    if not l > 0:
        raise DomainError(f"l must be positive, got {l!r}")
    denom = abs(1.0 - c - c * l * complex(m_boundary)) ** 2
    if denom == 0:
        raise SingularityError(f"vanishing denominator at l = {l!r}")
    return l / denom


def oracle_delta_inv(l: float, m_re: float, c: float) -> float:
    """``(1 - c - 2 c l Re m(l)) / l``, the limit of ``u_i^T Sigma^-1 u_i``.

    This is not the reciprocal of :func:`oracle_delta` in general.
    """
    c = check_concentration(c)
    if not l > 0:
        raise DomainError(f"l must be positive, got {l!r}")
    return (1.0 - c - 2.0 * c * l * m_re) / l


def phi_asymptotic(l: float, m_re: float, c: float) -> float:
    """``l / (1 - c - 2 c l Re m(l))``, the reciprocal of :func:`oracle_delta_inv`."""
    c = check_concentration(c)
    denom = 1.0 - c - 2.0 * c * l * m_re
    if denom == 0:
        raise SingularityError(f"vanishing denominator at l = {l!r}")
    return l / denom


def quantile_map(l: float, m_re: float, c: float) -> float:
    """Map a sample quantile to a population quantile: ``l / (1 - c - c l Re m(l))``.

    Differs from :func:`phi_asymptotic` by the missing factor 2.
    """
    c = check_concentration(c)
    denom = 1.0 - c - c * l * m_re
    if not denom > 0:
        raise DomainError(f"non-positive denominator {denom!r} at l = {l!r}", rule="quantile_map")
    return l / denom
