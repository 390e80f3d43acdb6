"""Validation experiments comparing empirical spectral quantities with closed forms.

Each suite returns plain rows (lists of dicts) that the command line writes
as CSV.  The suites report deviations; they never decide pass or fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .models import SeedSpec, SpectrumSpec, realize_spectrum, sample_gaussian
from .shrinkers import oracle_projection
from .spectral import eigh, sample_covariance
from .stieltjes import (
    mp_boundary,
    mp_stieltjes,
    mp_support,
    oracle_delta,
    oracle_delta_inv,
    phi_asymptotic,
    principal_values,
    quantile_map,
    stieltjes_empirical,
)

__all__ = [
    "DEFAULT_ALPHAS",
    "QuantileReport",
    "alpha_index",
    "empirical_imag",
    "oracle_suite",
    "quantile_suite",
    "stieltjes_suite",
]

DEFAULT_ALPHAS = tuple(round(a, 2) for a in np.arange(0.05, 0.951, 0.05))
STIELTJES_POINT = complex(1.0, 1.0)


def alpha_index(alpha: float, p: int) -> int:
    """1-based descending index ``i`` with ``floor(p (1 - alpha)) = i``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    i = int(math.floor(p * (1.0 - alpha) + 1e-9))
    if not 1 <= i <= p:
        raise ValueError(f"alpha={alpha!r} gives index {i} outside 1..{p}")
    return i


def empirical_imag(eigs: NDArray[np.float64], l: float, eta: float | None = None) -> float:
    """``Im m_Fn(l + i eta)`` with ``eta = p^(-1/2)`` by default: a smoothed ``pi * density``."""
    eta = eigs.size ** -0.5 if eta is None else eta
    return stieltjes_empirical(eigs, complex(l, eta)).imag


def _sample_eigs(gamma: NDArray[np.float64], n: int, seed: SeedSpec) -> NDArray[np.float64]:
    return eigh(sample_covariance(sample_gaussian(gamma, n, seed)), method="lapack").values


def _n_for(c: float, p: int) -> int:
    n = int(round(p / c))
    if n <= p:
        raise ValueError(f"c={c!r} and p={p} do not give n > p")
    return n


def stieltjes_suite(
    c: float = 0.5,
    ps: tuple[int, ...] = (100, 200, 400, 800),
    seeds: int = 5,
    master_seed: int = 0,
    z: complex = STIELTJES_POINT,
) -> tuple[list[dict[str, Any]], list[dict[str, Any]]]:
    """Empirical versus Marchenko-Pastur Stieltjes transform for the identity population.

    Returns per-draw rows and a per-``p`` summary with the median deviation.
    """
    draws: list[dict[str, Any]] = []
    summary: list[dict[str, Any]] = []
    for p in ps:
        n = _n_for(c, p)
        c_eff = p / n
        m_mp = mp_stieltjes(z, c_eff)
        devs = []
        for s in range(seeds):
            eigs = _sample_eigs(np.ones(p), n, SeedSpec(master_seed, s, domain=p))
            m_emp = stieltjes_empirical(eigs, z)
            dev = abs(m_emp - m_mp)
            devs.append(dev)
            draws.append({
                "p": p, "n": n, "seed": s,
                "m_empirical_re": m_emp.real, "m_empirical_im": m_emp.imag,
                "m_mp_re": m_mp.real, "m_mp_im": m_mp.imag,
                "abs_deviation": dev,
            })
        summary.append({
            "p": p, "n": n, "c": c_eff,
            "median_abs_deviation": float(np.median(devs)),
            "max_abs_deviation": float(np.max(devs)),
        })
    return draws, summary


@dataclass
class QuantileReport:
    """Sample quantiles mapped back to population quantiles, one row per alpha.

    Columns per alpha: the empirical quantile ``l_hat``, its empirical
    principal value, the quantile map ``gamma_hat``, the asymptotic oracle
    ``phi_hat``, the true population quantile and the deviations.  For the
    identity population the closed-form curves are added as references.
    """

    spectrum: SpectrumSpec
    n: int
    c: float
    alphas: tuple[float, ...]
    rows: list[dict[str, Any]] = field(default_factory=list)

    def __post_init__(self) -> None:
        a = np.asarray(self.alphas)
        if a.size == 0 or np.any(a <= 0) or np.any(a >= 1) or np.any(np.diff(a) <= 0):
            raise ValueError("alpha grid must be strictly increasing inside (0, 1)")

    def column(self, name: str) -> NDArray[np.float64]:
        return np.array([r[name] for r in self.rows], dtype=np.float64)


def _map_or_nan(l: float, m_re: float, c: float) -> float:
    try:
        return quantile_map(l, m_re, c)
    except ValueError:
        return float("nan")


def _phi_or_nan(l: float, m_re: float, c: float) -> float:
    try:
        return phi_asymptotic(l, m_re, c)
    except ValueError:
        return float("nan")


def quantile_suite(
    spectrum: SpectrumSpec,
    c: float = 0.5,
    seed: int = 0,
    alphas: tuple[float, ...] = DEFAULT_ALPHAS,
) -> QuantileReport:
    p = spectrum.p
    n = _n_for(c, p)
    c_eff = p / n
    gamma = realize_spectrum(spectrum)
    eigs = _sample_eigs(gamma, n, SeedSpec(seed, 0))
    pv = principal_values(eigs)
    identity = spectrum.kind == "identity" or np.all(gamma == gamma[0])
    lo, hi = mp_support(c_eff)
    report = QuantileReport(spectrum, n, c_eff, tuple(alphas))
    for alpha in alphas:
        i = alpha_index(alpha, p)
        l, m_re = float(eigs[i - 1]), float(pv[i - 1])
        g_hat = _map_or_nan(l, m_re, c_eff)
        phi_hat = _phi_or_nan(l, m_re, c_eff)
        g_true = float(gamma[i - 1])
        row = {
            "alpha": alpha, "index": i, "l_hat": l, "m_re_hat": m_re,
            "gamma_hat": g_hat, "phi_hat": phi_hat, "gamma_true": g_true,
            "gamma_deviation": g_hat - g_true, "phi_deviation": phi_hat - g_true,
            "reference_gamma": float("nan"), "reference_phi": float("nan"),
        }
        if identity:
            scale = float(gamma[0])
            row["reference_gamma"] = scale * 2.0 * (l / scale) / (1.0 - c_eff + l / scale)
            row["reference_phi"] = scale
            row["in_bulk"] = bool(lo < l / scale < hi)
        report.rows.append(row)
    return report


def oracle_suite(
    c: float = 0.5,
    p: int = 400,
    seed: int = 0,
    alphas: tuple[float, ...] = DEFAULT_ALPHAS,
) -> list[dict[str, Any]]:
    """Oracle functionals for the identity population, empirical and closed form.

    ``d_star`` and ``a_star`` are the true projections ``u_i^T Sigma u_i`` and
    ``u_i^T Sigma^-1 u_i`` (both 1 here).
    """
    n = _n_for(c, p)
    c_eff = p / n
    x = sample_gaussian(np.ones(p), n, SeedSpec(seed, 0))
    decomp = eigh(sample_covariance(x), method="lapack")
    eigs = decomp.values
    pv = principal_values(eigs)
    sigma = np.eye(p)
    d_star = oracle_projection(decomp.vectors, sigma)
    a_star = oracle_projection(decomp.vectors, sigma, inverse=True)
    lo, hi = mp_support(c_eff)
    rows = []
    for alpha in alphas:
        i = alpha_index(alpha, p)
        l, m_re = float(eigs[i - 1]), float(pv[i - 1])
        m_emp = complex(m_re, empirical_imag(eigs, l))
        delta = oracle_delta(l, m_emp, c_eff)
        delta_inv = oracle_delta_inv(l, m_re, c_eff)
        row = {
            "alpha": alpha, "index": i, "l_hat": l, "m_re_hat": m_re, "m_im_hat": m_emp.imag,
            "delta_hat": delta, "delta_inv_hat": delta_inv, "product_hat": delta * delta_inv,
            "phi_hat": _phi_or_nan(l, m_re, c_eff),
            "in_bulk": bool(lo < l < hi),
            "delta_closed": float("nan"), "delta_inv_closed": float("nan"),
            "product_closed": float("nan"), "phi_closed": float("nan"),
            "d_star": float(d_star[i - 1]), "a_star": float(a_star[i - 1]),
        }
        m_cf = mp_boundary(l, c_eff)
        dc = oracle_delta(l, m_cf, c_eff)
        dic = oracle_delta_inv(l, m_cf.real, c_eff)
        row.update(
            delta_closed=dc, delta_inv_closed=dic, product_closed=dc * dic,
            phi_closed=_phi_or_nan(l, m_cf.real, c_eff),
        )
        rows.append(row)
    return rows
