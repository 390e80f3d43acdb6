"""Symmetric matrices, sample covariance and ordered eigendecompositions.

Everything here follows one convention: eigenvalues are returned in
descending order and every eigenvector is signed so that its first
non-negligible component is non-negative.  Estimators are rebuilt from a
decomposition with :func:`assemble`, which keeps the sample eigenvectors and
replaces only the eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, InvalidDataError, NumericalError

__all__ = [
    "CLUSTER_RTOL",
    "GRADED_RATIO",
    "SpectralDecomposition",
    "SymmetricMatrix",
    "as_observations",
    "as_symmetric",
    "assemble",
    "clustered_pairs",
    "eigh",
    "jacobi_eigh",
    "sample_covariance",
    "sample_scatter",
]

# relative gap below which two eigenvalues count as one cluster
CLUSTER_RTOL = 1e-9
# tolerance used to decide whether an input is symmetric before storing it
_SYMMETRY_RTOL = 1e-8
_SIGN_ATOL = 1e-12
# diagonal dynamic range above which "auto" switches to Jacobi
GRADED_RATIO = 1e6


def _frozen(array: NDArray[np.float64]) -> NDArray[np.float64]:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, slots=True)
class SymmetricMatrix:
    """Real symmetric ``p x p`` matrix with exactly symmetric, read-only storage.

    Inputs that are symmetric up to roundoff are averaged with their
    transpose; anything further from symmetric is rejected.
    """

    entries: NDArray[np.float64]

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidDataError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidDataError("matrix contains non-finite entries")
        scale = max(float(np.max(np.abs(a))), np.finfo(np.float64).tiny)
        if np.max(np.abs(a - a.T)) > _SYMMETRY_RTOL * scale:
            raise InvalidDataError("matrix is not symmetric")
        object.__setattr__(self, "entries", _frozen(0.5 * (a + a.T)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)


def as_symmetric(m: SymmetricMatrix | ArrayLike) -> SymmetricMatrix:
    return m if isinstance(m, SymmetricMatrix) else SymmetricMatrix(np.asarray(m))


def as_observations(data: ArrayLike) -> NDArray[np.float64]:
    """Validate an ``n x p`` observation matrix (rows are observations)."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise InvalidDataError(f"observations must be a non-empty n x p array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidDataError("observations contain non-finite values")
    return x


def sample_scatter(data: ArrayLike) -> SymmetricMatrix:
    """Scatter matrix ``A = sum_i x_i x_i^T`` of zero-mean observations."""
    x = as_observations(data)
    return SymmetricMatrix(x.T @ x)


def sample_covariance(data: ArrayLike) -> SymmetricMatrix:
    """Maximum likelihood covariance ``A / n`` under a known zero mean (no centering)."""
    x = as_observations(data)
    return SymmetricMatrix((x.T @ x) / x.shape[0])


def clustered_pairs(values: ArrayLike, rtol: float = CLUSTER_RTOL) -> list[tuple[int, int]]:
    """Adjacent index pairs of a descending spectrum whose gap is at most ``rtol`` relative.

    The gap between neighbours is measured against the larger magnitude of
    the two, so the test is scale free.  Exactly equal values always count.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        return []
    gaps = np.abs(v[:-1] - v[1:])
    scale = np.maximum(np.abs(v[:-1]), np.abs(v[1:]))
    bad = np.flatnonzero(gaps <= rtol * scale)
    return [(int(i), int(i) + 1) for i in bad]


@dataclass(frozen=True, slots=True)
class SpectralDecomposition:
    """Orthogonal eigenvectors (as columns) and descending eigenvalues."""

    vectors: NDArray[np.float64]
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        u = np.array(self.vectors, dtype=np.float64)
        w = np.array(self.values, dtype=np.float64)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or w.shape != (u.shape[0],):
            raise InvalidDataError("vectors must be p x p and values of length p")
        if np.any(np.diff(w) > 0):
            raise InvalidDataError("eigenvalues must be sorted in descending order")
        object.__setattr__(self, "vectors", _frozen(u))
        object.__setattr__(self, "values", _frozen(w))

    @property
    def dim(self) -> int:
        return self.values.size

    @property
    def clustered(self) -> bool:
        return bool(clustered_pairs(self.values))

    def reconstruct(self) -> SymmetricMatrix:
        return assemble(self, self.values, check_positive=False)


def _canonicalize(values: NDArray[np.float64], vectors: NDArray[np.float64]) -> SpectralDecomposition:
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order].copy()
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        nz = np.flatnonzero(np.abs(col) > _SIGN_ATOL)
        if nz.size and col[nz[0]] < 0:
            vectors[:, k] = -col
    return SpectralDecomposition(vectors, values)


def jacobi_eigh(
    m: SymmetricMatrix | ArrayLike, *, tol: float = np.finfo(np.float64).eps, max_sweeps: int = 100
) -> SpectralDecomposition:
    """Cyclic Jacobi eigendecomposition.

    A rotation is skipped once ``|a_ij| <= tol * sqrt(|a_ii a_jj|)``.  This
    scaled threshold gives high relative accuracy for graded positive
    definite matrices (widely dispersed spectra), where an absolute threshold
    would stop before the small eigenvalues have converged.
    """
    a = np.array(as_symmetric(m).entries, dtype=np.float64)
    p = a.shape[0]
    v = np.eye(p)
    tiny = np.finfo(np.float64).tiny
    for _ in range(max_sweeps):
        rotated = False
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if abs(aij) <= tiny or abs(aij) <= tol * np.sqrt(abs(a[i, i] * a[j, j])):
                    continue
                rotated = True
                theta = (a[j, j] - a[i, i]) / (2.0 * aij)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ai, aj = a[:, i].copy(), a[:, j].copy()
                a[:, i] = c * ai - s * aj
                a[:, j] = s * ai + c * aj
                ai, aj = a[i, :].copy(), a[j, :].copy()
                a[i, :] = c * ai - s * aj
                a[j, :] = s * ai + c * aj
                a[i, j] = a[j, i] = 0.0
                vi, vj = v[:, i].copy(), v[:, j].copy()
                v[:, i] = c * vi - s * vj
                v[:, j] = s * vi + c * vj
        if not rotated:
            return _canonicalize(np.diag(a).copy(), v)
    off = a - np.diag(np.diag(a))
    residual = float(np.linalg.norm(off))
    raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps", residual=residual)


def _is_graded(a: NDArray[np.float64]) -> bool:
    d = np.abs(np.diag(a))
    if d.size < 2 or np.min(d) == 0:
        return False
    return float(np.max(d) / np.min(d)) > GRADED_RATIO


def eigh(
    m: SymmetricMatrix | ArrayLike, *, method: Literal["auto", "lapack", "jacobi"] = "auto"
) -> SpectralDecomposition:
    """Eigendecomposition with descending eigenvalues and the sign convention above.

    ``"lapack"`` uses the backward-stable tridiagonal solver behind
    :func:`numpy.linalg.eigh`, whose error is relative to the largest
    eigenvalue.  ``"jacobi"`` uses :func:`jacobi_eigh`, which stays accurate
    for each eigenvalue on graded matrices.  ``"auto"`` picks Jacobi when the
    diagonal spans more than ``GRADED_RATIO``.  All paths are deterministic.
    """
    sym = as_symmetric(m)
    if method == "auto":
        method = "jacobi" if _is_graded(sym.entries) else "lapack"
    if method == "jacobi":
        return jacobi_eigh(sym)
    if method != "lapack":
        raise ValueError(f"unknown eigendecomposition method {method!r}")
    try:
        values, vectors = np.linalg.eigh(sym.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}", residual=float("nan")) from exc
    return _canonicalize(values, vectors)


def assemble(
    decomp: SpectralDecomposition, shrunk: ArrayLike, *, check_positive: bool = True
) -> SymmetricMatrix:
    """Rebuild ``U diag(shrunk) U^T`` from sample eigenvectors and new eigenvalues."""
    d = np.asarray(shrunk, dtype=np.float64)
    if d.shape != (decomp.dim,):
        raise InvalidDataError(f"expected {decomp.dim} eigenvalues, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise DomainError("shrunk eigenvalues must be finite")
    if check_positive and np.any(d <= 0):
        bad = int(np.flatnonzero(d <= 0)[0])
        raise DomainError(f"shrunk eigenvalue {bad} is not positive ({d[bad]!r})", index=bad)
    u = decomp.vectors
    return SymmetricMatrix((u * d) @ u.T)
