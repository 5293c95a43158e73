"""Validated covariance matrices and the linear interpolation path between two of them.

All quadratic-form work downstream goes through the symmetric part of
``(S1 - S0) @ inv(S_s)``; ``y @ M @ y`` only sees ``(M + M.T) / 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DimensionZero,
    InputError,
    NotPositiveDefinite,
    NotSymmetric,
    SOutOfRange,
)

SYMMETRY_RTOL = 1e-12
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class SymEigen:
    eigenvalues: np.ndarray  # ascending
    basis: np.ndarray  # columns are eigenvectors

    def reconstruct(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.T


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """Symmetric positive definite matrix; construct through :func:`validate_spd`."""

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigen(self) -> SymEigen:
        return sym_eigen(self.entries)

    def cholesky(self) -> np.ndarray:
        return linalg.cholesky(self.entries, lower=True)

    def scaled(self, c: float) -> "SpdMatrix":
        return validate_spd(c * self.entries)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, SpdMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and np.array_equal(
            self.entries, other.entries
        )

    __hash__ = None


def sym_eigen(m) -> SymEigen:
    m = np.asarray(m, dtype=float)
    m = 0.5 * (m + m.T)
    try:
        w, v = linalg.eigh(m)
    except linalg.LinAlgError as exc:  # LAPACK iteration cap
        raise ConvergenceFailure(f"symmetric eigensolver failed: {exc}") from exc
    return SymEigen(eigenvalues=w, basis=v)


def validate_spd(raw) -> SpdMatrix:
    """Check symmetry and positive definiteness, returning the symmetrized matrix.

    Asymmetry up to ``SYMMETRY_RTOL`` (relative to the largest entry) is
    averaged away; anything larger raises :class:`NotSymmetric`. The
    smallest eigenvalue must exceed ``p * eps * largest``.
    """
    a = np.array(raw, dtype=float)
    if a.ndim == 0 or a.size == 0:
        raise DimensionZero("covariance matrix is empty")
    if a.ndim == 1 and a.size == 1:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    p = a.shape[0]
    scale = np.max(np.abs(a))
    asym = np.max(np.abs(a - a.T))
    if asym > SYMMETRY_RTOL * scale:
        raise NotSymmetric(f"asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:g} relative")
    a = 0.5 * (a + a.T)
    w = sym_eigen(a).eigenvalues
    if w[-1] <= 0 or w[0] <= p * _EPS * w[-1]:
        raise NotPositiveDefinite(
            f"eigenvalues in [{w[0]:.6g}, {w[-1]:.6g}] fail the floor p*eps*max"
        )
    a.setflags(write=False)
    return SpdMatrix(a)


def as_spd(m) -> SpdMatrix:
    return m if isinstance(m, SpdMatrix) else validate_spd(m)


@dataclass(frozen=True)
class GaussianPair:
    sigma0: SpdMatrix
    sigma1: SpdMatrix

    def __post_init__(self):
        if self.sigma0.dim != self.sigma1.dim:
            raise DimensionMismatch(
                f"dimensions differ: {self.sigma0.dim} vs {self.sigma1.dim}"
            )

    @classmethod
    def of(cls, sigma0, sigma1) -> "GaussianPair":
        return cls(as_spd(sigma0), as_spd(sigma1))

    @property
    def dim(self) -> int:
        return self.sigma0.dim

    @property
    def delta(self) -> np.ndarray:
        return self.sigma1.entries - self.sigma0.entries

    def swapped(self) -> "GaussianPair":
        return GaussianPair(self.sigma1, self.sigma0)

    def is_identical(self) -> bool:
        return bool(np.array_equal(self.sigma0.entries, self.sigma1.entries))


def _check_s(s: float) -> float:
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise SOutOfRange(f"s={s} outside [0, 1]")
    return s


def _path(pair: GaussianPair, s: float) -> np.ndarray:
    return (1.0 - s) * pair.sigma0.entries + s * pair.sigma1.entries


def interpolate(pair: GaussianPair, s: float) -> SpdMatrix:
    s = _check_s(s)
    if s == 0.0:
        return pair.sigma0
    if s == 1.0:
        return pair.sigma1
    return validate_spd(_path(pair, s))


def log_prime(pair: GaussianPair, s: float) -> np.ndarray:
    """Symmetric part of ``(S1 - S0) @ inv(S_s)``."""
    sigma_s = interpolate(pair, _check_s(s)).entries
    # solve(S_s, D) = inv(S_s) @ D; its transpose is D @ inv(S_s)
    right = linalg.solve(sigma_s, pair.delta, assume_a="pos")
    return 0.5 * (right + right.T)


def log_prime_det(pair: GaussianPair, s: float) -> float:
    """d/ds log det S_s = tr((S1 - S0) inv(S_s))."""
    sigma_s = interpolate(pair, _check_s(s)).entries
    return float(np.trace(linalg.solve(sigma_s, pair.delta, assume_a="pos")))


def generalized_eigenvalues(pair: GaussianPair) -> np.ndarray:
    """Eigenvalues of inv(S0) S1 via whitening with the Cholesky factor of S0."""
    low = pair.sigma0.cholesky()
    tmp = linalg.solve_triangular(low, pair.sigma1.entries, lower=True)
    whitened = linalg.solve_triangular(low, tmp.T, lower=True)
    return sym_eigen(whitened).eigenvalues


def trace_divergence(pair: GaussianPair) -> float:
    """tr(I - (S0 inv(S1) + inv(S0) S1) / 2); never positive, exactly 0 for equal matrices."""
    if pair.is_identical():
        return 0.0
    lam = generalized_eigenvalues(pair)
    # 1 - (l + 1/l)/2 = -(l - 1)^2 / (2 l), written to avoid cancellation near l = 1
    return float(-np.sum((lam - 1.0) ** 2 / (2.0 * lam)))
