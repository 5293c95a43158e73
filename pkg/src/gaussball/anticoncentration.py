"""Shell probabilities of centered Gaussian balls: the shift-to-scaling
reduction, two upper bounds on P(t <= |x|^2 < t + delta), and the density of
|x|^2 written through truncated second moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, stats

from . import quadform
from .config import InversionConfig, NumericsConfig
from .errors import ClampError, InputError, PaperFormulaDomain, TNonPositive
from .spd import GaussianPair, SpdMatrix, as_spd


@dataclass(frozen=True)
class ShiftQuery:
    sigma: SpdMatrix
    t: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "sigma", as_spd(self.sigma))
        if not self.t > 0:
            raise TNonPositive(f"t={self.t} must be positive")
        if not self.delta >= 0 or not math.isfinite(self.delta):
            raise InputError(f"delta={self.delta} must be finite and nonnegative")

    @property
    def dim(self) -> int:
        return self.sigma.dim

    @property
    def ratio(self) -> float:
        return self.delta / self.t


def shift_to_scaling(q: ShiftQuery) -> GaussianPair:
    """(Sigma, (1 + delta/t) Sigma): the shell mass equals a ball difference for this pair."""
    return GaussianPair(q.sigma, q.sigma.scaled(1.0 + q.ratio))


def shell_probability(q: ShiftQuery, cfg: InversionConfig | None = None) -> float:
    """P(t <= |x|^2 < t + delta) from the CDF engine."""
    spec = quadform.QuadFormSpec(q.sigma.eigen().eigenvalues)
    if q.delta == 0:
        return 0.0
    f, _, _ = quadform.cdf_grid(spec, [q.t, q.t + q.delta], cfg)
    return float(f[1] - f[0])


def _check_dim(p) -> int:
    if int(p) != p or p < 1:
        raise InputError(f"dimension must be a positive integer, got {p}")
    return int(p)


@lru_cache(maxsize=None)
def ac1_constant(p: int) -> float:
    """E|chi2_p - p| / (2 sqrt(p)) by adaptive quadrature, split at the kink x = p."""
    p = _check_dim(p)
    dens = stats.chi2(p).pdf
    lower, _ = integrate.quad(lambda x: (p - x) * dens(x), 0.0, p, epsabs=1e-12, epsrel=1e-12, limit=200)
    upper, _ = integrate.quad(lambda x: (x - p) * dens(x), p, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    return (lower + upper) / (2.0 * math.sqrt(p))


def ac1_bound(q: ShiftQuery) -> float:
    """C_p sqrt(p) min(log(1 + delta/t), sqrt(log(1 + delta/t))) with the per-dimension C_p."""
    lg = math.log1p(q.ratio)
    return ac1_constant(q.dim) * math.sqrt(q.dim) * min(lg, math.sqrt(lg))


def pinsker_bound(q: ShiftQuery) -> float:
    return math.sqrt(q.dim) * q.ratio


def kl_paper(q: ShiftQuery) -> float:
    """The printed expression p/2 ((D/t)^2 + 2 D/t - 2 log(1 - D/t)), evaluated as written."""
    r = q.ratio
    if r >= 1.0:
        raise PaperFormulaDomain(f"delta/t = {r} >= 1 puts the printed log argument at or below zero")
    return 0.5 * q.dim * (r * r + 2.0 * r - 2.0 * math.log1p(-r))


def kl_derived(q: ShiftQuery) -> float:
    """KL(N(0, c Sigma) || N(0, Sigma)) = p/2 (c - 1 - log c) with c = 1 + delta/t."""
    r = q.ratio
    # c - 1 - log c = r - log1p(r), kept accurate for small r
    return 0.5 * q.dim * (r - math.log1p(r))


def pinsker_from_kl(kl: float) -> float:
    return math.sqrt(kl / 2.0)


@dataclass(frozen=True)
class KlReport:
    kl_derived: float
    kl_paper: float | None
    kl_paper_error: str | None = None
    default: str = "kl_derived"

    @property
    def pinsker_derived(self) -> float:
        return pinsker_from_kl(self.kl_derived)

    @property
    def pinsker_paper(self) -> float | None:
        # the printed expression goes negative for some ratios; sqrt is then undefined
        if self.kl_paper is None or self.kl_paper < 0:
            return None
        return pinsker_from_kl(self.kl_paper)


def kl_scaled_pair(q: ShiftQuery) -> KlReport:
    """Both KL readings; a domain failure of the printed one is recorded, not raised."""
    try:
        printed, err = kl_paper(q), None
    except PaperFormulaDomain as exc:
        printed, err = None, str(exc)
    return KlReport(kl_derived=kl_derived(q), kl_paper=printed, kl_paper_error=err)


def density_chd_grid(sigma, ts, cfg: NumericsConfig | None = None) -> np.ndarray:
    """Density of |x|^2 at each t: (1/2t) [p P(Q < t) - sum_j E z_j^2 1(Q < t)]."""
    cfg = cfg or NumericsConfig()
    sigma = as_spd(sigma)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(~(ts > 0)):
        raise TNonPositive("every t must be positive")
    p = sigma.dim
    tol = cfg.inversion.abs_tolerance
    moments = quadform.truncated_moments(sigma.eigen().eigenvalues, ts, cfg.inversion)
    rho = (p * moments.values[:, 0] - moments.values[:, 1:].sum(axis=1)) / (2.0 * ts)
    if np.any(rho < -10.0 * tol):
        raise ClampError(f"density {float(rho.min()):.3e} is negative beyond rounding slack")
    return np.maximum(rho, 0.0)


def density_chd(sigma, t: float, cfg: NumericsConfig | None = None) -> float:
    if not t > 0:
        raise TNonPositive(f"t={t} must be positive")
    return float(density_chd_grid(sigma, [t], cfg)[0])


def density_bound(p: int, t: float) -> float:
    """ac1_constant(p) sqrt(p) / t."""
    if not t > 0:
        raise TNonPositive(f"t={t} must be positive")
    p = _check_dim(p)
    return ac1_constant(p) * math.sqrt(p) / t
