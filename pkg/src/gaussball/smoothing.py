"""Smooth surrogate of the indicator 1(x > 0) and the smoothed ball difference.

    f_a(x) = 1(x > 0) - sign(x) exp(-a |x|) / 2,     f_a(0) = 0

Off zero f_a'' = a^2 (f_a - 1(x > 0)), so for any linear functional L and
phi_a(t) = L f_a(|x|^2 - t), phi_inf(t) = L 1(|x|^2 > t):

    phi_a = phi_inf + phi_a'' / a^2
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import mc
from . import rng as _rng
from .anticoncentration import density_chd_grid
from .config import McConfig, NumericsConfig
from .errors import InputError
from .spd import GaussianPair, SpdMatrix, as_spd

STENCIL_REL_STEP = 1e-2


@dataclass(frozen=True)
class KernelParam:
    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise InputError(f"alpha={self.alpha} must be positive and finite")


def kernel(x, k: KernelParam):
    """f_alpha evaluated elementwise; scalar in, scalar out."""
    xa = np.asarray(x, dtype=float)
    out = (xa > 0).astype(float) - 0.5 * np.sign(xa) * np.exp(-k.alpha * np.abs(xa))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SmoothedEstimate:
    value: float
    std_error: float
    n: int
    alpha: float
    t: float


def smoothed_difference(pair: GaussianPair, t: float, k: KernelParam, cfg: NumericsConfig | None = None) -> SmoothedEstimate:
    """E f_a(|x1|^2 - t) - E f_a(|x0|^2 - t) on common random numbers."""
    cfg = cfg or NumericsConfig()
    q0, q1 = mc.paired_squared_norms(pair, cfg.mc, tag="smoothed")
    d = kernel(q1 - t, k) - kernel(q0 - t, k)
    n = d.size
    return SmoothedEstimate(float(d.mean()), float(d.std(ddof=1) / math.sqrt(n)), n, k.alpha, float(t))


@dataclass(frozen=True)
class OdeResidual:
    t_grid: np.ndarray
    phi_alpha: np.ndarray
    phi_inf: np.ndarray
    second_diff: np.ndarray  # stencil estimate of phi_alpha''
    residual: np.ndarray
    std_error: np.ndarray
    bias_bound: np.ndarray
    alpha: float

    def within(self, k: float = 4.0) -> np.ndarray:
        return np.abs(self.residual) <= k * (self.std_error + self.bias_bound)

    @property
    def sup_phi_alpha(self) -> float:
        return float(np.max(np.abs(self.phi_alpha)))

    @property
    def sup_phi_inf(self) -> float:
        return float(np.max(np.abs(self.phi_inf)))

    def sup_ordering_holds(self) -> bool:
        return self.sup_phi_alpha <= self.sup_phi_inf


def _draws(target, cfg: McConfig):
    """Squared norms with signs: one sample for a single Sigma, paired CRN samples for a pair."""
    if isinstance(target, GaussianPair):
        q0, q1 = mc.paired_squared_norms(target, cfg, tag="ode")
        return [(q1, 1.0), (q0, -1.0)]
    sigma = as_spd(target)
    factor = sigma.cholesky()
    parts = []
    for c, m in enumerate(_rng.chunk_sizes(cfg.samples, cfg.chunk)):
        x = _rng.stream(cfg.seed, "ode", c).standard_normal((m, sigma.dim)) @ factor.T
        parts.append(np.einsum("ij,ij->i", x, x))
    return [(np.concatenate(parts), 1.0)]


def _stencil_bias(sigmas: list[SpdMatrix], ts: np.ndarray, k: KernelParam, h: np.ndarray, cfg: NumericsConfig):
    """Bound on the stencil part of the residual, (h^2/12) sup|phi_a^(4)| / a^2.

    phi_a^(4) = a^2 (phi_a'' + rho') and phi_a'' = a^2 (phi_a - phi_inf).  As
    f_a - 1(x > 0) is odd,

        |phi_a - phi_inf| <= sup_{[t/2, 3t/2]} |rho'| / a^2 + exp(-a t / 2)

    so the bias is at most (h^2/12) (2 sup|rho'| + a^2 exp(-a t/2)).  rho' is
    a finite difference of the density route; the result is doubled to cover
    the discretised sup.
    """
    a = k.alpha
    out = np.zeros(ts.size)
    for sigma in sigmas:
        for i, (t, hi) in enumerate(zip(ts, h)):
            window = np.linspace(0.5 * t, 1.5 * t, 129)
            d_rho = np.max(np.abs(np.gradient(density_chd_grid(sigma, window, cfg), window)))
            out[i] += 2.0 * hi * hi / 12.0 * (2.0 * d_rho + a * a * math.exp(-0.5 * a * t))
    return out


def ode_residual(target, t_grid, k: KernelParam, cfg: NumericsConfig | None = None) -> OdeResidual:
    """Monte Carlo check of phi_a = phi_inf + phi_a''/a^2 on a grid.

    ``target`` is a single covariance (L = E) or a :class:`GaussianPair`
    (L = E_1 - E_0 on common random numbers).  The second derivative is the
    central difference with step ``h = 0.01 t``; everything is computed per
    sample so the residual carries its own standard error.
    """
    cfg = cfg or NumericsConfig()
    ts = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if ts.ndim != 1 or ts.size < 3:
        raise InputError("ODE check needs a grid of at least 3 points to resolve a sup")
    if np.any(~(ts > 0)) or np.any(np.diff(ts) <= 0):
        raise InputError("t grid must be positive and strictly ascending")
    h = STENCIL_REL_STEP * ts
    a2 = k.alpha**2
    draws = _draws(target, cfg.mc)
    n = draws[0][0].size
    cols = 4
    s1 = np.zeros((ts.size, cols))
    s2 = np.zeros((ts.size, cols))
    for i, (t, hi) in enumerate(zip(ts, h)):
        acc = np.zeros((n, cols))
        for q, sign in draws:
            f0 = kernel(q - t, k)
            # f_a(Q - t -+ h) are the kernel evaluated at t +- h
            fp = kernel(q - t - hi, k)
            fm = kernel(q - t + hi, k)
            second = (fp - 2.0 * f0 + fm) / (hi * hi)
            ind = (q > t).astype(float)
            acc += sign * np.column_stack([f0, ind, second, f0 - ind - second / a2])
        s1[i] = acc.sum(axis=0)
        s2[i] = (acc * acc).sum(axis=0)
    mean = s1 / n
    se = np.sqrt(np.maximum(s2 / n - mean**2, 0.0) / (n - 1))
    sigmas = [target.sigma0, target.sigma1] if isinstance(target, GaussianPair) else [as_spd(target)]
    bias = _stencil_bias(sigmas, ts, k, h, cfg)
    return OdeResidual(ts, mean[:, 0], mean[:, 1], mean[:, 2], mean[:, 3], se[:, 3], bias, k.alpha)
