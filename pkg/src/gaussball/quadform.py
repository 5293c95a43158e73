"""Distribution of Gaussian quadratic forms ``Q = sum_i d_i * chi2(nu_i)``.

The CDF is obtained by inverting the characteristic function (Gil-Pelaez /
Imhof).  Instead of integrating the slowly decaying, oscillating Imhof
integrand along the real axis, the integration line is moved onto a contour
through the saddle point of ``exp(K(y) - y t)`` (``K`` the cumulant generating
function) and bent towards the half-plane where ``exp(-i u t)`` decays.  On
that contour the integrand is analytic and decays exponentially in the
``sinh``-stretched parameter, so the trapezoid rule converges geometrically.

Truncated second moments use ``E[z_j^2 g(Q)] = E[g(Q_j)]`` where ``Q_j`` has the
``j``-th coordinate's degrees of freedom raised by two.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _contour
from . import rng as _rng
from .config import InversionConfig
from .errors import (
    ClampError,
    DimensionMismatch,
    IndexOutOfRange,
    InputError,
    InversionDivergence,
)

log = logging.getLogger(__name__)

ILL_CONDITIONED = 1e12
_DROP_RTOL = 64 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class QuadFormSpec:
    """Weights ``d`` (any sign, nonzero) and positive integer degrees of freedom."""

    weights: np.ndarray
    dofs: np.ndarray = field(default=None)

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.weights, dtype=float)).ravel()
        nu = (
            np.ones(d.size, dtype=int)
            if self.dofs is None
            else np.atleast_1d(np.asarray(self.dofs)).ravel()
        )
        if nu.size != d.size:
            raise DimensionMismatch(f"{d.size} weights but {nu.size} dofs")
        if not np.all(np.isfinite(d)):
            raise InputError("weights must be finite")
        if np.any(nu < 1) or np.any(nu != np.round(nu)):
            raise InputError("dofs must be positive integers")
        nu = nu.astype(int)
        if d.size:
            keep = np.abs(d) > _DROP_RTOL * np.max(np.abs(d))
            d, nu = d[keep], nu[keep]
        if d.size == 0:
            raise InputError("quadratic form has no nonzero weight")
        d.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "weights", d)
        object.__setattr__(self, "dofs", nu)

    @property
    def condition(self) -> float:
        a = np.abs(self.weights)
        return float(a.max() / a.min())

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        h.update(self.weights.tobytes())
        h.update(self.dofs.astype(np.int64).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class CdfValue:
    value: float
    error: float
    method: str  # "inversion" | "mc" | "exact"

    def __float__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class _Batch:
    values: np.ndarray  # (T, columns)
    errors: np.ndarray  # (T, columns)
    methods: np.ndarray  # (T,) of str


# ---------------------------------------------------------------------------
# contour inversion


def _invert(d, nu, t, aug, tol, max_nodes):
    """Row-wise contour inversion; see :mod:`gaussball._contour`.

    ``d`` and ``nu`` are (R, p); coordinates with ``nu == 0`` are ignored.
    Returns ``(values, errors, ok)`` with ``values[:, 0] = P(Q < t)`` and
    ``values[:, 1 + i]`` the same for the form with ``nu[:, aug[i]] + 2``.
    """
    d = np.atleast_2d(np.asarray(d, dtype=float))
    nu = np.ascontiguousarray(np.broadcast_to(np.asarray(nu, dtype=float), d.shape))
    t = np.ascontiguousarray(np.broadcast_to(np.asarray(t, dtype=float), d.shape[:1]))
    scale = np.max(np.where(nu > 0, np.abs(d), 0.0), axis=1)
    dn = np.ascontiguousarray(np.where(nu > 0, d, 0.0) / scale[:, None])
    aug = np.asarray(aug, dtype=np.int64)
    values = np.zeros((t.size, 1 + aug.size))
    errors = np.zeros_like(values)
    ok = np.zeros(t.size, dtype=np.bool_)
    _contour.invert_rows(dn, nu, t / scale, aug, float(tol), float(max_nodes), values, errors, ok)
    return values, errors, ok


# ---------------------------------------------------------------------------
# Monte Carlo fallback


def _mc_moments(spec: QuadFormSpec, t, aug, cfg: InversionConfig):
    """Direct MC of P(Q < t) and E[z_j^2 1(Q < t)] on one shared sample."""
    t = np.asarray(t, dtype=float)
    n = cfg.mc_fallback_samples
    ncol = 1 + len(aug)
    s1 = np.zeros((t.size, ncol))
    s2 = np.zeros((t.size, ncol))
    tag = "quadform/" + spec.digest()
    for c, m in enumerate(_rng.chunk_sizes(n)):
        g = _rng.stream(cfg.seed, tag, c)
        q = np.zeros(m)
        zsq = {}
        for j, (dj, nj) in enumerate(zip(spec.weights, spec.dofs)):
            z = g.standard_normal((m, nj)) ** 2
            zsq[j] = z[:, 0]
            q += dj * z.sum(axis=1)
        ind = (q[None, :] < t[:, None]).astype(float)
        s1[:, 0] += ind.sum(axis=1)
        s2[:, 0] += ind.sum(axis=1)
        for c_, j in enumerate(aug, start=1):
            v = ind * zsq[j][None, :]
            s1[:, c_] += v.sum(axis=1)
            s2[:, c_] += (v * v).sum(axis=1)
    mean = s1 / n
    var = np.maximum(s2 / n - mean**2, 0.0)
    return mean, np.sqrt(var / n)


def _evaluate_rows(weights, dofs, t, aug, cfg: InversionConfig) -> _Batch:
    """Row-wise evaluation with Monte Carlo fallback for ill-conditioned or failed rows."""
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    dofs = np.broadcast_to(np.asarray(dofs, dtype=int), weights.shape)
    t = np.broadcast_to(np.asarray(t, dtype=float), weights.shape[:1]).copy()
    aug = [int(j) for j in aug]
    absw = np.where(dofs > 0, np.abs(weights), np.nan)
    condition = np.nanmax(absw, axis=1) / np.nanmin(absw, axis=1)
    ill = condition > ILL_CONDITIONED

    ncol = 1 + len(aug)
    vals = np.zeros((t.size, ncol))
    errs = np.zeros((t.size, ncol))
    methods = np.full(t.size, "inversion", dtype=object)
    good = ~ill
    if np.any(good):
        v, e, ok = _invert(
            weights[good], dofs[good], t[good], aug, cfg.abs_tolerance, cfg.max_quadrature_nodes
        )
        vals[good], errs[good] = v, e
        failed = np.flatnonzero(good)[~ok]
        if failed.size:
            log.warning(
                "%s",
                InversionDivergence(
                    f"inversion missed tolerance at {failed.size} of {t.size} thresholds; "
                    "Monte Carlo fallback"
                ),
            )
            ill[failed] = True
    if np.any(ill):
        log.info("Monte Carlo for %d rows (ill-conditioned or inversion failure)", ill.sum())
        bad = np.flatnonzero(ill)
        keys = {}
        for r in bad:
            keys.setdefault((weights[r].tobytes(), dofs[r].tobytes()), []).append(r)
        for members in keys.values():
            r0 = members[0]
            live = dofs[r0] > 0
            spec = QuadFormSpec(weights[r0][live], dofs[r0][live])
            col_map = np.cumsum(live) - 1
            sub_aug = [int(col_map[j]) for j in aug]
            mv, me = _mc_moments(spec, t[members], sub_aug, cfg)
            vals[members], errs[members] = mv, me
            methods[members] = "mc"
    slack = 10 * cfg.abs_tolerance
    inv = methods == "inversion"
    if np.any(inv & np.any((vals < -slack) | (vals > 1 + slack), axis=1)):
        raise ClampError("inverted probability outside [0, 1] beyond rounding slack")
    np.clip(vals, 0.0, 1.0, out=vals)
    return _Batch(vals, errs, methods)


def _evaluate(spec: QuadFormSpec, t, aug, cfg: InversionConfig) -> _Batch:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    w = np.broadcast_to(spec.weights, (t.size, spec.weights.size))
    return _evaluate_rows(w, spec.dofs, t, aug, cfg)


def cdf(spec: QuadFormSpec, t: float, cfg: InversionConfig | None = None) -> CdfValue:
    """P(sum_i d_i chi2(nu_i) < t) with its error estimate and method tag."""
    cfg = cfg or InversionConfig()
    b = _evaluate(spec, [t], [], cfg)
    return CdfValue(float(b.values[0, 0]), float(b.errors[0, 0]), str(b.methods[0]))


def cdf_grid(spec: QuadFormSpec, ts, cfg: InversionConfig | None = None):
    """Vectorized :func:`cdf`; returns ``(values, errors, methods)`` arrays."""
    cfg = cfg or InversionConfig()
    b = _evaluate(spec, ts, [], cfg)
    return b.values[:, 0], b.errors[:, 0], b.methods


def cdf_rows(weights, ts, cfg: InversionConfig | None = None):
    """P(sum_j w[r, j] z_j^2 < t[r]) for each row ``r``; negligible weights are dropped."""
    cfg = cfg or InversionConfig()
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    top = np.max(np.abs(w), axis=1, keepdims=True)
    if np.any(top == 0):
        raise InputError("quadratic form has no nonzero weight")
    dofs = np.where(np.abs(w) > _DROP_RTOL * top, 1, 0)
    b = _evaluate_rows(w, dofs, ts, [], cfg)
    return b.values[:, 0], b.errors[:, 0], b.methods


def _positive_weights(weights) -> np.ndarray:
    d = np.atleast_1d(np.asarray(weights, dtype=float)).ravel()
    if d.size == 0 or np.any(~(d > 0)) or not np.all(np.isfinite(d)):
        raise InputError("weights must be positive and finite")
    return d


def truncated_moments(weights, ts, cfg: InversionConfig | None = None) -> _Batch:
    """For positive weights: column 0 is P(Q < t), column 1 + j is E[z_j^2 1(Q < t)]."""
    cfg = cfg or InversionConfig()
    d = _positive_weights(weights)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    return _evaluate_rows(np.broadcast_to(d, (ts.size, d.size)), 1, ts, range(d.size), cfg)


def truncated_moments_rows(weights, ts, cfg: InversionConfig | None = None) -> _Batch:
    """Row-wise :func:`truncated_moments` for a (R, p) stack of positive weights."""
    cfg = cfg or InversionConfig()
    w = np.atleast_2d(np.asarray(weights, dtype=float))
    if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
        raise InputError("weights must be positive and finite")
    return _evaluate_rows(w, 1, ts, range(w.shape[1]), cfg)


def truncated_second_moment(weights, j: int, t: float, cfg: InversionConfig | None = None) -> float:
    """E[z_j^2 1(sum_i d_i z_i^2 < t)] for standard normal z (``j`` is 0-based)."""
    cfg = cfg or InversionConfig()
    d = _positive_weights(weights)
    if not 0 <= j < d.size:
        raise IndexOutOfRange(f"j={j} not in [0, {d.size})")
    if np.isposinf(t):
        return 1.0
    dofs = np.ones(d.size, dtype=int)
    dofs[j] = 3
    return cdf(QuadFormSpec(d, dofs), t, cfg).value


def truncated_centered_sum(weights, coeffs, t: float, cfg: InversionConfig | None = None) -> float:
    """E[(sum_j a_j z_j^2 - sum_j a_j) 1(sum_i d_i z_i^2 < t)]."""
    cfg = cfg or InversionConfig()
    d = _positive_weights(weights)
    a = np.atleast_1d(np.asarray(coeffs, dtype=float)).ravel()
    if a.size != d.size:
        raise DimensionMismatch(f"{d.size} weights but {a.size} coefficients")
    if not np.any(a) or np.isposinf(t):
        return 0.0
    b = truncated_moments(d, [t], cfg)
    return float(centered_sum(b.values, a)[0])


def centered_sum(moments: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Combine a ``truncated_moments`` table into sum_j a_j (M_j - F)."""
    return (moments[:, 1:] - moments[:, :1]) @ coeffs


def quantile(spec: QuadFormSpec, prob: float, cfg: InversionConfig | None = None) -> float:
    """Smallest t with P(Q < t) >= prob, bracketed and then bisected."""
    cfg = cfg or InversionConfig()
    if not 0.0 < prob < 1.0:
        raise InputError("prob must lie in (0, 1)")
    d = spec.weights
    mean = float(np.sum(d * spec.dofs))
    sd = float(np.sqrt(2 * np.sum(d * d * spec.dofs)))

    def f(x):
        return cdf(spec, x, cfg).value - prob

    lo = min(mean - sd, 0.0) if np.any(d < 0) else 0.0
    hi = mean + sd
    while f(hi) < 0:
        hi += 2 * (hi - lo)
    if np.any(d < 0):
        while f(lo) > 0:
            lo -= 2 * (hi - lo)
    return float(brentq(f, lo, hi, xtol=1e-12 * max(1.0, abs(hi)), rtol=1e-12))
