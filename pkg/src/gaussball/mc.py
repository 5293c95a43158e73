"""Seeded Monte Carlo estimators used as independent checks of the analytic routes.

Every estimator draws standard normals chunk by chunk from
``rng.stream(seed, tag, chunk_index)`` and aggregates plain sums, so the
result does not depend on how chunks are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import rng as _rng
from .config import McConfig
from .errors import InputError
from .spd import GaussianPair, SpdMatrix, as_spd


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    n: int

    def z_score(self, reference: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.value == reference else float("inf")
        return abs(self.value - reference) / self.std_error


@dataclass(frozen=True)
class SupEstimate(Estimate):
    t_at_sup: float = float("nan")
    # the SE at the argmax ignores selection of the max over the grid
    conservative: bool = False


def _normal_chunks(seed: int, tag: str, n: int, dim: int, chunk: int) -> Iterator[np.ndarray]:
    for k, m in enumerate(_rng.chunk_sizes(n, chunk)):
        yield _rng.stream(seed, tag, k).standard_normal((m, dim))


def _mean_se(total: np.ndarray, total_sq: np.ndarray, n: int):
    mean = total / n
    var = np.maximum(total_sq / n - mean**2, 0.0) * n / max(n - 1, 1)
    return mean, np.sqrt(var / n)


def sample_gaussian(sigma, n: int, seed: int = 0, chunk: int = _rng.CHUNK, tag: str = "sample") -> np.ndarray:
    """``n`` draws of N(0, sigma) as rows; the Cholesky factor is computed once."""
    sigma = as_spd(sigma)
    if n < 1:
        raise InputError("n must be positive")
    factor = sigma.cholesky()
    return np.concatenate([z @ factor.T for z in _normal_chunks(seed, tag, n, sigma.dim, chunk)])


def _squared_norms(sigma: SpdMatrix, cfg: McConfig, tag: str) -> np.ndarray:
    factor = sigma.cholesky()
    out = np.empty(cfg.samples)
    pos = 0
    for z in _normal_chunks(cfg.seed, tag, cfg.samples, sigma.dim, cfg.chunk):
        x = z @ factor.T
        out[pos:pos + len(z)] = np.einsum("ij,ij->i", x, x)
        pos += len(z)
    return out


def paired_squared_norms(pair: GaussianPair, cfg: McConfig, tag: str = "pair") -> tuple[np.ndarray, np.ndarray]:
    """(|L0 z|^2, |L1 z|^2) on one shared normal sample (common random numbers)."""
    f0, f1 = pair.sigma0.cholesky(), pair.sigma1.cholesky()
    q0, q1 = np.empty(cfg.samples), np.empty(cfg.samples)
    pos = 0
    for z in _normal_chunks(cfg.seed, tag, cfg.samples, pair.dim, cfg.chunk):
        x0, x1 = z @ f0.T, z @ f1.T
        sl = slice(pos, pos + len(z))
        q0[sl] = np.einsum("ij,ij->i", x0, x0)
        q1[sl] = np.einsum("ij,ij->i", x1, x1)
        pos += len(z)
    return q0, q1


def ball_probability(sigma, t: float, cfg: McConfig | None = None) -> Estimate:
    """Fraction of draws with |x|^2 < t and its binomial standard error."""
    cfg = cfg or McConfig()
    sigma = as_spd(sigma)
    if t <= 0:
        return Estimate(0.0, 0.0, cfg.samples)
    q = _squared_norms(sigma, cfg, "ball")
    p_hat = float(np.mean(q < t))
    return Estimate(p_hat, float(np.sqrt(p_hat * (1 - p_hat) / cfg.samples)), cfg.samples)


def paired_difference_curve(pair: GaussianPair, t_grid, cfg: McConfig | None = None):
    """Per-t CRN estimates of P(|x1|^2 < t) - P(|x0|^2 < t); returns (values, std_errors)."""
    cfg = cfg or McConfig()
    ts = np.atleast_1d(np.asarray(t_grid, dtype=float))
    q0, q1 = paired_squared_norms(pair, cfg)
    n = cfg.samples
    f0 = np.searchsorted(np.sort(q0), ts, side="left") / n
    f1 = np.searchsorted(np.sort(q1), ts, side="left") / n
    both = np.searchsorted(np.sort(np.maximum(q0, q1)), ts, side="left") / n
    mean = f1 - f0
    # D = 1(q1<t) - 1(q0<t) takes values in {-1, 0, 1}; E D^2 = P(exactly one below t)
    second = f0 + f1 - 2 * both
    var = np.maximum(second - mean**2, 0.0) * n / (n - 1)
    return mean, np.sqrt(var / n)


def kolmogorov_distance(pair: GaussianPair, t_grid, cfg: McConfig | None = None) -> SupEstimate:
    """Grid sup of the paired |difference|; the SE reported is the one at the argmax."""
    cfg = cfg or McConfig()
    ts = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if ts.size == 0:
        raise InputError("empty t grid")
    vals, ses = paired_difference_curve(pair, ts, cfg)
    i = int(np.argmax(np.abs(vals)))
    return SupEstimate(float(abs(vals[i])), float(ses[i]), cfg.samples, float(ts[i]), ts.size > 1)


def truncated_moments_mc(weights, t: float, cfg: McConfig | None = None):
    """Direct MC of P(Q < t) and E[z_j^2 1(Q < t)] for Q = sum_j w_j z_j^2.

    Returns ``(values, std_errors)`` of length ``1 + p`` in the column layout of
    :func:`gaussball.quadform.truncated_moments`.
    """
    cfg = cfg or McConfig()
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    s1 = np.zeros(1 + w.size)
    s2 = np.zeros(1 + w.size)
    for z in _normal_chunks(cfg.seed, "moments", cfg.samples, w.size, cfg.chunk):
        zsq = z * z
        ind = (zsq @ w < t).astype(float)
        cols = np.column_stack([ind, zsq * ind[:, None]])
        s1 += cols.sum(axis=0)
        s2 += (cols * cols).sum(axis=0)
    return _mean_se(s1, s2, cfg.samples)


def quadform_cdf_mc(weights, t: float, cfg: McConfig | None = None) -> Estimate:
    """P(sum_j w_j z_j^2 < t) for signed weights."""
    cfg = cfg or McConfig()
    w = np.atleast_1d(np.asarray(weights, dtype=float))
    hits = 0
    for z in _normal_chunks(cfg.seed, "quadform-cdf", cfg.samples, w.size, cfg.chunk):
        hits += int(np.count_nonzero((z * z) @ w < t))
    p_hat = hits / cfg.samples
    return Estimate(p_hat, float(np.sqrt(p_hat * (1 - p_hat) / cfg.samples)), cfg.samples)


# ---------------------------------------------------------------------------
# Stein's identity E[x h(x)^T] = Sigma E[J(x)],  J[i, j] = d h_j / d x_i


@dataclass(frozen=True)
class SteinFunction:
    name: str
    h: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]  # (n, p) -> (n, p, p)
    negative_control: bool = False


def _diag_jac(v: np.ndarray) -> np.ndarray:
    n, p = v.shape
    out = np.zeros((n, p, p))
    idx = np.arange(p)
    out[:, idx, idx] = v
    return out


def _sigmoid(u):
    return 0.5 * (1.0 + np.tanh(0.5 * u))


def _norm_sigmoid(x):
    return x * _sigmoid(np.einsum("ij,ij->i", x, x))[:, None]


def _norm_sigmoid_jac(x):
    r = np.einsum("ij,ij->i", x, x)
    sg = _sigmoid(r)
    dsg = sg * (1.0 - sg)
    return _diag_jac(np.repeat(sg[:, None], x.shape[1], axis=1)) + 2.0 * dsg[:, None, None] * x[:, :, None] * x[:, None, :]


STEIN_CATALOG: dict[str, SteinFunction] = {
    "identity": SteinFunction("identity", lambda x: x, lambda x: _diag_jac(np.ones_like(x))),
    "tanh": SteinFunction("tanh", np.tanh, lambda x: _diag_jac(1.0 - np.tanh(x) ** 2)),
    "norm_sigmoid": SteinFunction("norm_sigmoid", _norm_sigmoid, _norm_sigmoid_jac),
    # negative control: the Jacobian of the identity paired with tanh
    "tanh_wrong_jacobian": SteinFunction(
        "tanh_wrong_jacobian", np.tanh, lambda x: _diag_jac(np.ones_like(x)), negative_control=True
    ),
}


@dataclass(frozen=True)
class SteinResult:
    name: str
    residual: np.ndarray
    std_error: np.ndarray
    n: int

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual)))

    @property
    def max_z(self) -> float:
        """Largest entrywise |residual| / SE."""
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.std_error > 0, np.abs(self.residual) / self.std_error,
                         np.where(self.residual == 0, 0.0, np.inf))
        return float(np.max(z))

    def within(self, k: float = 4.0) -> bool:
        return self.max_z <= k


def stein_residual(sigma, h_id: str, cfg: McConfig | None = None) -> SteinResult:
    """Entrywise MC estimate of E[x h(x)^T] - Sigma E[J(x)] with per-entry SEs."""
    cfg = cfg or McConfig()
    sigma = as_spd(sigma)
    try:
        fn = STEIN_CATALOG[h_id]
    except KeyError:
        raise InputError(f"unknown Stein test function {h_id!r}; choose from {sorted(STEIN_CATALOG)}") from None
    factor = sigma.cholesky()
    s = sigma.entries
    p = sigma.dim
    s1 = np.zeros((p, p))
    s2 = np.zeros((p, p))
    for z in _normal_chunks(cfg.seed, "stein/" + h_id, cfg.samples, p, cfg.chunk):
        x = z @ factor.T
        r = x[:, :, None] * fn.h(x)[:, None, :] - np.einsum("ik,nkj->nij", s, fn.jacobian(x))
        s1 += r.sum(axis=0)
        s2 += (r * r).sum(axis=0)
    mean, se = _mean_se(s1, s2, cfg.samples)
    return SteinResult(h_id, mean, se, cfg.samples)
