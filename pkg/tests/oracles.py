"""Independent reference values for the tests.

The CDF reference integrates the characteristic function along the real axis
(scipy QUADPACK, with a Fourier-weighted tail), which shares no code with the
package's deformed-contour kernel.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special, stats
from scipy.integrate import quad


def imhof_cdf(d, t, nu=None) -> float:
    """P(sum_j d_j chi2(nu_j) < t) by real-axis Imhof inversion."""
    d = np.asarray(d, dtype=float)
    nu = np.ones_like(d) if nu is None else np.asarray(nu, dtype=float)

    def phi(u):
        return 0.5 * np.sum(nu * np.arctan(d * u))

    def rho(u):
        return np.prod((1.0 + d * d * u * u) ** (nu / 4.0))

    def f(u):
        return np.sin(phi(u) - 0.5 * t * u) / (u * rho(u))

    cut = 20.0 / np.abs(d).min()
    head, _ = quad(f, 0.0, cut, limit=20000, epsabs=1e-13, epsrel=1e-13)
    if t == 0:
        tail, _ = quad(f, cut, np.inf, limit=2000, epsabs=1e-13)
    else:
        om, sgn = 0.5 * abs(t), np.sign(t)

        def g1(u):
            return np.sin(phi(u + cut)) / ((u + cut) * rho(u + cut))

        def g2(u):
            return np.cos(phi(u + cut)) / ((u + cut) * rho(u + cut))

        c, s = math.cos(om * cut), math.sin(om * cut)
        a, _ = quad(g1, 0, np.inf, weight="cos", wvar=om, limlst=200)
        b, _ = quad(g1, 0, np.inf, weight="sin", wvar=om, limlst=200)
        cc, _ = quad(g2, 0, np.inf, weight="cos", wvar=om, limlst=200)
        ds, _ = quad(g2, 0, np.inf, weight="sin", wvar=om, limlst=200)
        # g1 cos(om (u + cut)) and g2 sin(om (u + cut)) expanded by angle addition
        tail = (c * a - s * b) - sgn * (s * cc + c * ds)
    return 0.5 - (head + tail) / math.pi


def chi2_cdf(t, p):
    return stats.chi2.cdf(t, p)


def chi2_pdf(t, p):
    return stats.chi2.pdf(t, p)


def p1_scaled_difference(s0: float, s1: float, t: float) -> float:
    """P(s1 z^2 < t) - P(s0 z^2 < t) through the error function."""
    return special.erf(math.sqrt(t / (2 * s1))) - special.erf(math.sqrt(t / (2 * s0)))


def codiagonal_difference(d0, d1, t: float) -> float:
    """Difference for a simultaneously diagonal pair, one reference CDF per side."""
    return imhof_cdf(d1, t) - imhof_cdf(d0, t)


def mean_abs_dev_chi2(p: int) -> float:
    """E|chi2_p - p| = 4 p f_p(p) (mean-absolute-deviation identity for gamma laws)."""
    return 4.0 * p * stats.chi2.pdf(p, p)


def random_spd(rng: np.random.Generator, p: int, ridge: float = 0.3) -> np.ndarray:
    a = rng.standard_normal((p, p))
    return a @ a.T / p + ridge * np.eye(p)


def random_orthogonal(rng: np.random.Generator, p: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))
