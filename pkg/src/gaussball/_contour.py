"""Compiled per-row kernel for the saddle-point contour inversion.

Row problem: P(sum_j d_j chi2(nu_j) < t), weights already scaled so that
max |d_j| = 1.  With ``u = x - iY`` and the pole at ``u = 0``::

    P = [Y(0) > 0] - (1/pi) int_0^inf Im F(s) ds
    F(s) = exp(-i u t) prod_j (1 - 2 i d_j u)^(-nu_j/2) u'(s) / u
    x = w sinh(s),  Y = y0 + sign(t) * BEND * w * (cosh(s) - 1)

``y0`` is the real saddle of ``K(y) - y t`` (pushed off the pole when it sits
too close) and ``w = K''(y0)^(-1/2)`` its width.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

BEND = 1.0
H0 = 0.5
H_MAX_ACCEPT = 0.125
S_CAP = 200.0


@njit(cache=True)
def _saddle(d, nu, t, ylo, yhi):
    total = 0.0
    for j in range(d.size):
        total += nu[j]
    lo = ylo * (1 - 1e-13) if math.isfinite(ylo) else -(total / abs(t) + 1.0)
    hi = yhi * (1 - 1e-13) if math.isfinite(yhi) else total / abs(t) + 1.0
    y = min(max(0.0, lo), hi)
    for _ in range(300):
        k1 = -t
        k2 = 0.0
        for j in range(d.size):
            r = 1.0 / (1.0 - 2.0 * d[j] * y)
            k1 += nu[j] * d[j] * r
            k2 += 2.0 * nu[j] * d[j] * d[j] * r * r
        if k1 > 0:
            hi = y
        else:
            lo = y
        step = y - k1 / k2
        y_new = step if lo < step < hi else 0.5 * (lo + hi)
        if abs(y_new - y) <= 1e-15 * max(1.0, abs(y)):
            return y_new
        y = y_new
    return y


@njit(cache=True)
def _tail(s, t, y0, bend, log_c, half_k, d_aug_min, w):
    y_s = y0 + bend * (math.cosh(s) - 1.0)
    expo = -t * y_s - log_c - half_k * s + half_k * math.log(2.0 / -math.expm1(-2.0 * s))
    bound = math.sqrt(1.0 + BEND * BEND) / math.tanh(s) * math.exp(min(expo, 700.0)) / (half_k * math.pi)
    return bound * max(1.0, 1.0 / (2.0 * d_aug_min * w * math.sinh(s)))


@njit(cache=True)
def _accumulate(s, d, nu, t, w, y0, bend, aug, zbuf, acc, scale):
    sh = math.sinh(s)
    ch = math.cosh(s)
    x = w * sh
    depth = y0 + bend * (ch - 1.0)
    # 1 - 2 i d u = (1 - 2 d Y) - 2 i d x; log psi accumulated as (log|.|, arg)
    log_mod = 0.0
    arg = 0.0
    for j in range(d.size):
        if nu[j] > 0:
            zr = 1.0 - 2.0 * d[j] * depth
            zi = -2.0 * d[j] * x
            zbuf[j] = complex(zr, zi)
            log_mod += nu[j] * math.log(zr * zr + zi * zi)
            arg += nu[j] * math.atan2(zi, zr)
    # exponent: -i u t + log psi, with -i u t = -i x t - depth t
    re = -depth * t - 0.25 * log_mod
    im = -x * t - 0.5 * arg
    u = complex(x, -depth)
    du = complex(w * ch, -bend * sh)
    f = math.exp(re) * complex(math.cos(im), math.sin(im)) * du / u
    acc[0] += scale * f.imag
    for c in range(aug.size):
        acc[c + 1] += scale * (f / zbuf[aug[c]]).imag


@njit(cache=True)
def invert_row(d, nu, t, aug, tol, max_nodes, vals, errs):
    """Fill ``vals``/``errs`` (length 1 + len(aug)); return True when converged."""
    ncol = 1 + aug.size
    p = d.size
    allpos = True
    allneg = True
    pos_max = 0.0
    neg_max = 0.0
    s2 = 0.0
    half_k = 0.0
    for j in range(p):
        if nu[j] > 0:
            if d[j] > 0:
                allneg = False
                pos_max = max(pos_max, d[j])
            else:
                allpos = False
                neg_max = max(neg_max, -d[j])
            s2 += 2.0 * nu[j] * d[j] * d[j]
            half_k += 0.5 * nu[j]
    for c in range(ncol):
        errs[c] = 0.0
    if t == math.inf or (allneg and t >= 0):
        for c in range(ncol):
            vals[c] = 1.0
        return True
    if t == -math.inf or (allpos and t <= 0):
        for c in range(ncol):
            vals[c] = 0.0
        return True

    yhi = 0.5 / pos_max if pos_max > 0 else math.inf
    ylo = -0.5 / neg_max if neg_max > 0 else -math.inf
    y_hat = _saddle(d, nu, t, ylo, yhi)
    a_min = 0.5 / math.sqrt(s2)
    if abs(y_hat) < a_min:
        if y_hat >= 0:
            y0 = min(a_min, 0.5 * yhi)
        else:
            y0 = -min(a_min, -0.5 * ylo)
    else:
        y0 = y_hat
    k2 = 0.0
    for j in range(p):
        r = 1.0 / (1.0 - 2.0 * d[j] * y0)
        k2 += 2.0 * nu[j] * d[j] * d[j] * r * r
    w = 1.0 / math.sqrt(k2)
    sgn = 1.0 if t > 0 else (-1.0 if t < 0 else 0.0)
    bend = BEND * sgn * w

    log_c = 0.0
    for j in range(p):
        if nu[j] > 0:
            log_c += 0.5 * nu[j] * math.log(2.0 * abs(d[j]) * w)
    d_aug_min = math.inf
    for c in range(aug.size):
        d_aug_min = min(d_aug_min, abs(d[aug[c]]))

    s_end = 1.0
    while _tail(s_end, t, y0, bend, log_c, half_k, d_aug_min, w) > tol / 8 and s_end < S_CAP:
        s_end += 0.5
    reachable = _tail(s_end, t, y0, bend, log_c, half_k, d_aug_min, w) <= tol / 8

    zbuf = np.empty(p, dtype=np.complex128)
    raw = np.zeros(ncol)
    h = H0
    _accumulate(0.0, d, nu, t, w, y0, bend, aug, zbuf, raw, 0.5)
    k = 1
    while k * h <= s_end + 1e-12:
        _accumulate(k * h, d, nu, t, w, y0, bend, aug, zbuf, raw, 1.0)
        k += 1
    base = 1.0 if y0 > 0 else 0.0
    est = np.empty(ncol)
    for c in range(ncol):
        est[c] = base - h * raw[c] / math.pi
    while True:
        h_new = 0.5 * h
        k = 0
        while (2 * k + 1) * h_new <= s_end + 1e-12:
            _accumulate((2 * k + 1) * h_new, d, nu, t, w, y0, bend, aug, zbuf, raw, 1.0)
            k += 1
        worst = 0.0
        for c in range(ncol):
            new = base - h_new * raw[c] / math.pi
            errs[c] = abs(new - est[c])
            worst = max(worst, errs[c])
            est[c] = new
        h = h_new
        if h <= H_MAX_ACCEPT and worst < tol / 2:
            break
        if s_end / h > max_nodes:
            for c in range(ncol):
                vals[c] = est[c]
            return False
    for c in range(ncol):
        vals[c] = est[c]
    return reachable


@njit(cache=True)
def invert_rows(d, nu, t, aug, tol, max_nodes, vals, errs, ok):
    for r in range(t.size):
        ok[r] = invert_row(d[r], nu[r], t[r], aug, tol, max_nodes, vals[r], errs[r])
