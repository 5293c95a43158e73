"""Oracle cross-check suites behind ``gaussball verify``.

Each suite returns a list of :class:`Check` rows; details are formatted with
fixed precision so a rerun with the same seed prints identical text.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special, stats

from . import anticoncentration as ac
from . import comparison, families, mc, quadform, smoothing
from .config import NumericsConfig
from .spd import GaussianPair, trace_divergence


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.suite}/{self.name}  {self.detail}"


def _close(suite, name, got, want, tol) -> Check:
    err = abs(got - want)
    return Check(suite, name, err <= tol, f"value={got:.12g} expected={want:.12g} err={err:.3e} tol={tol:g}")


def suite_identity(cfg: NumericsConfig) -> list[Check]:
    """Closed forms for the exact difference, C_p, trace term and CDF engine."""
    out = []
    pair1 = GaussianPair.of([[1.0]], [[2.0]])
    want = special.erf(math.sqrt(0.25)) - special.erf(math.sqrt(0.5))
    out.append(_close("identity", "difference_p1_t1", comparison.difference_at(pair1, 1.0, cfg), want, 1e-6))
    pair2 = GaussianPair.of(np.eye(2), 2 * np.eye(2))
    want2 = math.exp(-1.0) - math.exp(-0.5)
    out.append(_close("identity", "difference_p2_t2", comparison.difference_at(pair2, 2.0, cfg), want2, 1e-8))
    for p in (1, 2, 5, 10):
        pair = GaussianPair.of(np.eye(p), 3.0 * np.eye(p))
        out.append(_close("identity", f"c_p_scaled_p{p}", comparison.c_p_constant(pair, cfg),
                          math.sqrt(stats.chi2.cdf(p, p)), 1e-8))
    out.append(_close("identity", "trace_divergence_diag14",
                      trace_divergence(GaussianPair.of(np.eye(2), np.diag([1.0, 4.0]))), -1.125, 1e-12))
    out.append(_close("identity", "cdf_chi2_1", quadform.cdf(quadform.QuadFormSpec([1.0]), 1.0, cfg.inversion).value,
                      stats.chi2.cdf(1, 1), 1e-10))
    out.append(_close("identity", "bound_p1", comparison.comparison_bound(pair1, cfg).bound,
                      0.5 * math.sqrt(stats.chi2.cdf(1, 1)), 1e-8))
    return out


def _seeded_pairs(count: int, dims, seed: int):
    return [families.family_pair("random_spd", {"dim": dims[i % len(dims)]}, seed + i) for i in range(count)]


def suite_mc(cfg: NumericsConfig) -> list[Check]:
    """Exact difference against the paired Monte Carlo oracle."""
    out = []
    zs = []
    for i, pair in enumerate(_seeded_pairs(4, (2, 4), cfg.mc.seed + 1000)):
        grid = comparison.default_t_grid(pair, cfg, points=5)
        analytic = comparison.difference_curve(pair, grid, cfg).values
        est, se = mc.paired_difference_curve(pair, grid, cfg.mc)
        zs.extend(np.abs(analytic - est) / se)
    zs = np.asarray(zs)
    frac = float(np.mean(zs <= 4.0))
    out.append(Check("mc", "difference_vs_mc", frac >= 0.95 and zs.max() <= 6.0,
                     f"points={zs.size} within4se={frac:.3f} max_z={zs.max():.3f}"))
    w = np.array([1.5, -0.7, 0.3])
    est = mc.quadform_cdf_mc(w, 0.4, cfg.mc)
    val = quadform.cdf(quadform.QuadFormSpec(w), 0.4, cfg.inversion).value
    z = est.z_score(val)
    out.append(Check("mc", "indefinite_cdf_vs_mc", z <= 4.0, f"value={val:.12g} mc={est.value:.6g} z={z:.3f}"))
    return out


def suite_comparison(cfg: NumericsConfig) -> list[Check]:
    """Bound domination and C_p range on a few seeded pairs."""
    out = []
    pairs = _seeded_pairs(3, (2, 4, 8), cfg.mc.seed + 2000)
    pairs.append(GaussianPair.of(np.eye(3), 1.7 * np.eye(3)))
    for i, pair in enumerate(pairs):
        grid = comparison.default_t_grid(pair, cfg, points=64)
        rep = comparison.comparison_bound(pair, cfg, grid)
        ok = rep.holds() and 0 < rep.c_p < 1
        out.append(Check("comparison", f"bound_pair{i}", ok,
                         f"p={pair.dim} c_p={rep.c_p:.10f} bound={rep.bound:.10f} sup={rep.sup_difference_estimate:.10f}"))
    return out


def suite_density(cfg: NumericsConfig) -> list[Check]:
    out = []
    for p in (1, 2, 5, 10):
        ts = np.linspace(0.05, 4.0 * p, 20)
        err = float(np.max(np.abs(ac.density_chd_grid(np.eye(p), ts, cfg) - stats.chi2.pdf(ts, p))))
        out.append(Check("density", f"chi2_identity_p{p}", err <= 1e-8, f"max_err={err:.3e} tol=1e-08"))
        ratio = float(np.max(ac.density_chd_grid(np.eye(p), ts, cfg) * ts / math.sqrt(p)) / ac.ac1_constant(p))
        out.append(Check("density", f"density_bound_p{p}", ratio <= 1 + 1e-9, f"max_ratio={ratio:.10f}"))
    return out


def suite_anticoncentration(cfg: NumericsConfig) -> list[Check]:
    out = []
    for p in (1, 2, 4):
        worst_ac1 = worst_pin = 0.0
        sandwich = True
        for t in np.geomspace(0.1, 4.0 * p, 6):
            for delta in np.geomspace(1e-3, 2.0, 6) * t:
                q = ac.ShiftQuery(np.eye(p), float(t), float(delta))
                inc = ac.shell_probability(q, cfg.inversion)
                worst_ac1 = max(worst_ac1, inc / ac.ac1_bound(q))
                worst_pin = max(worst_pin, inc / ac.pinsker_from_kl(ac.kl_derived(q)))
                sandwich &= ac.ac1_bound(q) <= ac.ac1_constant(p) * math.sqrt(p) * q.ratio
        ok = worst_ac1 <= 1 and worst_pin <= 1 and sandwich
        out.append(Check("anticoncentration", f"shell_bounds_p{p}", ok,
                         f"max_inc/ac1={worst_ac1:.6f} max_inc/pinsker_kl={worst_pin:.6f} sandwich={sandwich}"))
    return out


def suite_smoothing(cfg: NumericsConfig) -> list[Check]:
    pair = GaussianPair.of(np.eye(2), np.diag([1.8, 1.2]))
    res = smoothing.ode_residual(pair, np.geomspace(0.5, 8.0, 10), smoothing.KernelParam(5.0), cfg)
    z = float(np.max(np.abs(res.residual) / (res.std_error + res.bias_bound)))
    return [
        Check("smoothing", "ode_residual_alpha5", bool(np.all(res.within(4.0))), f"max_ratio={z:.4f}"),
        Check("smoothing", "sup_ordering", res.sup_ordering_holds(),
              f"sup_phi_alpha={res.sup_phi_alpha:.8f} sup_phi_inf={res.sup_phi_inf:.8f}"),
    ]


def suite_stein(cfg: NumericsConfig) -> list[Check]:
    out = []
    for p in (1, 3):
        sigma = families.family_pair("random_spd", {"dim": p}, cfg.mc.seed + 3000).sigma0
        for name, fn in mc.STEIN_CATALOG.items():
            res = mc.stein_residual(sigma, name, cfg.mc)
            if fn.negative_control:
                out.append(Check("stein", f"{name}_p{p}_detected", not res.within(4.0),
                                 f"max_abs={res.max_abs:.6e} max_z={res.max_z:.3f}"))
            else:
                out.append(Check("stein", f"{name}_p{p}", res.within(4.0),
                                 f"max_abs={res.max_abs:.6e} max_z={res.max_z:.3f}"))
    return out


SUITES: dict[str, Callable[[NumericsConfig], list[Check]]] = {
    "identity": suite_identity,
    "mc": suite_mc,
    "comparison": suite_comparison,
    "density": suite_density,
    "anticoncentration": suite_anticoncentration,
    "smoothing": suite_smoothing,
    "stein": suite_stein,
}


def run(suite: str, cfg: NumericsConfig) -> list[Check]:
    names = list(SUITES) if suite == "default" else [suite]
    checks = []
    for name in names:
        checks.extend(SUITES[name](cfg))
    return checks
