import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussball import comparison
from gaussball.comparison import (
    c_p_constant,
    c_p_constant_with_error,
    comparison_bound,
    default_t_grid,
    difference_at,
    difference_curve,
    gauss_legendre01,
)
from gaussball.config import McConfig, NumericsConfig
from gaussball.errors import IdenticalCovariances, InputError, TNonPositive
from gaussball.mc import paired_difference_curve
from gaussball.spd import GaussianPair
from oracles import chi2_cdf, codiagonal_difference, p1_scaled_difference, random_spd


def test_gauss_legendre_unit_interval():
    x, w = gauss_legendre01(64)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all((x > 0) & (x < 1))
    assert w @ x**7 == pytest.approx(1 / 8, abs=1e-14)


def test_difference_identical_is_zero():
    pair = GaussianPair.of(np.eye(3), np.eye(3))
    assert difference_at(pair, 2.0) == 0.0
    curve = difference_curve(pair, [0.5, 1.0, 2.0])
    assert np.all(curve.values == 0.0)


def test_difference_p1_closed_form():
    pair = GaussianPair.of([[1.0]], [[2.0]])
    assert difference_at(pair, 1.0) == pytest.approx(-0.1621895, abs=1e-6)
    assert difference_at(pair, 1.0) == pytest.approx(p1_scaled_difference(1.0, 2.0, 1.0), abs=1e-10)


def test_difference_p2_closed_form():
    pair = GaussianPair.of(np.eye(2), 2 * np.eye(2))
    assert difference_at(pair, 2.0) == pytest.approx(math.exp(-1) - math.exp(-0.5), abs=1e-10)


def test_difference_curve_p1_pointwise():
    pair = GaussianPair.of([[0.7]], [[1.9]])
    ts = np.geomspace(0.01, 20, 40)
    curve = difference_curve(pair, ts)
    want = [p1_scaled_difference(0.7, 1.9, t) for t in ts]
    np.testing.assert_allclose(curve.values, want, atol=1e-9)
    assert np.all(curve.converged)
    assert len(curve) == 40


def test_difference_rejects_bad_t():
    pair = GaussianPair.of([[1.0]], [[2.0]])
    with pytest.raises(TNonPositive):
        difference_at(pair, 0.0)
    with pytest.raises(TNonPositive):
        difference_curve(pair, [1.0, -1.0])
    with pytest.raises(InputError):
        difference_curve(pair, [2.0, 1.0])


@pytest.mark.parametrize("p", [1, 2, 4, 8])
def test_identity_on_codiagonal_pairs(p):
    rng = np.random.default_rng(100 + p)
    d0, d1 = rng.uniform(0.3, 3.0, p), rng.uniform(0.3, 3.0, p)
    # a common rotation keeps the pair simultaneously diagonalizable
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    pair = GaussianPair.of(q @ np.diag(d0) @ q.T, q @ np.diag(d1) @ q.T)
    for t in np.quantile(np.concatenate([d0, d1]) * p, [0.2, 0.5, 0.9]):
        assert difference_at(pair, t) == pytest.approx(codiagonal_difference(d0, d1, t), abs=1e-6)


@pytest.mark.parametrize("p", [1, 2, 4, 8])
def test_identity_on_general_pairs_against_mc(p):
    rng = np.random.default_rng(200 + p)
    pair = GaussianPair.of(random_spd(rng, p), random_spd(rng, p))
    ts = default_t_grid(pair, points=6)
    analytic = difference_curve(pair, ts).values
    est, se = paired_difference_curve(pair, ts, McConfig(samples=1_000_000, seed=p))
    assert np.all(np.abs(analytic - est) <= 4 * se + 1e-12)


def test_antisymmetry():
    rng = np.random.default_rng(3)
    pair = GaussianPair.of(random_spd(rng, 5), random_spd(rng, 5))
    ts = default_t_grid(pair, points=7)
    a = difference_curve(pair, ts).values
    b = difference_curve(pair.swapped(), ts).values
    np.testing.assert_allclose(a, -b, atol=1e-9)
    np.testing.assert_array_equal(difference_curve(pair, ts).swapped_sign().values, -a)


def test_limits_at_grid_ends():
    rng = np.random.default_rng(4)
    pair = GaussianPair.of(random_spd(rng, 3), random_spd(rng, 3))
    ends = difference_curve(pair, [1e-9, 1e4]).values
    assert np.all(np.abs(ends) < 1e-6)


@given(st.integers(0, 1000), st.floats(0.01, 100.0), st.floats(0.2, 5.0))
@settings(max_examples=15)
def test_joint_scaling_invariance(seed, c, t):
    rng = np.random.default_rng(seed)
    p = 1 + seed % 4
    a, b = random_spd(rng, p), random_spd(rng, p)
    lhs = difference_at(GaussianPair.of(c * a, c * b), c * t)
    rhs = difference_at(GaussianPair.of(a, b), t)
    assert abs(lhs - rhs) <= 1e-8


def test_values_bounded_by_one():
    rng = np.random.default_rng(9)
    pair = GaussianPair.of(random_spd(rng, 4, ridge=0.05), 10 * random_spd(rng, 4))
    curve = difference_curve(pair, default_t_grid(pair, points=32))
    assert np.all(np.abs(curve.values) <= 1.0)


@pytest.mark.parametrize("p", [1, 2, 5, 10])
def test_c_p_scaled_closed_form(p):
    pair = GaussianPair.of(np.eye(p), 2.5 * np.eye(p))
    assert c_p_constant(pair) == pytest.approx(math.sqrt(chi2_cdf(p, p)), abs=1e-8)


def test_c_p_examples():
    # sqrt(1 - e^-1) = 0.79506010
    assert c_p_constant(GaussianPair.of(np.eye(2), 3 * np.eye(2))) == pytest.approx(math.sqrt(1 - math.exp(-1)), abs=1e-10)
    assert c_p_constant(GaussianPair.of([[1.0]], [[2.0]])) == pytest.approx(0.8262502, abs=1e-6)


def test_c_p_shrinking_scale_uses_other_side():
    # trace negative on the whole path; y'My > tr with M = -I/(2 - s) is |y|^2 < p again
    pair = GaussianPair.of(2 * np.eye(3), np.eye(3))
    assert c_p_constant(pair) == pytest.approx(math.sqrt(chi2_cdf(3, 3)), abs=1e-8)
    assert c_p_constant(pair) == pytest.approx(c_p_constant(pair.swapped()), abs=1e-10)


def test_c_p_sign_changing_trace():
    pair = GaussianPair.of(np.diag([1.0, 3.0]), np.diag([3.0, 1.0]))
    c, err = c_p_constant_with_error(pair)
    assert 0 < c < 1
    assert err < 1e-8
    assert comparison._trace_root(pair) == pytest.approx(0.5, abs=1e-12)


def test_c_p_identical_raises():
    with pytest.raises(IdenticalCovariances):
        c_p_constant(GaussianPair.of(np.eye(2), np.eye(2)))


def test_c_p_strictly_inside_unit_interval():
    rng = np.random.default_rng(12)
    for p in (1, 3, 6):
        c = c_p_constant(GaussianPair.of(random_spd(rng, p), random_spd(rng, p)))
        assert 0 < c < 1


def test_scaled_pair_probability_decays_with_dimension():
    vals = []
    for p in (2, 4, 8, 16, 32, 64):
        c = c_p_constant(GaussianPair.of(np.eye(p), 2 * np.eye(p)))
        vals.append(c * c)
        assert c * c == pytest.approx(chi2_cdf(p, p), abs=1e-8)
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_bound_identical_pair():
    rep = comparison_bound(GaussianPair.of(np.eye(2), np.eye(2)))
    assert rep.bound == 0.0 and rep.sup_difference_estimate == 0.0 and rep.c_p is None


def test_bound_p1_example():
    rep = comparison_bound(GaussianPair.of([[1.0]], [[2.0]]))
    assert rep.bound == pytest.approx(0.4131251, abs=1e-6)
    assert rep.trace_term == pytest.approx(0.25)
    assert rep.holds()
    # p=1 closed form: the sup sits where the densities of z^2 and 2 z^2 cross, t* = 2 log 2
    assert rep.t_at_sup == pytest.approx(2 * math.log(2), rel=1e-4)
    assert rep.sup_difference_estimate == pytest.approx(abs(p1_scaled_difference(1, 2, 2 * math.log(2))), abs=1e-9)


def test_default_grid_spans_quantiles():
    pair = GaussianPair.of(np.eye(2), 4 * np.eye(2))
    ts = default_t_grid(pair)
    assert ts.size == comparison.DEFAULT_GRID_POINTS
    assert chi2_cdf(ts[0], 2) == pytest.approx(0.001, abs=1e-9)
    assert chi2_cdf(ts[-1] / 4, 2) == pytest.approx(0.999, abs=1e-9)


def test_escalation_warning(monkeypatch):
    cfg = NumericsConfig(gl_nodes=2, quad_tol=1e-14)
    rng = np.random.default_rng(1)
    pair = GaussianPair.of(random_spd(rng, 3), random_spd(rng, 3))
    with pytest.warns(RuntimeWarning):
        curve = difference_curve(pair, [1.0, 2.0], cfg)
    assert np.all(curve.nodes == 8)
    assert not np.all(curve.converged)
