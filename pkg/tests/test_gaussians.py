import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from rankfix._validation import ConfigError
from rankfix.gaussians import (
    Gaussian1D,
    convolve,
    density,
    density_crossings,
    monge_proof_integrals,
    sample,
    transport_cost_c,
    tv_bound,
    tv_exact,
    w1_distance,
)

means = st.floats(-5, 5)
logscales = st.floats(-2, 2)


def quad_tv(g1, g2):
    """Independent oracle: integrate |f1 - f2| / 2 over a wide window."""
    lo = min(g1.mean - 14 * g1.sigma, g2.mean - 14 * g2.sigma)
    hi = max(g1.mean + 14 * g1.sigma, g2.mean + 14 * g2.sigma)
    pts = np.linspace(lo, hi, 41)
    f = lambda x: abs(stats.norm.pdf(x, g1.mean, g1.sigma) - stats.norm.pdf(x, g2.mean, g2.sigma))
    return 0.5 * sum(integrate.quad(f, u, v, epsabs=1e-13, limit=200)[0] for u, v in zip(pts, pts[1:]))


def quantile_w1(g1, g2):
    """Independent oracle: the quantile coupling moves m1 + s1 z to m2 + s2 z."""
    shift, spread = g1.mean - g2.mean, g1.sigma - g2.sigma
    f = lambda z: abs(shift + spread * z) * stats.norm.pdf(z)
    breaks = [-shift / spread] if spread else []
    return integrate.quad(f, -40, 40, points=breaks, epsabs=1e-13, limit=400)[0]


def test_equal_variance_tv_closed_form():
    # 2 Phi(1/2) - 1, frozen
    assert tv_exact(Gaussian1D(0, 0), Gaussian1D(1, 0)) == pytest.approx(0.38292492254802624, abs=1e-15)


@pytest.mark.parametrize("g1,g2", [
    (Gaussian1D(0.0, 0.0), Gaussian1D(0.0, 1.0)),
    (Gaussian1D(-1.0, 0.3), Gaussian1D(2.0, -0.5)),
    (Gaussian1D(0.5, -1.5), Gaussian1D(0.4, 1.7)),
    (Gaussian1D(3.0, 0.0), Gaussian1D(-3.0, 0.01)),
])
def test_tv_and_w1_match_quadrature(g1, g2):
    assert tv_exact(g1, g2) == pytest.approx(quad_tv(g1, g2), abs=1e-9)
    assert w1_distance(g1, g2) == pytest.approx(quantile_w1(g1, g2), abs=1e-7)


@given(means, logscales, means, logscales)
def test_tv_is_a_bounded_symmetric_distance(m1, a1, m2, a2):
    g1, g2 = Gaussian1D(m1, a1), Gaussian1D(m2, a2)
    tv = tv_exact(g1, g2)
    assert 0.0 <= tv <= 1.0
    assert tv == pytest.approx(tv_exact(g2, g1), abs=1e-12)


@given(means, logscales, means, logscales, means, logscales)
def test_tv_triangle_inequality(m1, a1, m2, a2, m3, a3):
    g1, g2, g3 = Gaussian1D(m1, a1), Gaussian1D(m2, a2), Gaussian1D(m3, a3)
    assert tv_exact(g1, g3) <= tv_exact(g1, g2) + tv_exact(g2, g3) + 1e-12


@given(st.floats(-20, 20), st.floats(-4, 4))
def test_shift_bound(t, a):
    g, h = Gaussian1D(t, a), Gaussian1D(0.0, a)
    assert tv_exact(g, h) <= tv_bound(g, h) + 1e-12


def test_shift_bound_is_tight_for_small_shifts():
    g, h = Gaussian1D(1e-6, 0.0), Gaussian1D(0.0, 0.0)
    assert tv_exact(g, h) / tv_bound(g, h) == pytest.approx(1.0, rel=1e-6)


def test_shift_bound_rejects_unequal_scales():
    with pytest.raises(ConfigError):
        tv_bound(Gaussian1D(1, 0), Gaussian1D(0, 1))


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2))
def test_transport_bound(s, t, b):
    cost = transport_cost_c(Gaussian1D(s, 0.0), Gaussian1D(t, b)).cost
    assert cost <= 2 * (abs(s - t) + math.exp(b) - 1) + 1e-9


@given(means, logscales, means, logscales)
def test_transport_splits_into_tv_and_w1(m1, a1, m2, a2):
    r = transport_cost_c(Gaussian1D(m1, a1), Gaussian1D(m2, a2))
    assert r.cost == pytest.approx(r.tv_part + r.w1_part, rel=1e-12, abs=1e-15)
    # T_c dominates both of its parts' lower bounds
    assert r.cost >= r.w1_part and r.cost >= r.tv_part


@pytest.mark.parametrize("s,t,b", [(0.0, 1.0, 0.5), (-1.0, 0.5, 1.5), (0.3, 0.3, 1.0)])
def test_grid_lp_agrees_within_two_cells(s, t, b):
    mu, nu = Gaussian1D(s, 0.0), Gaussian1D(t, b)
    grid = transport_cost_c(mu, nu, method="grid", atoms=400)
    assert grid.mass_error <= 1e-6
    assert abs(grid.cost - transport_cost_c(mu, nu).cost) <= 2 * grid.cell_size


def test_transport_to_itself_is_zero():
    g = Gaussian1D(0.4, 0.2)
    assert transport_cost_c(g, g).cost == 0.0


def test_monge_integrals_match_closed_forms():
    first, second = monge_proof_integrals()
    assert first == pytest.approx(1 + 1 / math.sqrt(2 * math.pi), abs=1e-9)
    assert second == pytest.approx((10 / math.sqrt(math.e) - 2) / math.sqrt(2 * math.pi), abs=1e-9)
    assert second == pytest.approx(1.6218, abs=1e-3)


def test_density_crossings_are_crossings():
    g1, g2 = Gaussian1D(0.0, 0.0), Gaussian1D(1.0, 0.7)
    for x in density_crossings(g1, g2):
        assert density(g1, x) == pytest.approx(density(g2, x), rel=1e-10)


def test_sampling_is_seeded_and_moments_match():
    g = Gaussian1D(1.5, -0.5)
    x = sample(g, 7, 200_000)
    assert np.array_equal(x, sample(g, 7, 200_000))
    assert abs(x.mean() - 1.5) < 5 * g.sigma / math.sqrt(len(x))
    assert x.std() == pytest.approx(g.sigma, rel=0.01)


def test_convolution_adds_variances():
    g = convolve(Gaussian1D(1, 0), Gaussian1D(2, math.log(2)))
    assert g.mean == 3 and g.variance == pytest.approx(5.0)


@pytest.mark.parametrize("bad", [(0, math.inf), (math.nan, 0), (0, 1e6)])
def test_rejects_bad_parameters(bad):
    with pytest.raises(ConfigError):
        Gaussian1D(*bad)
