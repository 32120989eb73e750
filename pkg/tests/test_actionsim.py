import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from rankfix._validation import ConfigError
from rankfix.actionsim import (
    InterpolationDefectError,
    PhaseRepresentation,
    Q0Estimator,
    average,
    average_difference,
    average_exact,
    average_exact_difference,
    calibration_table,
    cauchy_diagnostic,
    check_change_of_middle,
    check_commutator_growth,
    check_flip_h,
    check_uc_iterated,
    displacement,
    epsilon_iterated,
    epsilon_single,
    estimate_q0,
    fit_distortion_constant,
    inverse_modulus,
    lp_norm,
    make_action,
    modulus,
    random_uc_trials,
    theta_ladder,
    wrapped_lattice_weights,
    xi_lambda,
)
from rankfix.actionsim.convexity import UNIT_SHIFT_TV
from rankfix.gaussians import Gaussian1D, tv_exact
from rankfix.meassim import make_mu_sl3, make_nu_h, make_nu_h3
from rankfix.nilpotent import H3Element, HElement

ints = st.integers(-20, 20)


@pytest.fixture(scope="module")
def perm_h3():
    return make_action("perm-h3", modulus=5)


@pytest.fixture(scope="module")
def perm_h():
    return make_action("perm-h", modulus=5)


@pytest.fixture(scope="module")
def schro():
    return make_action("schrodinger", size=32, hbar=1.0)


@pytest.fixture(scope="module")
def grid32():
    return make_action("sl3-grid", size=32)


def cos_start(action):
    x1, x2, x3 = action.mesh()
    return (np.cos(x1) + np.cos(x2) + np.cos(x3)).astype(action.dtype)


# testbeds


def test_wrapped_weights_match_rounded_samples():
    rng = np.random.default_rng(0)
    t = rng.normal(0.7, 2.3, 2_000_000)
    hist = np.bincount(np.rint(t / 0.5).astype(int) % 7, minlength=7) / len(t)
    assert np.allclose(wrapped_lattice_weights(0.7, 2.3, 0.5, 7), hist, atol=2e-3)


@pytest.mark.parametrize("kind,kw", [("perm-h3", {"modulus": 4}), ("perm-h", {"modulus": 3}),
                                     ("schrodinger", {"size": 16}), ("schrodinger", {"size": 16, "p": 3.0})])
def test_letters_are_isometries(kind, kw):
    action = make_action(kind, **kw)
    v = action.random_vector(1)
    for label in action.labels:
        for t in (-2.3, 0.4, 7.9):
            assert action.norm(action.letter(label, t, v)) == pytest.approx(action.norm(v), rel=1e-12)


@given(ints, ints, ints, ints, ints, ints)
def test_permutation_action_is_a_representation(x, y, z, u, v, w):
    action = make_action("perm-h3", modulus=5)
    vec = action.random_vector(3)
    g, h = H3Element(x, y, z), H3Element(u, v, w)
    assert np.array_equal(action.apply_native(g * h, vec), action.apply_native(g, action.apply_native(h, vec)))


@given(st.lists(ints, min_size=8, max_size=8))
def test_cocycle_identity_is_exact(c):
    # integer eta keeps every value exactly representable
    eta = np.arange(3**4, dtype=float) % 7 - 3
    action = make_action("perm-h", modulus=3, eta=eta)
    g, h = HElement(*c[:4]), HElement(*c[4:])
    assert np.array_equal(action.cocycle(g * h), action.cocycle(g) + action.linear(g, action.cocycle(h)))
    # -eta is fixed by the affine action
    assert np.array_equal(action.apply(g, -eta), -eta)


def test_schrodinger_commutator_is_a_phase(schro):
    h, v = schro.spacing, schro.random_vector(2)
    j, l = 3, 5
    # X(jh) Y(lh) X(-jh) Y(-lh) v = Z(jl h^2) v with the group convention [X, Y] = X^-1 Y^-1 X Y
    lhs = schro.linear([("X", -j * h), ("Y", -l * h), ("X", j * h), ("Y", l * h)], v)
    rhs = schro.letter("Z", j * l * h * h, v)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_schrodinger_central_average_matches_quadrature(schro):
    g = Gaussian1D(0.3, -0.2)
    f = lambda t, part: part(np.exp(1j * schro.hbar * t)) * stats.norm.pdf(t, g.mean, g.sigma)
    re = integrate.quad(f, -20, 20, args=(np.real,), limit=200)[0]
    im = integrate.quad(f, -20, 20, args=(np.imag,), limit=200)[0]
    v = schro.random_vector(0)
    assert np.allclose(schro.averaged_letter("Z", g, v), (re + 1j * im) * v, atol=1e-12)


def test_lp_norm():
    assert lp_norm([3.0, 4.0], 2) == 5.0
    assert lp_norm([1.0, 1.0], 3) == pytest.approx(2 ** (1 / 3))
    assert lp_norm([3j, 4.0], 2) == 5.0


# averaging


@pytest.mark.parametrize("kind", ["perm-h3", "schrodinger"])
def test_mc_average_brackets_exact(kind):
    action = make_action(kind, **({"modulus": 5} if kind == "perm-h3" else {"size": 16}))
    xi = action.random_vector(4)
    word = make_nu_h3(0.2, 0.5, -0.1)
    res = average(action, word, xi, n=4000, seed=9)
    exact = average_exact(action, word, xi)
    assert action.norm(res.mean - exact) <= 2.0 * res.half_width


def test_average_independent_of_threads(perm_h):
    xi = perm_h.random_vector(1)
    w = make_nu_h(0.1, 0.2, 0.3, 0.4)
    a = average(perm_h, w, xi, n=9000, seed=2, threads=1)
    b = average(perm_h, w, xi, n=9000, seed=2, threads=3)
    assert np.array_equal(a.mean, b.mean) and a.half_width == b.half_width


def test_exact_difference_matches_central_factorization(schro):
    # Z is a scalar, so nu_abc - nu_ab'c = (phi(b) - phi(b')) X(g_a) Y(g_c)
    xi = schro.random_vector(1)
    a, c, b, b2 = 1.5, 1.5, -6.5, -6.0
    diff = average_exact_difference(schro, make_nu_h3(a, b, c), make_nu_h3(a, b2, c), xi)
    phi = lambda s: math.exp(-0.5 * (schro.hbar * math.exp(s)) ** 2)
    base = schro.averaged_letter("X", Gaussian1D(0, a), schro.averaged_letter("Y", Gaussian1D(0, c), xi))
    assert schro.norm(diff) == pytest.approx(abs(phi(b) - phi(b2)) * schro.norm(base), rel=1e-9)


def test_common_random_numbers_difference(schro):
    xi = schro.random_vector(1)
    first, second = make_nu_h3(0.0, 0.0, 0.0), make_nu_h3(0.0, 0.5, 0.0)
    mean, half = average_difference(schro, first, second, xi, n=4000, seed=5)
    exact = average_exact_difference(schro, first, second, xi)
    assert schro.norm(mean - exact) <= 2.0 * half


def test_displacement_on_lattice(perm_h3):
    xi = perm_h3.random_vector(0)
    worst = max(perm_h3.norm(perm_h3.letter("X", t, xi) - xi) for t in range(5))
    assert displacement(perm_h3, "X", 5.0, xi) == pytest.approx(worst)
    assert displacement(perm_h3, "X", -5.0, xi) == 0.0


# contraction


def test_q0_on_schrodinger(schro):
    consts = estimate_q0(schro, 200, seed=1)
    assert consts.q0_hat == pytest.approx(0.20019409098924373, rel=1e-12)
    assert consts.admissible()


def test_q0_estimator_records_binding_trials(schro):
    est = Q0Estimator(schro, trials=40, seed=3).fit()
    assert np.array_equal(est.binding_, est.lhs_ > 2 * est.central_)
    assert est.q0_hat_ == pytest.approx(est.lhs_[est.binding_].max() if est.binding_.any() else 0.0)
    assert est.get_params()["trials"] == 40


def test_q0_is_zero_when_the_center_dominates(perm_h3):
    assert estimate_q0(perm_h3, 30, seed=0).q0_hat == 0.0


def test_q0_refuses_affine_and_inexact(grid32):
    with pytest.raises(ConfigError):
        estimate_q0(grid32, 2)
    with pytest.raises(ConfigError):
        estimate_q0(make_action("perm-h3", modulus=3, eta=np.ones(27)), 2)


def test_change_of_middle_sweep(schro, tmp_path):
    xi = schro.random_vector(1)
    params = {"variant": "h3", "a": 1.5, "c": 1.5, "gap": 0.5, "deltas": list(np.linspace(3, 4, 9))}
    report = check_change_of_middle(schro, params, xi)
    assert report.passed and report.r2 >= 0.8
    assert report.slope == pytest.approx(-13.999998670765683, rel=1e-9)
    report.write_csv(tmp_path / "sweep.csv")
    assert (tmp_path / "sweep.csv").read_text().count("\n") == 10
    assert 0 < report.constants.q_hat < 1


def test_sweep_h_variants(perm_h):
    xi = perm_h.random_vector(2)
    for variant, extra in (("h-c", {"a": 0.5, "b": 1.0, "d": 0.5}), ("h-b", {"a": 0.5, "c": 1.0, "d": 0.5})):
        report = check_change_of_middle(perm_h, {"variant": variant, "gap": 0.5, "deltas": [1.0, 1.5, 2.0],
                                                 **extra}, xi)
        assert len(report.rows) == 3 and all(r["lhs"] >= 0 for r in report.rows)


def test_sweep_rejects_wrong_group(perm_h3):
    with pytest.raises(ConfigError):
        check_change_of_middle(perm_h3, {"variant": "h-b", "gap": 1, "deltas": [1], "a": 0, "c": 0, "d": 0},
                               perm_h3.random_vector(0))


def test_commutator_growth(perm_h):
    rng = np.random.default_rng(8)
    for _ in range(40):
        a, d = rng.uniform(-1, 2.5, 2)
        assert check_commutator_growth(perm_h, a, d, perm_h.random_vector(int(rng.integers(1 << 30))))["passed"]


def test_flip_comparison_is_finite(perm_h):
    out = check_flip_h(perm_h, 0.5, 1.0, 1.5, 0.2, perm_h.random_vector(0))
    assert math.isfinite(out["ratio"]) and out["lhs"] >= 0


# uniform convexity


def test_unit_shift_tv_matches_gaussians():
    assert UNIT_SHIFT_TV == pytest.approx(tv_exact(Gaussian1D(1, 0), Gaussian1D(0, 0)), abs=1e-15)


def test_hanner_modulus_for_p2():
    for eps in (0.1, 0.7, 1.9):
        assert modulus(eps, 2.0) == pytest.approx(1 - math.sqrt(1 - eps**2 / 4), rel=1e-12)


@given(st.floats(1.2, 5.0), st.floats(1e-6, 1.99))
def test_inverse_modulus_round_trip(p, eps):
    assert inverse_modulus(modulus(eps, p), p) == pytest.approx(eps, rel=1e-6)


@given(st.sampled_from([1.5, 2.0, 3.0, 4.0]), st.integers(0, 10_000))
def test_modulus_is_a_lower_bound(p, seed):
    """Midpoints of random unit vectors stay at least modulus(||x - y||) inside the ball."""
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
    x, y = x / lp_norm(x, p), y / lp_norm(y, p)
    eps = lp_norm(x - y, p)
    assert 1 - lp_norm((x + y) / 2, p) >= modulus(eps, p) - 1e-12


def test_epsilon_table_frozen():
    assert [epsilon_iterated(d, 2.0, n) for d in (1e-8, 1e-6) for n in (1, 2, 3)] == pytest.approx(
        [0.0006473479722813381, 0.16466303348655734, 2.0,
         0.006473477119131967, 0.5195148527027375, 2.0], rel=1e-9)


@given(st.floats(1e-9, 1e-2), st.sampled_from([1.5, 2.0, 3.0]))
def test_epsilon_monotone(delta, p):
    eps = [epsilon_iterated(delta, p, n) for n in (1, 2, 3)]
    assert eps == sorted(eps) and epsilon_single(delta, p) == eps[0]
    assert epsilon_iterated(2 * delta, p, 1) >= eps[0]


def test_calibration_table_shape():
    table = calibration_table(2.0, 3, [1e-6, 1e-4])
    assert sorted(table) == [1, 2, 3] and len(table[2]) == 2


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_random_uc_trials(p):
    single = random_uc_trials(p, 1, 40, 1e-3, seed=1)
    assert all(r.passed for r in single)
    assert sum(r.hypothesis for r in single) >= 5  # the implication is exercised, not vacuous
    assert all(r.passed for r in random_uc_trials(p, 2, 20, 1e-8, seed=1))


def test_uc_check_with_invariant_vector():
    rep = PhaseRepresentation([0.0, 0.0, 5.0])
    r = check_uc_iterated([rep], [0.0], np.array([1.0, 1.0, 0.0]), 1e-6)
    assert r.hypothesis and r.pointwise == 0.0 and r.passed


# averages on the SL3 grid


def test_spectral_average_matches_interpolated_letters(grid32):
    xi = cos_start(grid32)
    g = Gaussian1D(0.0, -1.0)
    rng = np.random.default_rng(0)
    mc = np.mean([grid32.letter("X12", float(t), xi) for t in rng.normal(0, g.sigma, 400)], axis=0)
    exact = grid32.averaged_letter("X12", g, xi)
    assert grid32.norm(mc - exact) <= 0.05 * grid32.norm(xi)


def test_spectral_ladder(grid32):
    report = cauchy_diagnostic(grid32, [1.0] * 6, theta_ladder(), cos_start(grid32), method="spectral")
    assert report.monotone and report.norm_drop >= 0.5
    assert report.norms[0] == pytest.approx(1.6854665286735715, rel=1e-5)  # float32 field


def test_mc_rung_brackets_spectral(grid32):
    xi = cos_start(grid32)
    res = xi_lambda(grid32, [0.3] * 6, xi, n=1000, seed=0)
    exact = average_exact(grid32, make_mu_sl3([0.3] * 6), xi)
    assert grid32.norm(res.mean - exact) <= res.half_width + 0.05 * grid32.norm(xi)


def test_coarse_grid_raises_defect():
    small = make_action("sl3-grid", size=8)
    with pytest.raises(InterpolationDefectError, match="size >= 16"):
        xi_lambda(small, [3.0] * 6, cos_start(small), n=1000, defect_limit=0.2)


def test_distortion_constant(grid32):
    fit = fit_distortion_constant(grid32, cos_start(grid32))
    assert fit["M_hat"] == pytest.approx(14.536822337796151, rel=1e-5)
    assert fit["witness_residual"] <= 1e-9


def test_ladder_needs_two_rungs(grid32):
    with pytest.raises(ConfigError):
        cauchy_diagnostic(grid32, [1.0] * 6, [1.0], cos_start(grid32), method="spectral")
