import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankfix._validation import ConfigError
from rankfix.gaussians import Gaussian1D
from rankfix.meassim import (
    GaussianWord,
    compose,
    flip_tv_bound,
    flip_tv_sharp_bound,
    h3_flip_tv_oracle,
    make_mu_sl3,
    make_mu_sp4,
    make_mu_tilde_sl3,
    make_nu_h,
    make_nu_h3,
    make_nu_tilde_h3,
    sample_letters,
    sample_word,
    tv_estimate,
)
from rankfix.nilpotent import H3Element
from rankfix.rootsys import J4


@pytest.mark.parametrize("a,b,c", [(0.0, 0.0, 0.0), (0.5, 1.5, -0.3), (-0.2, -1.0, 0.4), (1.0, 3.0, 0.5)])
def test_grid_tv_matches_double_integral(a, b, c):
    grid = tv_estimate(make_nu_h3(a, b, c), make_nu_tilde_h3(c, b, a), grid_points=200)
    assert grid.estimate == pytest.approx(h3_flip_tv_oracle(a, b, c), abs=1e-3)


def test_oracle_frozen_value():
    # E |2 Phi(xy/2) - 1| for standard x, y; a 1e7-sample MC gives 0.22512 +- 0.00013
    assert h3_flip_tv_oracle(0.0, 0.0, 0.0) == pytest.approx(0.225218353146827, abs=1e-9)


@pytest.mark.parametrize("a,b,c", [(0.0, 0.5, 0.0), (0.3, 2.0, 0.1)])
def test_flip_tv_below_bounds(a, b, c):
    tv = tv_estimate(make_nu_h3(a, b, c), make_nu_tilde_h3(c, b, a), grid_points=120).estimate
    assert tv <= flip_tv_sharp_bound(a, b, c) + 1e-3
    assert flip_tv_sharp_bound(a, b, c) < flip_tv_bound(a, b, c)


def test_mc_tv_brackets_grid():
    w1, w2 = make_nu_h3(0.0, 0.0, 0.0), make_nu_tilde_h3(0.0, 0.0, 0.0)
    exact = h3_flip_tv_oracle(0.0, 0.0, 0.0)
    est, half = tv_estimate(w1, w2, method="mc", n=20_000, seed=3)
    assert half > 0
    assert abs(est - exact) <= half + 0.03  # kernel smoothing bias on top of the CI


def test_identical_words_have_zero_grid_tv():
    w = make_nu_h3(0.2, 0.4, -0.1)
    assert tv_estimate(w, w, grid_points=60).estimate == pytest.approx(0.0, abs=1e-12)


def test_sampling_independent_of_threads():
    w = make_mu_sl3((1.0, 0.5, 0.3, 1.2, 0.1, 0.4))
    a = sample_word(w, 11, 10_000, threads=1)
    b = sample_word(w, 11, 10_000, threads=4)
    assert np.array_equal(a, b)
    # a prefix of a longer run is the shorter run
    assert np.array_equal(sample_letters(w, 11, 5000), sample_letters(w, 11, 10_000)[:5000])


def test_nu_word_lands_where_the_density_says():
    # X(t) Z(r) Y(s) = (t, s, r + t s)
    draws = np.array([[1.5, 2.0, -0.5]])
    (x, y, z), = compose("h3", draws, ("X", "Z", "Y"))
    assert (x, y, z) == (1.5, -0.5, 2.0 + 1.5 * -0.5)
    (x, y, z), = compose("h3", draws[:, [2, 1, 0]], ("Y", "Z", "X"))
    assert (x, y, z) == (1.5, -0.5, 2.0)


def test_h3_samples_match_element_products():
    w = make_nu_h3(0.1, 0.2, 0.3)
    draws = sample_letters(w, 5, 20)
    rows = compose("h3", draws, w.labels)
    for d, row in zip(draws, rows):
        g = H3Element.X(d[0]) * H3Element.Z(d[1]) * H3Element.Y(d[2])
        assert np.allclose(g.coords, row)


def test_sp4_samples_are_symplectic():
    mats = sample_word(make_mu_sp4((0.2,) * 8), 2, 50)
    for m in mats:
        assert np.allclose(m.T @ J4 @ m, J4, atol=1e-10)


def test_sl3_samples_have_unit_determinant():
    mats = sample_word(make_mu_tilde_sl3((0.1, 0.2, 0.3, 0.4, 0.5, 0.6)), 2, 50)
    assert np.allclose(np.linalg.det(mats), 1.0)


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_word_json_round_trip(vals):
    w = make_nu_h(*vals)
    assert GaussianWord.from_json(w.dumps()) == w


def test_word_rejects_foreign_letters():
    with pytest.raises(ConfigError):
        GaussianWord("h3", (("W", Gaussian1D()),))
    with pytest.raises(ConfigError):
        tv_estimate(make_nu_h3(0, 0, 0), make_nu_h(0, 0, 0, 0))
