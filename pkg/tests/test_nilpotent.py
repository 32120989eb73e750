import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankfix.nilpotent import (
    H3Element,
    HElement,
    commutator,
    embed_h3_in_h,
    h3_law,
    h_law,
    inverse,
    multiply,
    to_matrix,
)
from rankfix.rootsys import J4

x = st.floats(-3, 3)
h3 = st.builds(H3Element, x, x, x)
hh = st.builds(HElement, x, x, x, x)


def close(g, h, tol=1e-9):
    return np.allclose(g.coords, h.coords, atol=tol, rtol=tol)


@given(h3, h3)
def test_h3_law_matches_matrices(g, h):
    assert np.allclose(to_matrix(g) @ to_matrix(h), to_matrix(g * h), atol=1e-10)


@given(hh, hh)
def test_h_law_matches_symplectic_matrices(g, h):
    assert np.allclose(to_matrix(g) @ to_matrix(h), to_matrix(g * h), atol=1e-9)


@given(hh)
def test_h_matrices_are_symplectic(g):
    m = to_matrix(g)
    assert np.allclose(m.T @ J4 @ m, J4, atol=1e-9)


@given(h3, h3, h3)
def test_h3_associative(a, b, c):
    assert close((a * b) * c, a * (b * c))


@given(hh, hh, hh)
def test_h_associative(a, b, c):
    assert close((a * b) * c, a * (b * c), 1e-8)


@given(st.one_of(h3, hh))
def test_inverse(g):
    e = type(g).identity()
    assert close(g * inverse(g), e) and close(inverse(g) * g, e)


@given(x, x)
def test_h3_commutator(t, s):
    assert close(commutator(H3Element.X(t), H3Element.Y(s)), H3Element.Z(t * s))


@given(x, x)
def test_h_relations(u, r):
    X, Y, W, Z = HElement.X, HElement.Y, HElement.W, HElement.Z
    assert close(commutator(X(u), Y(r)), Z(-u * u * r) * W(u * r))
    assert close(commutator(X(u), W(r)), Z(2 * u * r))
    assert close(commutator(Y(u), W(r)), HElement.identity())
    for g in (X(u), Y(u), W(u)):
        assert close(commutator(Z(r), g), HElement.identity())


def test_normal_form_order():
    # (x, y, w, z) is Y(y) W(w) Z(z) X(x)
    g = HElement(1.0, 2.0, 3.0, 4.0)
    assert close(HElement.Y(2.0) * HElement.W(3.0) * HElement.Z(4.0) * HElement.X(1.0), g)


@given(h3, h3)
def test_embedding_is_a_homomorphism(g, h):
    assert close(embed_h3_in_h(g * h), embed_h3_in_h(g) * embed_h3_in_h(h), 1e-8)


@given(st.lists(st.integers(-50, 50), min_size=8, max_size=8), st.integers(2, 11))
def test_modular_laws_commute_with_reduction(vals, n):
    g, h = tuple(vals[:3]), tuple(vals[3:6])
    assert h3_law(g, h, n) == tuple(c % n for c in h3_law(g, h))
    g4, h4 = tuple(vals[:4]), tuple(vals[4:])
    assert h_law(g4, h4, n) == tuple(c % n for c in h_law(g4, h4))


def test_mixed_multiplication_is_refused():
    with pytest.raises(TypeError):
        multiply(H3Element.X(1), HElement.X(1))
