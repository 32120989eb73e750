import math

import pytest
from hypothesis import assume, given, strategies as st

from rankfix.seqbuilder import (
    SequenceDomainError,
    build_sl3_sequence,
    build_sp4_sequence,
    failed_items,
    sp4_delta,
    verify_sequence,
)

base = st.floats(-200, 200)


@given(base, base, st.floats(3, 60))
def test_sl3_sequence_items(a, c, delta):
    b = a + c - delta**2
    assume(a + c - b >= 9.0)  # rounding in b can push Delta just below 3
    sp = build_sl3_sequence(a, b, c)
    assert failed_items(verify_sequence(sp)) == []


@given(base, base, base, st.floats(7, 60))
def test_sp4_sequence_items(a, c, d, delta):
    b = min(a + d - delta**2, (a + c - delta**2) / 2)
    assume(sp4_delta(a, b, c, d) >= 7.0)
    sp = build_sp4_sequence(a, b, c, d)
    assert failed_items(verify_sequence(sp)) == []


def test_sl3_frozen_example():
    # a = c = 0, b = -100: Delta = 10, n = 2
    sp = build_sl3_sequence(0.0, -100.0, 0.0)
    assert sp.n == 2 and sp.delta == 10.0
    assert math.fsum(math.exp(2 * x) for x in sp.first) == pytest.approx(1.0, rel=1e-12)


def test_unadjusted_sequence_fails_the_sum_item():
    sp = build_sl3_sequence(0.0, -100.0, 0.0, adjust=False)
    assert "iii" in failed_items(verify_sequence(sp))


def test_sequence_length_range():
    for delta in (3.0, 9.0, 27.5, 81.0):
        sp = build_sl3_sequence(0.0, -delta**2, 0.0)
        assert delta / 9 <= sp.n <= delta
        sp = build_sp4_sequence(0.0, -delta**2 - 49, 0.0, 0.0) if delta < 7 else \
            build_sp4_sequence(0.0, -delta**2, 0.0, 0.0)
        assert sp.delta / 3 <= sp.n <= sp.delta


@pytest.mark.parametrize("args", [(0.0, 1.0, 0.0), (0.0, -4.0, 0.0)])
def test_sl3_domain(args):
    with pytest.raises(SequenceDomainError):
        build_sl3_sequence(*args)


def test_sp4_domain():
    with pytest.raises(SequenceDomainError):
        build_sp4_sequence(0.0, -10.0, 0.0, 0.0)
    with pytest.raises(SequenceDomainError):
        build_sp4_sequence(0.0, 1.0, 0.0, 0.0)
