"""Telescoping sequences for the change-of-middle estimates.

Both builders start from explicit arithmetic progressions and then raise a
single extreme term on each side so the exponential sums hit their targets.
All sums are handled as log-sum-exp so parameters near 700 stay finite.

The progressions make the linear items tight (equality).  To keep them true
after floating point rounding the step is widened by a margin of a few dozen
ulps of the input scale, so linear items can be checked without tolerance.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np
from scipy.special import logsumexp

from ._validation import ConfigError, check_finite

SUM_TOL = 1e-9
MARGIN_ULPS = 64


class SequenceDomainError(ConfigError):
    """Input lies outside the range where the construction applies."""


@dataclass(frozen=True)
class SequencePair:
    n: int
    first: tuple
    second: tuple
    delta: float
    context: str
    inputs: tuple = field(default=())
    adjusted: bool = True
    margin: float = 0.0


def _margin(values, n, delta):
    scale = max([1.0, 2.0 * n * delta] + [abs(v) for v in values])
    return MARGIN_ULPS * np.finfo(float).eps * scale


def _floats(arr):
    return tuple(float(v) for v in arr)


def _fill_to_target(values, index, target):
    """Replace values[index] so that sum(exp(2 v)) == exp(2 target)."""
    rest = np.delete(values, index)
    if rest.size == 0:
        values[index] = target
        return
    log_rest = logsumexp(2.0 * rest)
    gap = log_rest - 2.0 * target
    if not gap < 0.0:
        raise AssertionError("exponential sum already exceeds its target")
    values[index] = target + 0.5 * math.log1p(-math.exp(gap))


def build_sl3_sequence(a, b, c, adjust=True):
    a, b, c = (check_finite(n, v) for n, v in zip("abc", (a, b, c)))
    if b > a + c:
        raise SequenceDomainError(f"need b <= a + c, got a={a}, b={b}, c={c}")
    delta = math.sqrt(a + c - b)
    if delta < 3.0:
        raise SequenceDomainError(f"delta = {delta:.6g} is below 3")
    n = int(delta // 9) + 1
    tau = _margin((a, b, c), n, delta)
    idx = np.arange(1, n + 1)
    first = a - (2 * idx - 1) * (delta + tau)
    second = b + delta + tau - first
    if adjust:
        _fill_to_target(first, 0, a)
        _fill_to_target(second, n - 1, c)
    return SequencePair(n, _floats(first), _floats(second), delta, "sl3", (a, b, c), adjust, float(tau))


def sp4_delta(a, b, c, d):
    return math.sqrt(min(a + d - b, a + c - 2 * b))


def build_sp4_sequence(a, b, c, d, adjust=True):
    a, b, c, d = (check_finite(n, v) for n, v in zip("abcd", (a, b, c, d)))
    if b > min(a + d, (a + c) / 2):
        raise SequenceDomainError(f"need b <= min(a+d, (a+c)/2), got {(a, b, c, d)}")
    delta = sp4_delta(a, b, c, d)
    if delta < 7.0:
        raise SequenceDomainError(f"delta = {delta:.6g} is below 7")
    n = int(delta // 3) + 1
    tau = _margin((a, b, c, d), n, delta)
    base = max(b - d, 2 * b - c) - tau
    idx = np.arange(1, n + 1)
    first = base + 2 * idx * (delta + tau)
    second = b + delta + tau - base - 2 * idx * (delta + tau)
    if adjust:
        _fill_to_target(first, n - 1, a)
        _fill_to_target(second, 0, d)
    return SequencePair(n, _floats(first), _floats(second), delta, "sp4", (a, b, c, d), adjust, float(tau))


def _sum_matches(values, target):
    err = logsumexp(2.0 * np.asarray(values)) - 2.0 * target
    return abs(math.expm1(err)) <= SUM_TOL


def verify_sequence(sp, inputs=None):
    """Check every defining item of the sequence pair; returns {item: bool}.

    Linear items are compared in exact rational arithmetic on the stored floats.
    """
    inputs = tuple(inputs) if inputs is not None else sp.inputs
    first, second = [Fraction(v) for v in sp.first], [Fraction(v) for v in sp.second]
    n, delta = sp.n, Fraction(sp.delta)
    report = {"length": len(first) == n and len(second) == n}
    if sp.context == "sl3":
        a, b, c = inputs
        b = Fraction(b)
        report["i"] = all(x + y >= b + delta for x, y in zip(first, second))
        pairs = [(i, j) for i in range(n) for j in range(i)]
        report["ii"] = all(first[i] + second[j] <= b - delta for i, j in pairs)
        report["iii"] = _sum_matches(sp.first, a) and _sum_matches(sp.second, c)
        report["n_range"] = sp.delta / 9 <= n <= sp.delta
    elif sp.context == "sp4":
        a, b, c, d = inputs
        b, c = Fraction(b), Fraction(c)
        report["i"] = all(x + y >= b + delta for x, y in zip(first, second))
        report["ii"] = all(x + y <= b - delta for x, y in zip(first[:-1], second[1:]))
        report["iii"] = all(b + y <= c - delta for y in second[1:])
        report["iv"] = _sum_matches(sp.first, a) and _sum_matches(sp.second, d)
        report["n_range"] = sp.delta / 3 <= n <= sp.delta
    else:
        raise ConfigError(f"unknown context {sp.context!r}")
    return report


def failed_items(report):
    return sorted(k for k, ok in report.items() if not ok)
