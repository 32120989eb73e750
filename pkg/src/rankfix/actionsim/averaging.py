"""Orbit averages and displacement functionals on a testbed.

A word sample ``L1(t1) ... Lk(tk)`` acts on a vector by applying the last
letter first.  Monte Carlo averages reuse the block-seeded letter draws of
:mod:`rankfix.meassim`, so two words with the same letter layout and the same
seed are driven by the same standard normals (common random numbers).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from .._validation import ConfigError, check_count, check_finite
from ..meassim import BLOCK, GaussianWord, sample_letters

MIN_SAMPLES = 1000
CLT_Z = 1.959963984540054
DISPLACEMENT_POINTS = 201
DISPLACEMENT_FLOOR = 1e-4


@dataclass(frozen=True)
class AverageResult:
    mean: np.ndarray
    half_width: float
    n: int
    method: str

    def __iter__(self):
        return iter((self.mean, self.half_width))


def apply(action, g, xi):
    """g . xi = pi(g)(xi) + b(g)."""
    return action.apply(g, xi)


def _check_word(action, word):
    if not isinstance(word, GaussianWord):
        raise ConfigError(f"expected a GaussianWord, got {type(word).__name__}")
    if word.group != action.group:
        raise ConfigError(f"word lives in {word.group}, testbed acts by {action.group}")


def _run_word(action, labels, row, v):
    for label, t in zip(reversed(labels), reversed(row)):
        v = action.letter(label, float(t), v)
    return v


def _moments(action, words, base, draws):
    """Sums of each sample and of |sample|^2, per word, over a block of draws."""
    totals = [np.zeros(action.shape, dtype=complex) for _ in words]
    squares = [np.zeros(action.shape) for _ in words]
    for row in draws:
        for w, (labels, scale) in enumerate(words):
            v = _run_word(action, labels, row * scale, base)
            totals[w] += v
            squares[w] += np.abs(v) ** 2
    return totals, squares


def _moments_parallel(action, words, base, draws, threads):
    chunks = [draws[i:i + BLOCK] for i in range(0, len(draws), BLOCK)]

    def job(chunk):
        return _moments(action, words, base, chunk)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    # fixed chunk order keeps the float sums independent of the worker count
    totals = [sum(p[0][w] for p in parts) for w in range(len(words))]
    squares = [sum(p[1][w] for p in parts) for w in range(len(words))]
    return totals, squares


def _finish(action, total, square, n):
    mean = total / n
    var = np.maximum(square / n - np.abs(mean) ** 2, 0.0)
    half = CLT_Z * np.sqrt(var / n)
    if not np.iscomplexobj(np.zeros((), dtype=action.dtype)):
        mean = mean.real
    return mean.astype(action.dtype), float(action.norm(half))


def average(action, word, xi, n=MIN_SAMPLES, seed=0, threads=1):
    """Monte Carlo estimate of mu . xi with a coordinatewise CLT half-width.

    The half-width is the action norm of the vector of per-coordinate 95%
    half-widths.
    """
    n = check_count("n", n, MIN_SAMPLES)
    _check_word(action, word)
    base = action.shifted(xi)
    draws = sample_letters(word, seed, n, threads)
    totals, squares = _moments_parallel(action, [(word.labels, 1.0)], base, draws, threads)
    mean, half = _finish(action, totals[0], squares[0], n)
    return AverageResult(action.unshifted(mean), half, n, "mc")


def average_difference(action, first, second, xi, n=MIN_SAMPLES, seed=0, threads=1):
    """Paired MC estimate of mu1 . xi - mu2 . xi driven by the same draws.

    Both words must use the same letter labels; draws of ``second`` are the
    draws of ``first`` rescaled letter by letter (common random numbers).
    Returns (difference, half_width of the difference).
    """
    n = check_count("n", n, MIN_SAMPLES)
    _check_word(action, first)
    _check_word(action, second)
    if first.labels != second.labels:
        raise ConfigError("paired averaging needs words with the same letters")
    for (_, g1), (_, g2) in zip(first.letters, second.letters):
        if g1.mean != 0.0 or g2.mean != 0.0:
            raise ConfigError("paired averaging needs centered letters")
    base = action.shifted(xi)
    draws = sample_letters(first, seed, n, threads)
    ratio = np.array([g2.sigma / g1.sigma for (_, g1), (_, g2) in zip(first.letters, second.letters)])
    chunks = [draws[i:i + BLOCK] for i in range(0, n, BLOCK)]

    def job(chunk):
        tot = np.zeros(action.shape, dtype=complex)
        sq = np.zeros(action.shape)
        for row in chunk:
            d = _run_word(action, first.labels, row, base) - _run_word(action, first.labels, row * ratio, base)
            tot += d
            sq += np.abs(d) ** 2
        return tot, sq

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]
    total = sum(p[0] for p in parts)
    square = sum(p[1] for p in parts)
    return _finish(action, total, square, n)


def average_exact(action, word, xi):
    """mu . xi through exact per-letter averaging operators."""
    _check_word(action, word)
    v = action.shifted(xi)
    for label, g in reversed(word.letters):
        v = action.averaged_letter(label, g, v)
    return action.unshifted(v)


def displacement_grid(a):
    """Parameters scanned for delta_{L,a}: 201 log-spaced |t| with both signs and 0."""
    top = math.exp(check_finite("a", a))
    mags = top * np.geomspace(DISPLACEMENT_FLOOR, 1.0, DISPLACEMENT_POINTS)
    return np.concatenate([[0.0], mags, -mags])


def displacement(action, label, a, xi):
    """delta_{L,a}(xi) = max over |t| <= e^a of ||L(t) . xi - xi||.

    Lattice letters are scanned over every distinct lattice value (exact);
    continuous letters use :func:`displacement_grid`.
    """
    action._check_label(label)
    values = action.lattice_values(label, a)
    ts = displacement_grid(a) if values is None else values
    base = action.shifted(xi)
    # g.xi - xi = pi(g)(xi + eta) - (xi + eta)
    return max(action.norm(action.letter(label, float(t), base) - base) for t in ts)


def average_exact_difference(action, first, second, xi):
    """mu1 . xi - mu2 . xi for words with the same letters, without cancellation.

    Telescopes over the letters that differ: the difference of two products
    A1...An - B1...Bn is the sum over k of A1..A(k-1) (Ak - Bk) B(k+1)..Bn.
    """
    _check_word(action, first)
    _check_word(action, second)
    if first.labels != second.labels:
        raise ConfigError("exact differences need words with the same letters")
    base = action.shifted(xi)
    out = np.zeros(action.shape, dtype=action.dtype)
    tail = base
    letters = list(zip(first.letters, second.letters))
    for k in range(len(letters) - 1, -1, -1):
        (label, g1), (_, g2) = letters[k]
        if g1 != g2:
            v = action.averaged_letter_difference(label, g1, g2, tail)
            for lab, g in reversed(first.letters[:k]):
                v = action.averaged_letter(lab, g, v)
            out = out + v
        tail = action.averaged_letter(label, g2, tail)
    return out
