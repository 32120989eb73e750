"""Averages over mu_lambda on the SL3 grid testbed and their decay along a ladder.

On the torus grid the only invariant functions of all six shears are the
constants, so for a mean-zero start the averages xi_(theta lambda) should
shrink to zero as theta grows, and consecutive differences with them.
"""

import csv
from dataclasses import dataclass
import math

import numpy as np
from scipy import stats

from .._validation import ConfigError, check_count
from ..meassim import make_mu_sl3, sample_letters
from ..rootsys import distortion_witness
from .averaging import CLT_Z, MIN_SAMPLES, average, average_exact, displacement_grid
from .testbeds import GeometricSL3Action

DEFECT_LIMIT = 0.5
DEFECT_PROBES = 8


class InterpolationDefectError(ConfigError):
    """The grid is too coarse for the requested scales."""


def _check_grid(action):
    if not isinstance(action, GeometricSL3Action):
        raise ConfigError("mu_lambda averages need the SL3 grid testbed")


def word_defect(action, word, xi, seed=0, probes=DEFECT_PROBES):
    """Largest relative norm change of xi along a few sampled words."""
    size = action.norm(xi)
    if size == 0.0:
        return 0.0
    base = action.shifted(xi)
    worst = 0.0
    for row in sample_letters(word, seed, probes):
        v = base
        for label, t in zip(reversed(word.labels), reversed(row)):
            v = action.letter(label, float(t), v)
        worst = max(worst, abs(action.norm(v) / action.norm(base) - 1.0))
    return worst


def xi_lambda(action, lam, xi, n=MIN_SAMPLES, seed=0, threads=1, defect_limit=DEFECT_LIMIT):
    """MC estimate of mu_lambda . xi; returns the AverageResult.

    Raises InterpolationDefectError when sampled words change the norm of xi
    by more than ``defect_limit``.
    """
    _check_grid(action)
    word = make_mu_sl3(lam)
    defect = word_defect(action, word, xi, seed)
    if defect > defect_limit:
        raise InterpolationDefectError(
            f"interpolation defect {defect:.3f} exceeds {defect_limit}; "
            f"rerun with size >= {2 * action.size}")
    return average(action, word, xi, n, seed, threads)


@dataclass
class LadderReport:
    thetas: list
    norms: list
    half_widths: list
    increments: list
    floors: list
    defects: list
    method: str

    @property
    def debiased_norms(self):
        return [math.sqrt(max(v * v - (h / CLT_Z) ** 2, 0.0)) for v, h in zip(self.norms, self.half_widths)]

    @property
    def monotone(self):
        """Each increment at most the previous one plus the noise floor."""
        inc, fl = self.increments, self.floors
        return all(inc[k + 1] <= inc[k] + fl[k] for k in range(len(inc) - 1))

    @property
    def norm_drop(self):
        return 1.0 - self.norms[-1] / self.norms[0] if self.norms[0] > 0 else 0.0

    @property
    def decay_exponent(self):
        """Slope of log(increment) against theta."""
        pts = [(t, math.log(v)) for t, v in zip(self.thetas[1:], self.increments) if v > 0]
        if len(pts) < 2:
            return math.nan
        return float(stats.linregress(*zip(*pts)).slope)

    def to_json(self):
        return {
            "thetas": self.thetas, "norms": self.norms, "half_widths": self.half_widths,
            "debiased_norms": self.debiased_norms, "increments": self.increments,
            "floors": self.floors, "defects": self.defects, "method": self.method,
            "monotone": self.monotone, "norm_drop": self.norm_drop,
            "decay_exponent": self.decay_exponent,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "norm", "half_width", "increment", "floor", "defect"])
            for k, t in enumerate(self.thetas):
                inc = repr(self.increments[k - 1]) if k else ""
                fl = repr(self.floors[k - 1]) if k else ""
                writer.writerow([repr(t), repr(self.norms[k]), repr(self.half_widths[k]), inc, fl,
                                 repr(self.defects[k])])


def cauchy_diagnostic(action, lam, scales, xi, n=MIN_SAMPLES, seed=0, threads=1, method="mc"):
    """Norms and consecutive differences of xi_(theta lambda) over the ladder ``scales``.

    All rungs share the seed, so the same standard normals drive every rung
    (common random numbers).  The floor for increment k is the sum of the two
    half-widths involved.  ``method='spectral'`` swaps in exact Fourier
    averaging and has zero floor.
    """
    _check_grid(action)
    if method not in ("mc", "spectral"):
        raise ConfigError(f"method must be 'mc' or 'spectral', got {method!r}")
    lam = np.asarray(lam, dtype=float)
    scales = [float(s) for s in scales]
    if len(scales) < 2:
        raise ConfigError("the ladder needs at least two scales")
    means, halves, defects = [], [], []
    for theta in scales:
        if method == "mc":
            res = xi_lambda(action, theta * lam, xi, n, seed, threads)
            means.append(res.mean)
            halves.append(res.half_width)
            defects.append(word_defect(action, make_mu_sl3(theta * lam), xi, seed))
        else:
            means.append(average_exact(action, make_mu_sl3(theta * lam), xi))
            halves.append(0.0)
            defects.append(0.0)
    norms = [action.norm(m) for m in means]
    increments = [action.norm(means[k + 1] - means[k]) for k in range(len(means) - 1)]
    floors = [halves[k] + halves[k + 1] for k in range(len(means) - 1)]
    return LadderReport(scales, norms, halves, increments, floors, defects, method)


def theta_ladder(start=1.0, stop=3.0, step=0.25):
    count = check_count("ladder length", int(round((stop - start) / step)) + 1, 2)
    return list(np.linspace(start, stop, count))


def fit_distortion_constant(action, xi, ts=None, labels=None):
    """M_hat = max over letters and t of ||X(t) xi - xi|| / log(2 + |t|).

    Also returns the largest matrix-level distortion residual from the root
    system, which ties the letter parameter to a bounded-word witness.
    """
    _check_grid(action)
    ts = displacement_grid(math.log(1e3)) if ts is None else np.asarray(ts, dtype=float)
    labels = action.labels if labels is None else labels
    base = action.shifted(xi)
    best, where, residual = 0.0, None, 0.0
    for label in labels:
        for t in ts:
            ratio = action.norm(action.letter(label, float(t), base) - base) / math.log(2.0 + abs(t))
            if ratio > best:
                best, where = ratio, (label, float(t))
        residual = max(residual, distortion_witness("sl3", (int(label[1]), int(label[2])), 1e3)[2])
    return {"M_hat": best, "argmax": where, "witness_residual": residual, "points": len(ts) * len(labels)}
