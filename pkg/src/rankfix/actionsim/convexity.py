"""Uniform convexity calibration and the iterated almost-invariance check.

``modulus(eps, p)`` is a lower bound for the modulus of convexity of
complex l^p: exact (Hanner) for p >= 2, the Clarkson bound with the dual
exponent for 1 < p < 2.  A lower bound on the modulus gives an upper bound
on the epsilon that the averaging argument delivers, so the table below is
conservative.

Single representation: let c = 2 Phi(1/2) - 1 be the total variation
between N(0,1) and N(1,1).  If ||rho(gamma_0) xi|| >= 1 - delta then every
|t| <= 1 has ||(rho(t) xi + xi) / 2|| >= 1 - delta / (1 - c), hence
||rho(t) xi - xi|| <= inverse_modulus(delta / (1 - c)); the Gaussian
displacement picks up the factor 1 + sqrt(2 / pi).  Several representations
follow by the recursion

    eps_n(delta) = max(eps_(n-1)(delta), eps_1(delta + (n - 1) eps_(n-1)(delta))).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import optimize, stats

from .._validation import ConfigError, as_rng, check_count, check_exponent, check_finite
from .averaging import displacement_grid
from .testbeds import PhaseRepresentation

GAUSS_FACTOR = 1.0 + math.sqrt(2.0 / math.pi)
UNIT_SHIFT_TV = 2.0 * stats.norm.cdf(0.5) - 1.0
MAX_DISTANCE = 2.0


def modulus(eps, p):
    """Lower bound for the modulus of convexity of l^p at distance eps."""
    p = check_exponent("p", p)
    eps = min(max(float(eps), 0.0), MAX_DISTANCE)
    r = p if p >= 2.0 else p / (p - 1.0)
    # 1 - (1 - u)^(1/r) without cancellation for small u
    return -math.expm1(math.log1p(-((eps / 2.0) ** r)) / r) if eps < MAX_DISTANCE else 1.0


def inverse_modulus(level, p):
    """Largest eps with modulus(eps, p) <= level; 2 once level reaches the top."""
    if level <= 0.0:
        return 0.0
    if level >= modulus(MAX_DISTANCE, p):
        return MAX_DISTANCE
    return optimize.brentq(lambda e: modulus(e, p) - level, 0.0, MAX_DISTANCE, xtol=1e-15, rtol=1e-14)


def epsilon_single(delta, p):
    """eps_1(delta): bound on pointwise and Gaussian displacement for one letter."""
    pointwise = inverse_modulus(delta / (1.0 - UNIT_SHIFT_TV), p)
    return min(MAX_DISTANCE, GAUSS_FACTOR * pointwise)


def epsilon_iterated(delta, p, n):
    delta = check_finite("delta", delta)
    n = check_count("n", n)
    eps = epsilon_single(delta, p)
    for k in range(2, n + 1):
        eps = max(eps, epsilon_single(delta + (k - 1) * eps, p))
    return min(eps, MAX_DISTANCE)


def calibration_table(p, n_max, deltas):
    """{n: [(delta, eps_n(delta)), ...]} for n = 1 .. n_max."""
    return {n: [(float(d), epsilon_iterated(d, p, n)) for d in deltas] for n in range(1, n_max + 1)}


@dataclass(frozen=True)
class IteratedReport:
    ratio: float
    hypothesis: bool
    pointwise: float
    gaussian: float
    epsilon: float
    delta: float
    p: float
    n: int

    @property
    def passed(self):
        if not self.hypothesis:
            return True
        return max(self.pointwise, self.gaussian) <= self.epsilon

    def to_json(self):
        out = dict(self.__dict__)
        out["passed"] = self.passed
        return out


def check_uc_iterated(reps, a, xi, delta):
    """Test the implication on one (reps, scales, xi) configuration.

    Hypothesis: ||rho_1(gamma_a1) ... rho_n(gamma_an) xi|| >= (1 - delta) ||xi||.
    Conclusion: every ||rho_i(t) xi - xi|| with |t| <= e^(a_i) and every
    ||rho_i(gamma_ai) xi - xi|| is at most eps_n(delta) ||xi||.
    """
    if not reps or len(reps) != len(a):
        raise ConfigError("need one scale per representation")
    p = reps[0].p
    if any(r.p != p for r in reps):
        raise ConfigError("all representations must use the same norm")
    delta = check_finite("delta", delta)
    xi = np.asarray(xi, dtype=complex)
    size = reps[0].norm(xi)
    if size == 0.0:
        return IteratedReport(1.0, True, 0.0, 0.0, 0.0, delta, p, len(reps))
    v = xi
    for rep, s in zip(reversed(reps), reversed(a)):
        v = rep.averaged(s, v)
    ratio = reps[0].norm(v) / size
    pointwise = max(max(rep.norm(rep.act(t, xi) - xi) for t in displacement_grid(s)) for rep, s in zip(reps, a))
    gaussian = max(rep.norm(rep.averaged(s, xi) - xi) for rep, s in zip(reps, a))
    return IteratedReport(
        ratio=float(ratio),
        hypothesis=bool(ratio >= 1.0 - delta),
        pointwise=float(pointwise / size),
        gaussian=float(gaussian / size),
        epsilon=epsilon_iterated(delta, p, len(reps)),
        delta=delta,
        p=p,
        n=len(reps),
    )


def random_uc_trials(p, n, trials, delta, seed=0, size=16):
    """Seeded random phase representations and low-frequency-heavy vectors.

    Frequencies are log-uniform so that some trials meet the hypothesis and
    others do not; vectors decay in the frequency index.
    """
    rng = as_rng(seed)
    reports = []
    for _ in range(check_count("trials", trials)):
        reps = [PhaseRepresentation(np.sort(np.exp(rng.uniform(-8.0, 2.0, size))), p) for _ in range(n)]
        scales = list(rng.uniform(-3.0, 1.0, n))
        decay = np.exp(-rng.uniform(0.0, 3.0) * np.arange(size))
        xi = decay * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
        reports.append(check_uc_iterated(reps, scales, xi, delta))
    return reports
