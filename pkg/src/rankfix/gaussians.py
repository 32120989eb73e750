"""One-dimensional Gaussian calculus.

``Gaussian1D(mean, logscale)`` is the normal law with mean ``mean`` and
variance ``exp(2 * logscale)``.  Besides densities and sampling this module
computes total variation distances and the optimal transport cost for the
cost function ``c(x, y) = |x - y| + [x != y]``.

Since ``c`` is a metric, an optimal plan may leave the common mass in place.
The residual then costs one unit per moved mass plus its displacement, so
``T_c = TV + W1`` with ``W1 = integral |F_mu - F_nu|``.  The grid method solves
the discretized problem as a min-cost flow LP and is used as a cross-check.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate, optimize, sparse, stats

from ._validation import ConfigError, as_rng, check_count, check_finite

QUAD_TOL = 1e-10
TAIL_SIGMAS = 10.0
GRID_ATOMS = 2000
MASS_TOL = 1e-6
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Gaussian1D:
    mean: float = 0.0
    logscale: float = 0.0

    def __post_init__(self):
        check_finite("mean", self.mean)
        check_finite("logscale", self.logscale)
        if not -300.0 < 2.0 * self.logscale < 300.0:
            raise ConfigError(f"variance exp(2*{self.logscale}) is not a positive finite number")

    @property
    def sigma(self):
        return math.exp(self.logscale)

    @property
    def variance(self):
        return math.exp(2.0 * self.logscale)

    def support(self, width=TAIL_SIGMAS):
        return self.mean - width * self.sigma, self.mean + width * self.sigma


@dataclass(frozen=True)
class TransportResult:
    cost: float
    tv_part: float
    w1_part: float
    method: str
    cell_size: float = 0.0
    mass_error: float = 0.0


def density(g, x):
    """Normal pdf of ``g`` at ``x`` (scalar or array)."""
    out = stats.norm.pdf(x, loc=g.mean, scale=g.sigma)
    return float(out) if np.ndim(out) == 0 else out


def cdf(g, x):
    out = stats.norm.cdf(x, loc=g.mean, scale=g.sigma)
    return float(out) if np.ndim(out) == 0 else out


def _joint_window(g1, g2):
    lo1, hi1 = g1.support()
    lo2, hi2 = g2.support()
    return min(lo1, lo2), max(hi1, hi2)


def density_crossings(g1, g2):
    """Points where the two pdfs are equal (0, 1 or 2 of them)."""
    s1, s2 = g1.variance, g2.variance
    # log f1 - log f2 = A x^2 + B x + C
    A = 0.5 / s2 - 0.5 / s1
    B = g1.mean / s1 - g2.mean / s2
    C = g2.mean**2 / (2 * s2) - g1.mean**2 / (2 * s1) + (g2.logscale - g1.logscale)
    if A == 0.0:
        return [] if B == 0.0 else [-C / B]
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    r = math.sqrt(disc)
    return sorted([(-B - r) / (2 * A), (-B + r) / (2 * A)])


def cdf_crossings(g1, g2):
    if g1.sigma == g2.sigma:
        return []
    # F1 = F2 iff the standardized arguments agree
    return [(g2.mean * g1.sigma - g1.mean * g2.sigma) / (g1.sigma - g2.sigma)]


def _quad(fn, lo, hi, breaks):
    pts = [lo] + sorted(b for b in breaks if lo < b < hi) + [hi]
    total = 0.0
    for u, v in zip(pts[:-1], pts[1:]):
        total += integrate.quad(fn, u, v, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)[0]
    return total


def tv_exact(g1, g2):
    """Total variation distance, half the L1 distance of the densities.

    The sign of f1 - f2 only changes at the density crossings, so the
    distance is the largest |P1(A) - P2(A)| over the intervals they cut out.
    """
    if g1 == g2:
        return 0.0
    if g1.sigma == g2.sigma:
        z = abs(g1.mean - g2.mean) / (2.0 * g1.sigma)
        return float(2.0 * stats.norm.cdf(z) - 1.0)
    pts = density_crossings(g1, g2)
    if not pts:
        return 0.0
    f1, f2 = cdf(g1, np.array(pts)), cdf(g2, np.array(pts))
    if len(pts) == 1:
        tv = abs(f1[0] - f2[0])
    else:
        tv = abs((f1[1] - f1[0]) - (f2[1] - f2[0]))
    return float(min(1.0, tv))


def tv_bound(shifted, centered):
    """Upper bound |t| e^{-a} / sqrt(2 pi) for TV between N(t, e^2a) and N(0, e^2a)."""
    if shifted.logscale != centered.logscale:
        raise ConfigError("tv_bound needs equal logscales")
    t = shifted.mean - centered.mean
    return abs(t) * math.exp(-shifted.logscale) * INV_SQRT_2PI


def _cdf_antiderivative(g, x):
    """Integral of the normal cdf of g from -inf to x."""
    z = (x - g.mean) / g.sigma
    return (x - g.mean) * stats.norm.cdf(z) + g.sigma * stats.norm.pdf(z)


def w1_distance(g1, g2):
    """Integral of |F1 - F2|, split at the single cdf crossing."""
    if g1.sigma == g2.sigma:
        return abs(g1.mean - g2.mean)
    (x,) = cdf_crossings(g1, g2)
    left = _cdf_antiderivative(g1, x) - _cdf_antiderivative(g2, x)
    # the signed integral over the whole line is m2 - m1
    right = (g2.mean - g1.mean) - left
    return float(abs(left) + abs(right))


def _quantile_grid(g1, g2, atoms):
    q = (np.arange(atoms) + 0.5) / atoms
    z = stats.norm.ppf(q)
    pts = np.unique(np.concatenate([g1.mean + g1.sigma * z, g2.mean + g2.sigma * z]))
    edges = np.concatenate([[-np.inf], 0.5 * (pts[1:] + pts[:-1]), [np.inf]])
    m1 = np.diff(stats.norm.cdf(edges, g1.mean, g1.sigma))
    m2 = np.diff(stats.norm.cdf(edges, g2.mean, g2.sigma))
    return pts, m1, m2


def _flow_lp(pts, m1, m2):
    """Min-cost flow for the cost |x-y| + [x != y] on a common 1-D grid.

    Source node S_k ships to sink T_k for free, or enters the line node L_k
    (half a unit), travels along the line at cost |dx| and leaves at L_j
    (another half unit).  Any move between distinct atoms pays exactly 1 + |dx|.
    """
    K = len(pts)
    k = np.arange(K)
    j = np.arange(K - 1)
    n_var = 3 * K + 2 * (K - 1)
    gaps = np.diff(pts)
    cost = np.concatenate([np.zeros(K), np.full(2 * K, 0.5), gaps, gaps])
    stay, leave, arrive, right, left = 0, K, 2 * K, 3 * K, 4 * K - 1
    rows = [k, k, K + k, K + k, 2 * K + k, 2 * K + k, 2 * K + j, 2 * K + j + 1, 2 * K + j + 1, 2 * K + j]
    cols = [stay + k, leave + k, stay + k, arrive + k, leave + k, arrive + k, right + j, right + j, left + j, left + j]
    vals = [1, 1, 1, 1, 1, -1, -1, 1, -1, 1]
    data = np.concatenate([np.full(len(r), v, dtype=float) for r, v in zip(rows, vals)])
    A = sparse.csr_matrix((data, (np.concatenate(rows), np.concatenate(cols))), shape=(3 * K, n_var))
    b = np.concatenate([m1, m2, np.zeros(K)])
    res = optimize.linprog(cost, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    moved = float(res.x[leave:leave + K].sum())
    return float(res.fun), moved


def transport_cost_c(mu, nu, method="closed_form", atoms=GRID_ATOMS):
    """Optimal cost for c(x, y) = |x - y| + [x != y] between two Gaussians."""
    if method == "closed_form":
        if mu == nu:
            return TransportResult(0.0, 0.0, 0.0, "closed_form")
        tv = tv_exact(mu, nu)
        w1 = w1_distance(mu, nu)
        return TransportResult(tv + w1, tv, w1, "closed_form")
    if method != "grid":
        raise ConfigError(f"unknown transport method {method!r}")
    pts, m1, m2 = _quantile_grid(mu, nu, check_count("atoms", atoms, 2))
    mass_error = max(abs(m1.sum() - 1.0), abs(m2.sum() - 1.0))
    if mass_error > MASS_TOL:
        raise RuntimeError(f"grid mass discretization error {mass_error:.2e} exceeds {MASS_TOL}")
    total, moved = _flow_lp(pts, m1, m2)
    widths = np.diff(pts)
    cell_mass = 0.5 * (m1 + m2)
    # mass-weighted mean width of the cells, tails excluded
    cell = float(np.sum(0.5 * (cell_mass[1:] + cell_mass[:-1]) * widths))
    return TransportResult(total, moved, total - moved, "grid", cell_size=cell, mass_error=mass_error)


def _first_proof_integrand(x):
    return (0.5 + abs(x)) * abs(x) * math.exp(-x * x / 2)


def _second_proof_integrand(u):
    return (0.5 + abs(u)) * abs(1 - u * u) * math.exp(-u * u / 2)


def monge_proof_integrals():
    """The two Gaussian integrals bounding the transport estimate."""
    first = INV_SQRT_2PI * _quad(_first_proof_integrand, -40.0, 40.0, [0.0])
    second = INV_SQRT_2PI * _quad(_second_proof_integrand, -40.0, 40.0, [-1.0, 0.0, 1.0])
    return first, second


def sample(g, seed, n):
    n = check_count("n", n, 1)
    return as_rng(seed).normal(g.mean, g.sigma, size=n)


def convolve(g1, g2):
    var = g1.variance + g2.variance
    return Gaussian1D(g1.mean + g2.mean, 0.5 * math.log(var))
