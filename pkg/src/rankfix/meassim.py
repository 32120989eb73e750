"""Gaussian words: ordered products of Gaussian draws on one-parameter subgroups.

A word is sampled letter by letter and multiplied left to right.  Samples are
drawn in fixed-size blocks and block ``k`` uses the random substream
``SeedSequence(seed, spawn_key=(k,))``, so sample ``i`` depends only on the
seed and ``i``.  Blocks may be generated by several threads without changing
the result.

For the Heisenberg group two word shapes have an explicit density:

    X(g_a) Z(g_b) Y(g_c) lands at (t, s, r + t s), density f_a(x) f_c(y) f_b(z - x y)
    Y(g_c) Z(g_b) X(g_a) lands at (t, s, r),        density f_a(x) f_c(y) f_b(z)

(unit Jacobian in both cases).  This gives a grid TV between them, and a
kernel density estimate covers everything else.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import json
import math

import numpy as np
from scipy import integrate, ndimage, stats

from ._validation import ConfigError, check_count, check_tuple
from .gaussians import Gaussian1D
from .nilpotent import H3Element, HElement, h3_law, h_law
from .rootsys import (
    SL3_MU_LABELS,
    SL3_MU_TILDE_LABELS,
    SP4_MU_LABELS,
    SP4_MU_TILDE_LABELS,
    sl3_root_matrix,
    sp4_root_matrix,
)

BLOCK = 4096
GRID_POINTS = 200
GRID_SIGMAS = 8.0
MASS_TOL = 1e-4
MC_MIN_SAMPLES = 10_000
BINNED_MAX_DIM = 3
BIN_FRACTION = 0.25
MAX_CELLS = 4_000_000
BOX_QUANTILE = 5e-4

_SUBGROUPS = {
    "h3": ("X", "Y", "Z"),
    "h": ("X", "Y", "W", "Z"),
    "sl3": tuple(f"X{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3) if i != j),
    "sp4": tuple(f"X{k}" for k in range(1, 9)),
}


@dataclass(frozen=True)
class GaussianWord:
    group: str
    letters: tuple

    def __post_init__(self):
        if self.group not in _SUBGROUPS:
            raise ConfigError(f"unknown target group {self.group!r}")
        letters = tuple((str(lab), g) for lab, g in self.letters)
        for lab, g in letters:
            if lab not in _SUBGROUPS[self.group]:
                raise ConfigError(f"{lab!r} is not a one-parameter subgroup of {self.group}")
            if not isinstance(g, Gaussian1D):
                raise ConfigError(f"letter {lab} needs a Gaussian1D, got {g!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def labels(self):
        return tuple(lab for lab, _ in self.letters)

    def to_json(self):
        return {
            "group": self.group,
            "letters": [{"label": lab, "mean": g.mean, "logscale": g.logscale} for lab, g in self.letters],
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        letters = [(d["label"], Gaussian1D(d["mean"], d["logscale"])) for d in obj["letters"]]
        return cls(obj["group"], tuple(letters))


def _word(group, labels, logscales):
    return GaussianWord(group, tuple((lab, Gaussian1D(0.0, a)) for lab, a in zip(labels, logscales)))


def make_nu_h3(a, b, c):
    a, b, c = check_tuple("(a, b, c)", (a, b, c), 3)
    return _word("h3", ("X", "Z", "Y"), (a, b, c))


def make_nu_tilde_h3(a, b, c):
    a, b, c = check_tuple("(a, b, c)", (a, b, c), 3)
    return _word("h3", ("Y", "Z", "X"), (a, b, c))


def make_nu_h(a, b, c, d):
    vals = check_tuple("(a, b, c, d)", (a, b, c, d), 4)
    return _word("h", ("Y", "W", "Z", "X"), vals)


def make_nu_tilde_h(a, b, c, d):
    vals = check_tuple("(a, b, c, d)", (a, b, c, d), 4)
    return _word("h", ("X", "Z", "W", "Y"), vals)


def _sl3_label(pair):
    return f"X{pair[0]}{pair[1]}"


def make_mu_sl3(lam):
    return _word("sl3", [_sl3_label(p) for p in SL3_MU_LABELS], check_tuple("lambda", lam, 6))


def make_mu_tilde_sl3(lam):
    return _word("sl3", [_sl3_label(p) for p in SL3_MU_TILDE_LABELS], check_tuple("lambda", lam, 6))


def make_mu_sp4(lam):
    return _word("sp4", [f"X{k}" for k in SP4_MU_LABELS], check_tuple("lambda", lam, 8))


def make_mu_tilde_sp4(lam):
    return _word("sp4", [f"X{k}" for k in SP4_MU_TILDE_LABELS], check_tuple("lambda", lam, 8))


def letter_matrix(group, label):
    if group == "sl3":
        return sl3_root_matrix(int(label[1]), int(label[2]))
    if group == "sp4":
        return sp4_root_matrix(int(label[1:]))
    raise ConfigError(f"{group} has no matrix letters")


def dimension(group):
    return {"h3": 3, "h": 4, "sl3": 3, "sp4": 4}[group]


def identity_samples(group, n):
    if group in ("h3", "h"):
        return np.zeros((n, dimension(group)))
    return np.broadcast_to(np.eye(dimension(group)), (n, dimension(group), dimension(group))).copy()


_COORD = {"h3": {"X": 0, "Y": 1, "Z": 2}, "h": {"X": 0, "Y": 1, "W": 2, "Z": 3}}


def compose(group, draws, labels):
    """Multiply letters left to right; ``draws`` has one column per letter."""
    n = draws.shape[0]
    out = identity_samples(group, n)
    if group in _COORD:
        law = h3_law if group == "h3" else h_law
        acc = tuple(out.T)
        for col, lab in enumerate(labels):
            step = [np.zeros(n)] * dimension(group)
            step[_COORD[group][lab]] = draws[:, col]
            acc = law(acc, tuple(step))
        return np.stack(acc, axis=1)
    for col, lab in enumerate(labels):
        gen = letter_matrix(group, lab)
        # right-multiplying by I + t E adds t * (M @ E)
        out = out + draws[:, col, None, None] * (out @ gen)
    return out


def _draw_block(word, seed, block, size):
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    rng = np.random.default_rng(ss)
    cols = [rng.normal(g.mean, g.sigma, size) for _, g in word.letters]
    if not cols:
        return np.zeros((size, 0))
    return np.stack(cols, axis=1)


def sample_letters(word, seed, n, threads=1):
    """Raw letter draws, shape (n, len(word)); deterministic in (seed, n)."""
    n = check_count("n", n, 1)
    n_blocks = -(-n // BLOCK)

    def job(k):
        return _draw_block(word, seed, k, BLOCK)

    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(job, range(n_blocks)))
    else:
        blocks = [job(k) for k in range(n_blocks)]
    return np.concatenate(blocks, axis=0)[:n]


def sample_word(word, seed, n, threads=1):
    """n samples of the word as coordinate rows (h3, h) or matrices (sl3, sp4)."""
    draws = sample_letters(word, seed, n, threads)
    return compose(word.group, draws, word.labels)


def as_elements(group, samples):
    if group == "h3":
        return [H3Element(*row) for row in samples]
    if group == "h":
        return [HElement(*row) for row in samples]
    return list(samples)


# exact H3 pushforward


def _h3_shape(word):
    if word.group != "h3" or len(word.letters) != 3:
        raise ConfigError("pushforward density needs a three-letter H3 word")
    if word.labels == ("X", "Z", "Y"):
        return "nu"
    if word.labels == ("Y", "Z", "X"):
        return "nu_tilde"
    raise ConfigError(f"unsupported H3 word shape {word.labels}")


def _h3_laws(word):
    """Gaussians driving the x, y, z coordinates plus the shape tag."""
    shape = _h3_shape(word)
    law = dict(word.letters)
    return law["X"], law["Y"], law["Z"], shape


@dataclass(frozen=True)
class Grid3D:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @property
    def cell(self):
        return (self.x[1] - self.x[0]) * (self.y[1] - self.y[0]) * (self.z[1] - self.z[0])

    @property
    def shape(self):
        return (self.x.size, self.y.size, self.z.size)


def _axis(center, half, n):
    h = 2 * half / n
    return center - half + h * (np.arange(n) + 0.5)


def h3_grid(words, n=GRID_POINTS, width=GRID_SIGMAS):
    """Midpoint grid covering every word to ``width`` standard deviations."""
    xs, ys, zs = [], [], []
    for w in words:
        gx, gy, gz, shape = _h3_laws(w)
        xs.append((gx.mean, gx.sigma))
        ys.append((gy.mean, gy.sigma))
        zm = gz.mean + (gx.mean * gy.mean if shape == "nu" else 0.0)
        zsd = math.sqrt(gz.variance + (gx.variance * gy.variance + gx.variance * gy.mean**2
                                       + gy.variance * gx.mean**2 if shape == "nu" else 0.0))
        zs.append((zm, zsd))

    def span(pairs):
        lo = min(m - width * s for m, s in pairs)
        hi = max(m + width * s for m, s in pairs)
        return 0.5 * (lo + hi), 0.5 * (hi - lo)

    return Grid3D(*(_axis(*span(p), n) for p in (xs, ys, zs)))


def pushforward_density_h3(word, grid):
    gx, gy, gz, shape = _h3_laws(word)
    fx = stats.norm.pdf(grid.x, gx.mean, gx.sigma)
    fy = stats.norm.pdf(grid.y, gy.mean, gy.sigma)
    if shape == "nu_tilde":
        fz = stats.norm.pdf(grid.z, gz.mean, gz.sigma)
        return fx[:, None, None] * fy[None, :, None] * fz[None, None, :]
    shift = grid.x[:, None] * grid.y[None, :]
    fz = stats.norm.pdf(grid.z[None, None, :] - shift[:, :, None], gz.mean, gz.sigma)
    return fx[:, None, None] * fy[None, :, None] * fz


def grid_mass(word, grid):
    return float(pushforward_density_h3(word, grid).sum() * grid.cell)


def _grid_tv(w1, w2, n, width, max_refine):
    for attempt in range(max_refine + 1):
        grid = h3_grid((w1, w2), n, width)
        p1 = pushforward_density_h3(w1, grid)
        m1 = float(p1.sum() * grid.cell)
        p2 = pushforward_density_h3(w2, grid)
        m2 = float(p2.sum() * grid.cell)
        err = max(abs(m1 - 1), abs(m2 - 1))
        if err <= MASS_TOL or attempt == max_refine:
            tv = 0.5 * float(np.abs(p1 - p2).sum() * grid.cell)
            return tv, err
        del p1, p2
        n = int(n * 1.5)
    raise AssertionError("unreachable")


# Monte Carlo with kernel density estimates
#
# The KDEs only pick the event A = {p1 > p2}; P1(A) - P2(A) is then measured on
# fresh samples.  Every event gives an unbiased lower bound for TV, so noise in
# the density estimates can only pull the estimate down, never up.


def _features(group, samples):
    if group in ("h3", "h"):
        return np.asarray(samples, dtype=float)
    return samples.reshape(samples.shape[0], -1)


def _binned_log_density(train, pts, bandwidth, box):
    """Gaussian KDE of ``train`` binned on a regular grid, read off at ``pts``.

    Points outside the box get -inf; they simply stay out of the event.
    """
    lo, hi = box
    dim = train.shape[1]
    width = max(BIN_FRACTION * bandwidth, float(np.prod(hi - lo) / MAX_CELLS) ** (1.0 / dim))
    shape = np.ceil((hi - lo) / width).astype(int)
    edges = [lo[k] + width * np.arange(shape[k] + 1) for k in range(dim)]
    hist, _ = np.histogramdd(train, bins=edges)
    dens = ndimage.gaussian_filter(hist, sigma=bandwidth / width, mode="constant", truncate=4.0)
    idx = (pts - lo) / width - 0.5
    inside = np.all((idx >= 0) & (idx <= shape - 1), axis=1)
    out = np.full(len(pts), -np.inf)
    vals = ndimage.map_coordinates(dens, idx[inside].T, order=1)
    with np.errstate(divide="ignore"):
        out[inside] = np.log(vals)
    return out


def _direct_log_density(train, pts, bandwidth, chunk=1024):
    """Unnormalized log of sum_j exp(-|p - x_j|^2 / 2h^2), evaluated in chunks."""
    tr = (train / bandwidth).astype(np.float32)
    tn = (tr * tr).sum(axis=1)
    out = np.empty(len(pts))
    for i in range(0, len(pts), chunk):
        p = (pts[i:i + chunk] / bandwidth).astype(np.float32)
        d2 = (p * p).sum(axis=1)[:, None] + tn[None, :] - 2.0 * (p @ tr.T)
        m = d2.min(axis=1)
        d2 -= m[:, None]
        d2 *= -0.5
        np.exp(d2, out=d2)
        out[i:i + chunk] = np.log(d2.sum(axis=1, dtype=np.float64)) - 0.5 * m
    return out


def _log_density(train, pts, bandwidth, box):
    if train.shape[1] <= BINNED_MAX_DIM:
        return _binned_log_density(train, pts, bandwidth, box)
    return _direct_log_density(train, pts, bandwidth)


def _event_tv(f1, f2, e1, e2, bandwidth):
    pooled = np.vstack([f1, f2])
    box = (np.quantile(pooled, BOX_QUANTILE, axis=0) - 3 * bandwidth,
           np.quantile(pooled, 1 - BOX_QUANTILE, axis=0) + 3 * bandwidth)
    pts = np.vstack([e1, e2])
    event = _log_density(f1, pts, bandwidth, box) > _log_density(f2, pts, bandwidth, box)
    return event[:len(e1)], event[len(e1):]


def _mc_tv(w1, w2, n, seed, threads, n_boot=200):
    """Held-out event estimator of TV with a bandwidth-sensitivity error bar.

    Coordinates are scaled by the pooled spread times Scott's factor, so the
    reference kernel has unit width.  The estimate is repeated at half that
    width; the gap between the two is added to the bootstrap half-width as an
    allowance for smoothing bias.
    """
    if n < MC_MIN_SAMPLES:
        raise ConfigError(f"Monte Carlo TV needs n >= {MC_MIN_SAMPLES}, got {n}")
    ss = np.random.SeedSequence(seed)
    seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(5)]
    f1 = _features(w1.group, sample_word(w1, seeds[0], n, threads))
    f2 = _features(w2.group, sample_word(w2, seeds[1], n, threads))
    e1 = _features(w1.group, sample_word(w1, seeds[2], n, threads))
    e2 = _features(w2.group, sample_word(w2, seeds[3], n, threads))
    spread = np.std(np.vstack([f1, f2]), axis=0)
    keep = spread > 0
    f1, f2, e1, e2 = (f[:, keep] for f in (f1, f2, e1, e2))
    if not keep.any():
        return 0.0, 0.0, spread
    scale = spread[keep] * n ** (-1.0 / (keep.sum() + 4))
    f1, f2, e1, e2 = (f / scale for f in (f1, f2, e1, e2))
    results = []
    for bw in (1.0, 0.5):
        ev1, ev2 = _event_tv(f1, f2, e1, e2, bw)
        results.append((float(ev1.mean() - ev2.mean()), ev1, ev2))
    best, ev1, ev2 = max(results, key=lambda r: r[0])
    rng = np.random.default_rng(seeds[4])
    boots = [ev1[rng.integers(0, n, n)].mean() - ev2[rng.integers(0, n, n)].mean() for _ in range(n_boot)]
    half = 1.96 * float(np.std(boots)) + abs(results[0][0] - results[1][0])
    full_scale = np.ones_like(spread)
    full_scale[keep] = scale
    return best, half, full_scale


@dataclass(frozen=True)
class TVEstimate:
    estimate: float
    half_width: float
    method: str
    detail: dict

    def __iter__(self):
        return iter((self.estimate, self.half_width))


def tv_estimate(w1, w2, method="grid", n=MC_MIN_SAMPLES, seed=0, threads=1,
                grid_points=GRID_POINTS, width=GRID_SIGMAS, max_refine=2):
    """TV distance between two word measures as (estimate, half_width)."""
    if w1.group != w2.group:
        raise ConfigError("words live on different groups")
    if method == "grid":
        tv, mass_err = _grid_tv(w1, w2, grid_points, width, max_refine)
        return TVEstimate(tv, mass_err, "grid", {"mass_error": mass_err, "grid_points": grid_points})
    if method == "mc":
        est, half, scale = _mc_tv(w1, w2, int(n), seed, threads)
        return TVEstimate(est, half, "mc", {"bandwidth": [float(s) for s in scale], "n": int(n)})
    raise ConfigError(f"unknown TV method {method!r}")


def h3_flip_tv_oracle(a, b, c):
    """Independent value of TV(nu_abc, nu~_cba): E over x, y of 2 Phi(|xy| / (2 e^b)) - 1."""
    sa, sb, sc = math.exp(a), math.exp(b), math.exp(c)

    def integrand(y, x):
        return stats.norm.pdf(x, 0, sa) * stats.norm.pdf(y, 0, sc) * (2 * stats.norm.cdf(x * y / (2 * sb)) - 1)

    val, _ = integrate.dblquad(integrand, 0, 12 * sa, 0, 12 * sc, epsabs=1e-11, epsrel=1e-10)
    return 4 * val


def flip_tv_bound(a, b, c):
    return math.exp(a + c - b)


def flip_tv_sharp_bound(a, b, c):
    return math.sqrt(2) / (math.pi * math.sqrt(math.pi)) * math.exp(a + c - b)
