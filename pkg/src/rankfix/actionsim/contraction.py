"""Contraction constants and change-of-middle sweeps on exact testbeds.

None of the constants involved has a known value.  Everything here estimates
them from data and asserts only the shape of each inequality: a finite q0
below one, a negative decay slope in the sweep parameter, the commutator
growth inequality with its explicit factor 4.
"""

import csv
from dataclasses import asdict, dataclass, field
import math

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator

from .._validation import ConfigError, as_rng, check_count, check_finite
from ..gaussians import Gaussian1D
from ..meassim import make_nu_h, make_nu_h3, make_nu_tilde_h
from .averaging import (
    MIN_SAMPLES,
    average,
    average_difference,
    average_exact,
    average_exact_difference,
    displacement,
)

GRID_TOL = 1e-12
MC_FLAG_FRACTION = 0.1
Q0_SPAN = 3.0


@dataclass
class EmpiricalConstants:
    """Fitted stand-ins for existential constants; None when not estimated."""

    q0_hat: float = None
    q_hat: float = None
    C_hat: float = None
    M_hat: float = None
    details: dict = field(default_factory=dict)

    def admissible(self):
        checks = []
        for name in ("q0_hat", "q_hat"):
            v = getattr(self, name)
            if v is not None:
                checks.append(0.0 < v < 1.0)
        for name in ("C_hat", "M_hat"):
            v = getattr(self, name)
            if v is not None:
                checks.append(v > 0.0)
        return all(checks)

    def to_json(self):
        out = asdict(self)
        out["admissible"] = self.admissible()
        return out


def _gauss(a):
    return Gaussian1D(0.0, a)


def _need_exact(action):
    if not action.exact:
        raise ConfigError(f"{action.name} has no exact averaging operators")


def _pair_operators(action, a, c, xi):
    """Left side and central term of the contraction inequality for one (a, c).

    H3: ||X(g_a) Y(g_c) xi|| against ||Z(g_(a+c)) xi||.
    H:  max of both orders of X(g_c) and Y(g_a) against ||W(g_(a+c)) xi||
        (``c`` plays the role of d).
    """
    avg = action.averaged_letter
    if action.group == "h3":
        lhs = action.norm(avg("X", _gauss(a), avg("Y", _gauss(c), xi)))
        central = action.norm(avg("Z", _gauss(a + c), xi))
    elif action.group == "h":
        xy = action.norm(avg("X", _gauss(c), avg("Y", _gauss(a), xi)))
        yx = action.norm(avg("Y", _gauss(a), avg("X", _gauss(c), xi)))
        lhs = max(xy, yx)
        central = action.norm(avg("W", _gauss(a + c), xi))
    else:
        raise ConfigError(f"no contraction inequality for group {action.group!r}")
    return lhs, central


class Q0Estimator(BaseEstimator):
    """Smallest q0 consistent with observed (xi, a, c) triples.

    For a unit vector the inequality needs q0 only when the central branch
    fails, i.e. lhs > 2 * central; then q0 must be at least lhs.  ``fit``
    records that requirement per trial and keeps the maximum.

    Scales are sampled with both Gaussians at least one lattice spacing wide,
    where the lattice testbed resolves the letters.
    """

    def __init__(self, action=None, trials=200, a_range=None, c_range=None, seed=0):
        self.action = action
        self.trials = trials
        self.a_range = a_range
        self.c_range = c_range
        self.seed = seed

    def _ranges(self):
        low = math.log(getattr(self.action, "spacing", 1.0))
        default = (low, low + Q0_SPAN)
        return tuple(self.a_range or default), tuple(self.c_range or default)

    def fit(self, X=None, y=None):
        """X: optional array of vectors, one per trial; random unit vectors otherwise."""
        if self.action is None:
            raise ConfigError("Q0Estimator needs an action")
        action = self.action
        _need_exact(action)
        if action.eta is not None:
            raise ConfigError("the contraction inequality is about the linear part; use a zero cocycle")
        trials = check_count("trials", self.trials) if X is None else len(X)
        rng = as_rng(self.seed)
        (a_lo, a_hi), (c_lo, c_hi) = self._ranges()
        a_s = rng.uniform(a_lo, a_hi, trials)
        c_s = rng.uniform(c_lo, c_hi, trials)
        seeds = rng.integers(0, 2**63, trials)
        lhs, central, need = np.zeros(trials), np.zeros(trials), np.zeros(trials)
        for k in range(trials):
            xi = action.random_vector(int(seeds[k])) if X is None else np.asarray(X[k])
            scale = action.norm(xi)
            if scale == 0.0:
                continue
            xi = xi / scale
            lhs[k], central[k] = _pair_operators(action, a_s[k], c_s[k], xi)
            need[k] = lhs[k] if lhs[k] > 2.0 * central[k] else 0.0
        self.a_ = a_s
        self.c_ = c_s
        self.lhs_ = lhs
        self.central_ = central
        self.required_ = need
        self.binding_ = need > 0.0
        self.q0_hat_ = float(need.max()) if trials else 0.0
        return self


def estimate_q0(action, trials=200, seed=0, a_range=None, c_range=None):
    est = Q0Estimator(action, trials, a_range, c_range, seed).fit()
    details = {
        "trials": int(trials),
        "binding_trials": int(est.binding_.sum()),
        "a_range": list(est._ranges()[0]),
        "c_range": list(est._ranges()[1]),
        "max_lhs": float(est.lhs_.max()),
    }
    return EmpiricalConstants(q0_hat=est.q0_hat_, details=details)


# change of the middle parameter


_VARIANTS = ("h3", "h-b", "h-c")


def _delta_abcd(action, a, b, c, d, xi):
    return (displacement(action, "Y", a, xi) + displacement(action, "W", b, xi)
            + displacement(action, "Z", c, xi) + displacement(action, "X", d, xi))


def _sweep_point(action, variant, params, delta, xi):
    """Words (moved, fixed middle) plus the displacement factor for one Delta."""
    gap = params["gap"]
    if variant == "h3":
        a, c = params["a"], params["c"]
        top = a + c - delta**2
        first, second = make_nu_h3(a, top - gap, c), make_nu_h3(a, top, c)
        return first, second, displacement(action, "Z", a + c, xi), (top - gap, top)
    if variant == "h-c":
        a, b, d = params["a"], params["b"], params["d"]
        top = b + d - delta**2
        first, second = make_nu_h(a, b, top - gap, d), make_nu_h(a, b, top, d)
        return first, second, _delta_abcd(action, a, b, top, d, xi), (top - gap, top)
    a, c, d = params["a"], params["c"], params["d"]
    top = min(a + d - delta**2, (a + c - delta**2) / 2.0)
    first, second = make_nu_h(a, top - gap, c, d), make_nu_h(a, top, c, d)
    factor = displacement(action, "X", d, xi) + displacement(action, "Y", a, xi)
    return first, second, factor, (top - gap, top)


@dataclass
class SweepReport:
    variant: str
    rows: list
    slope: float
    intercept: float
    r2: float
    flagged: list
    method: str

    @property
    def passed(self):
        return bool(math.isfinite(self.slope) and self.slope < 0.0)

    @property
    def constants(self):
        ok = math.isfinite(self.slope)
        return EmpiricalConstants(
            q_hat=math.exp(self.slope) if ok else None,
            C_hat=math.exp(self.intercept) if ok else None,
            details={"r2": self.r2, "points": len(self.rows)},
        )

    def to_json(self):
        return {
            "variant": self.variant,
            "method": self.method,
            "rows": self.rows,
            "slope": self.slope,
            "intercept": self.intercept,
            "r2": self.r2,
            "flagged": self.flagged,
            "passed": self.passed,
            "constants": self.constants.to_json(),
        }

    def write_csv(self, path):
        cols = ["delta", "moved", "fixed", "lhs", "half_width", "factor", "ratio"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=cols)
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: repr(row[k]) for k in cols})


def check_change_of_middle(action, params, xi, n=None, seed=0, method="exact", threads=1):
    """Sweep Delta and fit log(LHS / ((1 + gap) * factor)) against Delta.

    ``params`` holds ``variant`` ('h3', 'h-b' or 'h-c'), the fixed parameters
    of that variant, ``gap`` = |b - b'| (or |c - c'|) and ``deltas``.  For each
    Delta the larger middle parameter is placed where the minimum defining
    Delta is attained and the smaller one sits ``gap`` below it.
    """
    variant = params.get("variant", "h3")
    if variant not in _VARIANTS:
        raise ConfigError(f"variant must be one of {_VARIANTS}, got {variant!r}")
    need = "h3" if variant == "h3" else "h"
    if action.group != need:
        raise ConfigError(f"variant {variant} needs an action of {need}, got {action.group}")
    if method not in ("exact", "mc"):
        raise ConfigError(f"method must be 'exact' or 'mc', got {method!r}")
    if method == "exact":
        _need_exact(action)
    gap = check_finite("gap", params["gap"])
    if gap < 0:
        raise ConfigError("gap must be >= 0")
    deltas = [check_finite("delta", d) for d in params["deltas"]]
    rows, flagged = [], []
    for delta in deltas:
        first, second, factor, (moved, fixed) = _sweep_point(action, variant, params, delta, xi)
        if method == "exact":
            lhs = action.norm(average_exact_difference(action, first, second, xi))
            half = 0.0
        else:
            diff, half = average_difference(action, first, second, xi, n or MIN_SAMPLES, seed, threads)
            lhs = action.norm(diff)
            if half > MC_FLAG_FRACTION * lhs:
                flagged.append(delta)
        denom = (1.0 + gap) * factor
        ratio = lhs / denom if denom > 0 else math.nan
        rows.append({"delta": delta, "moved": moved, "fixed": fixed, "lhs": lhs,
                     "half_width": half, "factor": factor, "ratio": ratio})
    usable = [(r["delta"], math.log(r["ratio"])) for r in rows
              if math.isfinite(r["ratio"]) and r["ratio"] > 0 and r["delta"] not in flagged]
    if len(usable) >= 2 and len({d for d, _ in usable}) >= 2:
        fit = stats.linregress(*zip(*usable))
        slope, intercept, r2 = float(fit.slope), float(fit.intercept), float(fit.rvalue**2)
    else:
        slope = intercept = r2 = math.nan
    return SweepReport(variant, rows, slope, intercept, r2, flagged, method)


def check_flip_h(action, a, b, c, d, xi, n=None, seed=0, method="exact"):
    """||nu_abcd . xi - nu~_dcba . xi|| against (e^(a+d-b) + e^(b+d-c)) delta_abcd.

    The constant is unknown, so the report carries the ratio (a lower bound
    for it) rather than a verdict.
    """
    if action.group != "h":
        raise ConfigError("the flip comparison lives on the group H")
    nu, flipped = make_nu_h(a, b, c, d), make_nu_tilde_h(d, c, b, a)
    if method == "exact":
        _need_exact(action)
        lhs = action.norm(average_exact(action, nu, xi) - average_exact(action, flipped, xi))
        half = 0.0
    else:
        m1, h1 = average(action, nu, xi, n or MIN_SAMPLES, seed)
        m2, h2 = average(action, flipped, xi, n or MIN_SAMPLES, seed)
        lhs, half = action.norm(m1 - m2), h1 + h2
    shape = math.exp(a + d - b) + math.exp(b + d - c)
    dab = _delta_abcd(action, a, b, c, d, xi)
    bound = shape * dab
    return {"lhs": lhs, "half_width": half, "shape": shape, "delta_abcd": dab,
            "ratio": lhs / bound if bound > 0 else (0.0 if lhs == 0 else math.inf)}


def check_commutator_growth(action, a, d, xi, tol=GRID_TOL):
    """delta_W(a+d) and delta_Z(a+2d) against 4 delta_X(d) + 4 delta_Y(a)."""
    if action.group != "h":
        raise ConfigError("commutator growth is stated for the group H")
    a, d = check_finite("a", a), check_finite("d", d)
    rhs = 4.0 * displacement(action, "X", d, xi) + 4.0 * displacement(action, "Y", a, xi)
    w = displacement(action, "W", a + d, xi)
    z = displacement(action, "Z", a + 2.0 * d, xi)
    slack = tol * max(1.0, rhs)
    return {"a": a, "d": d, "delta_w": w, "delta_z": z, "rhs": rhs,
            "w_ok": bool(w <= rhs + slack), "z_ok": bool(z <= rhs + slack),
            "passed": bool(w <= rhs + slack and z <= rhs + slack)}
