"""Finite-dimensional isometric testbeds.

Every testbed acts through one-parameter subgroups ("letters").  A group
element is handed over either in the native coordinates of the testbed group
or as a list of ``(label, t)`` letters read left to right.

Permutation and Schroedinger testbeds realize a lattice subgroup of the real
group, because a finite-dimensional isometric representation of a connected
nilpotent group has trivial commutators.  Real letter parameters are rounded to
the lattice once per letter; the center of the Schroedinger testbed acts by
exact phases for every real parameter.  On the lattice both testbeds are
genuine representations by signed or phased permutations, so they are
isometries of every l^p norm and the cocycle identity holds exactly.

The SL3 testbed is the geometric action f -> f(g^-1 x) on a periodic grid.
Each elementary shear is a measure-preserving map of the torus and is applied
by linear interpolation along one axis (what trilinear interpolation reduces
to for a shear).  Interpolation smooths, so this testbed reports its isometry
defect instead of claiming exactness.
"""

import math

import numpy as np
from scipy import stats

from .._validation import ConfigError, as_rng, check_count, check_exponent, check_positive
from ..nilpotent import H3Element, HElement, h3_inverse_law, h3_law, h_inverse_law, h_law

UNIFORM_SPREAD = 10.0  # sigma / spacing above this many periods wraps to uniform
TAIL_SIGMAS = 12.0


def wrapped_lattice_weights(mean, sigma, spacing, modulus):
    """Law of round(T / spacing) mod ``modulus`` for T ~ N(mean, sigma^2)."""
    mu, sd = mean / spacing, sigma / spacing
    if sd > UNIFORM_SPREAD * modulus:
        return np.full(modulus, 1.0 / modulus)
    lo = math.floor(mu - TAIL_SIGMAS * sd) - 1
    hi = math.ceil(mu + TAIL_SIGMAS * sd) + 1
    j = np.arange(lo, hi + 1)
    upper = stats.norm.cdf((j + 0.5 - mu) / sd)
    lower = stats.norm.cdf((j - 0.5 - mu) / sd)
    w = np.bincount(j % modulus, weights=upper - lower, minlength=modulus)
    return w / w.sum()


def lp_norm(v, p, weight=1.0):
    a = np.abs(np.asarray(v, dtype=complex if np.iscomplexobj(v) else float))
    if p == 2:
        return float(math.sqrt(weight * float(np.vdot(a, a).real)))
    return float((weight * np.sum(a.astype(float) ** p)) ** (1.0 / p))


class ActionInstance:
    """Linear isometric representation plus an optional coboundary cocycle.

    With ``eta`` set, the affine action is ``g.xi = pi(g)(xi + eta) - eta``,
    whose cocycle ``b(g) = pi(g) eta - eta`` has the fixed point ``-eta``.
    Subclasses set ``name``, ``group`` and ``labels`` before calling this.
    """

    exact = True

    def __init__(self, p=2.0, eta=None):
        self.p = check_exponent("p", p)
        self.eta = None if eta is None else self._check_vector(eta)

    def __repr__(self):
        cocycle = "zero" if self.eta is None else "coboundary"
        return f"<{type(self).__name__} {self.name} p={self.p:g} cocycle={cocycle}>"

    # subclass interface

    @property
    def shape(self):
        raise NotImplementedError

    @property
    def dtype(self):
        return float

    def letter(self, label, t, v):
        """pi(L(t)) v for a one-parameter subgroup ``label``."""
        raise NotImplementedError

    def averaged_letter(self, label, gaussian, v):
        """pi(L(gamma)) v, the exact Gaussian average of one letter."""
        raise NotImplementedError

    def averaged_letter_difference(self, label, first, second, v):
        """(pi(L(first)) - pi(L(second))) v; testbeds override this when it cancels badly."""
        return self.averaged_letter(label, first, v) - self.averaged_letter(label, second, v)

    def apply_native(self, g, v):
        raise NotImplementedError

    def lattice_values(self, label, a):
        """All distinct parameters |t| <= e^a, or None for a continuous letter."""
        return None

    def norm(self, v):
        return lp_norm(v, self.p)

    # shared machinery

    def _check_label(self, label):
        if label not in self.labels:
            raise ConfigError(f"{self.name} has no one-parameter subgroup {label!r}")

    def _check_vector(self, v):
        v = np.asarray(v, dtype=self.dtype)
        if v.shape != self.shape:
            raise ConfigError(f"vector shape {v.shape} does not match the testbed {self.shape}")
        return v

    def zero(self):
        return np.zeros(self.shape, dtype=self.dtype)

    def random_vector(self, seed):
        rng = as_rng(seed)
        v = rng.standard_normal(self.shape)
        if np.issubdtype(np.dtype(self.dtype), np.complexfloating):
            v = v + 1j * rng.standard_normal(self.shape)
        return (v / self.norm(v)).astype(self.dtype)

    def linear(self, g, v):
        """pi(g) v where g is a native element or a list of (label, t) letters."""
        v = self._check_vector(v)
        if isinstance(g, (list, tuple)) and all(isinstance(x, tuple) and len(x) == 2 for x in g):
            for label, t in reversed(g):
                self._check_label(label)
                v = self.letter(label, float(t), v)
            return v
        return self.apply_native(g, v)

    def shifted(self, xi):
        xi = self._check_vector(xi)
        return xi if self.eta is None else xi + self.eta

    def unshifted(self, v):
        return v if self.eta is None else v - self.eta

    def apply(self, g, xi):
        return self.unshifted(self.linear(g, self.shifted(xi)))

    def cocycle(self, g):
        if self.eta is None:
            return self.zero()
        return self.linear(g, self.eta) - self.eta


class PermutationAction(ActionInstance):
    """Left regular representation of H3(Z/N) or H(Z/N) on l^p(group)."""

    def __init__(self, group="h3", modulus=5, p=2.0, eta=None):
        if group not in ("h3", "h"):
            raise ConfigError(f"permutation testbed needs group 'h3' or 'h', got {group!r}")
        self.group = group
        self.modulus = check_count("modulus", modulus, 2)
        self.dim = 3 if group == "h3" else 4
        self.labels = ("X", "Y", "Z") if group == "h3" else ("X", "Y", "W", "Z")
        self.name = f"perm-{group}-{self.modulus}"
        self._law = h3_law if group == "h3" else h_law
        grid = np.indices((self.modulus,) * self.dim).reshape(self.dim, -1)
        self._coords = tuple(grid)
        self._perms = {lab: [self._perm(self._unit(lab, -j)) for j in range(self.modulus)]
                       for lab in self.labels}
        super().__init__(p=p, eta=eta)

    @property
    def shape(self):
        return (self.modulus**self.dim,)

    @property
    def order(self):
        return self.modulus**self.dim

    def _slot(self, label):
        return {"X": 0, "Y": 1, "W": 2, "Z": 3 if self.group == "h" else 2}[label]

    def _unit(self, label, j):
        c = [0] * self.dim
        c[self._slot(label)] = j
        return tuple(c)

    def _perm(self, inverse_coords):
        """Index array sending f to f(g^-1 .) given the coordinates of g^-1."""
        n = self.modulus
        moved = self._law(tuple(np.full(self.order, c) for c in inverse_coords), self._coords, n)
        return np.ravel_multi_index(moved, (n,) * self.dim)

    def _native_inverse(self, g):
        if isinstance(g, (H3Element, HElement)):
            g = g.coords
        coords = tuple(int(round(float(c))) for c in g)
        if len(coords) != self.dim or any(abs(float(a) - b) > 1e-9 for a, b in zip(g, coords)):
            raise ConfigError(f"{g!r} is not an integer element of the {self.dim}-dimensional group")
        return (h3_inverse_law if self.group == "h3" else h_inverse_law)(coords)

    def apply_native(self, g, v):
        return v[self._perm(self._native_inverse(g))]

    def residue(self, t):
        return int(np.rint(t)) % self.modulus

    def letter(self, label, t, v):
        return v[self._perms[label][self.residue(t)]]

    def averaged_letter(self, label, gaussian, v):
        self._check_label(label)
        w = wrapped_lattice_weights(gaussian.mean, gaussian.sigma, 1.0, self.modulus)
        out = np.zeros_like(v)
        for j in np.flatnonzero(w):
            out += w[j] * v[self._perms[label][j]]
        return out

    def lattice_values(self, label, a):
        top = math.floor(math.exp(a))
        if top >= self.modulus // 2:
            return [float(j) for j in range(self.modulus)]
        return [float(j) for j in range(-top, top + 1)]


class SchrodingerAction(ActionInstance):
    """Weyl representation of the lattice Heisenberg group on C^N.

    X(jh) shifts indices by j, Y(lh) multiplies entry k by w^(lk) with
    w = exp(2 pi i / N), and Z(r) is the scalar exp(i hbar r) for every real r.
    The lattice spacing h solves hbar h^2 N = 2 pi, so [X(jh), Y(lh)] = Z(jl h^2)
    holds exactly.
    """

    def __init__(self, size=32, hbar=1.0, p=2.0, eta=None):
        self.size = check_count("size", size, 2)
        self.hbar = check_positive("hbar", hbar)
        self.spacing = math.sqrt(2.0 * math.pi / (self.hbar * self.size))
        self.group = "h3"
        self.labels = ("X", "Y", "Z")
        self.name = f"schrodinger-{self.size}-{self.hbar:g}"
        self._k = np.arange(self.size)
        super().__init__(p=p, eta=eta)

    @property
    def shape(self):
        return (self.size,)

    @property
    def dtype(self):
        return complex

    def index(self, t):
        return int(np.rint(t / self.spacing))

    def _shift(self, j, v):
        return np.roll(v, -j)

    def _clock(self, l, v):
        return v * np.exp(2j * math.pi * ((l * self._k) % self.size) / self.size)

    def _phase(self, r, v):
        return v * np.exp(1j * self.hbar * r)

    def letter(self, label, t, v):
        if label == "X":
            return self._shift(self.index(t), v)
        if label == "Y":
            return self._clock(self.index(t), v)
        return self._phase(t, v)

    def apply_native(self, g, v):
        if not isinstance(g, H3Element):
            g = H3Element(*g)
        j, l = self.index(g.x), self.index(g.y)
        if abs(g.x - j * self.spacing) > 1e-9 * max(1.0, abs(g.x)) or \
                abs(g.y - l * self.spacing) > 1e-9 * max(1.0, abs(g.y)):
            raise ConfigError(f"{g!r} is off the lattice with spacing {self.spacing:.6g}")
        # normal form Y(y) Z(z) X(x)
        return self._clock(l, self._phase(g.z, self._shift(j, v)))

    def averaged_letter(self, label, gaussian, v):
        self._check_label(label)
        if label == "Z":
            return np.exp(self._central_log(gaussian)) * v
        w = wrapped_lattice_weights(gaussian.mean, gaussian.sigma, self.spacing, self.size)
        if label == "Y":
            # sum_j w_j exp(2 pi i j k / N)
            return v * (self.size * np.fft.ifft(w))
        out = np.zeros_like(v)
        for j in np.flatnonzero(w):
            out += w[j] * self._shift(j, v)
        return out

    def _central_log(self, gaussian):
        return 1j * self.hbar * gaussian.mean - 0.5 * (self.hbar * gaussian.sigma) ** 2

    def averaged_letter_difference(self, label, first, second, v):
        if label != "Z":
            return super().averaged_letter_difference(label, first, second, v)
        lo, hi = self._central_log(first), self._central_log(second)
        # e^lo - e^hi = e^hi (e^(lo - hi) - 1) pivoted on the larger modulus
        if lo.real > hi.real:
            return -np.exp(lo) * np.expm1(hi - lo) * v
        return np.exp(hi) * np.expm1(lo - hi) * v

    def lattice_values(self, label, a):
        if label == "Z":
            return None
        top = math.floor(math.exp(a) / self.spacing)
        if top >= self.size // 2:
            return [j * self.spacing for j in range(self.size)]
        return [j * self.spacing for j in range(-top, top + 1)]


class GeometricSL3Action(ActionInstance):
    """SL3(R) acting on functions on the torus [-pi, pi)^3 by f -> f(g^-1 x)."""

    def __init__(self, size=64, p=2.0, eta=None, dtype=np.float32):
        self.size = check_count("size", size, 4)
        self.group = "sl3"
        self.labels = tuple(f"X{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3) if i != j)
        self.name = f"sl3-grid-{self.size}"
        self.exact = False
        self._dtype = dtype
        self.spacing = 2.0 * math.pi / self.size
        self.axis = (np.arange(self.size) * self.spacing - math.pi).astype(np.float64)
        self._freq = 2.0 * math.pi * np.fft.fftfreq(self.size, d=self.spacing)
        super().__init__(p=p, eta=eta)

    @property
    def shape(self):
        return (self.size,) * 3

    @property
    def dtype(self):
        return self._dtype

    def norm(self, v):
        return lp_norm(v, self.p, weight=self.spacing**3)

    def mesh(self):
        return np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")

    def _axes(self, label):
        return int(label[1]) - 1, int(label[2]) - 1

    def _shaped(self, arr, axis):
        shape = [1, 1, 1]
        shape[axis] = self.size
        return arr.reshape(shape)

    def letter(self, label, t, v):
        """v(x - t x_j e_i), linear interpolation along axis i with wraparound."""
        i, j = self._axes(label)
        shift = t * self.axis / self.spacing
        whole = np.floor(shift)
        frac = self._shaped((shift - whole).astype(v.dtype), j)
        base = self._shaped(np.arange(self.size), i) - self._shaped(whole.astype(np.int64), j)
        base = np.broadcast_to(base % self.size, v.shape)
        near = np.take_along_axis(v, base, axis=i)
        far = np.take_along_axis(v, (base - 1) % self.size, axis=i)
        return (1 - frac) * near + frac * far

    def averaged_letter(self, label, gaussian, v):
        """Spectral reference: each Fourier mode along axis i gets E exp(-i w t x_j)."""
        i, j = self._axes(label)
        w = self._shaped(self._freq, i)
        x = self._shaped(self.axis, j)
        mult = np.exp(-1j * w * gaussian.mean * x - 0.5 * (w * gaussian.sigma * x) ** 2)
        out = np.fft.ifft(np.fft.fft(v, axis=i) * mult, axis=i)
        return out.real.astype(v.dtype)

    def apply_native(self, g, v):
        raise ConfigError("the grid testbed applies words of elementary letters, not raw matrices")

    def defect(self, v, label, t):
        return abs(self.norm(self.letter(label, t, v)) / self.norm(v) - 1.0)


class PhaseRepresentation:
    """R acting on C^N by rho(t) = diag(exp(i w_k t)), an isometry of every l^p norm."""

    def __init__(self, frequencies, p=2.0):
        self.frequencies = np.asarray(frequencies, dtype=float)
        if self.frequencies.ndim != 1 or not np.all(np.isfinite(self.frequencies)):
            raise ConfigError("frequencies must be a finite 1-D array")
        self.p = check_exponent("p", p)

    @property
    def shape(self):
        return self.frequencies.shape

    def norm(self, v):
        return lp_norm(v, self.p)

    def act(self, t, v):
        return v * np.exp(1j * self.frequencies * t)

    def averaged(self, a, v):
        """rho(gamma_a) v for the centered Gaussian of log-scale a."""
        return v * np.exp(-0.5 * (self.frequencies * math.exp(a)) ** 2)


def make_action(kind, **kwargs):
    """Build a testbed by name: 'perm-h3', 'perm-h', 'schrodinger' or 'sl3-grid'."""
    if kind == "perm-h3":
        return PermutationAction("h3", **kwargs)
    if kind == "perm-h":
        return PermutationAction("h", **kwargs)
    if kind == "schrodinger":
        return SchrodingerAction(**kwargs)
    if kind == "sl3-grid":
        return GeometricSL3Action(**kwargs)
    raise ConfigError(f"unknown testbed {kind!r}")
