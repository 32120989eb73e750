"""Root groups of SL3 (type A2) and Sp4 (type C2).

SL3 root groups are the elementary matrices X_ij(t) = I + t E_ij.  Sp4 roots
are indexed by Z/8Z going clockwise: 2b, a+b, 2a, a-b and then their
negatives, with generator of -phi equal to minus the transpose of that of phi.

Each window of consecutive letters in the six- and eight-letter words is the
image of a Heisenberg-type word under a homomorphism.  Window assignments are
kept in JSON files under ``data/`` and re-derived by brute force in the tests.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import itertools
import json
import math
from importlib import resources

import numpy as np

from ._validation import ConfigError, as_rng
from .nilpotent import H3Element, HElement, multiply

J4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])

SL3_MU_LABELS = ((1, 2), (1, 3), (2, 3), (2, 1), (3, 1), (3, 2))
SL3_MU_TILDE_LABELS = ((2, 3), (1, 3), (1, 2), (3, 2), (3, 1), (2, 1))
SP4_MU_LABELS = (1, 2, 3, 4, 5, 6, 7, 8)
SP4_MU_TILDE_LABELS = (4, 3, 2, 1, 8, 7, 6, 5)

# Cartan coordinates (a, b) of the positive C2 roots in the order 1..4
_SP4_POSITIVE_ROOTS = ((0, 2), (1, 1), (2, 0), (1, -1))


def _unit(i, j, n):
    m = np.zeros((n, n))
    m[i - 1, j - 1] = 1.0
    return m


def _sp4_positive_generators():
    e = lambda i, j: _unit(i, j, 4)
    return (e(2, 4), e(1, 4) + e(2, 3), e(1, 3), e(1, 2) - e(4, 3))


def sp4_index(k):
    """Normalize a Z/8Z label to 1..8."""
    if int(k) != k:
        raise ConfigError(f"root index must be an integer, got {k!r}")
    return (int(k) - 1) % 8 + 1


def sl3_root_matrix(i, j):
    if not (1 <= i <= 3 and 1 <= j <= 3):
        raise ConfigError(f"SL3 indices must be in 1..3, got ({i}, {j})")
    if i == j:
        raise ConfigError("elementary matrix needs i != j")
    return _unit(i, j, 3)


def sp4_root_matrix(k):
    k = sp4_index(k)
    pos = _sp4_positive_generators()
    return pos[k - 1].copy() if k <= 4 else -pos[k - 5].T


def sp4_root_weight(k):
    """Root as (alpha, beta) coefficients; evaluates on D(a, b) as alpha*a + beta*b."""
    k = sp4_index(k)
    a, b = _SP4_POSITIVE_ROOTS[(k - 1) % 4]
    return (a, b) if k <= 4 else (-a, -b)


def elementary_sl3(i, j, t):
    return np.eye(3) + t * sl3_root_matrix(i, j)


def root_generator_sp4(k, t):
    return np.eye(4) + t * sp4_root_matrix(k)


def is_symplectic(g, tol=1e-12):
    g = np.asarray(g, dtype=float)
    scale = max(1.0, float(np.abs(g).max()) ** 2)
    return float(np.abs(g.T @ J4 @ g - J4).max()) <= tol * scale


def root_element(group, label, t):
    if group == "sl3":
        return elementary_sl3(label[0], label[1], t)
    if group == "sp4":
        return root_generator_sp4(label, t)
    raise ConfigError(f"unknown group {group!r}")


def matrix_commutator(g, h):
    return np.linalg.inv(g) @ np.linalg.inv(h) @ g @ h


@dataclass(frozen=True)
class GroupHomomorphismWitness:
    """Assignment of source one-parameter subgroups to signed target root groups.

    ``assignment`` maps a source letter (X, Y, Z and, for H, W) to a pair
    (root label, sign).  ``word_form`` says whether the window reads as the
    image of nu or of nu-tilde.
    """

    source: str
    target: str
    window: int
    letters: tuple
    assignment: dict = field(hash=False)
    word_form: str = "nu"

    def letter(self, name, t):
        label, sign = self.assignment[name]
        return root_element(self.target, label, sign * t)

    def image(self, g):
        if self.source == "h3":
            if not isinstance(g, H3Element):
                raise TypeError("witness expects an H3Element")
            # (x, y, z) = Y(y) Z(z) X(x)
            return self.letter("Y", g.y) @ self.letter("Z", g.z) @ self.letter("X", g.x)
        if not isinstance(g, HElement):
            raise TypeError("witness expects an HElement")
        return self.letter("Y", g.y) @ self.letter("W", g.w) @ self.letter("Z", g.z) @ self.letter("X", g.x)

    def homomorphism_residual(self, n_pairs=100, seed=0, scale=2.0):
        """Max relative error of psi(gh) - psi(g) psi(h) over random pairs."""
        rng = as_rng(seed)
        cls = H3Element if self.source == "h3" else HElement
        dim = 3 if self.source == "h3" else 4
        worst = 0.0
        for _ in range(n_pairs):
            g = cls(*rng.uniform(-scale, scale, dim))
            h = cls(*rng.uniform(-scale, scale, dim))
            lhs = self.image(multiply(g, h))
            rhs = self.image(g) @ self.image(h)
            worst = max(worst, float(np.abs(lhs - rhs).max() / max(1.0, np.abs(rhs).max())))
        return worst

    def relation_residual(self, n_pairs=100, seed=0, scale=2.0):
        """Defining relations of the source group checked inside the target."""
        rng = as_rng(seed)
        worst = 0.0
        for _ in range(n_pairs):
            u, r = rng.uniform(-scale, scale, 2)
            X, Y, Z = (lambda t, n=n: self.letter(n, t) for n in "XYZ")
            checks = []
            if self.source == "h3":
                checks.append((matrix_commutator(X(u), Y(r)), Z(u * r)))
                checks.append((Z(r) @ X(u), X(u) @ Z(r)))
                checks.append((Z(r) @ Y(u), Y(u) @ Z(r)))
            else:
                W = lambda t: self.letter("W", t)
                checks.append((matrix_commutator(X(u), Y(r)), Z(-u * u * r) @ W(u * r)))
                checks.append((matrix_commutator(X(u), W(r)), Z(2 * u * r)))
                checks.append((Y(r) @ W(u), W(u) @ Y(r)))
                for other in (X(u), Y(u), W(u)):
                    checks.append((Z(r) @ other, other @ Z(r)))
            for a, b in checks:
                worst = max(worst, float(np.abs(a - b).max() / max(1.0, np.abs(b).max())))
        return worst

    def to_json(self):
        return {
            "source": self.source,
            "target": self.target,
            "window": self.window,
            "letters": [list(l) if isinstance(l, tuple) else l for l in self.letters],
            "word_form": self.word_form,
            "assignment": {
                k: {"label": list(v[0]) if isinstance(v[0], tuple) else v[0], "sign": v[1]}
                for k, v in sorted(self.assignment.items())
            },
        }


def sl3_windows():
    """The 8 three-letter windows: 4 from the mu word, then 4 from mu-tilde."""
    out = []
    for labels in (SL3_MU_LABELS, SL3_MU_TILDE_LABELS):
        for start in range(4):
            out.append(labels[start:start + 3])
    return out


def _sl3_relations_hold(letters, signs, tol=1e-12, trials=8):
    rng = np.random.default_rng(1234)
    (lx, lz, ly), (sx, sy, sz) = letters, signs
    for _ in range(trials):
        u, r = rng.uniform(-2, 2, 2)
        X = elementary_sl3(*lx, sx * u)
        Y = elementary_sl3(*ly, sy * r)
        Zc = elementary_sl3(*lz, sz * u * r)
        if np.abs(matrix_commutator(X, Y) - Zc).max() > tol:
            return False
        Zr = elementary_sl3(*lz, r)
        if np.abs(Zr @ X - X @ Zr).max() > tol or np.abs(Zr @ Y - Y @ Zr).max() > tol:
            return False
    return True


def solve_sl3_window_signs(letters):
    """Brute force over sign choices; letters are read as X, Z, Y.

    Returns the valid (sign_X, sign_Y, sign_Z) triples, preferring those
    that keep X and Y unsigned.
    """
    valid = [s for s in itertools.product((1, -1), repeat=3) if _sl3_relations_hold(letters, s)]
    return sorted(valid, key=lambda s: (s[0] < 0) + (s[1] < 0), reverse=False)


def sp4_window_assignment(i):
    """The odd / even assignment for the window starting at root i."""
    i = sp4_index(i)
    k = lambda j: sp4_index(i + j)
    if i % 2 == 1:
        return {"X": (k(3), 1), "Y": (k(0), 1), "W": (k(1), 1), "Z": (k(2), 1)}, "nu"
    return {"X": (k(0), 1), "Y": (k(3), 1), "W": (k(2), -1), "Z": (k(1), 1)}, "nu_tilde"


@lru_cache(maxsize=None)
def _golden(name):
    text = resources.files("rankfix.data").joinpath(name).read_text()
    return json.loads(text)


def key_homomorphism_sl3(window):
    """Witness for window 0..7 (0..3 from mu, 4..7 from mu-tilde)."""
    if int(window) != window or not 0 <= window < 8:
        raise ConfigError(f"SL3 window must be in 0..7, got {window!r}")
    entry = _golden("sl3_windows.json")["windows"][int(window)]
    assignment = {k: (tuple(v["label"]), v["sign"]) for k, v in entry["assignment"].items()}
    letters = tuple(tuple(l) for l in entry["letters"])
    return GroupHomomorphismWitness("h3", "sl3", int(window), letters, assignment, entry["word_form"])


def key_homomorphism_sp4(i):
    i = sp4_index(i)
    entry = _golden("sp4_windows.json")["windows"][i - 1]
    assignment = {k: (v["label"], v["sign"]) for k, v in entry["assignment"].items()}
    return GroupHomomorphismWitness("h", "sp4", i, tuple(entry["letters"]), assignment, entry["word_form"])


def build_golden_tables():
    """Recompute the window tables (used to write and to re-check the JSON files)."""
    sl3 = []
    for idx, letters in enumerate(sl3_windows()):
        signs = solve_sl3_window_signs(letters)
        if not signs:
            raise RuntimeError(f"no sign assignment for window {letters}")
        sx, sy, sz = signs[0]
        assignment = {"X": (letters[0], sx), "Z": (letters[1], sz), "Y": (letters[2], sy)}
        sl3.append(GroupHomomorphismWitness("h3", "sl3", idx, letters, assignment, "nu").to_json())
    sp4 = []
    for i in range(1, 9):
        assignment, form = sp4_window_assignment(i)
        letters = tuple(sp4_index(i + j) for j in range(4))
        sp4.append(GroupHomomorphismWitness("h", "sp4", i, letters, assignment, form).to_json())
    return {"group": "sl3", "windows": sl3}, {"group": "sp4", "windows": sp4}


def expm_nilpotent(m):
    """exp of a nilpotent matrix by its terminating power series."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, n + 1):
        term = term @ m / k
        if not np.any(term):
            break
        out = out + term
    return out


def distortion_direction(group, label):
    """Diagonal Y with [Y, X] = X for the root generator X.

    For SL3 and X = E_ij take Y = E_ii - I/3.  For Sp4 take the smallest D(a, b)
    on which the root evaluates to 1.
    """
    if group == "sl3":
        i, _ = label
        sl3_root_matrix(*label)
        return _unit(i, i, 3) - np.eye(3) / 3.0
    if group == "sp4":
        alpha, beta = sp4_root_weight(label)
        norm2 = alpha * alpha + beta * beta
        a, b = alpha / norm2, beta / norm2
        return np.diag([a, b, -a, -b])
    raise ConfigError(f"unknown group {group!r}")


def root_matrix(group, label):
    return sl3_root_matrix(*label) if group == "sl3" else sp4_root_matrix(label)


def distortion_witness(group, label, t):
    """Return (s, Y, residual) with exp(sY) exp(X) exp(-sY) = exp(t X), s = log t."""
    t = float(t)
    if not t >= 1.0:
        raise ConfigError(f"distortion witness needs t >= 1, got {t}")
    X = root_matrix(group, label)
    Y = distortion_direction(group, label)
    s = math.log(t)
    conj = np.diag(np.exp(s * np.diag(Y)))
    conj_inv = np.diag(np.exp(-s * np.diag(Y)))
    lhs = conj @ expm_nilpotent(X) @ conj_inv
    rhs = expm_nilpotent(math.exp(s) * X)
    residual = float(np.abs(lhs - rhs).max() / np.abs(rhs).max())
    return s, Y, residual
