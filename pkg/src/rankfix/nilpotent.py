"""Heisenberg group H3 and the 3-step group H inside Sp4.

H3 coordinates (x, y, z) stand for the unipotent matrix I + x E12 + y E23 + z E13,
so (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy').

H elements are stored in the normal form Y(y) W(w) Z(z) X(x).  The product
below was derived once from the 4x4 realization (window 1 of the C2 root
system: Y, W, Z, X -> roots 2b, a+b, 2a, a-b) and is regression-tested against
it.  All laws are integer polynomials, so the ``*_law`` helpers also work on
integer arrays modulo N.
"""

from dataclasses import dataclass

import numpy as np


def h3_law(g, h, modulus=None):
    x, y, z = g
    u, v, w = h
    out = (x + u, y + v, z + w + x * v)
    return _reduce(out, modulus)


def h3_inverse_law(g, modulus=None):
    x, y, z = g
    return _reduce((-x, -y, x * y - z), modulus)


def h_law(g, h, modulus=None):
    x, y, w, z = g
    x2, y2, w2, z2 = h
    out = (x + x2, y + y2, w + w2 + x * y2, z + z2 + 2 * w2 * x + x * x * y2)
    return _reduce(out, modulus)


def h_inverse_law(g, modulus=None):
    x, y, w, z = g
    return _reduce((-x, -y, x * y - w, 2 * w * x - x * x * y - z), modulus)


def _reduce(coords, modulus):
    if modulus is None:
        return coords
    return tuple(c % modulus for c in coords)


@dataclass(frozen=True)
class H3Element:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    group = "h3"

    @property
    def coords(self):
        return (self.x, self.y, self.z)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def X(cls, t):
        return cls(t, 0.0, 0.0)

    @classmethod
    def Y(cls, t):
        return cls(0.0, t, 0.0)

    @classmethod
    def Z(cls, t):
        return cls(0.0, 0.0, t)

    def __mul__(self, other):
        return multiply(self, other)


@dataclass(frozen=True)
class HElement:
    x: float = 0.0
    y: float = 0.0
    w: float = 0.0
    z: float = 0.0

    group = "h"

    @property
    def coords(self):
        return (self.x, self.y, self.w, self.z)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def X(cls, t):
        return cls(x=t)

    @classmethod
    def Y(cls, t):
        return cls(y=t)

    @classmethod
    def W(cls, t):
        return cls(w=t)

    @classmethod
    def Z(cls, t):
        return cls(z=t)

    def __mul__(self, other):
        return multiply(self, other)


_LAWS = {
    H3Element: (h3_law, h3_inverse_law),
    HElement: (h_law, h_inverse_law),
}


def multiply(g, h):
    if type(g) is not type(h):
        raise TypeError(f"cannot multiply {type(g).__name__} by {type(h).__name__}")
    law, _ = _LAWS[type(g)]
    return type(g)(*law(g.coords, h.coords))


def inverse(g):
    _, inv = _LAWS[type(g)]
    return type(g)(*inv(g.coords))


def commutator(g, h):
    """[g, h] = g^-1 h^-1 g h."""
    return multiply(multiply(inverse(g), inverse(h)), multiply(g, h))


def embed_h3_in_h(g):
    """X(t) -> X(t), Y(s) -> W(s), Z(r) -> Z(2r)."""
    # (x, y, z) = Y(y) Z(z) X(x) in H3
    x, y, z = g.coords
    return multiply(multiply(HElement.W(y), HElement.Z(2 * z)), HElement.X(x))


def to_matrix(g):
    """Faithful matrix: 3x3 unipotent for H3, 4x4 symplectic for H."""
    if isinstance(g, H3Element):
        return np.array([[1.0, g.x, g.z], [0.0, 1.0, g.y], [0.0, 0.0, 1.0]])
    if isinstance(g, HElement):
        from .rootsys import root_generator_sp4

        # normal form Y W Z X sits on roots 1, 2, 3, 4
        m = root_generator_sp4(1, g.y) @ root_generator_sp4(2, g.w)
        m = m @ root_generator_sp4(3, g.z)
        return m @ root_generator_sp4(4, g.x)
    raise TypeError(f"unsupported element {g!r}")
