"""Vertices, paths and path statistics shared by the SL3 and Sp4 graphs."""

from dataclasses import dataclass, field
import json
import math

from .._validation import ConfigError


class DifferentComponentError(ValueError):
    """The two vertices cannot be joined in the requested graph."""


@dataclass(frozen=True)
class ParamVertex:
    coords: tuple
    side: int = 1

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        if len(coords) not in (6, 8):
            raise ConfigError(f"vertex needs 6 or 8 coordinates, got {len(coords)}")
        if not all(c > 0 and math.isfinite(c) for c in coords):
            raise ConfigError(f"vertex coordinates must be positive and finite: {coords}")
        if self.side not in (1, 2):
            raise ConfigError(f"side must be 1 or 2, got {self.side!r}")
        object.__setattr__(self, "coords", coords)

    def scaled(self, theta):
        return ParamVertex(tuple(theta * c for c in self.coords), self.side)


def as_vertex(obj, side=1):
    if isinstance(obj, ParamVertex):
        return obj
    return ParamVertex(tuple(obj), side)


@dataclass(frozen=True)
class ConeSpec:
    L: float

    def __post_init__(self):
        if not self.L > 1:
            raise ConfigError(f"cone ratio bound must exceed 1, got {self.L}")

    def contains(self, coords):
        coords = coords.coords if isinstance(coords, ParamVertex) else coords
        return max(coords) <= self.L * min(coords)


def ratio_bound(coords):
    return max(coords) / min(coords)


@dataclass
class ParamPath:
    group: str
    vertices: list
    rules: list = field(default_factory=list)
    slacks: list = field(default_factory=list)

    @property
    def n_edges(self):
        return len(self.vertices) - 1

    @property
    def epsilon_margin(self):
        """Largest eps keeping every edge in the eps-graph (None for an empty path)."""
        return min(self.slacks) if self.slacks else None

    @property
    def L_bound(self):
        return max(ratio_bound(v.coords) for v in self.vertices)

    def to_json(self):
        return {
            "group": self.group,
            "vertices": [{"coords": list(v.coords), "side": v.side} for v in self.vertices],
            "rules": list(self.rules),
            "epsilon_margin": self.epsilon_margin,
            "L_bound": self.L_bound,
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


class PathBuilder:
    """Accumulates a vertex walk, dropping moves that change nothing."""

    def __init__(self, group, start):
        self.path = ParamPath(group, [start])

    @property
    def current(self):
        return self.path.vertices[-1]

    def step(self, vertex, rule, slack):
        if vertex == self.current:
            return
        self.path.vertices.append(vertex)
        self.path.rules.append(rule)
        self.path.slacks.append(slack)

    def extend(self, other):
        if other.vertices[0] != self.current:
            raise AssertionError("paths do not join")
        self.path.vertices.extend(other.vertices[1:])
        self.path.rules.extend(other.rules)
        self.path.slacks.extend(other.slacks)


def reverse_path(path):
    return ParamPath(path.group, path.vertices[::-1], path.rules[::-1], path.slacks[::-1])


def set_coord(coords, index, value):
    out = list(coords)
    out[index] = value
    return tuple(out)
