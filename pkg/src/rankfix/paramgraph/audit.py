"""Cone certificates and randomized connectivity audits."""

from dataclasses import dataclass, field

import numpy as np

from .._validation import ConfigError, as_rng
from .common import ConeSpec, DifferentComponentError, ParamVertex
from .sl3 import adjacent_g_sl3, adjacent_sl3, path_sl3, validate_path_sl3
from .sp4 import adjacent_g_sp4, adjacent_sp4, path_sp4, validate_path_sp4

GROUPS = {
    6: ("sl3", path_sl3, validate_path_sl3, adjacent_sl3, adjacent_g_sl3),
    8: ("sp4", path_sp4, validate_path_sp4, adjacent_sp4, adjacent_g_sp4),
}


def _group_tools(n):
    if n not in GROUPS:
        raise ConfigError(f"parameter tuples have length 6 or 8, got {n}")
    return GROUPS[n]


def find_path(start, end, target="g_with_flips"):
    start = start if isinstance(start, ParamVertex) else ParamVertex(tuple(start))
    end = end if isinstance(end, ParamVertex) else ParamVertex(tuple(end))
    if len(start.coords) != len(end.coords):
        raise ConfigError("endpoints have different lengths")
    _, builder, *_ = _group_tools(len(start.coords))
    return builder(start, end, target)


def validate_path(path, eps=None):
    _, _, validator, *_ = GROUPS[6 if path.group == "sl3" else 8]
    return validator(path, eps)


def cone_path_certificate(lam, lam2, cone):
    """(eps, k, L) for a side-1 to side-1 path between two cone points.

    Every construction step is a max/min/sum or a product with a fixed
    constant, so scaling both endpoints scales the whole path.
    """
    cone = cone if isinstance(cone, ConeSpec) else ConeSpec(float(cone))
    lam, lam2 = tuple(map(float, lam)), tuple(map(float, lam2))
    if not (cone.contains(lam) and cone.contains(lam2)):
        raise ConfigError(f"endpoints must lie in P_L with L = {cone.L}")
    if not 0.5 <= lam[0] / lam2[0] <= 2.0:
        raise ConfigError("first coordinates must be within a factor 2 of each other")
    path, eps, L = find_path(ParamVertex(lam, 1), ParamVertex(lam2, 1))
    return eps, path.n_edges, L


@dataclass
class AuditReport:
    group: str
    pairs: int = 0
    paths_valid: int = 0
    max_edges: int = 0
    min_epsilon: float = 1.0
    only_if_violations: int = 0
    homothety_failures: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return (
            self.paths_valid == self.pairs
            and self.only_if_violations == 0
            and self.homothety_failures == 0
        )

    def to_json(self):
        return {
            "group": self.group,
            "pairs": self.pairs,
            "paths_valid": self.paths_valid,
            "max_edges": self.max_edges,
            "min_epsilon": self.min_epsilon,
            "only_if_violations": self.only_if_violations,
            "homothety_failures": self.homothety_failures,
            "ok": self.ok,
        }


def _random_tuple(rng, n, low, high):
    return tuple(float(v) for v in np.exp(rng.uniform(np.log(low), np.log(high), n)))


def graph_audit(group, n_pairs=500, n_homothety=100, seed=0, low=0.05, high=20.0):
    """Random same-component pairs must get validated paths.

    Pairs alternate between boundary-matched one-sided pairs (one-sided graph)
    and arbitrary pairs with random sides (two-sided graph).
    """
    n = {"sl3": 6, "sp4": 8}.get(group)
    if n is None:
        raise ConfigError(f"unknown group {group!r}")
    _, builder, validator, adjacent0, adjacent_g = _group_tools(n)
    rng = as_rng(seed)
    report = AuditReport(group)
    for idx in range(n_pairs):
        lam = _random_tuple(rng, n, low, high)
        lam2 = _random_tuple(rng, n, low, high)
        if idx % 2 == 0:
            side = int(rng.integers(1, 3))
            lam2 = (lam[0],) + lam2[1:-1] + (lam[-1],)
            start, end, target = ParamVertex(lam, side), ParamVertex(lam2, side), "g0"
        else:
            start = ParamVertex(lam, int(rng.integers(1, 3)))
            end = ParamVertex(lam2, int(rng.integers(1, 3)))
            target = "g_with_flips"
        report.pairs += 1
        try:
            path, eps, _ = builder(start, end, target)
        except DifferentComponentError as exc:
            report.failures.append(str(exc))
            continue
        ends_ok = path.vertices[0] == start and path.vertices[-1] == end
        eps_ok = eps is None or validator(path, eps)
        if ends_ok and validator(path) and eps_ok:
            report.paths_valid += 1
            report.max_edges = max(report.max_edges, path.n_edges)
            if eps is not None:
                report.min_epsilon = min(report.min_epsilon, eps)
        else:
            report.failures.append(f"invalid path between {start} and {end}")
        if target == "g0":
            for v in path.vertices:
                if v.coords[0] != lam[0] or v.coords[-1] != lam[-1]:
                    report.only_if_violations += 1
        # the only-if direction: mismatched boundaries must be refused
        bad_end = ParamVertex((lam2[0] * 1.5,) + lam2[1:], start.side)
        try:
            builder(start, bad_end, "g0")
            report.only_if_violations += 1
        except DifferentComponentError:
            pass
    for _ in range(n_homothety):
        lam = _random_tuple(rng, n, low, high)
        k = int(rng.integers(1, n - 1))
        lam2 = lam[:k] + (float(lam[k] * rng.uniform(0.3, 1.7)),) + lam[k + 1:]
        theta = float(np.exp(rng.uniform(-3, 3)))
        for eps in (0.0, 0.1):
            a = adjacent0(lam, lam2, eps)
            b = adjacent0(tuple(theta * v for v in lam), tuple(theta * v for v in lam2), eps)
            if a != b:
                report.homothety_failures += 1
    return report
