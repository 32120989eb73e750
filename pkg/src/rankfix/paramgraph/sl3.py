"""Parameter graphs for the six-letter SL3 words.

Coordinate k (2..5, one-based) may move while the others stay fixed, provided
both old and new values stay below the sum of the two neighbours.  A flip edge
joins side 1 and side 2 when the two outer triples are "peaked".
"""

from .common import (
    DifferentComponentError,
    ParamPath,
    ParamVertex,
    PathBuilder,
    as_vertex,
    reverse_path,
    set_coord,
)

SHRINK = 1.0 - 1e-12
LADDER_STEP = 0.5


def _below(value, bound, eps):
    return value < bound if eps == 0 else value <= (1.0 - eps) * bound


def edge_slack(value, bound):
    """Largest eps with value <= (1 - eps) * bound, rounded down a hair."""
    return (bound - value) / bound * SHRINK


def coordinate_edge(lam, lam2):
    """Index (0-based) of the single changed interior coordinate, else None."""
    diff = [k for k in range(6) if lam[k] != lam2[k]]
    if len(diff) != 1 or not 1 <= diff[0] <= 4:
        return None
    return diff[0]


def adjacent_sl3(lam, lam2, eps=0.0):
    lam, lam2 = tuple(lam), tuple(lam2)
    k = coordinate_edge(lam, lam2)
    if k is None:
        return False
    return _below(max(lam[k], lam2[k]), lam[k - 1] + lam[k + 1], eps)


def flip_image_sl3(lam):
    a1, a2, a3, a4, a5, a6 = lam
    return (a3, a2, a1, a6, a5, a4)


def flip_conditions_sl3(lam, eps=0.0):
    a1, a2, a3, a4, a5, a6 = lam
    return _below(a1 + a3, a2, eps) and _below(a4 + a6, a5, eps)


def adjacent_flip_sl3(v1, v2, eps=0.0):
    v1, v2 = as_vertex(v1, 1), as_vertex(v2, 2)
    if v1.side == v2.side:
        return False
    return flip_image_sl3(v1.coords) == v2.coords and flip_conditions_sl3(v1.coords, eps)


def adjacent_g_sl3(v1, v2, eps=0.0):
    """Adjacency in the two-sided graph."""
    if v1.side == v2.side:
        return adjacent_sl3(v1.coords, v2.coords, eps)
    return adjacent_flip_sl3(v1, v2, eps)


def _coordinate_slack(lam, lam2):
    k = coordinate_edge(lam, lam2)
    return edge_slack(max(lam[k], lam2[k]), lam[k - 1] + lam[k + 1])


def _flip_slack(lam):
    a1, a2, a3, a4, a5, a6 = lam
    return min(edge_slack(a1 + a3, a2), edge_slack(a4 + a6, a5))


def _move(builder, k, value):
    cur = builder.current
    new = ParamVertex(set_coord(cur.coords, k, value), cur.side)
    if new != cur:
        builder.step(new, f"g0:a{k + 1}", _coordinate_slack(cur.coords, new.coords))


def _spread(builder, value, origin):
    """Copy ``value`` from position ``origin`` outwards over positions 2..5."""
    for k in range(origin - 1, 0, -1):
        _move(builder, k, value)
    for k in range(max(origin + 1, 1), 5):
        _move(builder, k, value)


def plateau_path(vertex):
    """Walk to a1 m m m m a6 with m the largest coordinate."""
    vertex = as_vertex(vertex)
    lam = vertex.coords
    m = max(lam)
    builder = PathBuilder("sl3", vertex)
    _spread(builder, m, lam.index(m))
    return builder.path


def ladder_path(vertex, target):
    """From a plateau a1 m m m m a6 up to a1 T T T T a6 with T >= m."""
    vertex = as_vertex(vertex)
    a1, m, *_, a6 = vertex.coords
    builder = PathBuilder("sl3", vertex)
    side_pos, boundary = (4, a6) if a6 >= a1 else (1, a1)
    while m < target:
        nxt = min(target, m + LADDER_STEP * boundary)
        _move(builder, side_pos, nxt)
        _spread(builder, nxt, side_pos)
        m = nxt
    return builder.path


def g0_path(start, end):
    start, end = as_vertex(start), as_vertex(end)
    if start.side != end.side:
        raise DifferentComponentError("g0 paths stay on one side")
    s, e = start.coords, end.coords
    if s[0] != e[0] or s[5] != e[5]:
        raise DifferentComponentError(
            f"different component: boundary coordinates ({s[0]}, {s[5]}) vs ({e[0]}, {e[5]})"
        )
    builder = PathBuilder("sl3", start)
    if start == end:
        return builder.path
    up = plateau_path(start)
    down = plateau_path(end)
    m1, m2 = up.vertices[-1].coords[1], down.vertices[-1].coords[1]
    builder.extend(up)
    if m1 <= m2:
        builder.extend(ladder_path(builder.current, m2))
        builder.extend(reverse_path(down))
    else:
        builder.extend(reverse_path(ladder_path(down.vertices[-1], m1)))
        builder.extend(reverse_path(down))
    return builder.path


def bridge_vertex_sl3(lam, lam2):
    """Side-1 vertex whose flip image shares boundary coordinates with lam2."""
    a1, a6 = lam[0], lam[5]
    b1, b6 = lam2[0], lam2[5]
    return (a1, 2 * a1 + 2 * b1, b1, b6, 2 * a6 + 2 * b6, a6)


def _cross_path(start, end):
    bridge = bridge_vertex_sl3(start.coords, end.coords)
    builder = PathBuilder("sl3", start)
    builder.extend(g0_path(start, ParamVertex(bridge, start.side)))
    image = ParamVertex(flip_image_sl3(bridge), end.side)
    builder.step(image, "flip", _flip_slack(bridge))
    builder.extend(g0_path(image, end))
    return builder.path


def path_sl3(start, end, target="g_with_flips"):
    """Constructive path; returns (path, eps_margin, L_bound)."""
    start, end = as_vertex(start), as_vertex(end)
    if target == "g0":
        path = g0_path(start, end)
    elif target == "g_with_flips":
        s, e = start.coords, end.coords
        if start.side == end.side and s[0] == e[0] and s[5] == e[5]:
            path = g0_path(start, end)
        elif start.side != end.side:
            path = _cross_path(start, end)
        else:
            other = ParamVertex(end.coords, 3 - end.side)
            path = _cross_path(start, other)
            back = _cross_path(other, end)
            builder = PathBuilder("sl3", start)
            builder.extend(path)
            builder.extend(back)
            path = builder.path
    else:
        raise ValueError(f"unknown target graph {target!r}")
    return path, path.epsilon_margin, path.L_bound


def validate_path_sl3(path, eps=None):
    """Every consecutive pair must be adjacent (in the eps-graph if eps given)."""
    eps = 0.0 if eps is None else eps
    for u, v in zip(path.vertices[:-1], path.vertices[1:]):
        if not adjacent_g_sl3(u, v, eps):
            return False
    return True
