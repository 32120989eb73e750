"""Parameter graphs for the eight-letter Sp4 words.

A window is four consecutive coordinates starting at position i (1..5).  Odd
windows are read as abcd, even windows backwards as dcba; in both cases the
two inner letters b, c move under the four-letter rules

    b-edge: max(b, b') < min(a + d, (a + c) / 2)
    c-edge: max(c, c') < b + d

Side-2 vertices use the same rules on the reversed 8-tuple.  Paths follow the
zigzag construction in the coordinates x = a + d - b, y = a + 2d - c, where a
b-edge is a horizontal move with min(x, x') > y/2 and a c-edge a vertical move
with min(y, y') > x.
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
from .sl3 import _below, edge_slack

# canonical ray y = KAPPA * x inside the cone y/2 < x < y
KAPPA = 12.0 / 11.0
UP_FACTOR = 1.8
DOWN_FACTOR = 0.6


def window_letters(lam, i):
    """(a, b, c, d) of window i together with the 0-based positions of b and c."""
    w = lam[i - 1:i + 3]
    if i % 2 == 1:
        return (w[0], w[1], w[2], w[3]), (i, i + 1)
    return (w[3], w[2], w[1], w[0]), (i + 1, i)


def four_letter_adjacent(abcd, abcd2, eps=0.0):
    a, b, c, d = abcd
    a2, b2, c2, d2 = abcd2
    if (a, d) != (a2, d2):
        return False
    if c == c2 and b != b2:
        return _below(max(b, b2), min(a + d, (a + c) / 2), eps)
    if b == b2 and c != c2:
        return _below(max(c, c2), b + d, eps)
    return False


def four_letter_slack(abcd, abcd2):
    a, b, c, d = abcd
    _, b2, c2, _ = abcd2
    if c == c2:
        return edge_slack(max(b, b2), min(a + d, (a + c) / 2))
    return edge_slack(max(c, c2), b + d)


def g0_edge_windows(lam, lam2):
    """Windows in which lam -> lam2 is a legal G0 edge."""
    diff = [k for k in range(8) if lam[k] != lam2[k]]
    if len(diff) != 1:
        return []
    k = diff[0] + 1
    out = []
    for i in (k - 2, k - 1):
        if 1 <= i <= 5:
            out.append(i)
    return out


def adjacent_sp4(lam, lam2, eps=0.0):
    """Adjacency in the one-sided eight-coordinate graph."""
    lam, lam2 = tuple(lam), tuple(lam2)
    for i in g0_edge_windows(lam, lam2):
        if four_letter_adjacent(window_letters(lam, i)[0], window_letters(lam2, i)[0], eps):
            return True
    return False


def check(lam):
    return tuple(reversed(lam))


def flip_image_sp4(lam):
    a1, a2, a3, a4, a5, a6, a7, a8 = lam
    return (a4, a3, a2, a1, a8, a7, a6, a5)


def _flip_terms(lam):
    a1, a2, a3, a4, a5, a6, a7, a8 = lam
    return ((a1 + a4, a2), (a2 + a4, a3), (a5 + a8, a6), (a6 + a8, a7))


def flip_conditions_sp4(lam, eps=0.0):
    return all(_below(lhs, rhs, eps) for lhs, rhs in _flip_terms(lam))


def _flip_slack(lam):
    return min(edge_slack(lhs, rhs) for lhs, rhs in _flip_terms(lam))


def adjacent_g_sp4(v1, v2, eps=0.0):
    v1, v2 = as_vertex(v1), as_vertex(v2)
    if v1.side == v2.side == 1:
        return adjacent_sp4(v1.coords, v2.coords, eps)
    if v1.side == v2.side == 2:
        return adjacent_sp4(check(v1.coords), check(v2.coords), eps)
    if v1.side == 2:
        v1, v2 = v2, v1
    return flip_image_sp4(v1.coords) == v2.coords and flip_conditions_sp4(v1.coords, eps)


# zigzag in (x, y) coordinates


def _to_xy(a, b, c, d):
    return a + d - b, a + 2 * d - c


def _enter_cone(x, y):
    """Moves taking (x, y) onto the canonical ray; returns the visited points."""
    pts = []
    if y <= x:
        x = 0.75 * y
        pts.append((x, y))
    elif y >= 2 * x:
        y = 1.5 * x
        pts.append((x, y))
    x2 = min(x, y / KAPPA)
    if x2 != x:
        pts.append((x2, y))
    y2 = KAPPA * x2
    if y2 != y:
        pts.append((x2, y2))
    return pts


def _ray_walk(x0, x1):
    """Staircase along the ray; up-steps go vertical first, down-steps horizontal first."""
    pts = []
    x = x0
    while x != x1:
        if x1 > x:
            nxt = min(x1, UP_FACTOR * x)
            pts.append((x, KAPPA * nxt))
        else:
            nxt = max(x1, DOWN_FACTOR * x)
            pts.append((nxt, KAPPA * x))
        pts.append((nxt, KAPPA * nxt))
        x = nxt
    return pts


def zigzag_points(a, b, c, d, b2, c2):
    """Interior letter pairs visited when moving abcd to a b2 c2 d."""
    if not (max(b, b2) < a + d and max(c, c2) < a + 2 * d):
        raise DifferentComponentError("zigzag needs max(b, b') < a + d and max(c, c') < a + 2d")
    start, end = _to_xy(a, b, c, d), _to_xy(a, b2, c2, d)
    if start == end:
        return []
    head = _enter_cone(*start)
    tail = _enter_cone(*end)
    x0 = (head[-1] if head else start)[0]
    x1 = (tail[-1] if tail else end)[0]
    pts = head + _ray_walk(x0, x1) + tail[::-1][1:] + [end]
    # convert back letter by letter so the untouched letter is carried exactly
    b_of = {start[0]: b, end[0]: b2}
    c_of = {start[1]: c, end[1]: c2}
    out = []
    px, py = start
    cb, cc = b, c
    for x, y in pts:
        if x != px and y != py:
            raise AssertionError("zigzag step moved both letters")
        if x != px:
            cb = b_of.get(x, a + d - x)
        if y != py:
            cc = c_of.get(y, a + 2 * d - y)
        out.append((cb, cc))
        px, py = x, y
    return out


def _apply_window(builder, i, new_b, new_c):
    """Zigzag inside window i of the current (one-sided, side-1 coordinates) walk."""
    cur = builder.current
    (a, b, c, d), (pb, pc) = window_letters(cur.coords, i)
    for bb, cc in zigzag_points(a, b, c, d, new_b, new_c):
        prev = builder.current.coords
        new = set_coord(set_coord(prev, pb, bb), pc, cc)
        if new == prev:
            continue
        slack = four_letter_slack(window_letters(prev, i)[0], window_letters(new, i)[0])
        builder.step(ParamVertex(new, cur.side), f"g0:w{i}:{'b' if new[pb] != prev[pb] else 'c'}", slack)


def plateau_path_sp4(lam):
    """Spread the largest coordinate m over positions 2..7 by windowed zigzags."""
    lam = tuple(lam)
    m = max(lam)
    builder = PathBuilder("sp4", ParamVertex(lam, 1))
    while True:
        cur = builder.current.coords
        if all(v == m for v in cur[1:7]):
            return builder.path
        for i in range(1, 6):
            w = cur[i - 1:i + 3]
            if (w[0] == m or w[3] == m) and not (w[1] == m and w[2] == m):
                _apply_window(builder, i, m, m)
                break
        else:
            raise AssertionError("plateau propagation stalled")


def ladder_path_sp4(lam, target):
    """From a1 m..m a8 up to a1 T..T a8 using window 1 and re-spreading."""
    builder = PathBuilder("sp4", ParamVertex(tuple(lam), 1))
    a1 = lam[0]
    m = lam[1]
    while m < target:
        nxt = min(target, 1.5 * m + 0.5 * a1)
        # window 1 is abcd = a1 m m m; raise c to nxt
        _apply_window(builder, 1, m, nxt)
        builder.extend(_relabel(plateau_path_sp4(builder.current.coords), 1))
        m = nxt
    return builder.path


def _relabel(path, side):
    verts = [ParamVertex(v.coords, side) for v in path.vertices]
    return ParamPath(path.group, verts, list(path.rules), list(path.slacks))


def _flip_sides(path):
    """A side-1 path in reversed coordinates becomes a side-2 path."""
    verts = [ParamVertex(check(v.coords), 2) for v in path.vertices]
    return ParamPath(path.group, verts, list(path.rules), list(path.slacks))


def g0_path_sp4(start, end):
    """Path in the one-sided graph, coordinates taken as given (side 1)."""
    s, e = tuple(start), tuple(end)
    if s[0] != e[0] or s[7] != e[7]:
        raise DifferentComponentError(
            f"different component: boundary coordinates ({s[0]}, {s[7]}) vs ({e[0]}, {e[7]})"
        )
    builder = PathBuilder("sp4", ParamVertex(s, 1))
    if s == e:
        return builder.path
    up = plateau_path_sp4(s)
    down = plateau_path_sp4(e)
    m1, m2 = up.vertices[-1].coords[1], down.vertices[-1].coords[1]
    builder.extend(up)
    if m1 <= m2:
        builder.extend(ladder_path_sp4(builder.current.coords, m2))
    else:
        builder.extend(reverse_path(ladder_path_sp4(down.vertices[-1].coords, m1)))
    builder.extend(reverse_path(down))
    return builder.path


def _same_side_path(start, end):
    if start.side == 1:
        return g0_path_sp4(start.coords, end.coords)
    return _flip_sides(g0_path_sp4(check(start.coords), check(end.coords)))


def bridge_vertex_sp4(lam1, lam2, x=None):
    """Side-1 vertex (a1, 2x, 3x, a1', a8', 2x, 3x, a8) with x above all four ends."""
    a1, a8 = lam1[0], lam1[7]
    b1, b8 = lam2[0], lam2[7]
    if x is None:
        x = 2 * max(a1, a8, b1, b8)
    return (a1, 2 * x, 3 * x, b1, b8, 2 * x, 3 * x, a8)


def _cross_path(start, end):
    """Side-1 start to side-2 end (or the reverse) through one flip edge."""
    if start.side == 2:
        return reverse_path(_cross_path(end, start))
    bridge = bridge_vertex_sp4(start.coords, end.coords)
    builder = PathBuilder("sp4", start)
    builder.extend(_same_side_path(start, ParamVertex(bridge, 1)))
    image = ParamVertex(flip_image_sp4(bridge), 2)
    builder.step(image, "flip", _flip_slack(bridge))
    builder.extend(_same_side_path(image, end))
    return builder.path


def _ends_match(start, end):
    s, e = start.coords, end.coords
    return s[0] == e[0] and s[7] == e[7]


def path_sp4(start, end, target="g_with_flips"):
    """Constructive path; returns (path, eps_margin, L_bound)."""
    start, end = as_vertex(start), as_vertex(end)
    if target == "g0":
        if start.side != end.side:
            raise DifferentComponentError("g0 paths stay on one side")
        path = _same_side_path(start, end)
    elif target != "g_with_flips":
        raise ValueError(f"unknown target graph {target!r}")
    elif start.side == end.side and _ends_match(start, end):
        path = _same_side_path(start, end)
    elif start.side != end.side:
        path = _cross_path(start, end)
    else:
        other = ParamVertex(end.coords, 3 - end.side)
        builder = PathBuilder("sp4", start)
        builder.extend(_cross_path(start, other))
        builder.extend(_cross_path(other, end))
        path = builder.path
    return path, path.epsilon_margin, path.L_bound


def validate_path_sp4(path, eps=None):
    eps = 0.0 if eps is None else eps
    return all(adjacent_g_sp4(u, v, eps) for u, v in zip(path.vertices[:-1], path.vertices[1:]))
