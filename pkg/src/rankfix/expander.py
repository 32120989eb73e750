"""Cayley graphs of small finite groups and their (nonlinear) spectral gaps.

Vertices are group elements found by breadth-first search from the identity;
each is identified by its base-p digit code (row-major entries mod p).  The
edge set is {(v, v s) : s in S} for a symmetric generating set S.

The Poincare ratio of f : V -> (R^k, l_q) is

    R(f) = (1/|V|^2) sum_{v, w} ||f(v) - f(w)||^2
           / ((1/(d |V|)) sum_{v ~ w} ||f(v) - f(w)||^2)

with both sums over ordered pairs.  For q = 2 and k = 1 its supremum is
1 / (1 - lambda_2) for the normalized adjacency, which is the oracle for the
ascent below.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy import linalg, optimize, sparse
from scipy.sparse import linalg as sparse_linalg
from sklearn.base import BaseEstimator

from ._validation import ConfigError, check_count, check_exponent
from .rootsys import elementary_sl3, root_generator_sp4

DENSE_LIMIT = 2000
EIG_TOL = 1e-12
POINCARE_RTOL = 1e-12
PAIR_CHUNK = 256
MAX_ITER = 500
SIGNS = (1, -1)


def _is_prime(p):
    return p >= 2 and all(p % k for k in range(2, int(math.isqrt(p)) + 1))


def sl3_order(p):
    return p**3 * (p**3 - 1) * (p**2 - 1)


def sp4_order(p):
    return p**4 * (p**2 - 1) * (p**4 - 1)


def default_generators(group, p):
    """Elementary +-1 generators mod p, duplicates removed (they coincide at p = 2)."""
    if group == "sl3":
        mats = [elementary_sl3(i, j, s) for i in (1, 2, 3) for j in (1, 2, 3) if i != j for s in SIGNS]
    elif group == "sp4":
        mats = [root_generator_sp4(k, s) for k in range(1, 9) for s in SIGNS]
    else:
        raise ConfigError(f"no default generators for {group!r}")
    out, seen = [], set()
    for m in mats:
        m = np.rint(m).astype(np.int64) % p
        key = m.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(m)
    return out


@dataclass
class CayleyGraph:
    group: str
    p: int
    generators: list
    vertices: np.ndarray
    adjacency: sparse.csr_matrix
    neighbors: np.ndarray = field(repr=False)

    @property
    def order(self):
        return self.adjacency.shape[0]

    @property
    def degree(self):
        return self.neighbors.shape[1]

    def is_connected(self):
        count, _ = sparse.csgraph.connected_components(self.adjacency, directed=False)
        return count == 1

    def edges(self):
        """Undirected edges (u, v) with u < v, sorted."""
        coo = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.stack([coo.row[order], coo.col[order]], axis=1)

    def write_edge_list(self, path):
        with open(path, "w") as fh:
            for u, v in self.edges():
                fh.write(f"{u} {v}\n")


def _from_neighbors(group, p, gens, vertices, nbrs):
    n, d = nbrs.shape
    rows = np.repeat(np.arange(n), d)
    adj = sparse.csr_matrix((np.ones(n * d), (rows, nbrs.ravel())), shape=(n, n))
    if adj.diagonal().any():
        raise ConfigError("generating set contains the identity")
    if (adj != adj.T).nnz or adj.max() > 1:
        raise ConfigError("generating set is not symmetric or has repeats")
    return CayleyGraph(group, p, gens, vertices, adj, nbrs)


def _codes(mats, p):
    flat = mats.reshape(len(mats), -1)
    weights = p ** np.arange(flat.shape[1], dtype=np.int64)
    return flat @ weights


def _matrix_cayley(group, p, gens, expected):
    dim = gens[0].shape[0]
    gens_arr = np.stack(gens)
    frontier = np.eye(dim, dtype=np.int64)[None]
    found = [frontier]
    seen = set(_codes(frontier, p).tolist())
    while len(frontier):
        cand = (frontier[:, None] @ gens_arr[None]) % p
        cand = cand.reshape(-1, dim, dim)
        codes = _codes(cand, p)
        _, first = np.unique(codes, return_index=True)
        first.sort()
        fresh = [k for k in first if codes[k] not in seen]
        seen.update(codes[fresh].tolist())
        frontier = cand[fresh]
        found.append(frontier)
        if len(seen) > expected:
            raise ConfigError(f"generated more than {expected} elements; wrong modulus?")
    vertices = np.concatenate(found)
    codes = _codes(vertices, p)
    order = np.argsort(codes)
    nbr_codes = _codes(((vertices[:, None] @ gens_arr[None]) % p).reshape(-1, dim, dim), p)
    nbrs = order[np.searchsorted(codes, nbr_codes, sorter=order)].reshape(len(vertices), len(gens))
    graph = _from_neighbors(group, p, gens, vertices, nbrs)
    if graph.order != expected:
        raise ConfigError(f"generators reach {graph.order} of {expected} elements (not generating)")
    return graph


def build_cayley(group, p, gens=None):
    """Cayley graph of SL3(F_p), Sp4(F_p) or the cyclic group Z/p.

    For 'cyclic', ``p`` is any modulus >= 3 and ``gens`` are residues
    (default +-1, the cycle).
    """
    p = check_count("p", p, 2)
    if group == "cyclic":
        if p < 3:
            raise ConfigError("cyclic Cayley graphs need at least 3 vertices")
        steps = sorted({int(s) % p for s in (gens if gens is not None else (1, -1))})
        if 0 in steps or sorted({(-s) % p for s in steps}) != steps:
            raise ConfigError("cyclic generators must be nonzero and closed under negation")
        nbrs = (np.arange(p)[:, None] + np.array(steps)[None]) % p
        graph = _from_neighbors(group, p, steps, np.arange(p), nbrs)
        if not graph.is_connected():
            raise ConfigError("cyclic generators do not generate the group")
        return graph
    if not _is_prime(p):
        raise ConfigError(f"p must be prime, got {p}")
    if group == "sl3":
        expected = sl3_order(p)
    elif group == "sp4":
        if p not in (2, 3):
            raise ConfigError("Sp4 graphs are limited to p in {2, 3}")
        expected = sp4_order(p)
    else:
        raise ConfigError(f"unknown group {group!r}")
    gens = default_generators(group, p) if gens is None else [np.rint(g).astype(np.int64) % p for g in gens]
    return _matrix_cayley(group, p, gens, expected)


def spectral_gap(graph, dense_limit=DENSE_LIMIT, tol=EIG_TOL):
    """Second largest eigenvalue of A / d.

    Dense for small graphs; otherwise Lanczos on A/d - 2 J/n, which sends the
    constant vector to -1 and keeps the rest of the spectrum.
    """
    n, d = graph.order, graph.degree
    if not graph.is_connected():
        raise ConfigError("spectral gap needs a connected graph")
    if n <= dense_limit:
        vals = linalg.eigvalsh(graph.adjacency.toarray() / d)
        return float(vals[-2])
    adj = graph.adjacency

    def matvec(v):
        v = np.ravel(v)
        return adj @ v / d - 2.0 * v.mean()

    op = sparse_linalg.LinearOperator((n, n), matvec=matvec, dtype=float)
    v0 = np.random.default_rng(0).standard_normal(n)
    try:
        vals = sparse_linalg.eigsh(op, k=1, which="LA", tol=tol, v0=v0, maxiter=20 * n,
                                   return_eigenvectors=False)
    except sparse_linalg.ArpackNoConvergence as exc:
        raise RuntimeError(f"Lanczos did not converge for {graph.group}({graph.p})") from exc
    return float(vals[0])


def dense_gamma_oracle(graph):
    """1 / (1 - lambda_2) from the full spectrum: the q = 2, k = 1 supremum."""
    vals = linalg.eigh(graph.adjacency.toarray() / graph.degree, eigvals_only=True,
                       subset_by_index=[graph.order - 2, graph.order - 2])
    return 1.0 / (1.0 - float(vals[0]))


# Poincare ratio


def _sq_norm_grad(x, q):
    """||x||_q^2 per row and its gradient."""
    a = np.abs(x)
    if q == 2:
        return (a * a).sum(axis=1), 2.0 * x
    s = (a**q).sum(axis=1)
    norm = s ** (1.0 / q)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norm > 0, 2.0 * norm ** (2.0 - q), 0.0)
    return norm**2, scale[:, None] * np.sign(x) * a ** (q - 1.0)


def _pair_sum(f, q, grad=False):
    """Sum over ordered pairs (v, w) of ||f(v) - f(w)||_q^2, optionally with gradient."""
    n = len(f)
    if q == 2:
        c = f - f.mean(axis=0)
        return 2.0 * n * float((c * c).sum()), (4.0 * n * c if grad else None)
    total, g = 0.0, (np.zeros_like(f) if grad else None)
    for lo in range(0, n, PAIR_CHUNK):
        diff = f[lo:lo + PAIR_CHUNK, None, :] - f[None, :, :]
        val, dg = _sq_norm_grad(diff.reshape(-1, f.shape[1]), q)
        total += float(val.sum())
        if grad:
            dg = dg.reshape(diff.shape)
            # each unordered pair appears twice, once from each side
            g[lo:lo + PAIR_CHUNK] += 2.0 * dg.sum(axis=1)
    return total, g


def _edge_sum(graph, f, q, grad=False):
    src = np.repeat(np.arange(graph.order), graph.degree)
    dst = graph.neighbors.ravel()
    diff = f[src] - f[dst]
    val, dg = _sq_norm_grad(diff, q)
    if not grad:
        return float(val.sum()), None
    g = np.zeros_like(f)
    np.add.at(g, src, 2.0 * dg)  # edges are symmetric, so dst terms double src terms
    return float(val.sum()), g


def poincare_sides(graph, f, q=2.0):
    """(mean pairwise term, normalized edge term) for f of shape (|V|, k)."""
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] != graph.order or not np.all(np.isfinite(f)):
        raise ConfigError("f must be finite with one row per vertex")
    n = graph.order
    pairs, _ = _pair_sum(f, q)
    edges, _ = _edge_sum(graph, f, q)
    return pairs / n**2, edges / (graph.degree * n)


def poincare_ratio(graph, f, q=2.0):
    lhs, rhs = poincare_sides(graph, f, q)
    if rhs == 0.0:
        return math.nan
    return lhs / rhs


def poincare_check(graph, f, gamma, q=2.0, rtol=POINCARE_RTOL):
    """Does lhs <= gamma * rhs hold (up to relative rounding ``rtol``)?"""
    lhs, rhs = poincare_sides(graph, f, q)
    return bool(lhs <= gamma * rhs + rtol * max(lhs, gamma * rhs))


@dataclass
class GapReport:
    group: str
    p: int
    lambda2: float
    gamma_q: float
    q: float
    k: int
    trials: int
    iterations: list
    restarts: int

    def to_json(self):
        return dict(self.__dict__)

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


class NonlinearGapEstimator(BaseEstimator):
    """Best Poincare ratio found by L-BFGS ascent from seeded random starts.

    Restart ``i`` draws its start from ``SeedSequence(seed, spawn_key=(i,))``,
    so adding trials never lowers the result.  The objective is
    log(edge term) - log(pair term), which is invariant under scaling f.
    """

    def __init__(self, q=2.0, k=1, trials=8, max_iter=MAX_ITER, seed=0, threads=1):
        self.q = q
        self.k = k
        self.trials = trials
        self.max_iter = max_iter
        self.seed = seed
        self.threads = threads

    def _objective(self, graph, flat):
        f = flat.reshape(graph.order, self.k)
        pairs, gp = _pair_sum(f, self.q, grad=True)
        edges, ge = _edge_sum(graph, f, self.q, grad=True)
        if pairs <= 0.0 or edges <= 0.0:
            return math.inf, np.zeros_like(flat)
        value = math.log(edges) - math.log(pairs)
        return value, (ge / edges - gp / pairs).ravel()

    def _restart(self, graph, i):
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(i,)))
        start = rng.standard_normal(graph.order * self.k)
        res = optimize.minimize(lambda x: self._objective(graph, x), start, jac=True, method="L-BFGS-B",
                                options={"maxiter": self.max_iter, "gtol": 1e-10, "ftol": 1e-15})
        f = res.x.reshape(graph.order, self.k)
        return poincare_ratio(graph, f, self.q), f, int(res.nit)

    def fit(self, graph, y=None):
        check_exponent("q", self.q)
        check_count("k", self.k)
        trials = check_count("trials", self.trials)
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                runs = list(pool.map(lambda i: self._restart(graph, i), range(trials)))
        else:
            runs = [self._restart(graph, i) for i in range(trials)]
        valid = [r for r in runs if math.isfinite(r[0])]
        if not valid:
            raise RuntimeError("every restart collapsed to a constant map")
        best = max(range(len(valid)), key=lambda j: valid[j][0])
        self.gamma_ = float(valid[best][0])
        self.f_ = valid[best][1]
        self.history_ = [float(r[0]) for r in runs]
        self.iterations_ = [r[2] for r in runs]
        self.restarts_ = trials - len(valid)
        return self


def nonlinear_gap(graph, q=2.0, k=1, trials=8, seed=0, threads=1, lambda2=None):
    est = NonlinearGapEstimator(q, k, trials, seed=seed, threads=threads).fit(graph)
    lam = spectral_gap(graph) if lambda2 is None else lambda2
    report = GapReport(graph.group, graph.p, lam, est.gamma_, float(q), int(k), int(trials),
                       est.iterations_, est.restarts_)
    return report, est.f_
