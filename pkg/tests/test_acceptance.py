"""The ten acceptance criteria at their stated tolerances and time budgets.

Each test records one PASS/FAIL line (shown in the terminal summary) and then
asserts the same conditions, so a failure is both reported and fatal.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from rankfix.actionsim import (
    cauchy_diagnostic,
    check_change_of_middle,
    check_commutator_growth,
    estimate_q0,
    make_action,
    theta_ladder,
)
from rankfix.expander import build_cayley, dense_gamma_oracle, nonlinear_gap, poincare_check, spectral_gap
from rankfix.gaussians import Gaussian1D, monge_proof_integrals, transport_cost_c, tv_bound, tv_exact
from rankfix.meassim import flip_tv_bound, make_nu_h3, make_nu_tilde_h3, tv_estimate
from rankfix.nilpotent import HElement
from rankfix.paramgraph import graph_audit
from rankfix.rootsys import (
    distortion_witness,
    is_symplectic,
    key_homomorphism_sl3,
    key_homomorphism_sp4,
    root_generator_sp4,
)
from rankfix.seqbuilder import build_sl3_sequence, build_sp4_sequence, failed_items, verify_sequence


class Criterion:
    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.checks = {}

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, kind, exc, tb):
        elapsed = time.perf_counter() - self.start
        self.checks[f"runtime < {self.budget:g}s"] = elapsed < self.budget
        if kind is not None:
            self.checks[f"raised {kind.__name__}"] = False
        bad = [name for name, ok in self.checks.items() if not ok]
        verdict = "PASS" if not bad else "FAIL"
        line = f"{verdict} criterion {self.number:>2}: {self.title} ({elapsed:.1f}s)"
        if bad:
            line += " failed: " + "; ".join(bad)
        ACCEPTANCE[self.number] = line
        print(line)
        if kind is None:
            assert not bad, line
        return False


def test_criterion_01_gaussian_tv_bound():
    with Criterion(1, "Gaussian TV shift bound on 500 random (t, a)", 5) as c:
        rng = np.random.default_rng(20240101)
        worst = -math.inf
        for _ in range(500):
            t, a = rng.uniform(-10, 10), rng.uniform(-4, 4)
            g, h = Gaussian1D(t, a), Gaussian1D(0.0, a)
            worst = max(worst, tv_exact(g, h) - tv_bound(g, h))
        c.checks[f"tv <= bound + 1e-9 (worst excess {worst:.2e})"] = worst <= 1e-9


def test_criterion_02_transport_bound():
    with Criterion(2, "transport bound on a 20x20x10 grid, LP cross-check", 60) as c:
        ss, ts, bs = np.linspace(-3, 3, 20), np.linspace(-3, 3, 20), np.linspace(0, 2, 10)
        worst = -math.inf
        for s in ss:
            for t in ts:
                for b in bs:
                    cost = transport_cost_c(Gaussian1D(s, 0.0), Gaussian1D(t, b)).cost
                    worst = max(worst, cost - 2 * (abs(s - t) + math.exp(b) - 1))
        c.checks[f"cost <= bound + 1e-6 (worst excess {worst:.2e})"] = worst <= 1e-6
        # the LP is too slow for all 4000 points; a seeded subset of grid points
        rng = np.random.default_rng(2)
        cells = []
        for _ in range(12):
            s, t, b = rng.choice(ss), rng.choice(ts), rng.choice(bs)
            mu, nu = Gaussian1D(s, 0.0), Gaussian1D(t, b)
            grid = transport_cost_c(mu, nu, method="grid")
            cells.append(abs(grid.cost - transport_cost_c(mu, nu).cost) / grid.cell_size)
        c.checks[f"LP within 2 cells (worst {max(cells):.2f})"] = max(cells) <= 2.0


def test_criterion_03_gaussian_integrals():
    with Criterion(3, "two Gaussian integrals of the transport estimate", 1) as c:
        first, second = monge_proof_integrals()
        c.checks[f"first = 1 + 1/sqrt(2 pi) ({first:.10f})"] = abs(first - (1 + 1 / math.sqrt(2 * math.pi))) <= 1e-6
        exact = (10 / math.sqrt(math.e) - 2) / math.sqrt(2 * math.pi)
        c.checks[f"second ~ 1.6218 ({second:.6f})"] = abs(second - 1.6218) <= 1e-3 and abs(second - exact) <= 1e-6


def test_criterion_04_h3_flip_tv():
    with Criterion(4, "H3 flip TV on 50 random (a, b, c), 200^3 grids", 600) as c:
        rng = np.random.default_rng(4)
        worst = -math.inf
        for _ in range(50):
            a, cc = rng.uniform(-1.5, 1.5, 2)
            b = a + cc - rng.uniform(-4, 2)
            tv = tv_estimate(make_nu_h3(a, b, cc), make_nu_tilde_h3(cc, b, a), grid_points=200).estimate
            worst = max(worst, tv - flip_tv_bound(a, b, cc))
        c.checks[f"tv <= e^(a+c-b) + 1e-3 (worst excess {worst:.3f})"] = worst <= 1e-3


def test_criterion_05_sequences():
    with Criterion(5, "sequence items on 1000 + 1000 valid inputs", 5) as c:
        rng = np.random.default_rng(5)
        bad = 0
        for _ in range(1000):
            a, cc = rng.uniform(-100, 100, 2)
            sp = build_sl3_sequence(a, a + cc - rng.uniform(3, 40) ** 2, cc)
            bad += bool(failed_items(verify_sequence(sp)))
        for _ in range(1000):
            a, cc, d = rng.uniform(-100, 100, 3)
            delta = rng.uniform(7, 40)
            sp = build_sp4_sequence(a, min(a + d - delta**2, (a + cc - delta**2) / 2), cc, d)
            bad += bool(failed_items(verify_sequence(sp)))
        c.checks[f"all items hold ({bad} failures)"] = bad == 0


def test_criterion_06_roots():
    with Criterion(6, "root windows, symplectic generators, distortion", 5) as c:
        sl3 = max(max(key_homomorphism_sl3(w).relation_residual(), key_homomorphism_sl3(w).homomorphism_residual())
                  for w in range(8))
        sp4 = max(max(key_homomorphism_sp4(i).relation_residual(), key_homomorphism_sp4(i).homomorphism_residual())
                  for i in range(1, 9))
        c.checks[f"SL3 windows to 1e-12 ({sl3:.1e})"] = sl3 <= 1e-12
        c.checks[f"Sp4 windows to 1e-12 ({sp4:.1e})"] = sp4 <= 1e-12
        ts = np.geomspace(1e-3, 1e6, 19)
        c.checks["g^T J g = J"] = all(is_symplectic(root_generator_sp4(k, s * t), 1e-12)
                                      for k in range(1, 9) for t in ts for s in (1, -1))
        dist = max([distortion_witness("sl3", (i, j), t)[2] for i in (1, 2, 3) for j in (1, 2, 3) if i != j
                    for t in np.geomspace(1, 1e6, 13)]
                   + [distortion_witness("sp4", k, t)[2] for k in range(1, 9) for t in np.geomspace(1, 1e6, 13)])
        c.checks[f"distortion residual <= 1e-9 ({dist:.1e})"] = dist <= 1e-9


def test_criterion_07_graph_audits():
    with Criterion(7, "graph audits, 500 SL3 + 500 Sp4 pairs", 30) as c:
        for group in ("sl3", "sp4"):
            rep = graph_audit(group, n_pairs=500, n_homothety=100, seed=7)
            c.checks[f"{group}: {rep.paths_valid}/{rep.pairs} validated paths"] = rep.paths_valid == rep.pairs == 500
            c.checks[f"{group}: only-if violations {rep.only_if_violations}"] = rep.only_if_violations == 0
            c.checks[f"{group}: homothety failures {rep.homothety_failures}"] = rep.homothety_failures == 0


def test_criterion_08_action_suite():
    with Criterion(8, "exact action suite", 600) as c:
        rng = np.random.default_rng(8)
        eta = (np.arange(5**4) % 11 - 5).astype(float)
        aff = make_action("perm-h", modulus=5, eta=eta)
        exact = True
        for _ in range(200):
            g, h = (HElement(*rng.integers(-30, 30, 4)) for _ in range(2))
            exact &= np.array_equal(aff.cocycle(g * h), aff.cocycle(g) + aff.linear(g, aff.cocycle(h)))
        c.checks["cocycle identity exact on 200 pairs"] = bool(exact)

        perm = make_action("perm-h", modulus=5)
        fails = 0
        for _ in range(200):
            a, d = rng.uniform(-1.0, 2.5, 2)
            fails += not check_commutator_growth(perm, a, d, perm.random_vector(int(rng.integers(1 << 62))))["passed"]
        c.checks[f"commutator growth on 200 cases ({fails} failures)"] = fails == 0

        schro = make_action("schrodinger", size=32, hbar=1.0)
        q0 = estimate_q0(schro, 200, seed=1).q0_hat
        c.checks[f"q0_hat < 1 ({q0:.4f})"] = q0 < 1.0

        params = {"variant": "h3", "a": 1.5, "c": 1.5, "gap": 0.5, "deltas": list(np.linspace(3.0, 4.0, 9))}
        sweep = check_change_of_middle(schro, params, schro.random_vector(1), method="exact")
        c.checks[f"sweep slope < 0 ({sweep.slope:.3f})"] = sweep.slope < 0
        c.checks[f"sweep R^2 >= 0.8 ({sweep.r2:.4f})"] = sweep.r2 >= 0.8


@pytest.mark.slow
def test_criterion_09_cauchy_decay():
    with Criterion(9, "Cauchy decay on the 64^3 SL3 grid, Monte Carlo ladder", 1800) as c:
        action = make_action("sl3-grid", size=64)
        x1, x2, x3 = action.mesh()
        xi = (np.cos(x1) + np.cos(x2) + np.cos(x3)).astype(action.dtype)
        report = cauchy_diagnostic(action, [1.0] * 6, theta_ladder(1.0, 3.0, 0.25), xi, n=1000, seed=9)
        inc = ", ".join(f"{v:.3f}" for v in report.increments)
        c.checks[f"increments monotone beyond noise floor [{inc}]"] = report.monotone
        c.checks[f"norm drop >= 50% ({report.norm_drop:.1%})"] = report.norm_drop >= 0.5


def test_criterion_10_expander():
    with Criterion(10, "expander ascent vs dense oracle on SL3(F2), SL3(F3)", 300) as c:
        for p in (2, 3):
            graph = build_cayley("sl3", p)
            report, f = nonlinear_gap(graph, q=2.0, k=1, trials=8, seed=10)
            oracle = dense_gamma_oracle(graph)
            err = abs(report.gamma_q / oracle - 1)
            c.checks[f"p={p}: gamma within 1% of oracle ({err:.1e})"] = err <= 0.01
            c.checks[f"p={p}: Poincare check"] = poincare_check(graph, f, report.gamma_q)
            again = spectral_gap(build_cayley("sl3", p))
            c.checks[f"p={p}: lambda2 stable to 1e-8"] = abs(again - report.lambda2) <= 1e-8
