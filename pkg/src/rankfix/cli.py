"""Command line entry point: one subcommand per verification.

Every run writes ``verdict.json`` into ``--out``.  The exit code is 0 when
every asserted inequality holds, 1 when one fails and 2 on bad input.
Parameters come from ``--config`` (flat ``key = value`` lines) overridden by
command line flags.  Verdicts hold no timestamps, paths or thread counts, so
identical (config, seed) pairs give byte-identical files.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from ._validation import ConfigError, as_rng

SCHEMA_VERSION = 1

ANCHORS = {
    "verify-gaussians": "TV(N(t,e^{2a}), N(0,e^{2a})) <= |t| e^{-a} / sqrt(2 pi);  "
                        "T_c(gamma_{s,0}, gamma_{t,b}) <= 2(|s-t| + e^b - 1)",
    "verify-measures": "TV(nu_{abc}, nu~_{cba}) <= e^{a+c-b}",
    "verify-sequences": "x_i + y_i >= b + Delta;  sum_i e^{2 x_i} = e^{2a}",
    "verify-roots": "[X(t), Y(s)] = Z(ts);  [X(u), Y(r)] = Z(-u^2 r) W(ur);  [X(u), W(r)] = Z(2ur);  g^T J g = J",
    "graph-path": "lambda = v_0 ~ v_1 ~ ... ~ v_k = lambda'",
    "graph-audit": "lambda ~ lambda' in G^0 => lambda_1 = lambda'_1 and lambda_last = lambda'_last",
    "contraction": "||pi(X(gamma_a) Y(gamma_c)) xi|| <= max(q_0 ||xi||, 2 ||pi(Z(gamma_{a+c})) xi||)",
    "change-middle": "||nu_{abc} xi - nu_{ab'c} xi|| <= C q^Delta (1 + |b-b'|) max_{|t|<=e^{a+c}} ||Z(t) xi - xi||,  "
                     "Delta = sqrt(a + c - max(b, b'))",
    "commutator": "delta_{W,a+d} <= 4 delta_{X,d} + 4 delta_{Y,a};  delta_{Z,a+2d} <= 4 delta_{X,d} + 4 delta_{Y,a}",
    "uc-iterated": "||rho_1(gamma_{a_1}) ... rho_n(gamma_{a_n}) xi|| >= (1-delta) ||xi|| "
                   "=> max_i max_{|t|<=e^{a_i}} ||rho_i(t) xi - xi|| <= eps ||xi||",
    "cauchy": "xi_lambda = mu_lambda . xi;  ||xi_{theta_{k+1} lambda} - xi_{theta_k lambda}|| -> 0",
    "distortion": "||X(t) . xi - xi|| <= M log(2 + |t|)",
    "expander": "(1/|V|^2) sum_{v,w} ||f(v)-f(w)||^2 <= (gamma / (d |V|)) sum_{v~w} ||f(v)-f(w)||^2",
    "report-bundle": "conjunction of the bundled verdicts",
}

STOCHASTIC = {"verify-gaussians", "verify-measures", "verify-sequences", "graph-audit", "action-check", "expander"}
CHECKS = ("contraction", "change-middle", "commutator", "uc-iterated", "cauchy", "distortion")

# key -> (type, default); config values arrive as strings
PARAMS = {
    "seed": (int, None),
    "samples": (int, None),
    "threads": (int, 1),
    "group": (str, "sl3"),
    "p": (int, 2),
    "q": (float, 2.0),
    "k": (int, 1),
    "trials": (int, 8),
    "check": (str, None),
    "from": (str, None),
    "to": (str, None),
    "from_side": (int, 1),
    "to_side": (int, 1),
    "target": (str, "g_with_flips"),
    "size": (int, None),
    "grid_points": (int, 120),
    "method": (str, None),
}


class CheckFailed(Exception):
    pass


def read_config(path):
    """Flat key = value file; '#' starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in PARAMS:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        out[key] = value
    return out


def _coerce(key, value):
    kind = PARAMS[key][0]
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be {kind.__name__}, got {value!r}") from exc


def resolve(args):
    """Config file, then command line; command line wins."""
    raw = read_config(args.config) if args.config else {}
    for key in PARAMS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    cfg = {key: _coerce(key, raw[key]) if key in raw else default for key, (_, default) in PARAMS.items()}
    if args.command in STOCHASTIC and cfg["seed"] is None:
        raise ConfigError(f"{args.command} is stochastic and needs --seed")
    if cfg["seed"] is not None and not 0 <= cfg["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if cfg["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    return cfg


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dump_json(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _samples(cfg, default):
    return cfg["samples"] if cfg["samples"] is not None else default


def _tuple(text, name):
    if text is None:
        raise ConfigError(f"--{name} is required")
    try:
        return tuple(float(v) for v in text.replace(" ", "").split(","))
    except ValueError as exc:
        raise ConfigError(f"--{name} must be comma-separated numbers") from exc


# handlers return (passed, results, extra_files)


def run_verify_gaussians(cfg):
    from .gaussians import Gaussian1D, monge_proof_integrals, transport_cost_c, tv_bound, tv_exact

    rng = as_rng(cfg["seed"])
    worst = -math.inf
    for _ in range(_samples(cfg, 500)):
        t, a = rng.uniform(-5, 5), rng.uniform(-3, 3)
        g, h = Gaussian1D(t, a), Gaussian1D(0.0, a)
        worst = max(worst, tv_exact(g, h) - tv_bound(g, h))
    transport_worst, lp_gap = -math.inf, 0.0
    for s in np.linspace(-2, 2, 5):
        for t in np.linspace(-2, 2, 5):
            for b in np.linspace(0, 2, 3):
                cost = transport_cost_c(Gaussian1D(s, 0.0), Gaussian1D(t, b)).cost
                transport_worst = max(transport_worst, cost - 2 * (abs(s - t) + math.exp(b) - 1))
    for s, t, b in ((0.0, 1.0, 0.5), (-1.0, 0.5, 1.5)):
        mu, nu = Gaussian1D(s, 0.0), Gaussian1D(t, b)
        grid = transport_cost_c(mu, nu, method="grid", atoms=400)
        lp_gap = max(lp_gap, abs(grid.cost - transport_cost_c(mu, nu).cost) / grid.cell_size)
    first, second = monge_proof_integrals()
    checks = {
        "tv_bound": worst <= 1e-9,
        "transport_bound": transport_worst <= 1e-6,
        "lp_agrees_within_2_cells": lp_gap <= 2.0,
        "first_integral": abs(first - (1 + 1 / math.sqrt(2 * math.pi))) <= 1e-6,
        "second_integral": abs(second - 1.6218) <= 1e-3,
    }
    results = {"checks": checks, "tv_worst_excess": worst, "transport_worst_excess": transport_worst,
               "lp_gap_cells": lp_gap, "integrals": [first, second]}
    return all(checks.values()), results, {}


def run_verify_measures(cfg):
    from .meassim import flip_tv_bound, make_nu_h3, make_nu_tilde_h3, tv_estimate

    rng = as_rng(cfg["seed"])
    rows = []
    for _ in range(_samples(cfg, 5)):
        a, c = rng.uniform(-1.5, 1.5, 2)
        b = a + c - rng.uniform(-4, 2)
        tv = tv_estimate(make_nu_h3(a, b, c), make_nu_tilde_h3(c, b, a), grid_points=cfg["grid_points"])
        rows.append({"a": a, "b": b, "c": c, "tv": tv.estimate, "mass_error": tv.half_width,
                     "bound": flip_tv_bound(a, b, c), "ok": tv.estimate <= flip_tv_bound(a, b, c) + 1e-3})
    return all(r["ok"] for r in rows), {"cases": rows}, {}


def run_verify_sequences(cfg):
    from .seqbuilder import build_sl3_sequence, build_sp4_sequence, failed_items, verify_sequence

    rng = as_rng(cfg["seed"])
    n = _samples(cfg, 1000)
    failures = []
    for _ in range(n):
        a, c = rng.uniform(-50, 50, 2)
        delta = rng.uniform(3, 40)
        sp = build_sl3_sequence(a, a + c - delta**2, c)
        bad = failed_items(verify_sequence(sp))
        if bad:
            failures.append({"context": "sl3", "inputs": sp.inputs, "items": bad})
    for _ in range(n):
        a, c, d = rng.uniform(-50, 50, 3)
        delta = rng.uniform(7, 40)
        b = min(a + d - delta**2, (a + c - delta**2) / 2)
        sp = build_sp4_sequence(a, b, c, d)
        bad = failed_items(verify_sequence(sp))
        if bad:
            failures.append({"context": "sp4", "inputs": sp.inputs, "items": bad})
    return not failures, {"per_context": n, "failures": failures[:20], "n_failures": len(failures)}, {}


def run_verify_roots(cfg):
    from .rootsys import (distortion_witness, is_symplectic, key_homomorphism_sl3, key_homomorphism_sp4,
                          root_generator_sp4)

    tol = 1e-12
    windows = []
    for w in range(8):
        wit = key_homomorphism_sl3(w)
        windows.append({"group": "sl3", "window": w, "relation": wit.relation_residual(),
                        "homomorphism": wit.homomorphism_residual()})
    for i in range(1, 9):
        wit = key_homomorphism_sp4(i)
        windows.append({"group": "sp4", "window": i, "relation": wit.relation_residual(),
                        "homomorphism": wit.homomorphism_residual()})
    symplectic = all(is_symplectic(root_generator_sp4(k, t), tol) for k in range(1, 9) for t in (-2.5, 0.3, 7.0))
    distortion = max(
        [distortion_witness("sl3", (i, j), t)[2] for i in (1, 2, 3) for j in (1, 2, 3) if i != j
         for t in (1.0, 1e3, 1e6)]
        + [distortion_witness("sp4", k, t)[2] for k in range(1, 9) for t in (1.0, 1e3, 1e6)])
    windows_ok = all(w["relation"] <= tol and w["homomorphism"] <= tol for w in windows)
    ok = windows_ok and symplectic and distortion <= 1e-9
    return ok, {"windows": windows, "symplectic": symplectic, "distortion_residual": distortion}, {}


def _path_from_json(obj):
    from .paramgraph import ParamPath, ParamVertex

    verts = [ParamVertex(tuple(v["coords"]), v["side"]) for v in obj["vertices"]]
    return ParamPath(obj["group"], verts, list(obj.get("rules", [])))


def run_graph_path(cfg):
    from .paramgraph import DifferentComponentError, ParamVertex, find_path, validate_path

    start = ParamVertex(_tuple(cfg["from"], "from"), cfg["from_side"])
    end = ParamVertex(_tuple(cfg["to"], "to"), cfg["to_side"])
    if cfg["target"] not in ("g0", "g_with_flips"):
        raise ConfigError("target must be g0 or g_with_flips")
    try:
        path, eps, bound = find_path(start, end, cfg["target"])
    except DifferentComponentError as exc:
        return False, {"connected": False, "reason": str(exc)}, {}
    text = path.dumps() + "\n"
    reloaded = _path_from_json(json.loads(text))
    ok = validate_path(reloaded) and (eps is None or validate_path(reloaded, eps))
    results = {"connected": True, "edges": path.n_edges, "epsilon_margin": eps, "L_bound": bound,
               "validated_on_load": ok}
    return ok, results, {"path.json": text}


def run_graph_audit(cfg):
    from .paramgraph import graph_audit

    groups = ("sl3", "sp4") if cfg["group"] == "both" else (cfg["group"],)
    reports = {g: graph_audit(g, _samples(cfg, 500), 100, seed=cfg["seed"]).to_json() for g in groups}
    return all(r["ok"] for r in reports.values()), reports, {}


def _action_contraction(cfg):
    from .actionsim import make_action
    from .actionsim.contraction import estimate_q0

    action = make_action("schrodinger", size=cfg["size"] or 32, hbar=1.0)
    consts = estimate_q0(action, _samples(cfg, 200), seed=cfg["seed"])
    return consts.q0_hat is not None and consts.q0_hat < 1.0, {"testbed": action.name, **consts.to_json()}, {}


def _action_change_middle(cfg):
    from .actionsim import make_action
    from .actionsim.contraction import check_change_of_middle

    action = make_action("schrodinger", size=cfg["size"] or 32, hbar=1.0)
    xi = action.random_vector(cfg["seed"])
    params = {"variant": "h3", "a": 1.5, "c": 1.5, "gap": 0.5, "deltas": list(np.linspace(3.0, 4.0, 9))}
    report = check_change_of_middle(action, params, xi, n=_samples(cfg, 1000), seed=cfg["seed"],
                                    method=cfg["method"] or "exact", threads=cfg["threads"])
    ok = report.passed and report.r2 >= 0.8
    extra = {}
    if not math.isfinite(report.slope):
        extra["reason"] = "too few unflagged sweep points to fit; use --method exact or more --samples"
    rows = "delta,moved,fixed,lhs,half_width,factor,ratio\n" + "".join(
        ",".join(repr(float(r[k])) for k in ("delta", "moved", "fixed", "lhs", "half_width", "factor", "ratio"))
        + "\n" for r in report.rows)
    return ok, {"testbed": action.name, **report.to_json(), **extra}, {"sweep.csv": rows}


def _action_commutator(cfg):
    from .actionsim import make_action
    from .actionsim.contraction import check_commutator_growth

    action = make_action("perm-h", modulus=cfg["size"] or 5)
    rng = as_rng(cfg["seed"])
    cases = []
    for _ in range(_samples(cfg, 200)):
        a, d = rng.uniform(-1.0, 2.5, 2)
        xi = action.random_vector(int(rng.integers(2**63)))
        cases.append(check_commutator_growth(action, a, d, xi))
    worst = max(max(c["delta_w"], c["delta_z"]) - c["rhs"] for c in cases)
    return all(c["passed"] for c in cases), {"testbed": action.name, "cases": len(cases),
                                            "failures": sum(not c["passed"] for c in cases),
                                            "worst_excess": worst}, {}


def _action_uc(cfg):
    from .actionsim.convexity import calibration_table, random_uc_trials

    rows, ok = [], True
    for p in (1.5, 2.0, 3.0):
        for n, delta in ((1, 1e-3), (2, 1e-8)):
            reps = random_uc_trials(p, n, _samples(cfg, 100), delta, seed=cfg["seed"])
            worst = max((max(r.pointwise, r.gaussian) / r.epsilon for r in reps if r.hypothesis and r.epsilon > 0),
                        default=0.0)
            passed = all(r.passed for r in reps)
            ok &= passed
            rows.append({"p": p, "n": n, "delta": delta, "hypothesis_held": sum(r.hypothesis for r in reps),
                         "epsilon": reps[0].epsilon, "worst_fraction_of_epsilon": worst, "passed": passed})
    table = {str(p): calibration_table(p, 3, [1e-8, 1e-6, 1e-4, 1e-2]) for p in (1.5, 2.0, 3.0)}
    return ok, {"trials": rows, "calibration": table}, {}


def _sl3_start(action):
    x1, x2, x3 = action.mesh()
    return (np.cos(x1) + np.cos(x2) + np.cos(x3)).astype(action.dtype)


def _action_cauchy(cfg):
    from .actionsim import make_action
    from .actionsim.cauchy import cauchy_diagnostic, theta_ladder

    action = make_action("sl3-grid", size=cfg["size"] or 64)
    xi = _sl3_start(action)
    method = cfg["method"] or "mc"
    report = cauchy_diagnostic(action, [1.0] * 6, theta_ladder(), xi, n=_samples(cfg, 1000),
                               seed=cfg["seed"], threads=cfg["threads"], method=method)
    ok = report.monotone and report.norm_drop >= 0.5
    lines = ["theta,norm,half_width,increment,floor,defect"]
    for k, t in enumerate(report.thetas):
        inc = repr(report.increments[k - 1]) if k else ""
        fl = repr(report.floors[k - 1]) if k else ""
        lines.append(f"{t!r},{report.norms[k]!r},{report.half_widths[k]!r},{inc},{fl},{report.defects[k]!r}")
    return ok, {"testbed": action.name, **report.to_json()}, {"ladder.csv": "\n".join(lines) + "\n"}


def _action_distortion(cfg):
    from .actionsim import make_action
    from .actionsim.cauchy import fit_distortion_constant

    action = make_action("sl3-grid", size=cfg["size"] or 32)
    fit = fit_distortion_constant(action, _sl3_start(action))
    return math.isfinite(fit["M_hat"]) and fit["M_hat"] > 0, {"testbed": action.name, **fit}, {}


ACTION_CHECKS = {
    "contraction": _action_contraction,
    "change-middle": _action_change_middle,
    "commutator": _action_commutator,
    "uc-iterated": _action_uc,
    "cauchy": _action_cauchy,
    "distortion": _action_distortion,
}


def run_action_check(cfg):
    if cfg["check"] not in ACTION_CHECKS:
        raise ConfigError(f"--check must be one of {', '.join(CHECKS)}")
    return ACTION_CHECKS[cfg["check"]](cfg)


def run_expander(cfg):
    from .expander import DENSE_LIMIT, build_cayley, dense_gamma_oracle, nonlinear_gap, poincare_check

    graph = build_cayley(cfg["group"], cfg["p"])
    report, f = nonlinear_gap(graph, cfg["q"], cfg["k"], cfg["trials"], seed=cfg["seed"], threads=cfg["threads"])
    checks = {"poincare": poincare_check(graph, f, report.gamma_q, cfg["q"]), "connected": graph.is_connected()}
    results = {"order": graph.order, "degree": graph.degree, "gap": report.to_json()}
    if cfg["q"] == 2.0 and cfg["k"] == 1 and graph.order <= 3 * DENSE_LIMIT:
        oracle = dense_gamma_oracle(graph)
        results["gamma_oracle"] = oracle
        checks["oracle_within_1pct"] = abs(report.gamma_q / oracle - 1.0) <= 0.01
    results["checks"] = checks
    edges = "".join(f"{u} {v}\n" for u, v in graph.edges())
    return all(checks.values()), results, {"gap.json": dump_json(report.to_json()), "edges.txt": edges}


def run_report_bundle(cfg, inputs):
    if not inputs:
        raise ConfigError("report-bundle needs at least one verdict file or directory")
    entries = []
    for item in inputs:
        path = os.path.join(item, "verdict.json") if os.path.isdir(item) else item
        try:
            with open(path) as fh:
                verdict = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load verdict {path}: {exc}") from exc
        entries.append({"command": verdict.get("command"), "check": verdict.get("params", {}).get("check"),
                        "passed": bool(verdict.get("passed")), "anchor": verdict.get("anchor")})
    entries.sort(key=lambda e: (str(e["command"]), str(e["check"])))
    return all(e["passed"] for e in entries), {"entries": entries, "count": len(entries)}, {}


HANDLERS = {
    "verify-gaussians": run_verify_gaussians,
    "verify-measures": run_verify_measures,
    "verify-sequences": run_verify_sequences,
    "verify-roots": run_verify_roots,
    "graph-path": run_graph_path,
    "graph-audit": run_graph_audit,
    "action-check": run_action_check,
    "expander": run_expander,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", default="rankfix-out", help="output directory")
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")
    common.add_argument("--samples", type=int)
    common.add_argument("--threads", type=int)

    parser = argparse.ArgumentParser(prog="rankfix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rankfix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify-gaussians", "verify-sequences", "verify-roots"):
        sub.add_parser(name, parents=[common])
    measures = sub.add_parser("verify-measures", parents=[common])
    measures.add_argument("--grid-points", dest="grid_points", type=int)
    path = sub.add_parser("graph-path", parents=[common])
    path.add_argument("--from", dest="from", help="comma-separated positive tuple")
    path.add_argument("--to", help="comma-separated positive tuple")
    path.add_argument("--from-side", dest="from_side", type=int, choices=(1, 2))
    path.add_argument("--to-side", dest="to_side", type=int, choices=(1, 2))
    path.add_argument("--target", choices=("g0", "g_with_flips"))
    audit = sub.add_parser("graph-audit", parents=[common])
    audit.add_argument("--group", choices=("sl3", "sp4", "both"))
    action = sub.add_parser("action-check", parents=[common])
    action.add_argument("--check", choices=CHECKS)
    action.add_argument("--size", type=int, help="testbed size (modulus or grid points per axis)")
    action.add_argument("--method", choices=("exact", "mc", "spectral"))
    exp = sub.add_parser("expander", parents=[common])
    exp.add_argument("--group", choices=("sl3", "sp4"))
    exp.add_argument("--p", type=int)
    exp.add_argument("--q", type=float)
    exp.add_argument("--k", type=int)
    exp.add_argument("--trials", type=int)
    bundle = sub.add_parser("report-bundle", parents=[common])
    bundle.add_argument("inputs", nargs="*", help="verdict files or output directories")
    return parser


RELEVANT = {
    "verify-gaussians": ("seed", "samples"),
    "verify-measures": ("seed", "samples", "grid_points"),
    "verify-sequences": ("seed", "samples"),
    "verify-roots": (),
    "graph-path": ("from", "to", "from_side", "to_side", "target"),
    "graph-audit": ("seed", "samples", "group"),
    "action-check": ("seed", "samples", "check", "size", "method"),
    "expander": ("seed", "group", "p", "q", "k", "trials"),
    "report-bundle": (),
}


def _params_for_verdict(cfg, command):
    return {k: cfg[k] for k in RELEVANT[command] if cfg[k] is not None}


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        target = os.path.join(args.out, "verdict.json")
        if os.path.exists(target) and not args.force:
            raise ConfigError(f"{target} exists; pass --force to overwrite")
        if args.command == "report-bundle":
            passed, results, files = run_report_bundle(cfg, args.inputs)
            name = "summary.json"
            files = {name: None}
        else:
            passed, results, files = HANDLERS[args.command](cfg)
        anchor_key = cfg["check"] if args.command == "action-check" else args.command
        verdict = {
            "schema_version": SCHEMA_VERSION,
            "command": args.command,
            "anchor": ANCHORS[anchor_key],
            "params": _params_for_verdict(cfg, args.command),
            "passed": bool(passed),
            "results": results,
        }
        os.makedirs(args.out, exist_ok=True)
        text = dump_json(verdict)
        for name, content in files.items():
            with open(os.path.join(args.out, name), "w") as fh:
                fh.write(text if content is None else content)
        with open(target, "w") as fh:
            fh.write(text)
    except ConfigError as exc:
        print(f"rankfix: {exc}", file=sys.stderr)
        return 2
    if not passed:
        reason = results.get("reason", "an asserted inequality does not hold; see verdict.json")
        print(f"rankfix: {args.command} failed: {reason}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
