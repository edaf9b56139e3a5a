"""Batch command line front end.

Subcommands are thin wrappers over the library: `run` executes a full
config-driven pipeline (solve, optional Monte Carlo, checks) and writes all
artifacts plus a manifest; `solve`, `simulate`, `verify`, `invert` run the
corresponding stage; `special eval` exposes point evaluation of the special
functions; `eigensystem` dumps operator spectra.  Every run writes a
manifest from which `run --replay` reproduces each artifact byte for byte.
Parallelism lives inside the modules and results never depend on the worker
budget, so the manifest does not record it.

Exit codes: 0 all requested checks pass, 1 a check failed, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, grid_function, time_function
from .errors import ConfigError, EvaluationError, IllPosedError, SolverError
from .inverse import ObservationTrace, chi_kernel, forward_observation, recover_rho1
from .principles import check_abp, check_decay, check_positivity
from .solver import caputo_residual, solve
from .special import (MLParams, inverse_subordinator_density, ml_eval,
                      stable_density)
from .stochastic import McConfig, RngSpec, estimate_solution_mc, estimates_to_csv

_PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Render the solution surface from solution.csv (generated file).\"\"\"
import csv
import sys

try:
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("plotting needs matplotlib")

ts, xs, vs = [], [], []
with open("solution.csv") as fh:
    for row in csv.DictReader(fh):
        ts.append(float(row["t"])); xs.append(float(row["x"])); vs.append(float(row["value"]))
tu = sorted(set(ts)); xu = sorted(set(xs))
grid = {(t, x): v for t, x, v in zip(ts, xs, vs)}
img = [[grid[(t, x)] for x in xu] for t in tu]
plt.imshow(img, aspect="auto", origin="lower",
           extent=[min(xu), max(xu), min(tu), max(tu)])
plt.colorbar(label="phi")
plt.xlabel("x"); plt.ylabel("t")
plt.savefig("solution.png", dpi=150)
print("wrote solution.png")
"""


def _json_dump(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _report_to_dict(rep):
    return dataclasses.asdict(rep)


def _probe_points(cfg):
    """Default (t, x) probes for Monte Carlo runs: on-grid, interior."""
    from .operator import Domain1D
    dom = Domain1D(cfg.a, cfg.b, cfg.n_grid)
    xs = dom.x
    picks = [xs[len(xs) // 2], xs[len(xs) // 4], xs[(3 * len(xs)) // 4]]
    return [(cfg.T / 2.0, picks[0]), (cfg.T / 2.0, picks[1]),
            (cfg.T / 2.0, picks[2]), (cfg.T, picks[0]), (cfg.T / 4.0, picks[0])]


def _run_pipeline(cfg: RunConfig, out_dir):
    """Execute one configured experiment; returns (all_checks_passed, artifacts)."""
    _ensure_dir(out_dir)
    domain, op, es, spec = cfg.build_problem()
    times = np.linspace(0.0, cfg.T, cfg.time_steps + 1)
    artifacts = []
    reports = {}
    fld = None
    if cfg.method in ("spectral", "both"):
        fld = solve(spec, es, times)
        sol_path = os.path.join(out_dir, "solution.csv")
        fld.to_csv(sol_path, x=domain.x)
        artifacts.append(sol_path)
        summ_path = os.path.join(out_dir, "solution_summary.json")
        _json_dump(fld.summary(h=domain.h), summ_path)
        artifacts.append(summ_path)
    if cfg.method in ("monte_carlo", "both"):
        mc = McConfig(n_paths=cfg.n_paths, h=cfg.mc_h, rng=RngSpec(cfg.master_seed))
        est = estimate_solution_mc(spec, _probe_points(cfg), mc)
        mc_path = os.path.join(out_dir, "mc_estimates.csv")
        estimates_to_csv(est, mc_path)
        artifacts.append(mc_path)
        if fld is not None:
            side_path = os.path.join(out_dir, "side_by_side.csv")
            with open(side_path, "w") as fh:
                fh.write("t,x,spectral,mc_estimate,mc_stderr\n")
                for e in est:
                    sp = float(solve(spec, es, np.asarray([e.t])).values[0, domain.index_of(e.x)])
                    fh.write(f"{e.t!r},{e.x!r},{sp!r},{e.estimate!r},{e.stderr!r}\n")
            artifacts.append(side_path)
    es_path = os.path.join(out_dir, "eigensystem.npz")
    es.save(es_path)
    artifacts.append(es_path)
    all_pass = True
    for cid in cfg.checks:
        if cid == "positivity":
            rep = check_positivity(fld, spec, strict_interior=True,
                                   t_min=cfg.positivity_tmin)
        elif cid == "decay":
            rep = check_decay(fld, es, spec.alpha, cap_ratio=cfg.decay_cap)
        elif cid == "abp":
            rep = check_abp(spec, fld, cfg.abp_p)
        elif cid == "caputo":
            rep = caputo_residual(fld, es, spec)
            reports[cid] = rep
            all_pass &= bool(rep.get("reliable", False))
            continue
        reports[cid] = _report_to_dict(rep)
        all_pass &= rep.passed
    rep_path = os.path.join(out_dir, "reports.json")
    _json_dump({"checks": reports, "verdict": "pass" if all_pass else "fail"}, rep_path)
    artifacts.append(rep_path)
    plot_path = os.path.join(out_dir, "plot_solution.py")
    with open(plot_path, "w") as fh:
        fh.write(_PLOT_SCRIPT)
    artifacts.append(plot_path)
    manifest = {
        "tool": "tfcauchy",
        "version": __version__,
        "config": cfg.to_dict(),
        "master_seed": cfg.master_seed,
        "artifacts": {os.path.basename(p): _sha256(p) for p in artifacts},
        "tolerances": {"decay_cap": cfg.decay_cap, "abp_p": cfg.abp_p},
    }
    _json_dump(manifest, os.path.join(out_dir, "manifest.json"))
    return all_pass, artifacts


def _cmd_run(args):
    if args.replay:
        with open(args.replay) as fh:
            manifest = json.load(fh)
        cfg = RunConfig.from_dict(manifest["config"])
    else:
        cfg = RunConfig.from_file(args.config)
    out_dir = args.out or cfg.out_dir
    ok, _ = _run_pipeline(cfg, out_dir)
    return 0 if ok else 1


def _cmd_solve(args):
    cfg = RunConfig.from_file(args.config)
    if cfg.method == "monte_carlo":
        raise ConfigError("solve runs the spectral stage; set method=spectral|both")
    domain, op, es, spec = cfg.build_problem()
    times = np.linspace(0.0, cfg.T, cfg.time_steps + 1)
    fld = solve(spec, es, times)
    out_dir = _ensure_dir(args.out or cfg.out_dir)
    fld.to_csv(os.path.join(out_dir, "solution.csv"), x=domain.x)
    _json_dump(fld.summary(h=domain.h), os.path.join(out_dir, "solution_summary.json"))
    print(f"wrote {out_dir}/solution.csv ({len(times)} times x {domain.n_grid} points)")
    return 0


def _cmd_simulate(args):
    cfg = RunConfig.from_file(args.config)
    domain, op, es, spec = cfg.build_problem()
    mc = McConfig(n_paths=cfg.n_paths, h=cfg.mc_h, rng=RngSpec(cfg.master_seed))
    est = estimate_solution_mc(spec, _probe_points(cfg), mc)
    out_dir = _ensure_dir(args.out or cfg.out_dir)
    estimates_to_csv(est, os.path.join(out_dir, "mc_estimates.csv"))
    diag = {f"point_{i}": e.diagnostics for i, e in enumerate(est)}
    _json_dump(diag, os.path.join(out_dir, "mc_diagnostics.json"))
    for e in est:
        print(f"t={e.t:g} x={e.x:g}: {e.estimate:.6g} +- {e.stderr:.2g}")
    return 0


def _cmd_verify(args):
    cfg = RunConfig.from_file(args.config)
    if not cfg.checks:
        raise ConfigError("config requests no checks ([checks] run = ...)")
    return _cmd_run(argparse.Namespace(config=args.config, out=args.out, replay=None))


def _cmd_invert(args):
    cfg = RunConfig.from_file(args.config)
    if not cfg.rho1_preset:
        raise ConfigError("invert needs a separable source (rho1, rho2) in the config")
    domain, op, es, spec = cfg.build_problem()
    N = args.steps
    ts = np.arange(1, N + 1) * (cfg.T / N)
    rho1_fn = time_function(cfg.rho1_preset, cfg.T)
    rho_true = np.asarray([rho1_fn(t) for t in ts])
    rho2 = grid_function(cfg.rho2_preset, domain, es)
    x0 = domain.x[len(domain.x) // 2] if args.x0 is None else args.x0
    kern = chi_kernel(es, cfg.alpha, rho2, x0, ts)
    obs = forward_observation(es, cfg.alpha, rho_true, rho2, x0, ts, kernel=kern)
    if args.noise > 0:
        rng = np.random.default_rng(cfg.master_seed)
        scale = args.noise * np.abs(obs.values).max()
        obs = ObservationTrace(x0=obs.x0, times=obs.times,
                               values=obs.values + rng.normal(0.0, scale, N),
                               noise_level=args.noise)
        rec, diag = recover_rho1(obs, kern, method="tikhonov", strength=args.strength)
    else:
        rec, diag = recover_rho1(obs, kern)
    err = float(np.linalg.norm(rec - rho_true) / max(np.linalg.norm(rho_true), 1e-300))
    out_dir = _ensure_dir(args.out or cfg.out_dir)
    with open(os.path.join(out_dir, "reconstruction.csv"), "w") as fh:
        fh.write("t,rho1_true,rho1_recovered\n")
        for t, a, b in zip(ts, rho_true, rec):
            fh.write(f"{float(t)!r},{float(a)!r},{float(b)!r}\n")
    _json_dump({"relative_l2_error": err, **diag},
               os.path.join(out_dir, "inversion_diagnostics.json"))
    print(f"reconstruction error (relative L2): {err:.4g}")
    return 0


def _cmd_special(args):
    if args.what == "eval":
        if args.ml is not None:
            a, b, z = args.ml
            print(f"{ml_eval(MLParams(a, b), z):.10g}")
        elif args.stable is not None:
            a, x = args.stable
            print(f"{stable_density(a, x):.10g}")
        elif args.eta is not None:
            a, t, u = args.eta
            print(f"{inverse_subordinator_density(a, t, u):.10g}")
        else:
            raise ConfigError("special eval needs one of --ml, --stable, --eta")
        return 0
    raise ConfigError(f"unknown special subcommand {args.what!r}")


def _cmd_eigensystem(args):
    from . import bernstein as bfn
    from .operator import Domain1D, build_operator, eigensystem
    dom = Domain1D(args.a, args.b, args.n_grid)
    if args.kind == "fractional":
        psi = bfn.fractional(args.nu)
    elif args.kind == "classical_laplacian":
        psi = bfn.classical_laplacian()
    else:
        raise ConfigError("eigensystem supports kind fractional|classical_laplacian")
    op = build_operator(dom, psi, 0.0, args.mode)
    es = eigensystem(op, args.modes)
    for n, lam in enumerate(es.lambdas, start=1):
        print(f"{n} {float(lam)!r}")
    if args.out:
        _ensure_dir(args.out)
        es.save(os.path.join(args.out, "eigensystem.npz"))
        with open(os.path.join(args.out, "eigenvalues.csv"), "w") as fh:
            fh.write("n,lambda\n")
            for n, lam in enumerate(es.lambdas, start=1):
                fh.write(f"{n},{float(lam)!r}\n")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="tfcauchy",
                                description="time-fractional Cauchy problem laboratory")
    p.add_argument("--workers", type=int, default=1,
                   help="worker budget (results never depend on it)")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="full config-driven pipeline")
    g = pr.add_mutually_exclusive_group(required=True)
    g.add_argument("config", nargs="?", help="config file")
    g.add_argument("--replay", help="manifest.json to replay")
    pr.add_argument("--out", help="output directory (overrides config)")
    pr.set_defaults(fn=_cmd_run)

    for name, fn in (("solve", _cmd_solve), ("simulate", _cmd_simulate),
                     ("verify", _cmd_verify)):
        pc = sub.add_parser(name)
        pc.add_argument("config")
        pc.add_argument("--out")
        pc.set_defaults(fn=fn)

    pi = sub.add_parser("invert", help="synthetic inverse-source round trip")
    pi.add_argument("config")
    pi.add_argument("--out")
    pi.add_argument("--steps", type=int, default=256)
    pi.add_argument("--x0", type=float, default=None)
    pi.add_argument("--noise", type=float, default=0.0)
    pi.add_argument("--strength", type=float, default=1e-2)
    pi.set_defaults(fn=_cmd_invert)

    ps = sub.add_parser("special", help="special function point evaluation")
    ps.add_argument("what", choices=["eval"])
    ps.add_argument("--ml", nargs=3, type=float, metavar=("ALPHA", "BETA", "Z"))
    ps.add_argument("--stable", nargs=2, type=float, metavar=("ALPHA", "X"))
    ps.add_argument("--eta", nargs=3, type=float, metavar=("ALPHA", "T", "U"))
    ps.set_defaults(fn=_cmd_special)

    pe = sub.add_parser("eigensystem", help="operator spectrum")
    pe.add_argument("--a", type=float, default=0.0)
    pe.add_argument("--b", type=float, default=1.0)
    pe.add_argument("--n-grid", type=int, default=199, dest="n_grid")
    pe.add_argument("--kind", default="classical_laplacian")
    pe.add_argument("--nu", type=float, default=1.0)
    pe.add_argument("--mode", default="spectral_of_dirichlet_laplacian")
    pe.add_argument("--modes", type=int, default=10)
    pe.add_argument("--out")
    pe.set_defaults(fn=_cmd_eigensystem)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if os.environ.get("TFCAUCHY_OUT") and getattr(args, "out", None) is None:
        args.out = os.environ["TFCAUCHY_OUT"]
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (EvaluationError, SolverError, IllPosedError, FileNotFoundError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
