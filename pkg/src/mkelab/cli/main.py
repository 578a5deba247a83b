"""``mkelab`` command line: solve, gradcheck, fit, sweep, sandwich.

Exit codes: 0 success, 1 numeric or ordering failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..estimators import (
    ARMS,
    check_ordering,
    energy_and_grad_primal,
    finite_difference_grad,
    fit_mke,
    fit_wgan,
    fit_wvae,
    grad_energy_dual,
    is_nondegenerate,
    sandwich_report,
)
from ..estimators.sandwich import arm_objective
from ..io import dump_json, format_float, write_csv, write_vector_csv
from ..measures import read_measure_csv
from ..ot import SolverError, duality_gap, solve_exact
from .config import ConfigError, load_experiment

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

FITTERS = {"mke": fit_mke, "wgan": fit_wgan, "wvae": fit_wvae}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _err(msg):
    print(f"mkelab: {msg}", file=sys.stderr)


def _out_dir(args, exp):
    out = Path(args.out) if args.out else exp.output_dir
    if out is None:
        out = Path("mkelab_out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _record(exp, **fields):
    return {"config": exp.echo, "config_hash": exp.hash, **fields}


def _write_fit(out, name, result, exp):
    header, rows = result.trace_columns()
    write_csv(out / f"{name}_trace.csv", header, rows)
    for key, vec in result.params.items():
        write_vector_csv(out / f"{name}_{key}.csv", vec)
    dump_json(_record(exp, result=result.to_dict()), out / f"{name}_result.json")


# -- solve --------------------------------------------------------------------

def cmd_solve(args) -> int:
    try:
        mu = read_measure_csv(args.mu)
        nu = read_measure_csv(args.nu)
    except FileNotFoundError as exc:
        _err(f"no such file: {exc.filename}")
        return EXIT_USAGE
    except ValueError as exc:
        _err(str(exc))
        return EXIT_USAGE
    if mu.dim != nu.dim:
        _err(f"dimension mismatch: {args.mu} has d={mu.dim}, {args.nu} has d={nu.dim}")
        return EXIT_USAGE
    try:
        sol = solve_exact(mu, nu, args.cost, method=args.method)
    except (SolverError, FloatingPointError) as exc:
        _err(f"solver failed: {exc}")
        return EXIT_NUMERIC
    print(",".join(format_float(v) for v in (sol.primal_value, sol.dual_value, duality_gap(sol))))
    if args.plan:
        rows = [[i, j, sol.plan[i, j]] for i, j in zip(*np.nonzero(sol.plan))]
        write_csv(args.plan, ["row", "col", "mass"], rows)
    return EXIT_OK


# -- gradcheck ----------------------------------------------------------------

def _rel(a, b):
    scale = max(np.abs(a).max(), np.abs(b).max())
    return np.abs(a - b) / scale if scale > 0 else np.zeros_like(a)


def gradcheck(exp, fd_step=None, max_retries=None, log=print):
    """Compare primal, dual and finite-difference gradients at the initial parameters.

    Re-seeds the latent sample when the optimal plan is degenerate.
    Returns (rows, max relative error, seed used, attempts).
    """
    fd_step = exp.fd_step if fd_step is None else fd_step
    max_retries = exp.max_retries if max_retries is None else max_retries
    cfg = exp.fit
    theta = cfg.generator.params
    for attempt in range(max_retries + 1):
        if attempt:
            cfg = exp.fit.replace(seed=exp.fit.seed + attempt)
        _, gp = energy_and_grad_primal(theta, cfg)
        gd = grad_energy_dual(theta, cfg)
        fd, plans = finite_difference_grad(theta, cfg, step=fd_step, return_plans=True)
        if is_nondegenerate(theta, cfg, plans):
            break
        log(f"# degenerate optimal coupling with seed {cfg.seed}; re-seeding")
    else:
        raise SolverError(f"no nondegenerate instance after {max_retries} re-seeds")
    err = np.maximum.reduce([_rel(gp, gd), _rel(gp, fd), _rel(gd, fd)])
    rows = [[k, gp[k], gd[k], fd[k], err[k]] for k in range(len(theta))]
    return rows, float(err.max()) if len(err) else 0.0, cfg.seed, attempt + 1


def cmd_gradcheck(args) -> int:
    exp = load_experiment(args.config)
    rows, worst, seed, attempts = gradcheck(exp, fd_step=args.fd_step)
    if attempts > 1:
        print(f"# re-seeded {attempts - 1} time(s); using seed {seed}")
    print("component,primal,dual,finite_diff,max_rel_err")
    for r in rows:
        print(",".join([str(r[0])] + [format_float(v) for v in r[1:]]))
    if not worst <= args.threshold:
        k = max(rows, key=lambda r: r[4])[0]
        _err(f"gradient check FAILED: component {k} relative error {format_float(worst)}"
             f" > threshold {format_float(args.threshold)}")
        return EXIT_NUMERIC
    print(f"# max relative error {format_float(worst)} <= {format_float(args.threshold)}")
    return EXIT_OK


# -- fit / sweep --------------------------------------------------------------

def cmd_fit(args) -> int:
    exp = load_experiment(args.config)
    out = _out_dir(args, exp)
    fitter = FITTERS[args.estimator]
    kwargs = {}
    if args.estimator == "wgan" and args.variant:
        kwargs["variant"] = args.variant
    if args.estimator == "wvae" and args.divergence:
        kwargs["divergence_spec"] = {"kind": args.divergence,
                                     "bandwidth": exp.fit.divergence.bandwidth}
    result = fitter(exp.fit, **kwargs)
    _write_fit(out, args.estimator, result, exp)
    print(f"final_objective={format_float(result.final_objective)}")
    print(f"true_energy={format_float(result.true_energy)}")
    if args.estimator == "wvae":
        print(f"reconstruction={format_float(result.extras['final_reconstruction'])}")
        print(f"penalty={format_float(result.extras['final_penalty'])}")
    return EXIT_OK


def _sweep_point(cfg, lam):
    # keeps lam * encoder_step fixed so every grid point stays stable
    return fit_wvae(cfg.replace(lam=lam, encoder_step=cfg.encoder_step_ * cfg.lam / lam))


def cmd_sweep(args) -> int:
    exp = load_experiment(args.config)
    out = _out_dir(args, exp)
    grid = exp.lambda_grid
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, [exp.fit] * len(grid), grid))
    else:
        results = [_sweep_point(exp.fit, lam) for lam in grid]
    rows = []
    for lam, r in zip(grid, results):
        _write_fit(out, f"wvae_lambda_{format_float(lam)}", r, exp)
        rows.append([lam, r.final_objective, r.extras["final_reconstruction"],
                     r.extras["final_penalty"], r.true_energy])
    header = ["lambda", "objective", "reconstruction", "penalty", "true_energy"]
    write_csv(out / "sweep.csv", header, rows)
    print(",".join(header))
    for row in rows:
        print(",".join(format_float(v) for v in row))
    return EXIT_OK


# -- sandwich -----------------------------------------------------------------

def cmd_sandwich(args) -> int:
    exp = load_experiment(args.config)
    out = _out_dir(args, exp)
    cfg = exp.fit
    grid = exp.raw.get("lambda_grid")
    if grid and "lambda" not in exp.raw:
        cfg = cfg.replace(lam=max(float(x) for x in grid))
    t0 = time.perf_counter()
    report = sandwich_report(cfg, jobs=args.jobs)
    rows = []
    for arm in ARMS:
        r = report["results"][arm]
        _write_fit(out, arm, r, exp)
        rows.append([arm, arm_objective(arm, r), r.true_energy, r.wallclock_s])
    write_csv(out / "sandwich.csv", ["arm", "objective", "true_energy", "wallclock_s"], rows)
    ok, bad = check_ordering(report["objectives"], args.slack)
    dump_json(_record(exp, objectives=report["objectives"], true_energies=report["true_energies"],
                      slack=args.slack, ordering_ok=ok, violations=bad,
                      wallclock_s=time.perf_counter() - t0,
                      arms={a: report["results"][a].to_dict() for a in ARMS}),
              out / "sandwich_record.json")
    print("arm,objective,true_energy,wallclock_s")
    for row in rows:
        print(",".join([row[0]] + [format_float(v) for v in row[1:]]))
    if ok:
        print(f"PASS wgan <= mke <= wvae within slack {format_float(args.slack)}")
        return EXIT_OK
    for lo, hi in bad:
        print(f"FAIL {lo}={format_float(report['objectives'][lo])} > "
              f"{hi}={format_float(report['objectives'][hi])} + {format_float(args.slack)}")
    return EXIT_NUMERIC


# -- entry point --------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment JSON (or a result record)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="parallel arms / sweep points")

    p = _Parser(prog="mkelab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="exact OT between two measure CSVs")
    s.add_argument("mu")
    s.add_argument("nu")
    s.add_argument("--cost", choices=["sqeuclidean", "euclidean"], default="sqeuclidean")
    s.add_argument("--method", choices=["auto", "simplex", "assignment"], default="auto")
    s.add_argument("--plan", help="write nonzero plan entries (row,col,mass) here")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("gradcheck", parents=[common], help="primal vs dual vs FD gradient")
    s.add_argument("--threshold", type=float, default=1e-3)
    s.add_argument("--fd-step", type=float, default=None)
    s.set_defaults(func=cmd_gradcheck)

    s = sub.add_parser("fit", parents=[common], help="fit one estimator")
    s.add_argument("estimator", choices=sorted(FITTERS))
    s.add_argument("--variant", choices=["lipschitz-neg", "c-transform"])
    s.add_argument("--divergence", choices=["mmd-gaussian", "energy-distance"])
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("sweep", parents=[common], help="WVAE over the lambda grid")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("sandwich", parents=[common], help="WGAN / MKE / WVAE ordering report")
    s.add_argument("--slack", type=float, default=1e-2)
    s.set_defaults(func=cmd_sandwich)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        _err("--jobs must be >= 1")
        return EXIT_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _err(str(exc) if exc.filename is None else f"no such file: {exc.filename}")
        return EXIT_USAGE
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return EXIT_USAGE
    except (SolverError, FloatingPointError) as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    except ValueError as exc:
        _err(f"invalid input: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
