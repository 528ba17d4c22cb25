"""Command-line entry point: ``satflux <command> [options]``.

Exit codes: 0 success or answered question, 2 usage or domain error,
3 continuation or solver failure, 4 no classical solution, 5 numerical
instability of the time stepper.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    NoClassicalSolution,
    NoConvergence,
    NonFinite,
    NoRoot,
    SatfluxError,
    SeedFailure,
)
from .io import RunManifest, write_csv
from .local_bifurcation import bifurcation_point_curve, classify
from .model import ModelParams
from .pde import SchemeConfig, count_interfaces, max_slope, preset_initial, run
from .phase_plane import (
    confinement_values,
    equilibria,
    heteroclinic_lambda,
    homoclinic_lambda,
    integrate_orbit,
    linearized_period,
)
from .presets import PRESETS, RunSpec, get_preset
from .time_map import blowup_boundary, blowup_lambda, solve_stationary, trace_branch

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_NO_CLASSICAL, EXIT_UNSTABLE = 0, 2, 3, 4, 5


def _versions():
    import numba
    import scipy

    return {"satflux": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "format": 1}


def _emit(lines):
    for key, value in lines:
        if isinstance(value, float):
            value = "%.10g" % value
        print(f"{key}: {value}")


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args):
    res = classify(args.k, args.L, args.M)
    if args.json:
        print(json.dumps(res.as_dict(), sort_keys=True))
        return EXIT_OK
    rows = [("kind", res.kind.value), ("k", res.k)]
    if res.lambda_k is not None:
        rows += [("lambda_k", res.lambda_k),
                 ("L_star", res.critical_length if res.critical_length is not None else "none"),
                 ("h_yyy", res.h_yyy), ("h_lambda_y", res.h_lambda_y),
                 ("degenerate", str(res.degenerate).lower())]
    else:
        rows.append(("note", "f'(M) <= 0: the trivial state never loses stability"))
    _emit(rows)
    return EXIT_OK


def cmd_phase(args):
    eq = equilibria(args.a)
    rows = [("u_l", eq.u_l), ("c", eq.c), ("u_r", eq.u_r)]
    if args.a == 0.0:
        lam_h = heteroclinic_lambda()
        rows.append(("lambda_heteroclinic", lam_h))
    else:
        lam_h = homoclinic_lambda(args.a)
        rows.append(("lambda_h", lam_h))
    if args.lam is not None:
        rows.append(("lambda", args.lam))
        rows.append(("linearized_period", linearized_period(args.lam, args.a)))
        if args.lam > lam_h:
            u_star, u_star_star = confinement_values(args.lam, args.a)
            rows += [("u_star", u_star), ("u_star_star", u_star_star)]
        else:
            rows.append(("confinement", "loop intact (lambda <= threshold)"))
    _emit(rows)
    if args.orbits:
        if args.lam is None:
            raise ValueError("--orbits needs --lambda")
        ids, xs, us, vs = [], [], [], []
        for i, u0 in enumerate(np.linspace(eq.u_l, eq.c, args.orbit_count + 2)[1:-1]):
            orb = integrate_orbit(args.lam, args.a, float(u0), x_max=args.orbit_length)
            ids += [i] * orb.x.size
            xs.append(orb.x)
            us.append(orb.u)
            vs.append(orb.v)
        write_csv(args.orbits, {"orbit": np.array(ids), "x": np.concatenate(xs),
                                "u": np.concatenate(us), "v": np.concatenate(vs)},
                  header={"a": args.a, "lambda": args.lam})
    return EXIT_OK


def _branch_footer(branch):
    footer = [("termination", branch.termination.value, "lambda_n",
               branch.lambda_n if branch.lambda_n is not None else "none")]
    if branch.endpoint is not None:
        footer.append(("endpoint", "lambda", branch.endpoint.lam, "a", branch.endpoint.a))
    footer += [("fold", "lambda", f.lam, "a", f.a) for f in branch.folds]
    return footer


def _branch_columns(branch):
    pts = branch.points
    return {"lambda": np.array([p.lam for p in pts]), "a": np.array([p.a for p in pts]),
            "u_min": np.array([p.u_min for p in pts]), "u_at_0": np.array([p.u_at_0 for p in pts]),
            "amplitude": np.array([p.amplitude for p in pts])}


def cmd_branch(args):
    branch = trace_branch(args.L, args.M, args.n, lambda_range=(1e-3, args.lambda_max))
    write_csv(args.out, _branch_columns(branch), header={"L": args.L, "M": args.M, "n": args.n},
              footer=_branch_footer(branch))
    if args.out not in (None, "-"):
        rows = [("termination", branch.termination.value)]
        if branch.lambda_n is not None:
            rows += [(f"lambda_{args.n}", branch.lambda_n), ("a_end", branch.endpoint.a)]
        rows += [("fold", f.lam) for f in branch.folds]
        _emit(rows)
    return EXIT_OK


def cmd_curves(args):
    header = {"L": args.L, "which": args.which}
    if args.which == "ab":
        lo = math.pi**2 / args.L**2
        lam = np.linspace(lo, args.lambda_max, args.points)
        a = np.array([bifurcation_point_curve(x, args.L) for x in lam])
        write_csv(args.out, {"lambda": lam, "a": a}, header=header)
    elif args.which == "astar":
        a_grid = np.linspace(0.0, args.a_max, args.points)
        curve = blowup_boundary(args.L, a_grid)
        write_csv(args.out, {"lambda": np.array([c[0] for c in curve]),
                             "a": np.array([c[1] for c in curve])}, header=header)
    else:
        if args.M is None:
            raise _Usage("--which atilde requires --M")
        branch = trace_branch(args.L, args.M, 1, lambda_range=(1e-3, args.lambda_max))
        cols = _branch_columns(branch)
        lam, a = cols["lambda"], cols["a"]
        if branch.endpoint is not None:
            lam = np.append(lam, branch.endpoint.lam)
            a = np.append(a, branch.endpoint.a)
        header["M"] = args.M
        write_csv(args.out, {"lambda": lam, "a": a}, header=header, footer=_branch_footer(branch))
    return EXIT_OK


def cmd_boundary_curve(args):
    a_grid = np.linspace(args.a_min, args.a_max, args.points)
    lam = np.array([blowup_lambda(float(a), args.L) for a in a_grid])
    write_csv(args.out, {"a": a_grid, "lambda_star": lam}, header={"L": args.L})
    return EXIT_OK


def cmd_stationary(args):
    prof = solve_stationary(args.lam, args.L, args.M, args.n, samples=args.samples)
    header = {"L": args.L, "M": args.M, "lambda": args.lam, "n": args.n, "a": prof.a,
              "u_min": prof.u_min, "u_max": prof.u_max, "energy_C": prof.energy_C,
              "residual": prof.residual}
    write_csv(args.out, {"x": prof.x, "u": prof.u, "v": prof.v}, header=header)
    if args.out not in (None, "-"):
        _emit([("a", prof.a), ("u_min", prof.u_min), ("u_max", prof.u_max), ("residual", prof.residual)])
    return EXIT_OK


def _slug(text):
    return re.sub(r"[^A-Za-z0-9.+-]+", "_", text).strip("_")


def _simulate(specs, args, command, parameters):
    out_dir = Path(args.out_dir)
    t0 = time.perf_counter()
    outputs, results = [], []
    for spec in specs:
        state = spec.initial_state(args.N)
        cfg = SchemeConfig(N=state.N, dt=args.dt, t_end=args.t_end, equilibrium_tol=args.tol,
                           dt_factor=args.dt_factor)
        res = run(state, cfg)
        stem = _slug(spec.label)
        head = {"L": spec.params.L, "M": spec.params.M, "lambda": spec.params.lam, "N": state.N}
        p_init = write_csv(out_dir / f"{stem}_initial.csv", {"x": state.x, "u": state.values},
                           header={**head, "t": state.time})
        p_final = write_csv(out_dir / f"{stem}_final.csv", {"x": res.final.x, "u": res.final.values},
                            header={**head, "t": res.final.time, "reason": res.reason.value})
        outputs += [str(p_init), str(p_final)]
        results.append({"label": spec.label, "reason": res.reason.value, "steps": res.steps,
                        "dt": res.dt, "final_time": res.final.time, "final_rate": res.rate,
                        "initial_mass": state.mass, "final_mass": res.final.mass,
                        "mass_drift": res.mass_drift, "max_mass_drift": res.max_mass_drift,
                        "max_slope": max_slope(res.final), "interfaces": count_interfaces(res.final)})
        print(f"{spec.label}: {res.reason.value} t={res.final.time:.6g} steps={res.steps} "
              f"mass={res.final.mass:.12g} drift={res.mass_drift:.3e}")
    manifest = RunManifest(command, parameters, outputs, _versions(),
                           round(time.perf_counter() - t0, 3), results)
    manifest.outputs.append(str(out_dir / "manifest.json"))
    manifest.write(out_dir / "manifest.json")
    return EXIT_OK


def _sim_parameters(args, specs):
    return {"specs": [{"label": s.label, "L": s.params.L, "M": s.params.M, "lambda": s.params.lam,
                       "N": args.N or s.N, "init": s.init, "init_args": s.init_args} for s in specs],
            "dt": args.dt, "dt_factor": args.dt_factor, "t_end": args.t_end, "tol": args.tol}


def cmd_experiment(args):
    specs = get_preset(args.preset)
    return _simulate(specs, args, f"experiment --preset {args.preset}", _sim_parameters(args, specs))


def cmd_simulate(args):
    if args.preset:
        return cmd_experiment(args)
    missing = [f for f in ("L", "M", "lam") if getattr(args, f) is None]
    if missing:
        raise _Usage("simulate needs --preset or all of --L --M --lambda")
    params = ModelParams(args.L, args.M, args.lam)
    init_args = {}
    if args.init == "tanh_step":
        init_args = {"A": args.A, "B": args.B, "gamma": args.gamma, "sharpness": args.sharpness}
    elif args.init == "cosine_perturbation":
        init_args = {"amplitude": args.amplitude, "k": args.mode}
    spec = RunSpec(args.label or args.init, params, args.N or 500, args.init, init_args)
    preset_initial(spec.init, params, spec.N, **init_args)  # validate before running
    return _simulate([spec], args, "simulate", _sim_parameters(args, [spec]))


# ---------------------------------------------------------------------------
# parser


class _Usage(Exception):
    pass


def _add_sim_flags(p):
    p.add_argument("--N", type=int, default=None, help="cells (default: preset value or 500)")
    p.add_argument("--dt", type=float, default=None, help="time step (default: stability-scaled)")
    p.add_argument("--dt-factor", type=float, default=0.4, help="fraction of min(dx^2, 1/(lam max|f'|))")
    p.add_argument("--t-end", type=float, default=1e3)
    p.add_argument("--tol", type=float, default=1e-8, help="equilibrium threshold on max|du/dt|")
    p.add_argument("--out-dir", default="satflux-run")


def build_parser():
    parser = argparse.ArgumentParser(prog="satflux", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key=value file; command-line flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="direction of the k-th pitchfork from u = M")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("phase", help="equilibria, loop break-up and confinement values")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--orbits", help="CSV of sample orbits started on (u_l, c)")
    p.add_argument("--orbit-count", type=int, default=9)
    p.add_argument("--orbit-length", type=float, default=10.0)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("branch", help="trace the branch of n-inflection classical solutions")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--lambda-max", type=float, default=1e3)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("curves", help="a_b, a* or the monotone branch in the (lambda, a) plane")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--M", type=float)
    p.add_argument("--which", choices=("ab", "astar", "atilde"), required=True)
    p.add_argument("--lambda-max", type=float, default=20.0)
    p.add_argument("--a-max", type=float, default=0.3)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("boundary-curve", help="lambda*(a) where the g(c) = 0 level has length L")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--a-min", type=float, default=0.0)
    p.add_argument("--a-max", type=float, default=0.3)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--out")
    p.set_defaults(func=cmd_boundary_curve)

    p = sub.add_parser("stationary", help="classical stationary profile at one lambda")
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--samples", type=int, default=401, help="samples per monotone piece")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("experiment", help="run a published preset")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    _add_sim_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("simulate", help="run the time stepper from a preset or explicit data")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--L", type=float)
    p.add_argument("--M", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--init", default="tanh_step",
                   choices=("tanh_step", "two_interface", "constant", "cosine_perturbation"))
    p.add_argument("--A", type=float, default=0.3)
    p.add_argument("--B", type=float, default=-0.5)
    p.add_argument("--gamma", type=float, default=0.4)
    p.add_argument("--sharpness", type=float, default=1000.0)
    p.add_argument("--amplitude", type=float, default=1e-3)
    p.add_argument("--mode", type=int, default=1)
    p.add_argument("--label")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def _config_tokens(path):
    tokens = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _Usage(f"config line is not key=value: {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-") if key not in ("L", "M", "N", "A", "B") else "--" + key
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens += [flag, value]
    return tokens


def _splice_config(argv):
    """Insert config-file flags right after the command so later flags win."""
    argv = list(argv)
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
            del argv[i:i + 2]
            break
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            del argv[i]
            break
    if path is None:
        return argv
    commands = {"classify", "phase", "branch", "curves", "boundary-curve", "stationary",
                "experiment", "simulate"}
    for i, tok in enumerate(argv):
        if tok in commands:
            return argv[:i + 1] + _config_tokens(path) + argv[i + 1:]
    return argv


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(_splice_config(argv))
    except (_Usage, OSError) as exc:
        print(f"satflux: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _Usage as exc:
        print(f"satflux: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SeedFailure as exc:
        print(f"satflux: seed failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except NoClassicalSolution as exc:
        lam_n = getattr(exc, "lambda_n", None)
        extra = f" (lambda_n = {lam_n:.6g})" if lam_n is not None else ""
        print(f"satflux: no classical solution: {exc}{extra}", file=sys.stderr)
        return EXIT_NO_CLASSICAL
    except NonFinite as exc:
        print(f"satflux: numerical instability: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (NoConvergence, NoRoot) as exc:
        print(f"satflux: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, SatfluxError) as exc:
        print(f"satflux: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
