"""Command-line front end: gap edges, periodic branches, solitons, convergence sweeps, resonant sets.

Every command that writes data files also writes ``<out>.manifest.json``
listing the command, parameters, tool version, wall time and outputs.
Exit codes: 0 success, 1 numerical failure, 2 input error.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .coupled_mode import CoupledModeParams, SolitonProfile
from .errors import BranchNotPresent, CmelabError, DomainTooSmall, InvalidRegime
from .fourier_core import PotentialSpec, load_potential
from .lattice_1d import gap_edges, periodic_branch
from .lattice_2d import resonant_set
from .soliton_solver import (
    SolverConfig,
    error_vs_cm,
    partition_diagnostic,
    solve_soliton,
    soliton_sweep,
)

EXIT_OK, EXIT_NUMERICAL, EXIT_INPUT = 0, 1, 2

# Error orders of the two approximation bounds.
BOUND_ORDER = {"periodic": 1.5, "soliton": 5.0 / 6.0}

_INPUT_ERRORS = (InvalidRegime, DomainTooSmall, BranchNotPresent, ValueError, OSError)


@dataclass
class RunManifest:
    command: str
    parameters: dict
    version: str = __version__
    wall_time: float = 0.0
    outputs: list = field(default_factory=list)
    convergence: dict = field(default_factory=dict)


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return None
    atomic_write(path, text)
    return path


def _write_manifest(out, manifest):
    if out is None or out == "-":
        return
    atomic_write(_manifest_path(out), _json_text(asdict(manifest)))


def _manifest_path(out):
    root, _ = os.path.splitext(out)
    return root + ".manifest.json"


def _potential(args):
    if args.potential is not None:
        return load_potential(args.potential)
    if args.w is None:
        raise ValueError("give --potential FILE or --w VALUE")
    return PotentialSpec.single(args.n, args.w)


def _fit_slope(eps, values):
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _check_eps_list(eps):
    if any(e < 0 for e in eps):
        raise ValueError("eps values must be non-negative")


def cmd_gap_edges(args):
    _check_eps_list(args.eps)
    pot = _potential(args)
    rows = [(e, *gap_edges(args.n, e, pot)) for e in args.eps]
    text = _csv_text(["eps", "lower_omega2", "upper_omega2"], rows)
    out = _emit(args.out, text)
    return {"parameters": {"n": args.n, "eps": args.eps, "potential": pot.to_json()}, "outputs": [out] if out else []}


def _branch_point(job):
    n, Omega, sigma, eps, branch, coeffs = job
    res = periodic_branch(n, Omega, sigma, eps, branch, PotentialSpec(coeffs))
    return eps, res.c, res.amplitude, res.deviation, res.iterations, res.residual


def _run_branch(args, pot):
    _check_eps_list(args.eps)
    if any(e == 0 for e in args.eps):
        raise ValueError("periodic branches need eps > 0")
    jobs = [(args.n, args.Omega, args.sigma, e, args.branch, dict(pot.coeffs)) for e in args.eps]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            return list(pool.map(_branch_point, jobs))
    return [_branch_point(j) for j in jobs]


def cmd_periodic_branch(args):
    pot = _potential(args)
    points = _run_branch(args, pot)
    rows = [p[:4] for p in points]
    text = _csv_text(["eps", "c_seed", "amplitude", "sup_deviation"], rows)
    out = _emit(args.out, text)
    summary = {"newton_iters": [p[4] for p in points], "residuals": [p[5] for p in points]}
    if len(points) >= 2:
        summary["fitted_slope"] = _fit_slope([p[0] for p in points], [p[3] for p in points])
    params = {k: getattr(args, k) for k in ("n", "Omega", "sigma", "branch", "eps")}
    params["potential"] = pot.to_json()
    return {"parameters": params, "outputs": [out] if out else [], "convergence": summary}


def _soliton_inputs(args):
    pot = _potential(args)
    cfg = SolverConfig(K=args.K, N=args.N, tol=args.tol, max_iter=args.max_iter, edge_tol=args.edge_tol)
    return pot, cfg


def _soliton_record(res, params, cfg):
    profile = SolitonProfile(params)
    return {
        "params": asdict(params),
        "config": asdict(cfg),
        "peak": res.peak,
        "sup_error": error_vs_cm(res.field, profile),
        "partition": partition_diagnostic(res.field, params).as_dict(),
        "newton_iters": res.iterations,
        "residual": res.residual,
    }


def cmd_soliton(args):
    if args.eps <= 0:
        raise InvalidRegime("the soliton command needs eps > 0")
    pot, cfg = _soliton_inputs(args)
    params = CoupledModeParams(args.n, pot.w2(args.n), args.Omega, args.sigma, args.eps)
    res = solve_soliton(params, cfg, pot)
    record = _soliton_record(res, params, cfg)
    outputs = []
    if args.out is None or args.out == "-":
        sys.stdout.write(_json_text(record))
    else:
        root, _ = os.path.splitext(args.out)
        outputs.append(_emit(root + ".json", _json_text(record)))
        grid = _csv_text(["x", "U"], zip(res.field.x, res.field.u))
        outputs.append(_emit(root + ".csv", grid))
    conv = {"newton_iters": res.iterations, "residual": res.residual}
    return {"parameters": {**asdict(params), "config": asdict(cfg)}, "outputs": outputs, "convergence": conv}


def cmd_convergence(args):
    eps = sorted(set(args.eps), reverse=True)
    if len(eps) < 2:
        raise ValueError("a convergence study needs at least two distinct eps values (slope undefined)")
    _check_eps_list(eps)
    pot = _potential(args)
    if args.mode == "periodic":
        args.eps = eps
        points = [{"eps": p[0], "error": p[3], "newton_iters": p[4]} for p in _run_branch(args, pot)]
    else:
        _, cfg = _soliton_inputs(args)
        base = CoupledModeParams(args.n, pot.w2(args.n), args.Omega, args.sigma)
        sweep = soliton_sweep(eps, base, cfg, pot)
        points = []
        for e in eps:
            params = CoupledModeParams(base.n, base.w2n, base.Omega, base.sigma, e)
            rec = _soliton_record(sweep[e], params, cfg)
            points.append({"eps": e, "error": rec["sup_error"], "newton_iters": rec["newton_iters"],
                           "partition_ratio": rec["partition"]["ratio"]})
    order = BOUND_ORDER[args.mode]
    errors = [p["error"] for p in points]
    constant = errors[0] / eps[0] ** order
    result = {
        "mode": args.mode,
        "points": points,
        "fitted_slope": _fit_slope(eps, errors),
        "bound_order": order,
        "constant": constant,
        "bound_violations": [p["eps"] for p in points if p["error"] > constant * p["eps"] ** order * (1 + 1e-12)],
    }
    out = _emit(args.out, _json_text(result))
    params = {"mode": args.mode, "eps": eps, "n": args.n, "Omega": args.Omega, "sigma": args.sigma,
              "potential": pot.to_json()}
    return {"parameters": params, "outputs": [out] if out else [],
            "convergence": {"fitted_slope": result["fitted_slope"]}}


def cmd_resonant_set(args):
    rs = resonant_set(tuple(args.n), args.R)
    out = _emit(args.out, _json_text(rs.as_dict()))
    return {"parameters": {"n": list(args.n), "R": args.R}, "outputs": [out] if out else []}


def _add_potential(p):
    g = p.add_argument_group("potential")
    g.add_argument("--potential", metavar="FILE", help='JSON file {"coeffs": [{"m": 1, "w": 0.5}, ...]}')
    g.add_argument("--w", type=float, help="single coefficient w_2n at harmonic n (used when no file is given)")


def _add_soliton_config(p):
    d = SolverConfig()
    p.add_argument("--K", type=int, default=d.K, help=f"potential periods in the box (default {d.K})")
    p.add_argument("--N", type=int, default=d.N, help=f"grid points, a power of two (default {d.N})")
    p.add_argument("--tol", type=float, default=d.tol, help=f"Newton sup-norm tolerance (default {d.tol})")
    p.add_argument("--max-iter", type=int, default=d.max_iter, help=f"Newton iteration cap (default {d.max_iter})")
    p.add_argument("--edge-tol", type=float, default=d.edge_tol,
                   help=f"largest allowed seed envelope at the box edge relative to the peak (default {d.edge_tol})")


def build_parser():
    parser = argparse.ArgumentParser(prog="cmelab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gap-edges", help="leading-order band edges in omega^2")
    p.add_argument("--n", type=int, required=True, help="resonance index")
    p.add_argument("--eps", type=float, nargs="+", required=True)
    _add_potential(p)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_gap_edges)

    p = sub.add_parser("periodic-branch", help="periodic/antiperiodic branch from the dispersion relation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--Omega", type=float, required=True, help="detuning, omega^2 = n^2/4 + eps Omega")
    p.add_argument("--sigma", type=int, choices=(1, -1), default=1, help="nonlinearity sign (default +1)")
    p.add_argument("--branch", choices=("+", "-"), default="+", help="dispersion branch (default +)")
    p.add_argument("--eps", type=float, nargs="*", default=[])
    _add_potential(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel solves (default 1)")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_periodic_branch)

    p = sub.add_parser("soliton", help="gap soliton of the full problem")
    p.add_argument("--n", type=int, default=1, help="resonance index (default 1)")
    p.add_argument("--Omega", type=float, default=0.0, help="detuning inside the gap (default 0)")
    p.add_argument("--sigma", type=int, choices=(1, -1), default=1, help="nonlinearity sign (default +1)")
    p.add_argument("--eps", type=float, required=True)
    _add_potential(p)
    _add_soliton_config(p)
    p.add_argument("--out", help="output prefix; writes PREFIX.json and the grid PREFIX.csv (default: JSON to stdout)")
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("convergence", help="error-versus-eps study with a fitted log-log slope")
    p.add_argument("--mode", choices=("periodic", "soliton"), required=True)
    p.add_argument("--eps", type=float, nargs="+", required=True)
    p.add_argument("--n", type=int, default=1, help="resonance index (default 1)")
    p.add_argument("--Omega", type=float, default=0.0, help="detuning (default 0)")
    p.add_argument("--sigma", type=int, choices=(1, -1), default=1, help="nonlinearity sign (default +1)")
    p.add_argument("--branch", choices=("+", "-"), default="+", help="periodic mode only (default +)")
    _add_potential(p)
    _add_soliton_config(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel solves, periodic mode (default 1)")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("resonant-set", help="lattice points with |m| = |n| on the parity lattice of n")
    p.add_argument("--n", type=int, nargs=2, required=True, metavar=("N1", "N2"))
    p.add_argument("--R", type=int, default=None, help="search radius (default ceil|n|)")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_resonant_set)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        info = args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"cmelab {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CmelabError as exc:
        print(f"cmelab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    manifest = RunManifest(
        command=args.command,
        parameters=info["parameters"],
        wall_time=time.perf_counter() - start,
        outputs=info["outputs"],
        convergence=info.get("convergence", {}),
    )
    _write_manifest(getattr(args, "out", None), manifest)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
