"""Command-line front end: ``combpc generate | solve | analyze``.

Reports are JSON with sorted keys; apart from the timing fields two runs
with the same arguments produce identical reports.

Exit codes: 0 success, 1 input/usage error, 2 no convergence (or a failed
certificate for ``analyze``), 3 breakdown.
"""

import argparse
import json
import sys
import time

import numpy as np

from . import amg
from .combined import CombinedPreconditioner, Mode
from .errors import FactorizationError, IndefiniteError, MatrixMarketError, SetupError
from .ilu import ichol
from .krylov import SolveConfig, pcg
from .mmio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .problems import ProblemSpec, generate, parse_field
from .smoothers import Smoother
from .spectral import certify_condition_bound

__all__ = ["PRECONDITIONERS", "build_preconditioner", "main"]

PRECONDITIONERS = (
    "none", "ilu0", "iluk", "amg-gs", "amg-ilu0", "combined", "additive", "wrong-order",
)
TIMING_KEYS = ("setup_seconds", "solve_seconds")

EXIT_OK, EXIT_INPUT, EXIT_NOCONV, EXIT_BREAKDOWN = 0, 1, 2, 3


def build_preconditioner(A, name, ilu_level=0, amg_theta=0.25, amg_cycles=None):
    """Construct a roster preconditioner for a symmetric ``A``.

    ``amg_cycles=None`` means 2 V-cycles for the standalone AMG entries and
    1 inside the combined forms.  The incomplete factorization used by every
    entry is IC(``ilu_level``) (``ilu0`` forces level 0).

    Returns ``(operator or None, info dict)``.
    """
    if name not in PRECONDITIONERS:
        raise ValueError(f"unknown preconditioner {name!r}")
    info = {"precond": name}
    if name == "none":
        return None, info
    if name == "ilu0":
        return ichol(A, 0), info
    if name == "iluk":
        info["ilu_level"] = int(ilu_level)
        return ichol(A, ilu_level), info
    standalone = name.startswith("amg")
    cycles = amg_cycles if amg_cycles is not None else (2 if standalone else 1)
    if name == "amg-gs":
        H = amg.setup(A, theta=amg_theta, cycles=cycles)
        info["amg"] = H.stats()
        return H, info
    if name == "amg-ilu0":
        H = amg.setup(A, theta=amg_theta, cycles=cycles, finest_smoother=ichol(A, 0))
        info["amg"] = H.stats()
        return H, info
    H = amg.setup(A, theta=amg_theta, cycles=cycles)
    B = ichol(A, ilu_level)
    info["amg"] = H.stats()
    info["ilu_level"] = int(ilu_level)
    mode = {"combined": Mode.MULTIPLICATIVE, "additive": Mode.ADDITIVE,
            "wrong-order": Mode.WRONG_ORDER}[name]
    return CombinedPreconditioner(A, H, B, mode), info


def _parser():
    p = argparse.ArgumentParser(prog="combpc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("generate", help="write a model problem (matrix, rhs, description)")
    g.add_argument("--dim", type=int, default=2, choices=(1, 2, 3))
    g.add_argument("--cells", type=str, default="16",
                   help="nodes per axis: one count, or a comma list per axis")
    g.add_argument("--field", default="constant:1", help="e.g. checkerboard:1,1e8 or lognormal:0,2")
    g.add_argument("--reaction", type=float, default=0.0)
    g.add_argument("--rhs", default="auto",
                   choices=("auto", "manufactured", "discrete", "ones", "random"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output prefix")

    s = sub.add_parser("solve", help="solve with PCG and write a report")
    s.add_argument("--matrix", required=True)
    s.add_argument("--rhs", help="right-hand side file; seeded random vector when omitted")
    s.add_argument("--precond", default="none", choices=PRECONDITIONERS)
    s.add_argument("--ilu-level", type=int, default=0)
    s.add_argument("--amg-theta", type=float, default=0.25)
    s.add_argument("--amg-cycles", type=int, default=None)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--maxit", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--report", help="JSON report path")
    s.add_argument("--verbose", action="store_true", help="print the residual every iteration")

    a = sub.add_parser("analyze", help="dense spectral certificate for a smoother/IC pair")
    a.add_argument("--matrix", required=True)
    a.add_argument("--smoother", default="gs", choices=("gs", "vcycle"))
    a.add_argument("--ilu-level", type=int, default=0)
    a.add_argument("--amg-theta", type=float, default=0.25)
    a.add_argument("--amg-cycles", type=int, default=1)
    a.add_argument("--no-scale", action="store_true", help="do not rescale B by 1/m0")
    a.add_argument("--report", help="JSON report path")
    return p


def _write_json(obj, path):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cells(text, dim):
    parts = [int(c) for c in text.split(",")]
    if len(parts) == 1:
        parts = parts * dim
    if len(parts) != dim:
        raise ValueError(f"--cells lists {len(parts)} counts for dimension {dim}")
    return tuple(parts)


def _cmd_generate(args):
    spec = ProblemSpec(cells=_cells(args.cells, args.dim), field=parse_field(args.field),
                       reaction=args.reaction, rhs=args.rhs, seed=args.seed)
    prob = generate(spec)
    write_matrix_market(prob.A, args.out + ".mtx", comment=spec.to_json(sort_keys=True))
    write_vector(prob.f, args.out + ".rhs")
    _write_json(spec.to_dict(), args.out + ".json")
    print(f"wrote {args.out}.mtx ({prob.A.n_rows} rows, {prob.A.nnz} nonzeros), "
          f"{args.out}.rhs, {args.out}.json")
    return EXIT_OK


def _cmd_solve(args):
    A = read_matrix_market(args.matrix)
    if not A.symmetric:
        A_sym = A.symmetrized()
        if np.abs((A_sym.to_scipy() - A.to_scipy())).max() != 0:
            raise ValueError("matrix is not symmetric")
        A = A_sym
    if args.rhs:
        f = read_vector(args.rhs)
    else:
        f = np.random.default_rng(args.seed).standard_normal(A.n_rows)
    if f.size != A.n_rows:
        raise ValueError(f"rhs has {f.size} entries, matrix has {A.n_rows} rows")
    cfg = SolveConfig(rel_tol=args.tol, max_iters=args.maxit)
    config = {
        "matrix": args.matrix, "rhs": args.rhs, "precond": args.precond,
        "ilu_level": args.ilu_level, "amg_theta": args.amg_theta,
        "amg_cycles": args.amg_cycles, "tol": args.tol, "maxit": args.maxit, "seed": args.seed,
    }
    report = {"config": config, "n": A.n_rows, "nnz": A.nnz}

    def breakdown(exc, stage):
        report.update(status="breakdown", stage=stage, error=str(exc), converged=False)
        _write_json(report, args.report)
        print(f"breakdown during {stage}: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN

    t0 = time.perf_counter()
    try:
        M, info = build_preconditioner(A, args.precond, args.ilu_level,
                                       args.amg_theta, args.amg_cycles)
    except (FactorizationError, SetupError) as exc:
        return breakdown(exc, "setup")
    setup_seconds = time.perf_counter() - t0
    report["preconditioner"] = info

    callback = None
    if args.verbose:
        def callback(k, rel, x):
            print(f"iter {k:5d}  rel. residual {rel:.3e}")
    try:
        _, rep = pcg(A, f, M, cfg, callback=callback, setup_seconds=setup_seconds)
    except IndefiniteError as exc:
        report["iteration"] = exc.iteration
        return breakdown(exc, "solve")
    report.update(rep.to_dict())
    report["status"] = "converged" if rep.converged else "not-converged"
    _write_json(report, args.report)
    print(f"{args.precond}: {report['status']} in {rep.iterations} iterations, "
          f"rel. residual {rep.final_residual:.3e}, setup {rep.setup_seconds:.3f}s, "
          f"solve {rep.solve_seconds:.3f}s")
    return EXIT_OK if rep.converged else EXIT_NOCONV


def _cmd_analyze(args):
    A = read_matrix_market(args.matrix)
    if not A.symmetric:
        raise ValueError("analyze needs a symmetric matrix file")
    if args.smoother == "gs":
        S = Smoother(A, "gs-forward")
    else:
        S = amg.setup(A, theta=args.amg_theta, cycles=args.amg_cycles)
    B = ichol(A, args.ilu_level)
    cert = certify_condition_bound(S, B, A, scale=not args.no_scale, strict=False)
    out = {
        "config": {"matrix": args.matrix, "smoother": args.smoother,
                   "ilu_level": args.ilu_level, "amg_theta": args.amg_theta,
                   "amg_cycles": args.amg_cycles, "scale": not args.no_scale},
        "certificate": cert.to_dict(),
        "passed": cert.passed,
    }
    _write_json(out, args.report)
    if args.report:
        print(f"kappa(B A) = {cert.kappa_B:.6g}, kappa(S~ A) = {cert.kappa_S:.6g}, "
              f"kappa(B_co A) = {cert.kappa_combined:.6g}, passed = {cert.passed}")
    return EXIT_OK if cert.passed else EXIT_NOCONV


def main(argv=None):
    args = _parser().parse_args(argv)
    handler = {"generate": _cmd_generate, "solve": _cmd_solve, "analyze": _cmd_analyze}
    try:
        return handler[args.subcommand](args)
    except (OSError, MatrixMarketError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
