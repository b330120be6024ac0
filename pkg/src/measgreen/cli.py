"""Command-line front end.

Every command prints one report with the keys ``command``, ``inputs``,
``results``, ``tolerances`` and ``status``.  Exit status is 0 on success,
1 for a mathematical obstruction and 2 for bad input (including a system
that fails validation).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import assembly, greens, io, reference, relations
from .errors import (InputError, MeasGreenError, NotPurelyAtomic, Obstruction, SpecInvalid,
                     Unsolvable)
from .model import generic_lambda, require_valid, validate
from .propagate import RightHandSide, balanced_value, residual
from .tolerances import Tolerances


def parse_complex(text: str) -> complex:
    """``"re,im"`` (or a single real number) to complex."""
    parts = [p.strip() for p in text.split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")


def parse_points(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point list {text!r}") from None


def _load(args, inputs):
    """Problem from the positional file or the built-in example."""
    if getattr(args, "builtin", None):
        inputs.update(builtin=args.builtin, M=args.M)
        return io.Problem(reference.example_spec(args.M).spec)
    if not args.file:
        raise io.ParseError("a problem file or --builtin example is required")
    inputs["file"] = args.file
    return io.load_problem(args.file)


def _tol(args) -> Tolerances:
    t = Tolerances()
    return t.with_rank(args.tol) if args.tol is not None else t


def _sample_points(spec):
    pts = []
    for j in range(spec.N + 1):
        lo, hi = spec.gap_bounds(j)
        pts.append(0.5 * (lo + hi))
    pts.extend(at.x for at in spec.atoms)
    return sorted(pts)


# --------------------------------------------------------------------------
# commands


def cmd_validate(args, tol, inputs):
    problem = _load(args, inputs)
    rep = validate(problem.spec, tol)
    if not rep.passed:
        raise _Failed({"passed": False, "violations": rep.violations},
                      SpecInvalid(rep))
    return {"passed": True, "violations": []}


def cmd_solve(args, tol, inputs):
    problem = _load(args, inputs)
    spec = require_valid(problem.spec, tol)
    lam = args.lam if args.lam is not None else generic_lambda(spec, seed=args.seed, tol=tol)
    inputs["lambda"] = lam
    f = problem.rhs
    if args.rhs:
        with open(args.rhs) as fh:
            r = json.load(fh)
        f = RightHandSide(io.complex_array(r.get("gaps", np.zeros((spec.N + 1, spec.n)).tolist()),
                                           (spec.N + 1, spec.n)),
                          io.complex_array(r.get("atoms", np.zeros((spec.N, spec.n)).tolist()),
                                           (spec.N, spec.n)))
    f = RightHandSide.zeros(spec) if f is None else f
    try:
        sol = assembly.solve_nonhomogeneous(spec, lam, f, tol)
    except Unsolvable as exc:
        raise _Failed({"witness": exc.witness.T, "obstruction": exc.obstruction}, exc)
    path = sol.path()
    pts = _sample_points(spec)
    results = {
        "kernel_dim": sol.dimension,
        "n_tilde": assembly.n_tilde(spec, lam, tol),
        "samples": {"x": pts, "u": [balanced_value(path, x) for x in pts]},
        "residual": residual(path).max,
    }
    return results


def cmd_deficiency(args, tol, inputs):
    problem = _load(args, inputs)
    spec = require_valid(problem.spec, tol)
    results = {"dim_L0": int(relations.l0_coefficients(spec, tol).shape[1])}
    if spec.N:
        lam = generic_lambda(spec, seed=args.seed, tol=tol)
        results["lambda"] = lam
        results["n_tilde"] = assembly.n_tilde(spec, lam, tol)
    else:
        results["lambda"] = None
        results["n_tilde"] = None
    if spec.purely_atomic:
        defs = relations.deficiency_pair(spec, tol)
        results["n_plus"], results["n_minus"] = defs.plus.n, defs.minus.n
    else:
        results["n_plus"] = results["n_minus"] = None
        results["note"] = "w has gap densities; deficiency indices need purely atomic w"
    return results


def _restriction_for(spec, boundary, tol):
    defs = relations.deficiency_pair(spec, tol)
    if boundary is not None:
        bd = relations.boundary_data(spec, boundary, defs, tol)
        how = "file"
    else:
        bd = relations.self_adjoint_conditions(spec, defs=defs, tol=tol)
        how = "identity" if defs.d else "none needed"
    r = relations.restriction_from_conditions(spec, bd, tol)
    if not r.self_adjoint:
        raise InputError(f"boundary conditions give a {r.classification} restriction")
    return r, how, defs


def cmd_greens(args, tol, inputs):
    problem = _load(args, inputs)
    spec = require_valid(problem.spec, tol)
    if not spec.purely_atomic:
        raise NotPurelyAtomic("Green's kernels need purely atomic w")
    lam = args.lam if args.lam is not None else 2j
    inputs["lambda"] = lam
    inputs["points"] = args.points
    boundary = problem.boundary
    if args.boundary:
        with open(args.boundary) as fh:
            boundary = np.array([io.complex_array(row) for row in json.load(fh)], dtype=complex)
    r, how, defs = _restriction_for(spec, boundary, tol)
    ctx = greens.ResolventContext.build(spec, r.T, lam, tol)
    table = greens.greens_table(ctx, args.points)
    results = {"kernel": table.to_json(), "boundary_conditions": how,
               "n_plus": defs.plus.n, "n_minus": defs.minus.n}
    if inputs.get("builtin") and args.points:
        M = args.M
        disp = {}
        for bal in (True, False):
            ref = np.array([[reference.example_kernel(M, x, k + 1, lam, bal)
                             for k in range(spec.N)] for x in table.points])
            mask = np.abs(table.K) > 1e-12
            disp["balanced" if bal else "unbalanced"] = (
                float(np.median(np.abs(ref[mask] / table.K[mask]))) if mask.any() else None)
        results["displayed_kernel_ratio"] = disp
    return results


def cmd_verify(args, tol, inputs):
    from .verify import run_suite

    problem = _load(args, inputs)
    inputs.update(seed=args.seed, trials=args.trials)
    rep = validate(problem.spec, tol)
    if not rep.passed:
        raise _Failed({"passed": False, "violations": rep.violations},
                      SpecInvalid(rep))
    M = args.M if getattr(args, "builtin", None) else None
    suite = run_suite(problem.spec, seed=args.seed, trials=args.trials, tol=tol, example_M=M)
    out = suite.as_dict()
    if not suite.passed:
        failed = [c.name for c in suite.checks if not c.passed]
        raise _Failed(out, _CheckFailure("failed checks: " + ", ".join(failed)))
    return out


class _CheckFailure(Obstruction):
    pass


class _Failed(Exception):
    """Carries partial results alongside the error that ended a command."""

    def __init__(self, results, error):
        super().__init__(str(error))
        self.results, self.error = results, error


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "deficiency": cmd_deficiency,
    "greens": cmd_greens,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", nargs="?", help="JSON problem file")
    common.add_argument("--builtin", choices=["example"], help="use the built-in periodic example")
    common.add_argument("--M", type=int, default=2, help="periods of the built-in example")
    common.add_argument("--tol", type=float, default=None, help="rank tolerance")
    common.add_argument("--output", choices=["text", "json"], default="text")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="measgreen", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the structural hypotheses")
    s = sub.add_parser("solve", parents=[common], help="solution set of the equation")
    s.add_argument("--lambda", dest="lam", type=parse_complex, default=None)
    s.add_argument("--rhs", default=None, help="JSON file with 'atoms' and 'gaps' values")
    sub.add_parser("deficiency", parents=[common], help="deficiency indices and dim L0")
    g = sub.add_parser("greens", parents=[common], help="Green's kernel table")
    g.add_argument("--lambda", dest="lam", type=parse_complex, default=None)
    g.add_argument("--points", type=parse_points, default=[])
    g.add_argument("--boundary", default=None, help="JSON file with condition rows")
    v = sub.add_parser("verify", parents=[common], help="run the property suite")
    v.add_argument("--trials", type=int, default=5)
    return p


def _text(obj, prefix="") -> list[str]:
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{prefix}{k}:")
                lines.extend(_text(v, prefix + "  "))
            else:
                lines.append(f"{prefix}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{prefix}- [{i}]")
                lines.extend(_text(v, prefix + "  "))
            else:
                lines.append(f"{prefix}- {json.dumps(v)}")
    return lines


def _flat(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) or
                                       (isinstance(x, list) and len(x) == 2 and
                                        all(isinstance(t, (int, float)) for t in x))
                                       for x in v)


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    tol = _tol(args)
    inputs = {}
    report = {"command": args.command, "inputs": inputs, "results": {}, "tolerances": tol.as_dict()}
    try:
        report["results"] = COMMANDS[args.command](args, tol, inputs)
        code, status = 0, {"code": 0, "state": "ok"}
    except _Failed as exc:
        report["results"] = exc.results
        code = 1 if isinstance(exc.error, Obstruction) else 2
        status = {"code": code, "state": "obstruction" if code == 1 else "input-error",
                  "error": type(exc.error).__name__, "message": str(exc.error)}
    except MeasGreenError as exc:
        code = 1 if isinstance(exc, Obstruction) else 2
        status = {"code": code, "state": "obstruction" if code == 1 else "input-error",
                  "error": type(exc).__name__, "message": str(exc)}
    except (OSError, ValueError, KeyError, TypeError) as exc:
        code = 2
        status = {"code": 2, "state": "input-error", "error": type(exc).__name__,
                  "message": str(exc)}
    report["status"] = status
    doc = io.to_jsonable(report)
    if args.output == "json":
        stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        stdout.write("\n".join(_text(doc)) + "\n")
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
