"""Command-line front end: verification suites, vacuum solves, sewing, preferred elements.

Exit status: 0 when every check passes, 1 when a check fails, 2 on usage,
parse or truncation errors.  JSON is written with sorted keys and no
timestamps, so identical invocations give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import checks
from .coordchange import NormalizedExpansionData, preferred_element, wedge_value
from .curve import NodalSpec, form_basis, function_basis
from .errors import CutoffError, TruncationError
from .fock import frac_str
from .maya import basis_by_energy
from .vacua import FunctionalVacuum, GhostVacuum, assemble, gauge_residual, node_restrict, p1_vacuum, solve

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# the suite parameter that --max-degree sets
DEGREE_PARAM = {
    "anticomm": "max_degree",
    "virasoro": "max_degree",
    "energy": "max_degree",
    "pairings": "max_degree",
    "example": "cutoff",
    "dimension": "max_cutoff",
    "propagation": "cutoff",
    "nodal": "cutoff",
    "sewing": "test_energy",
    "fuchsian": "max_energy",
    "covariance": "max_energy",
    "preferred": "cutoff",
    "preferred_nodal": "cutoff",
}
SEEDED = {"sewing", "covariance", "preferred"}


class InputError(Exception):
    """Bad input file or unreachable request; reported on stderr with exit status 2."""


def dump(obj, out: str | None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"parse error in {path} at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}") from exc


def load_curve(path: str) -> NodalSpec:
    obj = load_json(path)
    try:
        return NodalSpec.from_json(obj)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"invalid curve in {path}: {exc}") from exc


def positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def nonnegative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


# ---------------------------------------------------------------------------
# commands


def run_verify(args) -> tuple[dict, bool]:
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        kw = {}
        if args.max_degree is not None:
            kw[DEGREE_PARAM[name]] = args.max_degree
        if name in SEEDED:
            kw["seed"] = args.seed
        reports.append(checks.SUITES[name](**kw))
    ok = all(r["pass"] for r in reports)
    return {"command": "verify", "seed": args.seed, "suites": reports, "pass": ok}, ok


def _max_residual(vac: GhostVacuum, bound: int) -> Fraction:
    worst = Fraction(0)
    for obj in form_basis(vac.curve, bound) + function_basis(vac.curve, bound):
        worst = max(worst, gauge_residual(vac, obj))
    return worst


def run_vacuum(args) -> tuple[dict, bool]:
    curve = load_curve(args.curve)
    D = args.cutoff
    dims, prev, stable = [], None, True
    for step in range(args.escalate + 1):
        sols = solve(assemble(curve, D, form_bound=D + 2 + 2 * step, function_bound=D + 1 + 2 * step))
        dims.append(len(sols))
        if len(sols) == 1 and prev is not None and len(prev) == 1 and prev[0].functional != sols[0].functional:
            stable = False
        prev = sols
    report = {"command": "vacuum", "curve": curve.to_json(), "cutoff": D, "charge_total": curve.charge_total(),
              "dimensions": dims, "stable": stable}
    ok = stable and all(d == 1 for d in dims)
    if len(prev) == 1:
        report["functional"] = prev[0].functional.to_json()
        worst = _max_residual(prev[0], args.residual_bound)
        report["gauge_residual"] = {"pole_bound": args.residual_bound, "max": frac_str(worst)}
        ok = ok and worst == 0
    else:
        report["kernel"] = [s.functional.to_json() for s in prev]
    report["pass"] = ok
    return report, ok


def _sew_setup(curve: NodalSpec):
    from .sewing import sewing_setup

    if len(curve.components) != 1 or len(curve.glue) != 1:
        raise InputError("sew expects one P^1 component with exactly one glued pair")
    (plus, minus) = curve.glue[0]
    return sewing_setup(curve.components[0], plus[1], minus[1], [s[1] for s in curve.outer])


def run_sew(args) -> tuple[dict, bool]:
    from .sewing import form_gauge_residual, function_gauge_residual, fuchsian_check, random_matrix, sew

    curve = load_curve(args.curve)
    setup = _sew_setup(curve)
    K, W = args.q_order, args.window
    if args.vacuum_cutoff is None:
        phi = p1_vacuum(setup.normalization)
    else:
        need = 2 * max(K - 1, 0) + W + 1
        sols = solve(assemble(setup.normalization, args.vacuum_cutoff))
        if len(sols) != 1:
            raise InputError(f"normalization vacuum has kernel dimension {len(sols)} at cutoff {args.vacuum_cutoff}")
        phi = FunctionalVacuum(sols[0].functional, sols[0].arity, sols[0].charge_total, args.vacuum_cutoff)
        if args.vacuum_cutoff < need:
            raise InputError(f"vacuum cutoff {args.vacuum_cutoff} is insufficient for q^{max(K - 1, 0)} "
                             f"on window {W}; raise --vacuum-cutoff to at least {need}")
    try:
        series = sew(phi, K)
        coeffs = series.materialize(W)
        rng = random.Random(args.seed)
        size = max(K, 1)
        form_res = [Fraction(0)] * K
        func_res = [Fraction(0)] * K
        for _ in range(args.matrices if K else 0):
            r = form_gauge_residual(series, setup, random_matrix(rng, size), 1, per_order=True)
            form_res = [max(a, b) for a, b in zip(form_res, r)]
            r = function_gauge_residual(series, setup, random_matrix(rng, size), 1, per_order=True)
            func_res = [max(a, b) for a, b in zip(func_res, r)]
        fuchs = fuchsian_check(series, setup, 1) if K else {"b": Fraction(0), "per_order": [], "divisible_by_q": True}
        sign = None
        if K:
            restr = node_restrict(phi, W)
            sign = 1 if coeffs[0] == restr else -1 if coeffs[0] == restr.scale(-1) else 0
    except (TruncationError, CutoffError) as exc:
        needed = getattr(exc, "needed", None)
        hint = f"at least {needed}" if needed is not None else "it"
        raise InputError(f"{exc}; raise --vacuum-cutoff to {hint} (or omit it to evaluate lazily)") from exc
    from .sewing import RESTRICTION_SIGN

    ok = (not any(form_res) and not any(func_res) and not any(fuchs["per_order"])
          and (sign is None or sign == RESTRICTION_SIGN))
    report = {
        "command": "sew",
        "curve": curve.to_json(),
        "q_order": K,
        "window": W,
        "seed": args.seed,
        "series": {"q_order": K, "cutoff": W, "coeffs": [c.to_json() for c in coeffs]},
        "restriction_sign": sign,
        "gauge_residuals": {"form": [frac_str(x) for x in form_res], "function": [frac_str(x) for x in func_res]},
        "fuchsian": {"b": frac_str(fuchs["b"]), "per_order": [frac_str(x) for x in fuchs["per_order"]],
                     "divisible_by_q": fuchs["divisible_by_q"]},
        "pass": ok,
    }
    return report, ok


def run_preferred(args) -> tuple[dict, bool]:
    obj = load_json(args.data)
    try:
        data = NormalizedExpansionData.from_json(obj)
    except ValueError as exc:
        raise InputError(f"invalid expansion data in {args.data}: {exc}") from exc
    D = args.cutoff
    try:
        phi = preferred_element(data, D)
        unstable = []
        for e in range(D + 1):
            for m in basis_by_energy(e, [data.g - 1]):
                if wedge_value(data, m, extra_depth=1) != wedge_value(data, m):
                    unstable.append(m.to_json())
    except TruncationError as exc:
        raise InputError(f"{exc}; expansion data truncated at {data.trunc} does not reach cutoff {D}") from exc
    ok = not unstable
    report = {"command": "preferred", "g": data.g, "cutoff": D, "functional": phi.to_json(),
              "minor_stable": ok, "unstable": unstable, "pass": ok}
    return report, ok


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bcghost", description="Exact bc-ghost vacua, sewing and verification suites.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=list(checks.SUITES) + ["all"])
    v.add_argument("--max-degree", type=nonnegative, default=None, help="main window parameter of the suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(run=run_verify)

    c = sub.add_parser("vacuum", help="solve the ghost vacuum of a curve")
    c.add_argument("--curve", required=True, help="curve JSON file")
    c.add_argument("--cutoff", required=True, type=positive, help="total energy cutoff")
    c.add_argument("--escalate", type=nonnegative, default=2, help="pole-bound escalations (+2 each)")
    c.add_argument("--residual-bound", type=positive, default=2, help="pole bound of the residual sweep")
    c.add_argument("--out")
    c.set_defaults(run=run_vacuum)

    s = sub.add_parser("sew", help="sew a marked P^1 along one glued pair")
    s.add_argument("--curve", required=True, help="curve JSON file with one glued pair")
    s.add_argument("--q-order", required=True, type=nonnegative, help="number of q coefficients")
    s.add_argument("--window", type=nonnegative, default=1, help="energy window of the coefficients")
    s.add_argument("--vacuum-cutoff", type=positive, default=None,
                   help="solve the normalization vacuum at this cutoff instead of evaluating lazily")
    s.add_argument("--matrices", type=nonnegative, default=2, help="random coefficient matrices per condition")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(run=run_sew)

    w = sub.add_parser("preferred", help="preferred element from normalized expansion data")
    w.add_argument("--data", required=True, help="expansion data JSON file")
    w.add_argument("--cutoff", required=True, type=nonnegative)
    w.add_argument("--out")
    w.set_defaults(run=run_preferred)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, ok = args.run(args)
    except InputError as exc:
        print(f"bcghost {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dump(report, args.out)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
