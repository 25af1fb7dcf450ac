"""Command-line driver: ``lfball <command> [options]``.

Every command prints a JSON report (or, with ``--format csv``, a CSV table)
to stdout or to ``--out``. Exit codes: 0 on success (an invalid map is a
result, not a failure), 2 for unreadable or inconsistent input, 3 when a
computation runs out of precision or does not converge and 4 when a
guaranteed inequality fails.
"""

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import documents
from .ball import sample_ball
from .bcd import (
    BCDMap,
    ITERATE_CSV_HEADER,
    bcd_to_ball,
    closed_form_iterate,
    counterexample_map,
    restricted_defect_seq,
    validate_bcd,
    x_limit,
)
from .dynamics import classify, defect_ratio_sequence, orbit, restrictedness_report
from .errors import (
    DomainError,
    InvariantViolation,
    LfballError,
    NotSelfMapError,
    NumericalFailure,
    PrecisionExhaustedError,
    SchemaError,
)
from .lfm import check_self_map, compose, dbr_gram, kernel_factorization, validate
from .schur_agler import (
    DBRKernel,
    SpaceParams,
    composition_identity_residual,
    gram_norm_lower_bound,
    gram_positivity,
    norm_bounds,
    predicted_spectral_radius,
    s_from_log_defects,
    spectral_radius_sequence,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_INVARIANT = 4


class Result:
    """What a command hands back: report fields plus an optional CSV table."""

    def __init__(self, results, parameters=None, digest_source=None, table=None, warnings=None):
        self.results = results
        self.parameters = parameters or {}
        self.digest_source = digest_source
        self.table = table
        self.warnings = warnings or []


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return documents.encode_complex(obj)
    return obj


def _load_ball_map(path):
    doc = documents.load(path)
    phi = doc.ball_map()
    try:
        phi = validate(phi)
    except NotSelfMapError as exc:
        raise SchemaError(f"map is not a self-map of the ball ({exc})", "payload") from exc
    return doc, phi


def _beta(args, m):
    return float(m) if args.beta is None else args.beta


def cmd_validate(args):
    doc = documents.load(args.document)
    obj = doc.build()
    if isinstance(obj, BCDMap):
        report = validate_bcd(obj, seed=args.seed)
        results = {"kind": "bcd", **report.to_dict()}
        if report.valid:
            phi = bcd_to_ball(obj)
            results["ball_scale"] = phi.scale
    else:
        report = check_self_map(obj, npoints=args.points, seed=args.seed)
        results = {"kind": "lfm", **report.to_dict()}
    return Result(results, {"points": args.points, "seed": args.seed}, doc.to_json())


def cmd_classify(args):
    doc, phi = _load_ball_map(args.document)
    cls = classify(phi)
    return Result(cls.to_dict(), {}, doc.to_json())


def _specrad_table(orb, s):
    ratios = defect_ratio_sequence(orb)
    defects = orb.defects
    rows = [[n, defects[n], s[n - 1], ratios[n - 1]] for n in range(1, len(s) + 1)]
    return ["n", "defect", "s_n", "ratio"], rows


def cmd_specrad(args):
    doc, phi = _load_ball_map(args.document)
    N = args.iters or 500
    beta = _beta(args, phi.m)
    params = SpaceParams(phi.m, beta)
    cls = classify(phi)
    warnings = []
    method = "siegel" if cls.kind == "hyperbolic" else "ball"
    try:
        s, orb = spectral_radius_sequence(phi, params, N, method=method, return_orbit=True)
    except PrecisionExhaustedError as exc:
        warnings.append(str(exc))
        s = exc.partial
        orb = orbit(phi, None, N, method=method, zeta=cls.dw_point if method == "siegel" else None)
    predicted = predicted_spectral_radius(cls.kind, cls.alpha, beta)
    last = float(s[-1]) if len(s) else float("nan")
    results = {
        "kind": cls.kind,
        "alpha": cls.alpha,
        "dw_point": documents.encode_vector(cls.dw_point),
        "predicted_radius": predicted,
        "last_n": int(len(s)),
        "last_s": last,
        "relative_gap": abs(last - predicted) / predicted,
        "method": method,
        "truncated": bool(len(s) < N),
    }
    if orb.n >= 1:
        results["last_ratio"] = float(defect_ratio_sequence(orb)[-1])
        if phi.m > 2 and cls.kind != "elliptic":
            warnings.append("for m > 2 the ratio limit is an empirical value; it is not known to equal alpha")
    table = _specrad_table(orb, s)
    return Result(results, {"beta": beta, "iters": N}, doc.to_json(), table, warnings)


def _points(m, n, seed):
    return sample_ball(n, m, seed=seed)


def cmd_kernel_check(args):
    docs = []
    maps = []
    for path in args.documents:
        doc, phi = _load_ball_map(path)
        docs.append(doc.to_json())
        maps.append(phi)
    m = maps[0].m
    if any(p.m != m for p in maps):
        raise SchemaError("all documents must have the same m", "m")
    phi = maps[0]
    for psi in maps[1:]:
        phi = compose(phi, psi)
    Z = _points(m, args.points, args.seed)
    report = gram_positivity(DBRKernel(phi), Z, tol=args.tol)
    fact = kernel_factorization(phi)
    residual = float(np.abs(fact.factored_gram(Z) - dbr_gram(phi, Z)).max())
    results = {"gram": report.to_dict(), "factorization_residual": residual, "maps": len(maps)}
    if len(maps) > 1:
        tail = maps[1]
        for psi in maps[2:]:
            tail = compose(tail, psi)
        results["composition_identity_residual"] = composition_identity_residual(maps[0], tail, Z)
    params = {"points": args.points, "seed": args.seed, "tol": args.tol}
    return Result(results, params, docs[0] if len(docs) == 1 else docs)


def cmd_normbounds(args):
    doc, phi = _load_ball_map(args.document)
    beta = _beta(args, phi.m)
    params = SpaceParams(phi.m, beta)
    Z = np.vstack([np.zeros((1, phi.m)), _points(phi.m, max(args.points - 1, 0), args.seed)])
    nb = norm_bounds(phi(np.zeros(phi.m)), params)
    g = gram_norm_lower_bound(phi, params, Z)
    if not (nb.lower * (1.0 - 1e-9) <= g <= nb.upper + 1e-9):
        raise InvariantViolation(f"norm sandwich failed: {nb.lower} <= {g} <= {nb.upper} is false")
    results = {**nb.to_dict(), "gram_lower_bound": g}
    return Result(results, {"beta": beta, "points": args.points, "seed": args.seed}, doc.to_json())


def cmd_counterexample(args):
    N = args.iters or 100
    bmap = counterexample_map(args.alpha, args.m)
    beta = _beta(args, args.m)
    ts = restricted_defect_seq(bmap, N)
    phi = bcd_to_ball(bmap)
    zeta = np.zeros(args.m, dtype=complex)
    zeta[0] = 1.0
    orb = orbit(phi, None, N, method="siegel", zeta=zeta)
    restricted = restrictedness_report(orb, zeta)
    ratios = defect_ratio_sequence(orb)
    s = s_from_log_defects(orb.log_defects, beta)
    x = x_limit(bmap)
    iterates = [closed_form_iterate(bmap, n) for n in range(1, N + 1)]
    results = {
        "alpha": args.alpha,
        "x_limit": documents.encode_complex(x),
        "x_last": documents.encode_complex(iterates[-1].x),
        "x_gap": abs(iterates[-1].x - x),
        "t_first": ts[0],
        "t_min": min(ts),
        "all_t_exceed_one": all(t > 1.0 for t in ts),
        "special_limit_zero": restricted.special_limit_zero,
        "restricted_bounded": restricted.restricted_bounded,
        "last_ratio": float(ratios[-1]) if orb.n >= 1 else None,
        "ratio_gap": abs(float(ratios[-1]) - args.alpha) if orb.n >= 1 else None,
        "last_s": float(s[-1]) if len(s) else None,
        "predicted_radius": predicted_spectral_radius("hyperbolic", args.alpha, beta),
        "orbit_steps": orb.n,
    }
    header = ["n", "t_n"] + ITERATE_CSV_HEADER[1:] + ["s_n", "ratio"]
    rows = []
    for n in range(1, N + 1):
        row = [n, ts[n - 1]] + iterates[n - 1].csv_row()[1:]
        row += [s[n - 1], ratios[n - 1]] if n <= orb.n else [float("nan"), float("nan")]
        rows.append(row)
    params = {"alpha": args.alpha, "m": args.m, "iters": N, "beta": beta}
    return Result(results, params, params, (header, rows))


def cmd_factor(args):
    doc, phi = _load_ball_map(args.document)
    fact = kernel_factorization(phi, tol=args.tol)
    Z = _points(phi.m, args.points, args.seed)
    results = {
        "scale": phi.scale,
        "X": documents.encode_matrix(fact.X),
        "C": documents.encode_vector(fact.C),
        "D": documents.encode_complex(fact.D),
        "numerator_residual": fact.numerator_residual(Z),
        "kernel_residual": float(np.abs(fact.factored_gram(Z) - dbr_gram(phi, Z)).max()),
    }
    return Result(results, {"points": args.points, "seed": args.seed}, doc.to_json())


COMMON_DEFAULTS = {"seed": 42, "beta": None, "iters": None, "points": 50, "tol": 1e-9, "out": None, "format": "json"}


def _common(parser, suppress=False):
    """Shared flags, accepted both before and after the subcommand.

    The subcommand copies use ``SUPPRESS`` so that a flag given before the
    subcommand is not overwritten by the subparser's default.
    """

    def default(name):
        return argparse.SUPPRESS if suppress else COMMON_DEFAULTS[name]

    parser.add_argument("--seed", type=int, default=default("seed"), help="seed for all sampling (default 42)")
    parser.add_argument("--beta", type=float, default=default("beta"), help="space exponent beta >= 1 (default m)")
    parser.add_argument("-n", "--iters", type=int, default=default("iters"), help="number of iterations")
    parser.add_argument("--points", type=int, default=default("points"), help="number of sample points (default 50)")
    parser.add_argument("--tol", type=float, default=default("tol"), help="positivity tolerance (default 1e-9)")
    parser.add_argument("--out", default=default("out"), help="write output to this path instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], default=default("format"))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lfball",
        description="Experiments with linear fractional self-maps of the unit ball.",
    )
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check that a document describes a self-map")
    p.add_argument("document")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", help="elliptic / parabolic / hyperbolic")
    p.add_argument("document")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("specrad", help="spectral radius sequence of the composition operator")
    p.add_argument("document")
    p.set_defaults(func=cmd_specrad)

    p = sub.add_parser("kernel-check", help="Gram positivity of the map's kernel; several maps are composed")
    p.add_argument("documents", nargs="+")
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("normbounds", help="norm bounds and a sampled lower bound")
    p.add_argument("document")
    p.set_defaults(func=cmd_normbounds)

    p = sub.add_parser("counterexample", help="orbit that fails to approach restrictedly")
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("-m", type=int, default=2)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("factor", help="dump the kernel factorization")
    p.add_argument("document")
    p.set_defaults(func=cmd_factor)

    for action in sub.choices.values():
        _common(action, suppress=True)
    return parser


def _format_csv(table):
    header, rows = table
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, (int, np.integer)) else f"{float(v):.17g}" for v in row])
    return buf.getvalue()


def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else k, obj[k], out)
    else:
        out.append([prefix, json.dumps(obj)])


def render(command, result, args, wall_time):
    if args.format == "csv":
        table = result.table
        if table is None:
            rows = []
            _flatten("", _clean(result.results), rows)
            table = (["key", "value"], rows)
            buf = io.StringIO()
            csv.writer(buf, lineterminator="\n").writerows([table[0]] + table[1])
            return buf.getvalue()
        return _format_csv(table)
    report = {
        "command": command,
        "input_digest": documents.digest(_clean(result.digest_source)),
        "parameters": result.parameters,
        "results": result.results,
        "warnings": result.warnings,
        "wall_time": wall_time,
    }
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        result = args.func(args)
    except SchemaError as exc:
        return _fail(EXIT_INPUT, exc)
    except NumericalFailure as exc:
        return _fail(EXIT_NUMERICAL, exc)
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, exc)
    except (DomainError, LfballError, OSError) as exc:
        return _fail(EXIT_INPUT, exc)
    text = render(args.command, result, args, time.perf_counter() - start)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _fail(code, exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    diagnostics = getattr(exc, "diagnostics", None)
    if diagnostics:
        payload["diagnostics"] = diagnostics
    sys.stderr.write(json.dumps(_clean(payload), sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
