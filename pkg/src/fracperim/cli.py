"""Command-line entry point: ``fracperim {gen,perimeter,dim,asym,check}``.

Exit codes: 0 success, 1 I/O error, 2 domain error, 3 unrigorous result
when rigor was required (or a failed check).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from pathlib import Path

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_UNRIGOROUS = 0, 1, 2, 3


class Unrigorous(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# argument helpers

def _s_value(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _float_list(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


_NAMED = re.compile(r"^(koch|dendrite|sponge)(\d+)$")


def resolve_set(ref: str):
    """A set from a JSON path or a builtin name (koch5, dendrite3, square, segment, appendixA:0.5)."""
    from .geometry.io import load_set
    from .geometry.sets import Polyline, unit_square
    m = _NAMED.match(ref)
    if m:
        from .fractals import recursive_set
        return recursive_set(m.group(1), {}, int(m.group(2)))
    if ref == "square":
        return unit_square()
    if ref == "segment":
        return Polyline([[0.0, 0.0], [1.0, 0.0]], closed=False)
    if ref.startswith("appendixA"):
        from .perimeter import AppendixASet
        a = float(ref.split(":", 1)[1]) if ":" in ref else 0.5
        return AppendixASet(a)
    path = Path(ref)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {ref}")
    return load_set(path)


def resolve_omega(ref: str | None, dim: int):
    """Window from ``full``, ``ball:R[:cx,cy]``, ``box:x0,y0,x1,y1``, ``interval:lo,hi`` or a path."""
    from .geometry.sets import FULL_LINE, FULL_PLANE, IntervalUnion, box, regular_polygon
    if ref is None or ref == "full":
        return FULL_LINE if dim == 1 else FULL_PLANE
    kind, _, rest = ref.partition(":")
    if kind == "ball":
        parts = rest.split(":")
        R = float(parts[0])
        c = _float_list(parts[1]) if len(parts) > 1 else [0.0] * dim
        if dim == 1:
            return IntervalUnion([(c[0] - R, c[0] + R)])
        return regular_polygon(c, R, 1024)
    if kind == "box":
        x0, y0, x1, y1 = _float_list(rest)
        return box((x0, y0), (x1, y1))
    if kind == "interval":
        lo, hi = _float_list(rest)
        return IntervalUnion([(lo, hi)])
    return resolve_set(ref)


def _dim_of(E) -> int:
    from .geometry.sets import IntervalUnion
    from .perimeter import AppendixASet
    return 1 if isinstance(E, (IntervalUnion, AppendixASet)) else 2


def _policy(args):
    from .kernel.params import QuadraturePolicy
    return QuadraturePolicy(target_rel_error=args.tol)


# ---------------------------------------------------------------------------
# output

def _metadata(args) -> dict:
    from . import __version__
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return {"version": __version__, "config": cfg}


def _write_text(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit_json(doc: dict, path: str | None):
    from .geometry.io import dump_json
    _write_text(dump_json(doc), path)


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _emit_table(args, rows, summary: dict):
    """CSV to --csv (if given) and a JSON summary with metadata to --out."""
    if args.csv:
        _write_text(_csv_text(rows), args.csv)
    doc = dict(summary)
    doc["metadata"] = _metadata(args)
    if not args.csv:
        doc["rows"] = [dict(zip(rows[0], r)) for r in rows[1:]]
    _emit_json(doc, args.out)


# ---------------------------------------------------------------------------
# commands

def cmd_gen(args) -> int:
    from .fractals import build_recursive, exploded_fractal, get_spec, koch_snowflake
    from .perimeter import AppendixASet
    kind = args.kind.replace("_", "-")
    if kind == "koch":
        doc = koch_snowflake(args.level).to_json()
    elif kind == "exploded":
        doc = exploded_fractal(args.b, args.sigma, args.n, args.levels).to_json()
    elif kind in ("sierpinski-dendrite", "dendrite", "sponge"):
        spec = get_spec(kind)
        build = build_recursive(spec, args.level)
        doc = {"kind": "multipolygon",
               "items": [{"vertices": p.vertices.tolist(), "holes": [h.tolist() for h in p.holes]}
                         for _, _, p in build.pieces]}
    elif kind == "appendixA":
        doc = AppendixASet(args.a).to_json()
    else:
        raise ValueError(f"unknown kind {args.kind!r}")
    doc["metadata"] = _metadata(args)
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_perimeter(args) -> int:
    from .kernel.params import KernelParams, check_s
    from .perimeter import frac_perimeter
    s = check_s(args.s)
    E = resolve_set(args.set)
    n = _dim_of(E)
    Omega = resolve_omega(args.omega, n)
    br = frac_perimeter(E, Omega, KernelParams(s, n), _policy(args))
    if args.require_rigorous and not br.rigorous:
        raise Unrigorous("result is not rigorous")
    doc = br.to_record()
    doc["metadata"] = _metadata(args)
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_dim(args) -> int:
    import numpy as np
    from . import dimension as D
    if args.method == "threshold":
        from .fractals import get_spec
        spec = get_spec(args.spec)
        grid = _float_list(args.s_grid) if args.s_grid else None
        fit = D.dimF_threshold(spec, grid, args.levels, args.family, _policy(args))
        summary = fit.summary()
        summary["spot_check"] = fit.spot_check
        summary["dimension"] = spec.n - fit.s_star
        _emit_table(args, fit.to_csv_rows(), summary)
        return EXIT_OK
    G = resolve_set(args.set)
    if args.method == "box":
        ser = D.box_count_series(G, D.delta_grid(args.deltas))
        slope, diag = D.minkowski_dimension_boxes(ser)
        _emit_table(args, ser.to_csv_rows(), {"slope": slope, "method": "box", **diag})
        return EXIT_OK
    # content: |N_rho(boundary)| / rho^(2 - r)
    rhos = D.delta_grid(args.deltas)
    bnd = D.boundary_geometry(G)
    rows = [("rho", "content", "content_err")]
    for rho in np.sort(rhos):
        v = D.tubular_volume_polygonal(bnd, float(rho)).scale(float(rho) ** (args.r - 2.0))
        rows.append((float(rho), v.value, v.error))
    _emit_table(args, rows, {"r": args.r, "method": "content"})
    return EXIT_OK


def cmd_asym(args) -> int:
    from .asymptotics import DEFAULT_S_GRID, asymptotic_scan
    E = resolve_set(args.set)
    Omega = resolve_omega(args.omega, _dim_of(E))
    grid = _float_list(args.s_grid) if args.s_grid else DEFAULT_S_GRID
    scan = asymptotic_scan(E, Omega, grid, _policy(args))
    summary = scan.summary()
    summary["increasing"] = scan.increasing
    summary["notes"] = scan.notes
    _emit_table(args, scan.to_csv_rows(), summary)
    return EXIT_OK


def cmd_check(args) -> int:
    from .checks import run_checks
    results = run_checks(quick=args.quick)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_UNRIGOROUS


# ---------------------------------------------------------------------------
# parser

def _common(p):
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.add_argument("--tol", type=float, default=1e-9, help="target relative quadrature error")
    p.add_argument("--seed", type=int, default=0, help="seed for optional randomized cross-checks")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracperim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a set description")
    g.add_argument("kind", help="koch | exploded | sierpinski-dendrite | sponge | appendixA")
    g.add_argument("--level", type=int, default=3)
    g.add_argument("--levels", type=int, default=4, help="number of levels for exploded sets")
    g.add_argument("--b", type=int, default=2)
    g.add_argument("--sigma", type=float, default=0.5)
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--a", type=float, default=0.5)
    _common(g)
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("perimeter", help="local/nonlocal s-perimeter")
    p.add_argument("--set", required=True, help="JSON path or builtin name")
    p.add_argument("--s", type=_s_value, required=True)
    p.add_argument("--omega", default="full")
    p.add_argument("--require-rigorous", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_perimeter)

    d = sub.add_parser("dim", help="fractal dimension estimates")
    d.add_argument("method", choices=["box", "threshold", "content"])
    d.add_argument("--set", default="koch5")
    d.add_argument("--spec", default="koch")
    d.add_argument("--levels", type=int, default=7)
    d.add_argument("--family", choices=["lower", "upper"], default="lower")
    d.add_argument("--s-grid", default=None, help="comma list of s values")
    d.add_argument("--deltas", default="3^-1..3^-6")
    d.add_argument("--r", type=float, default=1.0, help="exponent for the content method")
    d.add_argument("--csv", default=None, help="CSV table output path")
    _common(d)
    d.set_defaults(func=cmd_dim)

    a = sub.add_parser("asym", help="scan (1-s) P_s as s -> 1")
    a.add_argument("--set", required=True)
    a.add_argument("--omega", default="full")
    a.add_argument("--s-grid", default=None)
    a.add_argument("--csv", default=None)
    _common(a)
    a.set_defaults(func=cmd_asym)

    c = sub.add_parser("check", help="run the invariant suites")
    c.add_argument("--quick", action="store_true")
    _common(c)
    c.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(args.threads))
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Unrigorous as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNRIGOROUS
    except (ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
