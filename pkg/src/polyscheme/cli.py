"""Command-line interface: ``polyscheme <subcommand> ...``.

Exit codes: 0 success, 2 input error, 3 no convergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis, catalog, fixtures, io, solve, transform
from .poly import Polynomial
from .scalars import ScalarContext, ScalarContextError, parse_context
from .scheme import SchemeError, apply_to_matrix, expand, structural_degree

EXIT_OK, EXIT_INPUT, EXIT_NOCONV = 0, 2, 3


class InputError(Exception):
    pass


def _ctx_from_args(args, default: ScalarContext | None = None) -> ScalarContext | None:
    if args.precision is None and args.field is None:
        return default
    field = args.field or (default.field if default else "real")
    prec = args.precision or "double"
    try:
        return parse_context(prec, field)
    except ValueError as exc:
        raise InputError(f"--precision/--field: {exc}") from None


def _load(path, args):
    ctx = _ctx_from_args(args)
    return io.read_scheme_file(path, ctx)[0]


def _emit_scheme(s, args, **extra):
    text = json.dumps(io.scheme_to_dict(s, **extra), indent=1) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ------------------------------------------------------------


def cmd_expand(args):
    s = _load(args.scheme, args)
    p = expand(s)
    d = p.effective_degree()
    lines = [_fmt(s.ctx, v) for v in p.coeffs[: d + 1]]
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _fmt(ctx, v) -> str:
    f = ctx.format(v)
    return f if isinstance(f, str) else json.dumps(f)


def cmd_eval(args):
    s = _load(args.scheme, args)
    X = io.read_matrix_file(args.matrix, s.ctx)
    P, count = apply_to_matrix(s, X)
    sys.stdout.write(io.format_matrix(P, s.ctx) + "\n")
    print(f"mult_count={count}", file=sys.stderr)
    return EXIT_OK


def cmd_transform(args):
    s = _load(args.scheme, args)
    kind = args.kind
    if kind in ("row_scale", "first_col_shift"):
        if args.k is None or args.alpha is None:
            raise InputError(f"{kind} needs --k and --alpha")
        fn = transform.scale_row if kind == "row_scale" else transform.shift_first_column
        out = fn(s, args.k, args.alpha, args.side)
    elif kind == "zero_b22":
        alpha = args.alpha if args.alpha is not None else s.b(2, 2)
        out = transform.zero_b22(s, alpha)
    else:
        r = args.r if args.r is not None else "-1/2"
        out = transform.adjust_row3(s, r)
    _emit_scheme(out, args)
    return EXIT_OK


def cmd_normalize(args):
    s = _load(args.scheme, args)
    out, report = transform.normalize_with_report(s)
    for msg in report.skipped:
        print(f"skipped: {msg}", file=sys.stderr)
    _emit_scheme(out, args)
    return EXIT_OK


def cmd_dim(args):
    ctx = _ctx_from_args(args)
    if ctx is not None and ctx.is_exact:
        raise InputError("dim needs floating-point arithmetic")
    print(analysis.dimension_estimate(args.m, args.trials, ctx, args.seed or 0, args.threads))
    return EXIT_OK


def _read_coeffs(spec: str, ctx: ScalarContext, scale) -> Polynomial:
    """Target spec: ``exp-taylor:<degree>``, a scheme file (``scheme:<path>``) or a coefficient file."""
    if spec.startswith("exp-taylor:"):
        try:
            deg = int(spec.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad target {spec!r}") from None
        return fixtures.exp_taylor(deg, scale if scale is not None else 1, ctx)
    if spec.startswith("scheme:"):
        s = io.read_scheme_file(spec.split(":", 1)[1], ctx)[0]
        p = expand(s)
        vals = list(p.coeffs)
    else:
        try:
            tokens = [ln.strip() for ln in Path(spec).read_text().splitlines() if ln.strip()]
        except OSError as exc:
            raise InputError(f"{spec}: {exc.strerror}") from None
        try:
            vals = [ctx.convert(json.loads(t) if t.startswith("[") else t) for t in tokens]
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"{spec}: {exc}") from None
    if scale is not None:
        sc = ctx.convert(scale)
        vals = [v * sc**k for k, v in enumerate(vals)]
    return Polynomial(vals, ctx)


def cmd_solve12(args):
    ctx = _ctx_from_args(args) or parse_context("double", "real")
    if args.coeffs:
        raw = [t.strip() for t in args.coeffs.split(",")]
        p = [ctx.convert(t) for t in raw]  # a plain list keeps the count check
    else:
        p = _read_coeffs(args.target, ctx, args.scale)
    s = solve.solve_degree12(p, ctx)
    _emit_scheme(s, args)
    return EXIT_OK


def cmd_catalog(args):
    if args.all_patterns:
        entries = []
        for m in range(2, args.m_max + 1):
            entries.extend(catalog.enumerate_structures(m, args.r_max))
        text = catalog.entries_to_csv(entries)
    else:
        text = catalog.chart_to_csv(catalog.chart_data(args.m_max, args.r_max))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_fit(args):
    ctx = _ctx_from_args(args) or parse_context("double", "real")
    target = _read_coeffs(args.target, ctx, args.scale)
    try:
        pattern = fixtures.named_pattern(args.pattern)
    except SchemeError as exc:
        raise InputError(str(exc)) from None
    if args.mask:
        mask = analysis.ParamMask.from_names(pattern.m, args.mask.split(","))
    else:
        mask = fixtures.named_mask(args.pattern)
    start = None
    if args.start:
        start = io.read_scheme_file(args.start, ctx)[0]
    d = structural_degree(pattern)
    if target.effective_degree() != d:
        raise InputError(f"target degree {target.effective_degree()} differs from the structural degree {d} of {args.pattern}")
    opts = solve.FitOptions(
        residual_tolerance=args.tol,
        restarts=args.restarts,
        seed=args.seed or 0,
        ctx=ctx,
        threads=args.threads,
        max_iterations=args.max_iterations,
    )
    s, report = solve.fit(target, pattern, mask, start, opts)
    rep = report.to_dict()
    _emit_scheme(s, args, converged=report.converged, report=rep)
    print(json.dumps(rep), file=sys.stderr)
    return EXIT_OK if report.converged else EXIT_NOCONV


def cmd_verify(args):
    """Golden fixtures: the eps example, the m=5 degree-20 scheme and small dimensions."""
    results = []
    exact = parse_context("exact")
    for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 10)):
        p = expand(fixtures.epsilon_example(eps, exact))
        want = Polynomial([0] * 7 + [1, f"{eps.numerator}/{eps.denominator}"], exact)
        results.append((f"eps-example eps={eps}", p == want))
    s = fixtures.exp8_scheme()
    tgt = fixtures.exp_taylor(20, 8)
    got = expand(s).padded(21)
    rel = max(abs(float(a - b)) / abs(float(b)) for a, b in zip(got, tgt.coeffs))
    results.append(("exp8 scheme expansion rel 1e-8", rel <= 1e-8))
    cond = analysis.fitting_condition(s, tgt.coeffs, fixtures.exp8_mask())
    results.append((f"exp8 scheme condition {cond:.3g} within 2x of 8.1e2", 810 / 2 <= cond <= 810 * 2))
    for m in (3, 4, 5):
        r = analysis.dimension_estimate(m, 20, seed=args.seed or 0)
        results.append((f"dimension m={m} is {m * m}", r == m * m))
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(ok for _, ok in results) else 1


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", help="double, exact or bits:<n> (default: from file, else double)")
    common.add_argument("--field", choices=["real", "complex"])
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="polyscheme", description="Matrix polynomial evaluation schemes.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("expand", parents=[common], help="print monomial coefficients of a scheme")
    sp.add_argument("scheme")
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("eval", parents=[common], help="apply a scheme to a matrix file")
    sp.add_argument("scheme")
    sp.add_argument("matrix")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("transform", parents=[common], help="apply one equivalence transformation")
    sp.add_argument("scheme")
    sp.add_argument("--kind", required=True, choices=["row_scale", "first_col_shift", "zero_b22", "row3_adjust"])
    sp.add_argument("--k", type=int)
    sp.add_argument("--alpha")
    sp.add_argument("--r")
    sp.add_argument("--side", choices=["A", "B"], default="A")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("normalize", parents=[common], help="canonical equivalent scheme")
    sp.add_argument("scheme")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("dim", parents=[common], help="Jacobian rank of random canonical schemes")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--trials", type=int, default=20)
    sp.set_defaults(func=cmd_dim)

    sp = sub.add_parser("solve12", parents=[common], help="four-product scheme for a degree-12 polynomial")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--coeffs", help="comma-separated a0,...,a12")
    g.add_argument("--target", help="exp-taylor:12, scheme:<file> or a coefficient file")
    sp.add_argument("--scale")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_solve12)

    sp = sub.add_parser("catalog", parents=[common], help="reduction structures as CSV")
    sp.add_argument("--m-max", type=int, default=7)
    sp.add_argument("--r-max", type=int, default=7)
    sp.add_argument("--all-patterns", action="store_true", help="one row per structure instead of per degree")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("fit", parents=[common], help="fit a reduced structure to a target polynomial")
    sp.add_argument("target", help="exp-taylor:<degree>, scheme:<file> or a coefficient file")
    sp.add_argument("pattern", help=f"one of {sorted(fixtures.NAMED_PATTERNS)} or m<m>:<pattern-id>")
    sp.add_argument("--start")
    sp.add_argument("--scale")
    sp.add_argument("--mask", help="comma-separated free entries, e.g. a42,b55,c3")
    sp.add_argument("--restarts", type=int, default=25)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-iterations", type=int, default=500)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("verify", parents=[common], help="run the golden fixture checks")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, io.SchemeFileError, SchemeError, ScalarContextError, solve.SolveError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
