"""Scheme files and matrix files.

A scheme file is JSON::

    {"format_version": 1, "m": 3, "field": "real", "precision_bits": 53,
     "A": [["0", "1"], ...], "B": [...], "c": [...]}

Real numbers are decimal strings (``"p/q"`` rationals are accepted on
input), complex numbers ``[re, im]`` pairs.  ``precision_bits`` is 53 for
double, the significand size for extended precision, and 0 for exact
rationals.  Extra keys (for example a fit report) are preserved by
:func:`read_scheme_file` in the returned metadata.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .scalars import ScalarContext, ScalarContextError
from .scheme import Scheme, validate

__all__ = [
    "FORMAT_VERSION",
    "SchemeFileError",
    "context_from_bits",
    "bits_of_context",
    "scheme_to_dict",
    "scheme_from_dict",
    "read_scheme_file",
    "write_scheme_file",
    "read_matrix_file",
    "format_matrix",
]

FORMAT_VERSION = 1


class SchemeFileError(ValueError):
    """Malformed scheme or matrix file; the message names the offending field."""


def context_from_bits(bits: int, field: str = "real") -> ScalarContext:
    if bits == 53:
        return ScalarContext(field, "double")
    if bits == 0:
        return ScalarContext(field, "exact")
    return ScalarContext(field, int(bits))


def bits_of_context(ctx: ScalarContext) -> int:
    return 0 if ctx.is_exact else ctx.bits


def scheme_to_dict(s: Scheme, **extra) -> dict:
    fmt = s.ctx.format
    out = {
        "format_version": FORMAT_VERSION,
        "m": s.m,
        "field": s.ctx.field,
        "precision_bits": bits_of_context(s.ctx),
        "A": [[fmt(v) for v in row] for row in s.A],
        "B": [[fmt(v) for v in row] for row in s.B],
        "c": [fmt(v) for v in s.c],
    }
    out.update(extra)
    return out


def _convert_rows(ctx, rows, name):
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SchemeFileError(f"{name}: expected a list of rows")
    out = []
    for k, row in enumerate(rows, start=1):
        try:
            out.append([ctx.convert(v) for v in row])
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SchemeFileError(f"{name} row {k}: {exc}") from None
    return out


def scheme_from_dict(data: dict, ctx: ScalarContext | None = None) -> tuple[Scheme, dict]:
    """Parse a scheme dictionary; returns ``(scheme, metadata)``.

    ``ctx`` overrides the declared field/precision (strings are then parsed
    directly at the requested precision).
    """
    for key in ("format_version", "m", "A", "B", "c"):
        if key not in data:
            raise SchemeFileError(f"missing field {key!r}")
    if data["format_version"] != FORMAT_VERSION:
        raise SchemeFileError(f"format_version: unsupported value {data['format_version']!r}")
    field = data.get("field", "real")
    if field not in ("real", "complex"):
        raise SchemeFileError(f"field: expected 'real' or 'complex', got {field!r}")
    if ctx is None:
        try:
            ctx = context_from_bits(int(data.get("precision_bits", 53)), field)
        except ValueError as exc:
            raise SchemeFileError(f"precision_bits: {exc}") from None
    A = _convert_rows(ctx, data["A"], "A")
    B = _convert_rows(ctx, data["B"], "B")
    c = _convert_rows(ctx, [data["c"]], "c")[0]
    s = Scheme(A, B, c, ctx, m=int(data["m"]))
    problems = validate(s)
    if problems:
        raise SchemeFileError("; ".join(problems))
    meta = {k: v for k, v in data.items() if k not in ("format_version", "m", "field", "precision_bits", "A", "B", "c")}
    return s, meta


def read_scheme_file(path, ctx: ScalarContext | None = None) -> tuple[Scheme, dict]:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemeFileError(f"{path}: not valid JSON ({exc})") from None
    except OSError as exc:
        raise SchemeFileError(f"{path}: {exc.strerror}") from None
    if not isinstance(data, dict):
        raise SchemeFileError(f"{path}: top level must be an object")
    return scheme_from_dict(data, ctx)


def write_scheme_file(path, s: Scheme, **extra) -> None:
    Path(path).write_text(json.dumps(scheme_to_dict(s, **extra), indent=1) + "\n")


def read_matrix_file(path, ctx: ScalarContext) -> np.ndarray:
    """Plain-text matrix: first line ``n``, then ``n`` rows of ``n`` numbers."""
    try:
        lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise SchemeFileError(f"{path}: {exc.strerror}") from None
    if not lines or len(lines[0]) != 1:
        raise SchemeFileError("matrix file: first line must hold n")
    try:
        n = int(lines[0][0])
    except ValueError:
        raise SchemeFileError(f"matrix file: bad size {lines[0][0]!r}") from None
    rows = lines[1:]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise SchemeFileError(f"matrix file: expected {n} rows of {n} numbers")
    try:
        return ctx.array(rows)
    except (ValueError, ZeroDivisionError, ScalarContextError) as exc:
        raise SchemeFileError(f"matrix file: {exc}") from None


def format_matrix(M: np.ndarray, ctx: ScalarContext) -> str:
    def one(v):
        f = ctx.format(v)
        return f if isinstance(f, str) else f"({f[0]}{'' if f[1].startswith('-') else '+'}{f[1]}j)"

    lines = [str(M.shape[0])]
    lines += [" ".join(one(v) for v in row) for row in M]
    return "\n".join(lines)
