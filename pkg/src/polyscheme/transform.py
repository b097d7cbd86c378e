"""Equivalence transformations of evaluation schemes.

Each transformation returns a new scheme whose expansion equals the input's.
The four primitives are

* :func:`scale_row`          -- rescale one product ``Q_{k+2}`` and undo it downstream,
* :func:`shift_first_column` -- add a multiple of the identity inside one factor,
* :func:`zero_b22`           -- trade ``a22`` against ``b22`` in the second product,
* :func:`adjust_row3`        -- trade entries of the third product against each other,

and :func:`normalize` chains them into the canonical form: constant free,
unit last entries, ``b22 = 0`` and ``b33 = a33 + 1``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .scheme import Scheme, SchemeError, _require_valid

__all__ = [
    "TransformError",
    "TransformRecord",
    "NormalizationReport",
    "scale_row",
    "shift_first_column",
    "zero_b22",
    "adjust_row3",
    "adjust_row3_pair",
    "row3_constraint",
    "normalize",
    "normalize_with_report",
    "apply_record",
    "is_canonical",
]

log = logging.getLogger(__name__)


class TransformError(SchemeError):
    """A transformation was called outside its hypotheses."""


@dataclass(frozen=True)
class TransformRecord:
    """One applied transformation.  ``params`` holds alpha/beta/r as applicable."""

    kind: str
    k: int = 0
    side: str = "A"
    params: dict = field(default_factory=dict)


@dataclass
class NormalizationReport:
    records: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def _close(ctx, x, target) -> bool:
    if ctx.is_exact:
        return x == target
    return ctx.abs(x - target) <= 64 * ctx.eps * max(1, ctx.abs(target))


def _check_row(s: Scheme, k: int):
    if not 1 <= k <= s.m:
        raise TransformError(f"row k={k} out of range 1..{s.m}")


def scale_row(s: Scheme, k: int, alpha, side: str = "A") -> Scheme:
    """Scale row ``k`` of ``side`` by ``alpha`` and column ``k+2`` below it by ``1/alpha``.

    ``c_{k+2}`` is divided by ``alpha`` as well, so ``Q_{k+2}`` is replaced by
    ``alpha * Q_{k+2}`` everywhere it is used.
    """
    _require_valid(s)
    _check_row(s, k)
    ctx = s.ctx
    alpha = ctx.convert(alpha)
    if alpha == 0:
        raise TransformError("scale_row needs alpha != 0")
    inv = ctx.one / alpha
    A, B, c = s.rows()
    (A if side == "A" else B)[k - 1] *= alpha
    for i in range(k, s.m):  # rows k+1..m
        A[i][k + 1] *= inv
        B[i][k + 1] *= inv
    c[k + 1] *= inv
    return s.with_rows(A, B, c)


def shift_first_column(s: Scheme, k: int, alpha, side: str = "A") -> Scheme:
    """Add ``alpha`` to the identity coefficient of row ``k`` of ``side``.

    For ``side="A"`` the product changes to ``Q_{k+2} + alpha * (B-factor)``;
    every later row and ``c`` subtracts that excess again through the
    coefficients ``b_{k,j}``.  ``side="B"`` is the mirror image, compensated
    with ``a_{k,j}``.
    """
    _require_valid(s)
    _check_row(s, k)
    ctx = s.ctx
    alpha = ctx.convert(alpha)
    if alpha == 0:
        return s
    A, B, c = s.rows()
    other = s.B[k - 1] if side == "A" else s.A[k - 1]  # the unchanged factor of row k
    (A if side == "A" else B)[k - 1][0] += alpha
    for i in range(k, s.m):  # rows k+1..m
        A[i][: k + 1] -= other * (alpha * s.A[i][k + 1])
        B[i][: k + 1] -= other * (alpha * s.B[i][k + 1])
    c[: k + 1] -= other * (alpha * s.c[k + 1])
    return s.with_rows(A, B, c)


def _require_constant_free(s: Scheme, rows: int):
    ctx = s.ctx
    for k in range(1, rows + 1):
        for side in ("A", "B"):
            v = s.get(side, k, 1)
            if not _close(ctx, v, 0):
                raise TransformError(f"precondition: {side.lower()}{k}1 = {ctx.format(v)} must be 0 (constant-free scheme)")


def _require_one(s: Scheme, side: str, k: int, j: int):
    v = s.get(side, k, j)
    if not _close(s.ctx, v, 1):
        raise TransformError(f"precondition: {side.lower()}{k}{j} = {s.ctx.format(v)} must be 1")


def _squaring_scale(s: Scheme):
    p = s.a(1, 2) * s.b(1, 2)
    if p == 0:
        raise TransformError("precondition: a12 * b12 must be nonzero")
    return p


def zero_b22(s: Scheme, alpha) -> Scheme:
    """Move ``alpha`` from ``b22`` to ``a22`` and compensate through column 3.

    Requires a constant-free scheme with ``a23 = b23 = 1``.  The second product
    changes by ``t * X^2`` with ``t = -alpha^2 + alpha (b22 - a22)``; since
    ``Q_3 = a12 b12 X^2`` the correction uses ``t / (a12 b12)``.
    """
    _require_valid(s)
    if s.m < 2:
        raise TransformError("zero_b22 needs m >= 2")
    _require_constant_free(s, s.m)
    _require_one(s, "A", 2, 3)
    _require_one(s, "B", 2, 3)
    ctx = s.ctx
    alpha = ctx.convert(alpha)
    if alpha == 0:
        return s
    t = (-alpha * alpha + alpha * (s.b(2, 2) - s.a(2, 2))) / _squaring_scale(s)
    A, B, c = s.rows()
    A[1][1] += alpha
    B[1][1] -= alpha
    for i in range(2, s.m):  # rows 3..m
        A[i][2] -= t * s.A[i][3]
        B[i][2] -= t * s.B[i][3]
    c[2] -= t * c[3]
    return s.with_rows(A, B, c)


def row3_constraint(s: Scheme, alpha, beta):
    """``z(alpha, beta)``; the third-row perturbation is an equivalence iff it vanishes."""
    d32 = s.b(3, 2) - s.a(3, 2)
    d33 = s.b(3, 3) - s.a(3, 3)
    s2 = beta * d33 - beta * beta
    return alpha * d33 + beta * d32 - 2 * alpha * beta - s2 * s.a(2, 2)


def _require_row3(s: Scheme):
    _require_valid(s)
    if s.m < 3:
        raise TransformError("adjust_row3 needs m >= 3")
    _require_constant_free(s, s.m)
    for side, k, j in (("A", 2, 3), ("A", 3, 4), ("B", 2, 3), ("B", 3, 4)):
        _require_one(s, side, k, j)
    if not _close(s.ctx, s.b(2, 2), 0):
        raise TransformError(f"precondition: b22 = {s.ctx.format(s.b(2, 2))} must be 0")


def adjust_row3_pair(s: Scheme, alpha, beta) -> Scheme:
    """Perturb row 3 by ``(+alpha, +beta)`` in A and ``(-alpha, -beta)`` in B.

    ``(alpha, beta)`` must satisfy ``row3_constraint == 0``.  The third product
    becomes ``Q_5 + t1 Q_3 + t2 Q_4`` which columns 3 and 4 of the later rows
    and ``c`` absorb.
    """
    _require_row3(s)
    ctx = s.ctx
    alpha, beta = ctx.convert(alpha), ctx.convert(beta)
    z = row3_constraint(s, alpha, beta)
    scale = max(1, ctx.abs(alpha), ctx.abs(beta)) ** 2 * max(1, *(ctx.abs(v) for v in s.A[2]), *(ctx.abs(v) for v in s.B[2]), ctx.abs(s.a(2, 2)))
    if not (z == 0 if ctx.is_exact else ctx.abs(z) <= 1e3 * ctx.eps * scale):
        raise TransformError(f"row3 constraint z(alpha, beta) = {ctx.format(z)} is not zero")
    if alpha == 0 and beta == 0:
        return s
    d32 = s.b(3, 2) - s.a(3, 2)
    d33 = s.b(3, 3) - s.a(3, 3)
    t1 = (alpha * d32 - alpha * alpha) / _squaring_scale(s)
    t2 = beta * d33 - beta * beta
    A, B, c = s.rows()
    A[2][1] += alpha
    B[2][1] -= alpha
    A[2][2] += beta
    B[2][2] -= beta
    for i in range(3, s.m):  # rows 4..m
        A[i][2] -= t1 * s.A[i][4]
        A[i][3] -= t2 * s.A[i][4]
        B[i][2] -= t1 * s.B[i][4]
        B[i][3] -= t2 * s.B[i][4]
    c[2] -= t1 * s.c[4]
    c[3] -= t2 * s.c[4]
    return s.with_rows(A, B, c)


def adjust_row3(s: Scheme, r) -> Scheme:
    """Row-3 adjustment parameterized so that afterwards ``a33 - b33 = 2 r``.

    ``beta = (b33 - a33)/2 + r`` and ``alpha`` solves ``z(alpha, beta) = 0``
    linearly (denominator ``-2 r``), so no square roots appear.
    """
    _require_row3(s)
    ctx = s.ctx
    r = ctx.convert(r)
    if r == 0:
        raise TransformError("adjust_row3 needs r != 0")
    d32 = s.b(3, 2) - s.a(3, 2)
    d33 = s.b(3, 3) - s.a(3, 3)
    a22 = s.a(2, 2)
    beta = d33 / 2 + r
    alpha = (a22 * (d33 * beta - beta * beta) - d32 * beta) / (-2 * r)
    return adjust_row3_pair(s, alpha, beta)


def normalize_with_report(s: Scheme) -> tuple[Scheme, NormalizationReport]:
    """Canonical equivalent of ``s`` plus a log of applied and skipped stages."""
    _require_valid(s)
    ctx = s.ctx
    report = NormalizationReport()
    m = s.m

    for k in range(1, m + 1):
        for side in ("A", "B"):
            v = s.get(side, k, 1)
            if v != 0:
                s = shift_first_column(s, k, -v, side)
                report.records.append(TransformRecord("first_col_shift", k, side, {"alpha": -v}))

    unit = {}
    for k in range(1, m + 1):
        for side in ("A", "B"):
            last = s.get(side, k, k + 1)
            if last == 0:
                msg = f"row_scale {side}{k}: last entry {side.lower()}{k},{k + 1} is zero (reduced row)"
                report.skipped.append(msg)
                log.info("normalize: skipped %s", msg)
                unit[side, k] = False
                continue
            unit[side, k] = True
            if last != 1:
                alpha = ctx.one / last
                s = scale_row(s, k, alpha, side)
                # pin the normalized entry, it is 1 up to rounding
                A, B, c = s.rows()
                (A if side == "A" else B)[k - 1][k] = ctx.one
                s = s.with_rows(A, B, c)
                report.records.append(TransformRecord("row_scale", k, side, {"alpha": alpha}))

    def unreduced(rows):
        return all(unit["A", k] and unit["B", k] for k in range(1, rows + 1))

    if m >= 2 and unreduced(2):
        if s.b(2, 2) != 0:
            alpha = s.b(2, 2)
            s = zero_b22(s, alpha)
            A, B, c = s.rows()
            B[1][1] = ctx.zero
            s = s.with_rows(A, B, c)
            report.records.append(TransformRecord("zero_b22", 2, "A", {"alpha": alpha}))
    elif m >= 2:
        report.skipped.append("zero_b22: rows 1-2 are reduced")
    if m >= 3 and unreduced(3):
        if s.b(3, 3) - s.a(3, 3) != 1:
            r = ctx.convert("-1/2")
            s = adjust_row3(s, r)
            A, B, c = s.rows()
            B[2][2] = A[2][2] + 1
            s = s.with_rows(A, B, c)
            report.records.append(TransformRecord("row3_adjust", 3, "A", {"r": r}))
    elif m >= 3:
        report.skipped.append("row3_adjust: rows 1-3 are reduced")
    return s, report


def normalize(s: Scheme) -> Scheme:
    """Equivalent scheme in canonical form (stages with unmet hypotheses are skipped)."""
    return normalize_with_report(s)[0]


def is_canonical(s: Scheme, tol: float = 0.0) -> list[str]:
    """Violations of the canonical structure; empty if ``s`` is canonical."""
    ctx = s.ctx

    def off(x, target):
        return ctx.abs(x - target) > tol * max(1, ctx.abs(target))

    out = []
    for k in range(1, s.m + 1):
        for side in ("A", "B"):
            if off(s.get(side, k, 1), 0):
                out.append(f"{side.lower()}{k}1 != 0")
            if off(s.get(side, k, k + 1), 1):
                out.append(f"{side.lower()}{k}{k + 1} != 1")
    if off(s.a(1, 2), 1) or off(s.b(1, 2), 1):
        out.append("row 1 is not a squaring")
    if s.m >= 2 and off(s.b(2, 2), 0):
        out.append("b22 != 0")
    if s.m >= 3 and off(s.b(3, 3), s.a(3, 3) + 1):
        out.append("b33 != a33 + 1")
    return out


_KINDS = {"row_scale", "first_col_shift", "zero_b22", "row3_adjust"}


def apply_record(s: Scheme, rec: TransformRecord) -> Scheme:
    """Replay a :class:`TransformRecord`."""
    if rec.kind == "row_scale":
        return scale_row(s, rec.k, rec.params["alpha"], rec.side)
    if rec.kind == "first_col_shift":
        return shift_first_column(s, rec.k, rec.params["alpha"], rec.side)
    if rec.kind == "zero_b22":
        return zero_b22(s, rec.params["alpha"])
    if rec.kind == "row3_adjust":
        if "r" in rec.params:
            return adjust_row3(s, rec.params["r"])
        return adjust_row3_pair(s, rec.params["alpha"], rec.params["beta"])
    raise TransformError(f"unknown transformation kind {rec.kind!r}; expected one of {sorted(_KINDS)}")
