"""Evaluation schemes ``(A, B, c)`` with a fixed number of multiplications.

A scheme with ``m`` rows computes::

    Q_1 = I,  Q_2 = X
    Q_{k+2} = (sum_j a_{k,j} Q_j) (sum_j b_{k,j} Q_j),   j = 1..k+1
    p(X)    = sum_j c_j Q_j,                             j = 1..m+2

Row ``k`` (1-based) of ``A`` and ``B`` has exactly ``k + 1`` entries, so the
rows are stored ragged.  All public indices are 1-based, matching the usual
``a_{k,j}`` notation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly import Polynomial, convolve
from .scalars import DOUBLE, ScalarContext, ScalarContextError

__all__ = [
    "Scheme",
    "SchemeError",
    "ReductionPattern",
    "expand",
    "q_polynomials",
    "apply_to_matrix",
    "structural_degree",
    "validate",
]


class SchemeError(ValueError):
    """Raised for malformed schemes or patterns."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class Scheme:
    """Immutable coefficient triplet ``(A, B, c)``.

    Parameters
    ----------
    A, B : sequences of rows; row ``k`` should hold ``k + 1`` scalars.
    c : sequence of ``m + 2`` scalars.
    ctx : scalar context for every entry.
    m : number of multiplications; defaults to ``len(A)``.

    Shape is not enforced here so that :func:`validate` can report every
    problem at once; the numerical routines refuse invalid schemes.
    """

    __slots__ = ("m", "A", "B", "c", "ctx")

    def __init__(self, A, B, c, ctx: ScalarContext = DOUBLE, m: int | None = None):
        self.ctx = ctx
        self.m = len(A) if m is None else int(m)
        self.A = tuple(_frozen(ctx.array(list(row))) for row in A)
        self.B = tuple(_frozen(ctx.array(list(row))) for row in B)
        self.c = _frozen(ctx.array(list(c)))

    # -- construction helpers -------------------------------------------
    @classmethod
    def zeros(cls, m: int, ctx: ScalarContext = DOUBLE) -> "Scheme":
        rows = [[0] * (k + 1) for k in range(1, m + 1)]
        return cls(rows, rows, [0] * (m + 2), ctx)

    @classmethod
    def from_padded(cls, A, B, c, ctx: ScalarContext = DOUBLE) -> "Scheme":
        """Build from ``m x (m+1)`` rectangles, ignoring the upper triangle."""
        A = np.asarray(A, dtype=object)
        B = np.asarray(B, dtype=object)
        m = A.shape[0]
        return cls(
            [A[k - 1, : k + 1] for k in range(1, m + 1)],
            [B[k - 1, : k + 1] for k in range(1, m + 1)],
            c,
            ctx,
        )

    def to_padded(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``m x (m+1)`` copies of A and B (zeros above the Hessenberg band) and c."""
        A = self.ctx.zeros((self.m, self.m + 1))
        B = self.ctx.zeros((self.m, self.m + 1))
        for k in range(self.m):
            A[k, : k + 2] = self.A[k]
            B[k, : k + 2] = self.B[k]
        return A, B, self.c.copy()

    def rows(self) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
        """Writable copies of the rows, for building modified schemes."""
        return [r.copy() for r in self.A], [r.copy() for r in self.B], self.c.copy()

    @classmethod
    def _from_arrays(cls, A, B, c, ctx, m) -> "Scheme":
        s = cls.__new__(cls)
        s.ctx = ctx
        s.m = m
        s.A = tuple(_frozen(np.asarray(r)) for r in A)
        s.B = tuple(_frozen(np.asarray(r)) for r in B)
        s.c = _frozen(np.asarray(c))
        return s

    def with_rows(self, A, B, c) -> "Scheme":
        return Scheme._from_arrays(A, B, c, self.ctx, self.m)

    def to_context(self, ctx: ScalarContext) -> "Scheme":
        """Same entries converted to another scalar context."""
        return Scheme(self.A, self.B, self.c, ctx, self.m)

    # -- entry access (1-based) -----------------------------------------
    def a(self, k: int, j: int):
        return self.A[k - 1][j - 1]

    def b(self, k: int, j: int):
        return self.B[k - 1][j - 1]

    def get(self, side: str, k: int, j: int | None = None):
        """Entry by side name: ``get("A", k, j)``, ``get("B", k, j)`` or ``get("c", j)``."""
        if side == "c":
            return self.c[k - 1]
        return (self.A if side == "A" else self.B)[k - 1][j - 1]

    def replace(self, entries: dict) -> "Scheme":
        """Copy with entries replaced; keys are ``("A", k, j)``, ``("B", k, j)`` or ``("c", j)``."""
        A, B, c = self.rows()
        for key, value in entries.items():
            value = self.ctx.convert(value)
            if key[0] == "c":
                c[key[1] - 1] = value
            else:
                (A if key[0] == "A" else B)[key[1] - 1][key[2] - 1] = value
        return self.with_rows(A, B, c)

    def entries(self):
        """Iterate ``((side, k, j), value)`` in canonical order: A row-major, B, then c."""
        for side, rows in (("A", self.A), ("B", self.B)):
            for k, row in enumerate(rows, start=1):
                for j, v in enumerate(row, start=1):
                    yield (side, k, j), v
        for j, v in enumerate(self.c, start=1):
            yield ("c", j), v

    def __eq__(self, other):
        if not isinstance(other, Scheme):
            return NotImplemented
        if self.ctx != other.ctx or self.m != other.m:
            return False
        if len(self.A) != len(other.A) or len(self.B) != len(other.B) or len(self.c) != len(other.c):
            return False
        pairs = list(zip(self.A, other.A)) + list(zip(self.B, other.B)) + [(self.c, other.c)]
        return all(len(x) == len(y) and bool(np.all(x == y)) for x, y in pairs)

    __hash__ = None

    def __repr__(self):
        fmt = self.ctx.format
        A = [[fmt(v) for v in r] for r in self.A]
        B = [[fmt(v) for v in r] for r in self.B]
        return f"Scheme(m={self.m}, A={A}, B={B}, c={[fmt(v) for v in self.c]}, ctx={self.ctx})"


def validate(s: Scheme) -> list[str]:
    """List of shape violations; empty iff ``s`` is well formed."""
    problems = []
    if s.m < 1:
        problems.append(f"m: must be >= 1, got {s.m}")
    for name, rows in (("A", s.A), ("B", s.B)):
        if len(rows) != s.m:
            problems.append(f"{name}: expected {s.m} rows, got {len(rows)}")
        for k, row in enumerate(rows, start=1):
            if len(row) != k + 1:
                problems.append(f"{name} row {k}: expected {k + 1} entries, got {len(row)}")
    if len(s.c) != s.m + 2:
        problems.append(f"c-length: expected {s.m + 2} entries, got {len(s.c)}")
    return problems


def _require_valid(s: Scheme):
    problems = validate(s)
    if problems:
        raise SchemeError("invalid scheme: " + "; ".join(problems))


def _combine(coeffs, Q: list[np.ndarray], ctx: ScalarContext) -> np.ndarray:
    """sum_j coeffs[j] * Q[j] for coefficient arrays of varying length."""
    length = max(len(Q[j]) for j in range(len(coeffs)))
    out = ctx.zeros(length)
    for j, v in enumerate(coeffs):
        if v != 0:
            q = Q[j]
            out[: len(q)] += q * v
    return out


def q_polynomials(s: Scheme) -> tuple[list[np.ndarray], list[np.ndarray], list[np.ndarray]]:
    """Coefficient arrays of ``Q_1 .. Q_{m+2}`` and of each row's two factors."""
    _require_valid(s)
    ctx = s.ctx
    Q = [ctx.array([1]), ctx.array([0, 1])]
    left, right = [], []
    for k in range(s.m):
        fa = _combine(s.A[k], Q, ctx)
        fb = _combine(s.B[k], Q, ctx)
        left.append(fa)
        right.append(fb)
        Q.append(convolve(fa, fb))
    return Q, left, right


def expand(s: Scheme) -> Polynomial:
    """The polynomial computed by ``s``, as monomial coefficients."""
    Q, _, _ = q_polynomials(s)
    return Polynomial._wrap(_combine(s.c, Q, s.ctx), s.ctx)


class _CountingProduct:
    def __init__(self):
        self.count = 0

    def __call__(self, X, Y):
        self.count += 1
        return X @ Y


def apply_to_matrix(s: Scheme, X, return_q: bool = False):
    """Evaluate ``p(X)`` with the scheme's ``m`` matrix products.

    Returns ``(P, mult_count)``, or ``(P, mult_count, Q)`` with the list of
    intermediate matrices when ``return_q`` is true.  ``mult_count`` counts
    the products actually performed.
    """
    _require_valid(s)
    ctx = s.ctx
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise SchemeError(f"X must be square, got shape {X.shape}")
    if not ctx.is_complex and np.iscomplexobj(X):
        raise ScalarContextError(f"complex matrix for scheme in real context {s.ctx}")
    if X.dtype != ctx.dtype:
        X = ctx.array(X)  # raises ScalarContextError on complex entries in a real context
    n = X.shape[0]
    matmul = _CountingProduct()
    Q = [ctx.eye(n), X]
    for k in range(s.m):
        fa = sum_scaled(s.A[k], Q, ctx, n)
        fb = sum_scaled(s.B[k], Q, ctx, n)
        Q.append(matmul(fa, fb))
    P = sum_scaled(s.c, Q, ctx, n)
    if return_q:
        return P, matmul.count, Q
    return P, matmul.count


def sum_scaled(coeffs, mats, ctx: ScalarContext, n: int) -> np.ndarray:
    out = ctx.zeros((n, n))
    for v, M in zip(coeffs, mats):
        if v != 0:
            out = out + M * v
    return out


@dataclass(frozen=True)
class ReductionPattern:
    """Structural zero mask of ``A`` and ``B``.

    ``A_mask[k-1][j-1]`` is True when ``a_{k,j}`` may be nonzero.  First
    columns are always structurally zero.  ``r`` counts single reductions,
    i.e. entries switched off at the end of a row.
    """

    A_mask: tuple
    B_mask: tuple

    def __post_init__(self):
        object.__setattr__(self, "A_mask", tuple(tuple(bool(v) for v in row) for row in self.A_mask))
        object.__setattr__(self, "B_mask", tuple(tuple(bool(v) for v in row) for row in self.B_mask))
        if len(self.A_mask) != len(self.B_mask):
            raise SchemeError("A_mask and B_mask must have the same number of rows")
        for name, rows in (("A", self.A_mask), ("B", self.B_mask)):
            for k, row in enumerate(rows, start=1):
                if len(row) != k + 1:
                    raise SchemeError(f"{name}_mask row {k}: expected {k + 1} entries, got {len(row)}")
                if row[0]:
                    raise SchemeError(f"{name}_mask row {k}: first column must be structurally zero")

    @property
    def m(self) -> int:
        return len(self.A_mask)

    @property
    def r(self) -> int:
        """Number of trailing row entries switched off, summed over both tables."""
        total = 0
        for row in self.A_mask + self.B_mask:
            free = row[1:]
            n = 0
            for v in reversed(free):
                if v:
                    break
                n += 1
            total += n
        return total

    @classmethod
    def unreduced(cls, m: int) -> "ReductionPattern":
        rows = tuple((False,) + (True,) * k for k in range(1, m + 1))
        return cls(rows, rows)

    @classmethod
    def from_zeroed(cls, m: int, zeroed) -> "ReductionPattern":
        """Unreduced pattern with the listed ``(side, k, j)`` positions switched off."""
        A = [list(row) for row in cls.unreduced(m).A_mask]
        B = [list(row) for row in cls.unreduced(m).B_mask]
        for side, k, j in zeroed:
            if not 1 <= k <= m or not 2 <= j <= k + 1:
                raise SchemeError(f"position {side}{k}:{j} is outside an m={m} pattern")
            (A if side.upper() == "A" else B)[k - 1][j - 1] = False
        return cls(tuple(map(tuple, A)), tuple(map(tuple, B)))

    @classmethod
    def from_id(cls, m: int, pattern_id: str) -> "ReductionPattern":
        """Parse a canonical id such as ``"B4:5;B5:6;B6:7"`` (empty id = unreduced)."""
        zeroed = []
        for part in filter(None, (p.strip() for p in pattern_id.split(";"))):
            side, rest = part[0], part[1:]
            try:
                k, j = (int(v) for v in rest.split(":"))
            except ValueError:
                raise SchemeError(f"bad pattern position {part!r}") from None
            if side.upper() not in ("A", "B"):
                raise SchemeError(f"bad pattern position {part!r}")
            zeroed.append((side.upper(), k, j))
        return cls.from_zeroed(m, zeroed)

    @classmethod
    def of_scheme(cls, s: Scheme) -> "ReductionPattern":
        """Pattern of the nonzero entries of ``s`` (first columns ignored)."""
        A = tuple((False,) + tuple(v != 0 for v in row[1:]) for row in s.A)
        B = tuple((False,) + tuple(v != 0 for v in row[1:]) for row in s.B)
        return cls(A, B)

    @property
    def pattern_id(self) -> str:
        parts = []
        for side, rows in (("A", self.A_mask), ("B", self.B_mask)):
            for k, row in enumerate(rows, start=1):
                for j in range(2, k + 2):
                    if not row[j - 1]:
                        parts.append(f"{side}{k}:{j}")
        return ";".join(parts)

    def __str__(self):
        return f"m{self.m}:{self.pattern_id}"


def q_degrees(pattern: ReductionPattern) -> list[int]:
    """Structural degrees of ``Q_1 .. Q_{m+2}`` for generic free entries."""
    deg = [0, 1]
    for k, (ra, rb) in enumerate(zip(pattern.A_mask, pattern.B_mask), start=1):
        da = [deg[j] for j, free in enumerate(ra) if free]
        db = [deg[j] for j, free in enumerate(rb) if free]
        if not da or not db:
            side = "A" if not da else "B"
            raise SchemeError(f"row {k} of {side} has no free entry (empty factor)")
        deg.append(max(da) + max(db))
    return deg


def structural_degree(pattern: ReductionPattern, m: int | None = None) -> int:
    """Output degree implied by ``pattern``; every c entry counts as free."""
    if m is not None and m != pattern.m:
        raise SchemeError(f"pattern has {pattern.m} rows, expected m={m}")
    return max(q_degrees(pattern))
