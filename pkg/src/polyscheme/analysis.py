"""Jacobian of the expansion map, numerical rank and dimension estimates.

The expansion map sends the free entries of a scheme to the monomial
coefficients of the polynomial it computes.  Its Jacobian is obtained by
forward propagation of derivatives through the product recursion, so every
column is exact up to the rounding of the active scalar context.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .poly import Polynomial
from .scalars import DOUBLE, ScalarContext, extended
from .scheme import Scheme, SchemeError, _require_valid
from .svd import singular_values

__all__ = [
    "ParamMask",
    "JacobianMatrix",
    "jacobian",
    "numerical_rank",
    "condition_number",
    "equilibrate",
    "fitting_condition",
    "random_canonical_scheme",
    "dimension_estimate",
    "support_degree",
]


def _position_name(pos) -> str:
    if pos[0] == "c":
        return f"c{pos[1]}"
    return f"{pos[0].lower()}{pos[1]}{pos[2]}"


@dataclass(frozen=True)
class ParamMask:
    """Which scheme entries are treated as unknowns.

    ``A`` and ``B`` are ragged boolean rows shaped like a scheme's rows, ``c``
    a boolean tuple of length ``m + 2``.  Entries outside the mask are held
    constant when differentiating.
    """

    A: tuple
    B: tuple
    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(bool(v) for v in row) for row in self.A))
        object.__setattr__(self, "B", tuple(tuple(bool(v) for v in row) for row in self.B))
        object.__setattr__(self, "c", tuple(bool(v) for v in self.c))
        m = len(self.A)
        if len(self.B) != m or len(self.c) != m + 2:
            raise SchemeError(f"mask shape mismatch: {len(self.A)} A rows, {len(self.B)} B rows, {len(self.c)} c entries")
        for name, rows in (("A", self.A), ("B", self.B)):
            for k, row in enumerate(rows, start=1):
                if len(row) != k + 1:
                    raise SchemeError(f"mask {name} row {k}: expected {k + 1} entries, got {len(row)}")

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def s(self) -> int:
        """Number of free parameters."""
        return sum(map(sum, self.A)) + sum(map(sum, self.B)) + sum(self.c)

    def positions(self) -> list[tuple]:
        """Free positions in canonical order: A row-major, B row-major, then c."""
        out = []
        for side, rows in (("A", self.A), ("B", self.B)):
            for k, row in enumerate(rows, start=1):
                out.extend((side, k, j) for j, free in enumerate(row, start=1) if free)
        out.extend(("c", j) for j, free in enumerate(self.c, start=1) if free)
        return out

    def names(self) -> list[str]:
        return [_position_name(p) for p in self.positions()]

    def without(self, positions) -> "ParamMask":
        """Copy with the given positions made non-free."""
        A = [list(r) for r in self.A]
        B = [list(r) for r in self.B]
        c = list(self.c)
        for pos in positions:
            if pos[0] == "c":
                c[pos[1] - 1] = False
            else:
                (A if pos[0] == "A" else B)[pos[1] - 1][pos[2] - 1] = False
        return ParamMask(A, B, c)

    @classmethod
    def full(cls, m: int) -> "ParamMask":
        """Every entry free, ``s = m^2 + 4m + 2``."""
        rows = [[True] * (k + 1) for k in range(1, m + 1)]
        return cls(rows, rows, [True] * (m + 2))

    @classmethod
    def canonical(cls, m: int) -> "ParamMask":
        """Free entries of the canonical form; ``s = m^2`` for ``m >= 3``.

        First columns, the unit row ends, ``b22`` and ``b33`` (tied to
        ``a33``) are fixed.
        """
        A = [[False] + [True] * (k - 1) + [False] for k in range(1, m + 1)]
        B = [[False] + [True] * (k - 1) + [False] for k in range(1, m + 1)]
        if m >= 2:
            B[1][1] = False
        if m >= 3:
            B[2][2] = False
        return cls(A, B, [True] * (m + 2))

    @classmethod
    def from_positions(cls, m: int, positions) -> "ParamMask":
        A = [[False] * (k + 1) for k in range(1, m + 1)]
        B = [[False] * (k + 1) for k in range(1, m + 1)]
        c = [False] * (m + 2)
        for pos in positions:
            if pos[0] == "c":
                ok = 1 <= pos[1] <= m + 2
            else:
                ok = pos[0] in ("A", "B") and 1 <= pos[1] <= m and 1 <= pos[2] <= pos[1] + 1
            if not ok:
                raise SchemeError(f"position {_position_name(pos)} is outside an m={m} scheme")
            if pos[0] == "c":
                c[pos[1] - 1] = True
            else:
                (A if pos[0] == "A" else B)[pos[1] - 1][pos[2] - 1] = True
        return cls(A, B, c)

    @classmethod
    def from_names(cls, m: int, names) -> "ParamMask":
        """Parse names such as ``["a42", "b55", "c3"]`` (single-digit indices only)."""
        positions = []
        for n in names:
            n = n.strip().lower()
            if n.startswith("c"):
                positions.append(("c", int(n[1:])))
            elif n[0] in "ab" and len(n) == 3:
                positions.append((n[0].upper(), int(n[1]), int(n[2])))
            else:
                raise SchemeError(f"cannot parse parameter name {n!r}")
        return cls.from_positions(m, positions)

    @classmethod
    def of_pattern(cls, pattern) -> "ParamMask":
        """Structurally free entries of ``pattern`` except the unit row ends, plus all of ``c``."""
        A = [list(r) for r in pattern.A_mask]
        B = [list(r) for r in pattern.B_mask]
        for rows in (A, B):
            for k, row in enumerate(rows, start=1):
                row[k] = False
        return cls(A, B, [True] * (pattern.m + 2))

    @classmethod
    def of_nonzero(cls, s: Scheme, exclude_ones: bool = True) -> "ParamMask":
        """Entries of ``s`` that are nonzero (and, by default, not exactly one)."""
        def keep(v):
            return v != 0 and not (exclude_ones and v == 1)

        A = [[keep(v) for v in row] for row in s.A]
        B = [[keep(v) for v in row] for row in s.B]
        return cls(A, B, [keep(v) for v in s.c])


@dataclass(frozen=True)
class JacobianMatrix:
    """``values[i, j]`` is the derivative of the ``x^i`` coefficient with respect to parameter ``j``."""

    values: np.ndarray
    ctx: ScalarContext
    positions: tuple

    @property
    def shape(self):
        return self.values.shape

    def to_float(self) -> np.ndarray:
        dt = np.complex128 if self.ctx.is_complex else np.float64
        return np.array(self.values.tolist(), dtype=dt).reshape(self.values.shape)


def support_degree(s: Scheme, mask: ParamMask | None = None) -> int:
    """Structural degree of the entries that are nonzero or free in ``mask``.

    Factors with no support contribute a zero product (degree ``-inf``).
    """
    neg = -math.inf
    deg = [0, 1]
    for k in range(s.m):
        out = []
        for side, rows in (("A", s.A), ("B", s.B)):
            free = mask.A[k] if (mask is not None and side == "A") else (mask.B[k] if mask is not None else None)
            ds = [deg[j] for j, v in enumerate(rows[k]) if v != 0 or (free is not None and free[j])]
            out.append(max(ds) if ds else neg)
        deg.append(out[0] + out[1] if neg not in out else neg)
    cfree = mask.c if mask is not None else [False] * len(s.c)
    top = max((deg[j] for j, v in enumerate(s.c) if v != 0 or cfree[j]), default=neg)
    return int(top) if top != neg else 0


def _conv_rows(D: np.ndarray, y: np.ndarray, length: int, ctx: ScalarContext) -> np.ndarray:
    """Convolve every row of ``D`` with ``y``, truncated to ``length`` columns."""
    out = ctx.zeros((D.shape[0], length))
    n = D.shape[1]
    for i, yi in enumerate(y):
        if i >= length:
            break
        if yi != 0:
            w = min(n, length - i)
            out[:, i : i + w] += D[:, :w] * yi
    return out


def _pad(v: np.ndarray, length: int, ctx: ScalarContext) -> np.ndarray:
    out = ctx.zeros(length)
    n = min(length, len(v))
    out[:n] = v[:n]
    return out


def jacobian(s: Scheme, mask: ParamMask | None = None, degree: int | None = None) -> JacobianMatrix:
    """Jacobian of the coefficient vector of ``expand(s)`` over the free entries of ``mask``.

    Derivatives are carried forward with the product rule, one row per
    parameter, through the recursion for ``Q_3 .. Q_{m+2}``.  The result has
    ``d + 1`` rows where ``d`` is the structural degree of the entries that
    are nonzero or free (override with ``degree``).

    Parameters
    ----------
    s : Scheme
        Evaluation point.
    mask : ParamMask, optional
        Free entries, default :meth:`ParamMask.full`.
    degree : int, optional
        Number of rows minus one.
    """
    _require_valid(s)
    ctx = s.ctx
    if mask is None:
        mask = ParamMask.full(s.m)
    if mask.m != s.m:
        raise SchemeError(f"mask is for m={mask.m}, scheme has m={s.m}")
    positions = mask.positions()
    P = len(positions)
    d = support_degree(s, mask) if degree is None else int(degree)
    L = d + 1
    col = {pos: i for i, pos in enumerate(positions)}

    Q = [_pad(ctx.array([1]), L, ctx), _pad(ctx.array([0, 1]), L, ctx)]
    dQ = [ctx.zeros((P, L)), ctx.zeros((P, L))]
    for k in range(1, s.m + 1):
        factors = []
        for side, rows in (("A", s.A), ("B", s.B)):
            row = rows[k - 1]
            f = ctx.zeros(L)
            df = ctx.zeros((P, L))
            for j, v in enumerate(row, start=1):
                if v != 0:
                    f += Q[j - 1] * v
                    df += dQ[j - 1] * v
                idx = col.get((side, k, j))
                if idx is not None:
                    df[idx] += Q[j - 1]
            factors.append((f, df))
        (fa, dfa), (fb, dfb) = factors
        q = _conv_rows(fa[None, :], fb, L, ctx)[0]
        dq = _conv_rows(dfa, fb, L, ctx) + _conv_rows(dfb, fa, L, ctx)
        Q.append(q)
        dQ.append(dq)

    J = ctx.zeros((P, L))
    for j, v in enumerate(s.c, start=1):
        if v != 0:
            J += dQ[j - 1] * v
        idx = col.get(("c", j))
        if idx is not None:
            J[idx] += Q[j - 1]
    return JacobianMatrix(np.ascontiguousarray(J.T), ctx, tuple(positions))


def _values_and_ctx(J, ctx: ScalarContext | None):
    if isinstance(J, JacobianMatrix):
        return J.values, J.ctx
    J = np.asarray(J)
    if ctx is None:
        ctx = DOUBLE if not np.iscomplexobj(J) else ScalarContext("complex", "double")
    return J, ctx


def _sigma(J, ctx):
    """Singular values as a list of floats-or-mpf, descending; exact input is rounded to double."""
    if ctx.is_exact:
        J = np.array([[float(v) for v in row] for row in J], dtype=np.float64).reshape(J.shape)
        ctx = DOUBLE
    if J.size == 0:
        return [], ctx
    return list(singular_values(J, ctx)), ctx


def numerical_rank(J, rel_threshold: float | None = None, ctx: ScalarContext | None = None) -> int:
    """Number of singular values above ``rel_threshold * sigma_max``.

    The default threshold is ``1e-8`` in double and ``2^(-bits/2)`` in
    extended precision.  Exact matrices are rounded to double first.
    """
    J, ctx = _values_and_ctx(J, ctx)
    sig, ctx = _sigma(J, ctx)
    if rel_threshold is None:
        rel_threshold = ctx.rank_threshold
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    if not sig or sig[0] == 0:
        return 0
    cut = sig[0] * rel_threshold
    return sum(1 for v in sig if v > cut)


def condition_number(J, ctx: ScalarContext | None = None, return_rank: bool = False, rel_threshold: float | None = None):
    """``sigma_max / sigma_min``; ``inf`` when the matrix is numerically rank deficient.

    With ``return_rank=True`` returns ``(cond, rank)``.
    """
    J, ctx = _values_and_ctx(J, ctx)
    sig, ctx = _sigma(J, ctx)
    if not sig or sig[0] == 0:
        raise ValueError("condition number of a zero matrix is undefined")
    thr = ctx.rank_threshold if rel_threshold is None else rel_threshold
    rank = sum(1 for v in sig if v > sig[0] * thr)
    cond = math.inf if rank < min(J.shape) else float(sig[0] / sig[-1])
    return (cond, rank) if return_rank else cond


def equilibrate(J, target=None, ctx: ScalarContext | None = None) -> np.ndarray:
    """Row scaling by ``1/|target_i|`` (rows with zero target untouched) and unit-norm columns.

    This is the scaling under which a relative residual is minimized; the
    condition number of the fitting problem is reported after it.
    """
    J, ctx = _values_and_ctx(J, ctx)
    J = J.copy()
    if target is not None:
        for i in range(J.shape[0]):
            t = ctx.abs(target[i]) if i < len(target) else 0
            if t != 0:
                J[i, :] = J[i, :] * (1 / t)
    for j in range(J.shape[1]):
        colv = J[:, j]
        sq = sum(ctx.abs(v) ** 2 for v in colv)
        nrm = ctx.convert(math.sqrt(float(sq))) if ctx.is_exact else ctx.real_sqrt(sq)
        if nrm != 0:
            J[:, j] = colv * (1 / nrm)
    return J


def fitting_condition(s: Scheme, target, mask: ParamMask, drop_rows: int = 0) -> float:
    """Condition number of the equilibrated fitting Jacobian at ``s``.

    ``target`` is the coefficient sequence being matched; ``drop_rows`` leading
    equations (and the matching ``c`` parameters) are left out, which is how
    the solver treats analytically pre-solved coefficients.
    """
    if isinstance(target, Polynomial):
        target = target.coeffs
    if drop_rows:
        mask = mask.without([("c", j) for j in range(1, drop_rows + 1)])
    J = jacobian(s, mask, degree=max(support_degree(s, mask), len(target) - 1))
    vals = J.values[drop_rows:, :]
    tgt = list(target)[drop_rows:]
    ctx = s.ctx if not s.ctx.is_exact else DOUBLE
    if s.ctx.is_exact:
        vals = np.array([[float(v) for v in row] for row in vals], dtype=np.float64).reshape(vals.shape)
        tgt = [float(v) for v in tgt]
    return condition_number(equilibrate(vals, tgt, ctx), ctx)


def random_canonical_scheme(m: int, ctx: ScalarContext, rng: np.random.Generator, radius: float = 1.0) -> Scheme:
    """Canonical-form scheme with i.i.d. uniform free entries (``b33 = a33 + 1``)."""
    mask = ParamMask.canonical(m)
    A = [ctx.zeros(k + 1) for k in range(1, m + 1)]
    B = [ctx.zeros(k + 1) for k in range(1, m + 1)]
    for k in range(1, m + 1):
        A[k - 1][k] = ctx.one
        B[k - 1][k] = ctx.one
    vals = ctx.random(rng, (mask.s,), radius)
    c = ctx.zeros(m + 2)
    for v, pos in zip(vals, mask.positions()):
        if pos[0] == "c":
            c[pos[1] - 1] = v
        else:
            (A if pos[0] == "A" else B)[pos[1] - 1][pos[2] - 1] = v
    if m >= 3:
        B[2][2] = A[2][2] + 1
    return Scheme._from_arrays(A, B, c, ctx, m)


def _trial_rank(m: int, ctx: ScalarContext, seed: int, index: int) -> int:
    rng = np.random.default_rng([seed, index])
    s = random_canonical_scheme(m, ctx, rng)
    return numerical_rank(jacobian(s, ParamMask.canonical(m)))


def dimension_estimate(m: int, trials: int = 20, ctx: ScalarContext | None = None, seed: int = 0, threads: int = 1) -> int:
    """Largest Jacobian rank over ``trials`` random canonical schemes.

    The canonical mask has ``m^2`` free entries, so the result never exceeds
    ``m^2``.  The default context is double for ``m <= 5`` and 128-bit
    extended precision above, where double rank decisions are unreliable.
    Trial ``i`` draws from the stream seeded by ``(seed, i)``, so the result
    does not depend on ``threads``.
    """
    if m < 1 or trials < 1:
        raise ValueError("need m >= 1 and trials >= 1")
    if ctx is None:
        ctx = DOUBLE if m <= 5 else extended(128)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            ranks = list(pool.map(lambda i: _trial_rank(m, ctx, seed, i), range(trials)))
    else:
        ranks = [_trial_rank(m, ctx, seed, i) for i in range(trials)]
    return max(ranks)
