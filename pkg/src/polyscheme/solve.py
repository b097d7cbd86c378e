"""Building schemes for a given target polynomial.

* :func:`paterson_stockmeyer` -- the classical baby-step/giant-step split.
* :func:`solve_degree12` -- explicit formulas for any degree-12 polynomial
  with four products.
* :func:`fit` -- regularized Newton iteration on the coefficient equations
  of a reduced structure, with random restarts.
* :func:`refine` -- undamped Newton polishing in extended precision.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import ParamMask, fitting_condition, jacobian, support_degree
from .poly import Polynomial, poly_approx_eq
from .scalars import COMPLEX, DOUBLE, ScalarContext, ScalarContextError
from .scheme import ReductionPattern, Scheme, SchemeError, expand, structural_degree
from .svd import svd

__all__ = [
    "SolveError",
    "FitOptions",
    "FitReport",
    "paterson_stockmeyer",
    "solve_degree12",
    "fit",
    "refine",
]

log = logging.getLogger(__name__)


class SolveError(ValueError):
    """A constructor could not produce a scheme for its input."""


# ---------------------------------------------------------------------------
# Paterson-Stockmeyer


def paterson_stockmeyer(p: Polynomial) -> Scheme:
    """Scheme evaluating ``p`` with block size ``s = ceil(sqrt(d))``.

    Rows ``1 .. s-1`` form ``X^2 .. X^s``; each further row multiplies the
    running Horner sum by ``X^s``.  The product count is
    ``s - 1 + floor(d / s)``, one less when ``s`` divides ``d``.
    """
    ctx = p.ctx
    d = p.effective_degree()
    if d < 2:
        raise SolveError(f"degree {d} < 2 needs no multiplication")
    coeffs = list(p.coeffs[: d + 1])
    s = math.isqrt(d - 1) + 1  # ceil(sqrt(d))
    nu, rho = divmod(d, s)
    # X^j is Q_{j+1}, i.e. 0-based index j, for j = 0..s
    power = list(range(s + 1))
    if rho == 0:
        # the top block absorbs X^s, saving one product
        T = nu - 1
        blocks = [coeffs[i * s : (i + 1) * s] for i in range(T)] + [coeffs[T * s :]]
    else:
        T = nu
        blocks = [coeffs[i * s : (i + 1) * s] for i in range(T + 1)]
    m = s - 1 + T
    A = [ctx.zeros(k + 1) for k in range(1, m + 1)]
    B = [ctx.zeros(k + 1) for k in range(1, m + 1)]
    for k in range(1, s):  # X^{k+1} = X^k * X
        A[k - 1][power[k]] = ctx.one
        B[k - 1][1] = ctx.one

    def add_block(row, block):
        for j, v in enumerate(block):
            row[power[j]] += v

    for t in range(1, T + 1):
        k = s - 1 + t
        if t > 1:
            A[k - 1][k] = ctx.one  # previous Horner product Q_{k+1}
        add_block(A[k - 1], blocks[T - t + 1])
        B[k - 1][power[s]] = ctx.one
    c = ctx.zeros(m + 2)
    if T > 0:
        c[m + 1] = ctx.one
    add_block(c, blocks[0])
    return Scheme._from_arrays(A, B, c, ctx, m)


# ---------------------------------------------------------------------------
# degree 12 with four products


def solve_degree12(alphas, ctx: ScalarContext | None = None) -> Scheme:
    """Four-product scheme for ``sum_k alphas[k] x^k``, ``k = 0..12``.

    The unknowns are solved one at a time from the top coefficient down;
    only ``alphas[12]`` is divided by.  The structure is::

        A = [0 1] [0 1 0] [0 a32 a33 1] [0 a42 a43 a44 1]
        B = [0 1] [0 0 1] [0 0 0 1]     [0 b42 b43 a44+1 1]

    The result is expanded again and compared with the input; a mismatch
    raises :class:`SolveError`.
    """
    if isinstance(alphas, Polynomial):
        ctx = ctx or alphas.ctx
        alphas = list(alphas.padded(13)) if len(alphas.coeffs) <= 13 else list(alphas.coeffs)
    alphas = list(alphas)
    if len(alphas) != 13:
        raise SolveError(f"expected 13 coefficients, got {len(alphas)}")
    if ctx is None:
        ctx = COMPLEX if any(isinstance(v, complex) and v.imag != 0 for v in alphas) else DOUBLE
    al = [ctx.convert(v) for v in alphas]
    if al[12] == 0:
        raise SolveError("not a degree-12 polynomial: alpha_12 = 0")
    half = ctx.convert("1/2")
    c6 = al[12]
    a33 = half * (al[11] / c6)
    a32 = half * (al[10] / c6 - a33 * a33)
    a44 = half * (al[9] / c6 - 2 * a32 * a33 - 1)
    b43s = al[8] / c6 - (a33 + 2 * a33 * a44 + a32 * a32)
    b42s = al[7] / c6 - (a32 + a33 * b43s + 2 * a32 * a44)
    c5 = al[6] - c6 * (a44 + a44 * a44 + a33 * b42s + a32 * b43s)
    a43 = al[5] / c6 - (a33 * c5 / c6 + a44 * b43s + a32 * b42s)
    a42 = al[4] / c6 - (a32 * c5 / c6 + a44 * b42s + a43 * b43s - a43 * a43)
    c4 = al[3] - c6 * (a43 * b42s + a42 * b43s - 2 * a42 * a43)
    c3 = al[2] - c6 * (a42 * b42s - a42 * a42)
    z, o = ctx.zero, ctx.one
    A = [[z, o], [z, o, z], [z, a32, a33, o], [z, a42, a43, a44, o]]
    B = [[z, o], [z, z, o], [z, z, z, o], [z, b42s - a42, b43s - a43, a44 + 1, o]]
    c = [al[0], al[1], c3, c4, c5, c6]
    s = Scheme(A, B, c, ctx)
    target = Polynomial(al, ctx)
    got = expand(s)
    ok = got == target if ctx.is_exact else poly_approx_eq(got, target, 1e-10)
    if not ok:
        diff = [ctx.abs(u - v) for u, v in zip(got.padded(13), target.coeffs)]
        k = max(range(13), key=lambda i: diff[i])
        raise SolveError(f"round trip failed at x^{k}: got {ctx.format(got.padded(13)[k])}, expected {ctx.format(al[k])}")
    return s


# ---------------------------------------------------------------------------
# regularized Newton fitting


@dataclass
class FitOptions:
    """Knobs of :func:`fit`.

    ``residual_tolerance=None`` means ``1e-12`` in double and
    ``2^-(bits-20)`` in extended precision.  ``ctx=None`` uses the target's
    context.
    """

    max_iterations: int = 500
    residual_tolerance: float | None = None
    tikhonov_mu0: float = 1e-2
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    armijo_max_backtracks: int = 30
    restarts: int = 25
    seed: int = 0
    ctx: ScalarContext | None = None
    start_radius: float = 2.0
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.armijo_c < 1 or not 0 < self.armijo_shrink < 1:
            raise ValueError("armijo_c and armijo_shrink must lie in (0, 1)")
        if self.residual_tolerance is not None and self.residual_tolerance <= 0:
            raise ValueError("residual_tolerance must be positive")
        if self.max_iterations < 0 or self.restarts < 0:
            raise ValueError("max_iterations and restarts must be nonnegative")

    def tolerance(self, ctx: ScalarContext) -> float:
        if self.residual_tolerance is not None:
            return self.residual_tolerance
        return 1e-12 if ctx.is_double else 2.0 ** -(ctx.bits - 20)


@dataclass
class FitReport:
    converged: bool
    iterations: int
    final_residual_norm: float
    step_kinds: list = field(default_factory=list)
    jacobian_condition_at_solution: float = math.nan
    restarts_used: int = 0
    residual_history: list = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "final_residual_norm": self.final_residual_norm,
            "step_kinds": list(self.step_kinds),
            "jacobian_condition_at_solution": self.jacobian_condition_at_solution,
            "restarts_used": self.restarts_used,
            "message": self.message,
        }


class _Problem:
    """Coefficient equations of one structure, restricted to the unknowns."""

    def __init__(self, template: Scheme, target: Polynomial, mask: ParamMask, degree: int):
        self.ctx = template.ctx
        self.template = template
        self.L = degree + 1
        self.target = target.padded(self.L)
        constant_free = all(row[0] == 0 and not free[0] for rows, fmask in ((template.A, mask.A), (template.B, mask.B)) for row, free in zip(rows, fmask))
        self.drop = 2 if constant_free and mask.c[0] and mask.c[1] else 0
        self.full_mask = mask
        self.mask = mask.without([("c", 1), ("c", 2)]) if self.drop else mask
        self.positions = self.mask.positions()
        if self.drop:
            # constant and linear coefficients are c1 and c2 themselves
            template = template.replace({("c", 1): self.target[0], ("c", 2): self.target[1]})
            self.template = template

    def scheme(self, x) -> Scheme:
        A, B, c = self.template.rows()
        for v, pos in zip(x, self.positions):
            if pos[0] == "c":
                c[pos[1] - 1] = v
            else:
                (A if pos[0] == "A" else B)[pos[1] - 1][pos[2] - 1] = v
        return self.template.with_rows(A, B, c)

    def x0(self, s: Scheme) -> np.ndarray:
        return self.ctx.array([s.get(*pos) for pos in self.positions])

    def residual(self, s: Scheme) -> np.ndarray:
        p = expand(s)
        return (p.padded(self.L) - self.target)[self.drop :]

    def jac(self, s: Scheme) -> np.ndarray:
        return jacobian(s, self.mask, degree=self.L - 1).values[self.drop :, :]

    def condition(self, s: Scheme) -> float:
        try:
            return fitting_condition(s, self.target, self.full_mask, drop_rows=self.drop)
        except (ValueError, ArithmeticError):
            return math.inf


def _sq(ctx, F) -> object:
    return sum((ctx.abs(v) ** 2 for v in F), 0 * ctx.abs(ctx.one))


def _inf(ctx, F) -> object:
    return max((ctx.abs(v) for v in F), default=0 * ctx.abs(ctx.one))


def _finite(ctx, v) -> bool:
    if ctx.is_double:
        return bool(np.isfinite(v))
    return bool(ctx.mp.isfinite(v))


def _ctranspose(ctx, M):
    return np.conjugate(M.T) if ctx.is_complex else M.T


def _run_newton(prob: _Problem, x, opts: FitOptions, tol: float):
    """One damped run from ``x``; returns ``(scheme, report)``."""
    ctx = prob.ctx
    s = prob.scheme(x)
    F = prob.residual(s)
    phi = _sq(ctx, F)
    history = [float(_inf(ctx, F))]
    kinds = []
    it = 0
    message = "max_iterations reached"
    c_arm = ctx.convert(opts.armijo_c)
    shrink = ctx.convert(opts.armijo_shrink)
    while True:
        if _inf(ctx, F) <= tol:
            message = "converged"
            break
        if it >= opts.max_iterations:
            break
        J = prob.jac(s)
        if J.shape[1] == 0:
            message = "no free parameters"
            break
        if not all(_finite(ctx, v) for v in J.flat):
            message = "non-finite Jacobian"
            break
        U, sig, Vh = svd(J, ctx)
        V = _ctranspose(ctx, Vh)
        g = _ctranspose(ctx, U) @ F
        smax = sig[0]
        if smax == 0 or not _finite(ctx, smax):
            message = "singular Jacobian"
            break
        cut = smax * ctx.rank_threshold
        mu = opts.tikhonov_mu0 * ctx.real_sqrt(phi)
        newton = ctx.array([g[i] / sig[i] if sig[i] > cut else 0 for i in range(len(sig))])
        tikh = ctx.array([g[i] * (sig[i] / (sig[i] * sig[i] + mu)) for i in range(len(sig))])
        best = None
        for kind, coef in (("newton", newton), ("tikhonov", tikh)):
            dx = -(V @ coef)
            Jdx = J @ dx
            slope = 2 * (np.vdot(F, Jdx).real if ctx.is_double else sum((ctx.conj(f) * v for f, v in zip(F, Jdx)), ctx.zero).real)
            if not slope < 0:
                continue
            t = ctx.one
            for _ in range(opts.armijo_max_backtracks + 1):
                xt = x + dx * t
                st = prob.scheme(xt)
                Ft = prob.residual(st)
                pt = _sq(ctx, Ft)
                if _finite(ctx, pt) and pt <= phi + c_arm * t * slope:
                    if best is None or pt < best[0]:
                        best = (pt, kind, xt, st, Ft)
                    break
                t = t * shrink
        if best is None:
            message = "line search failed"
            break
        phi, kind, x, s, F = best
        kinds.append(kind)
        history.append(float(_inf(ctx, F)))
        it += 1
    res = float(_inf(ctx, F))
    report = FitReport(
        converged=res <= tol,
        iterations=it,
        final_residual_norm=res,
        step_kinds=kinds,
        residual_history=history,
        message=message,
    )
    return s, report


def _random_template(pattern: ReductionPattern, mask: ParamMask, ctx: ScalarContext, rng, radius: float) -> Scheme:
    m = pattern.m
    A = [ctx.zeros(k + 1) for k in range(1, m + 1)]
    B = [ctx.zeros(k + 1) for k in range(1, m + 1)]
    for rows, pmask in ((A, pattern.A_mask), (B, pattern.B_mask)):
        for row, prow in zip(rows, pmask):
            for j, on in enumerate(prow):
                if on:
                    row[j] = ctx.one
    c = ctx.zeros(m + 2)
    positions = mask.positions()
    vals = ctx.random(rng, (len(positions),), radius)
    for v, pos in zip(vals, positions):
        if pos[0] == "c":
            c[pos[1] - 1] = v
        else:
            (A if pos[0] == "A" else B)[pos[1] - 1][pos[2] - 1] = v
    return Scheme._from_arrays(A, B, c, ctx, m)


def _enforce_pattern(s: Scheme, pattern: ReductionPattern) -> Scheme:
    A, B, c = s.rows()
    for rows, pmask, name in ((A, pattern.A_mask, "a"), (B, pattern.B_mask, "b")):
        for k, (row, prow) in enumerate(zip(rows, pmask), start=1):
            for j, on in enumerate(prow):
                if not on and j > 0 and row[j] != 0:
                    log.warning("start entry %s%d%d is structurally zero; set to 0", name, k, j + 1)
                    row[j] = s.ctx.zero
    return s.with_rows(A, B, c)


def fit(
    target: Polynomial,
    pattern: ReductionPattern,
    mask: ParamMask | None = None,
    start: Scheme | None = None,
    opts: FitOptions | None = None,
) -> tuple[Scheme, FitReport]:
    """Fit the free entries of a structure so that ``expand`` matches ``target``.

    Each iteration computes the Jacobian, then a pseudo-inverse Newton step
    and a Tikhonov-filtered step (filter ``sigma / (sigma^2 + mu)`` with
    ``mu = mu0 * ||F||``).  Both are damped by Armijo backtracking on
    ``||F||^2`` and the one with the lower residual is taken (Newton on
    ties).  For constant-free structures the constant and linear
    coefficients are matched exactly by ``c1`` and ``c2`` before iterating.

    Parameters
    ----------
    target : Polynomial
        Coefficients to match; its degree may not exceed the structural degree.
    pattern : ReductionPattern
        Structural zeros.  Entries outside it are forced to zero.
    mask : ParamMask, optional
        Unknowns; default :meth:`ParamMask.of_pattern`.  Entries not in the
        mask keep their value from ``start`` (or 1 in random starts).
    start : Scheme, optional
        Initial point.  Without it, up to ``opts.restarts`` random starts
        are drawn, restart ``i`` from the stream seeded by ``(seed, i)``.
    opts : FitOptions, optional

    Returns
    -------
    (Scheme, FitReport)
        The converged scheme, or the best one found with ``converged=False``.
    """
    opts = opts or FitOptions()
    ctx = opts.ctx or (start.ctx if start is not None else target.ctx)
    if ctx.is_exact:
        raise ScalarContextError("fit needs floating-point arithmetic; use double or bits:<n>")
    target = Polynomial([ctx.convert(v) for v in target.coeffs], ctx)
    mask = mask or ParamMask.of_pattern(pattern)
    if mask.m != pattern.m:
        raise SchemeError(f"mask is for m={mask.m}, pattern has m={pattern.m}")
    for pos in mask.positions():
        if pos[0] != "c" and not (pattern.A_mask if pos[0] == "A" else pattern.B_mask)[pos[1] - 1][pos[2] - 1]:
            raise SchemeError(f"free parameter {pos[0].lower()}{pos[1]}{pos[2]} is structurally zero in the pattern")
    d = structural_degree(pattern)
    td = target.effective_degree()
    if td > d:
        raise SchemeError(f"target degree {td} exceeds the structural degree {d} of pattern {pattern}")
    tol = opts.tolerance(ctx)

    if start is not None:
        if start.m != pattern.m:
            raise SchemeError(f"start has m={start.m}, pattern has m={pattern.m}")
        s0 = _enforce_pattern(start.to_context(ctx) if start.ctx != ctx else start, pattern)
        prob = _Problem(s0, target, mask, d)
        s, report = _run_newton(prob, prob.x0(prob.template), opts, tol)
        report.restarts_used = 0
    else:
        def attempt(i):
            rng = np.random.default_rng([opts.seed, i])
            tmpl = _random_template(pattern, mask, ctx, rng, opts.start_radius)
            prob = _Problem(tmpl, target, mask, d)
            return prob, _run_newton(prob, prob.x0(prob.template), opts, tol)

        n = max(1, opts.restarts)
        best = None
        if opts.threads > 1:
            with ThreadPoolExecutor(opts.threads) as pool:
                results = list(pool.map(attempt, range(n)))
        else:
            results = []
            for i in range(n):
                results.append(attempt(i))
                if results[-1][1][1].converged:
                    break
        for i, (prob, (s_i, rep)) in enumerate(results):
            rep.restarts_used = i + 1
            if rep.converged:
                best = (prob, s_i, rep)
                break
            if best is None or rep.final_residual_norm < best[2].final_residual_norm:
                best = (prob, s_i, rep)
        prob, s, report = best
        if not report.converged:
            report.restarts_used = len(results)
    report.jacobian_condition_at_solution = prob.condition(s)
    return s, report


def refine(s: Scheme, target: Polynomial, ctx: ScalarContext, mask: ParamMask | None = None, max_iterations: int = 100) -> Scheme:
    """Polish ``s`` with undamped Newton steps in extended precision.

    Iterates until ``||F||_inf <= 2^-(bits-20)``.  The default unknowns are
    the entries of ``s`` that are neither zero nor one.  Raises
    :class:`SolveError` if the residual grows three steps in a row.
    """
    if ctx.is_exact:
        s_ex = s.to_context(ctx)
        t_ex = Polynomial([ctx.convert(v) for v in target.coeffs], ctx)
        if expand(s_ex) == t_ex:
            return s_ex
        raise ScalarContextError("exact mode cannot run Newton steps; only exact solutions pass through")
    tol = 2.0 ** -(ctx.bits - 20)
    s = s.to_context(ctx) if s.ctx != ctx else s
    target = Polynomial([ctx.convert(v) for v in target.coeffs], ctx)
    mask = mask or ParamMask.of_nonzero(s)
    d = max(support_degree(s, mask), target.effective_degree())
    prob = _Problem(s, target, mask, d)
    x = prob.x0(prob.template)
    s = prob.scheme(x)
    F = prob.residual(s)
    res = _inf(ctx, F)
    increases = 0
    for _ in range(max_iterations):
        if res <= tol:
            return s
        J = prob.jac(s)
        U, sig, Vh = svd(J, ctx)
        g = _ctranspose(ctx, U) @ F
        cut = sig[0] * ctx.rank_threshold
        coef = ctx.array([g[i] / sig[i] if sig[i] > cut else 0 for i in range(len(sig))])
        x = x - _ctranspose(ctx, Vh) @ coef
        s = prob.scheme(x)
        F = prob.residual(s)
        new = _inf(ctx, F)
        increases = increases + 1 if new > res else 0
        res = new
        if increases >= 3:
            raise SolveError(f"refine diverged: residual {float(res):.3e} after three increases")
    if res <= tol:
        return s
    raise SolveError(f"refine stopped at residual {float(res):.3e} > {tol:.3e} after {max_iterations} iterations")
