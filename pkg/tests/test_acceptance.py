"""The eight acceptance criteria, each with its runtime budget.

Every test records a one-line PASS/FAIL summary that is printed in the
pytest terminal summary under "acceptance criteria".
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import _nonzero, random_scheme, record_acceptance, to_ctx
from oracles import matrix_horner
from polyscheme import (
    DOUBLE,
    EXACT,
    apply_to_matrix,
    dimension_estimate,
    expand,
    extended,
    normalize,
    poly_approx_eq,
    scale_row,
    shift_first_column,
    zero_b22,
)
from polyscheme.analysis import fitting_condition
from polyscheme.catalog import max_admissible_degree
from polyscheme.fixtures import epsilon_example, exp_taylor, named_pattern, exp8_mask, exp8_scheme
from polyscheme.poly import Polynomial
from polyscheme.solve import FitOptions, SolveError, fit, solve_degree12
from polyscheme.transform import adjust_row3


def _finish(n, title, ok, elapsed, budget, detail=""):
    within = elapsed < budget
    text = f"{elapsed:.1f}s of {budget}s" + (f"; {detail}" if detail else "")
    record_acceptance(n, title, ok and within, text)
    assert ok, detail
    assert within, f"took {elapsed:.1f}s, budget {budget}s"


def test_criterion_1_epsilon_limit():
    t0 = time.perf_counter()
    ok = True
    for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 10)):
        exact = expand(epsilon_example(eps, EXACT))
        want = Polynomial([0] * 7 + [1, f"{eps.numerator}/{eps.denominator}"], EXACT)
        ok &= exact == want
        dbl = expand(epsilon_example(eps, DOUBLE))
        ok &= poly_approx_eq(dbl, Polynomial([0] * 7 + [1, float(eps)], DOUBLE), 1e-12)
    _finish(1, "x^7 + eps x^8 for eps in {1, 1/2, 1/10}", ok, time.perf_counter() - t0, 1)


def _prepared(m, ctx, rng, kind):
    """Random scheme meeting the hypotheses of ``kind``, and its transform."""
    if kind in ("scale_row", "shift_first_column"):
        s = random_scheme(m, ctx, rng)
        k = int(rng.integers(1, m + 1))
        side = "AB"[int(rng.integers(2))]
        alpha = to_ctx(ctx, _nonzero(ctx, rng))
        f = scale_row if kind == "scale_row" else shift_first_column
        return s, f(s, k, alpha, side)
    if kind == "normalize":
        s = random_scheme(m, ctx, rng)
        return s, normalize(s)
    s = random_scheme(m, ctx, rng, constant_free=True)
    A, B, c = s.rows()
    A[1][2] = B[1][2] = ctx.one
    if kind == "zero_b22":
        s = s.with_rows(A, B, c)
        return s, zero_b22(s, to_ctx(ctx, _nonzero(ctx, rng)))
    A[2][3] = B[2][3] = ctx.one
    B[1][1] = ctx.zero
    s = s.with_rows(A, B, c)
    return s, adjust_row3(s, to_ctx(ctx, _nonzero(ctx, rng)))


def test_criterion_2_transformation_invariance():
    t0 = time.perf_counter()
    failures = []
    kinds = ("scale_row", "shift_first_column", "zero_b22", "adjust_row3", "normalize")
    for ctx in (EXACT, DOUBLE):
        for kind in kinds:
            for m in (3, 4, 5, 6):
                rng = np.random.default_rng([m, kinds.index(kind), int(ctx.is_exact)])
                bad = 0
                for _ in range(1000):
                    s, t = _prepared(m, ctx, rng, kind)
                    p, q = expand(s), expand(t)
                    bad += not (p == q if ctx.is_exact else poly_approx_eq(p, q, 1e-10))
                if bad:
                    failures.append(f"{kind} m={m} {ctx}: {bad}/1000")
    _finish(2, "expansion invariant under all transforms, m=3..6", not failures,
            time.perf_counter() - t0, 120, "; ".join(failures))


@pytest.mark.slow
def test_criterion_3_dimension():
    t0 = time.perf_counter()
    got = {}
    for m in (3, 4, 5):
        got[m] = dimension_estimate(m, trials=20, ctx=DOUBLE)
    for m in (6, 7):
        got[m] = dimension_estimate(m, trials=20, ctx=extended(128))
    ok = all(got[m] == m * m for m in got)
    _finish(3, "generic Jacobian rank m^2 for m=3..7", ok, time.perf_counter() - t0, 600,
            ", ".join(f"m={m}: {r}" for m, r in got.items()))


def test_criterion_4_degree12_ladder():
    t0 = time.perf_counter()
    problems = []
    for field in ("real", "complex"):
        # the solved entries grow like (alpha11/alpha12)^k, so 256 bits keep
        # the round trip clean for targets with small leading coefficients
        ctx = extended(256, field)
        rng = np.random.default_rng([12, field == "complex"])
        for i in range(100):
            alphas = list(ctx.random(rng, (13,)))
            try:
                s = solve_degree12(alphas, ctx)
            except SolveError as exc:
                problems.append(f"{field} #{i}: {exc}")
                continue
            got = expand(s).padded(13)
            res = max(ctx.abs(u - v) for u, v in zip(got, alphas)) / max(ctx.abs(v) for v in alphas)
            if res > 1e-10:
                problems.append(f"{field} #{i}: residual {float(res):.2e}")
            if field == "real" and any("mpc" in type(v).__name__ for _, v in s.entries()):
                problems.append(f"real #{i}: complex entry")
    _finish(4, "degree-12 solve round trip, 100 real + 100 complex", not problems,
            time.perf_counter() - t0, 10, "; ".join(problems[:5]))


def test_criterion_5_exp8_fixture():
    t0 = time.perf_counter()
    s = exp8_scheme(DOUBLE)
    taylor = exp_taylor(20, 8, DOUBLE)
    got = expand(s)
    rel = max(abs(u - v) / abs(v) for u, v in zip(got.padded(21), taylor.coeffs))
    cond = fitting_condition(s, taylor, exp8_mask())
    ok = rel <= 1e-8 and 8.1e2 / 2 <= cond <= 8.1e2 * 2
    _finish(5, "bundled m=5 scheme expands to exp(8x) Taylor, condition ~8.1e2", ok,
            time.perf_counter() - t0, 5, f"max rel {rel:.1e}, condition {cond:.1f}")


def test_criterion_6_fit_reconvergence():
    t0 = time.perf_counter()
    ctx = extended(128)
    ref = exp8_scheme(ctx)
    mask = exp8_mask()
    rng = np.random.default_rng(6)
    noisy = {pos: ref.get(*pos) * ctx.convert(1 + 1e-3 * rng.uniform(-1, 1)) for pos in mask.positions()}
    start = ref.replace(noisy)
    target = exp_taylor(20, 8, ctx)
    s, rep = fit(target, named_pattern("m5-a45-a56"), mask=mask, start=start, opts=FitOptions(ctx=ctx))
    res = float(rep.final_residual_norm)
    err = max(float(ctx.abs(s.get(*p) - ref.get(*p)) / max(1, ctx.abs(ref.get(*p)))) for p in mask.positions())
    ok = rep.converged and res <= 1e-12 and err <= 1e-6
    _finish(6, "m=5 exp(8x) fit reconverges from 1e-3 perturbation", ok, time.perf_counter() - t0, 120,
            f"{rep.iterations} iterations, residual {res:.1e}, entry error {err:.1e}")


def test_criterion_7_catalog():
    t0 = time.perf_counter()
    got = {}
    for m, r in ((4, 1), (5, 2), (6, 3), (7, 5)):
        got[m, r] = max_admissible_degree(m, r)[0]
    want = {(4, 1): 12, (5, 2): 20, (6, 3): 32, (7, 5): 42}
    _finish(7, "maximal admissible degrees 12, 20, 32, 42", got == want, time.perf_counter() - t0, 60,
            ", ".join(f"(m={m}, r={r}) -> {d}" for (m, r), d in got.items()))


def test_criterion_8_multiplication_count():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    hi = extended(256)
    problems = []
    for i in range(100):
        m = int(rng.integers(1, 8))
        s = random_scheme(m, DOUBLE, rng)
        X = rng.standard_normal((8, 8)) / 3
        Y, count = apply_to_matrix(s, X)
        # Horner in double loses all accuracy on degree-128 coefficient
        # lists, so the reference runs at 256 bits on the same inputs
        ref = matrix_horner(expand(s.to_context(hi)).coeffs, hi.array(X))
        ref = np.array([[float(v) for v in row] for row in ref])
        rel = np.linalg.norm(Y - ref) / max(np.linalg.norm(ref), 1e-300)
        if count != m:
            problems.append(f"#{i}: {count} products for m={m}")
        if rel > 1e-8:
            problems.append(f"#{i}: rel {rel:.1e}")
    _finish(8, "exactly m products and Horner agreement on 8x8 inputs", not problems,
            time.perf_counter() - t0, 30, "; ".join(problems[:5]))
