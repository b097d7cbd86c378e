import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import _nonzero, random_scheme, to_ctx
from polyscheme import DOUBLE, EXACT, expand, normalize, poly_approx_eq, scale_row, shift_first_column, zero_b22
from polyscheme.analysis import ParamMask
from polyscheme.fixtures import epsilon_example
from polyscheme.transform import (
    TransformError,
    TransformRecord,
    adjust_row3,
    adjust_row3_pair,
    apply_record,
    is_canonical,
    normalize_with_report,
    row3_constraint,
)

fracs = st.fractions(min_value=-4, max_value=4, max_denominator=5).filter(lambda q: q != 0)
seeds = st.integers(0, 2**32 - 1)


def q(v):
    return EXACT.convert(f"{v.numerator}/{v.denominator}")


def row3_ready(m, rng, ctx=EXACT):
    s = random_scheme(m, ctx, rng, constant_free=True)
    A, B, c = s.rows()
    A[1][2] = B[1][2] = A[2][3] = B[2][3] = ctx.one
    B[1][1] = ctx.zero
    return s.with_rows(A, B, c)


def b22_ready(m, rng, ctx=EXACT):
    s = random_scheme(m, ctx, rng, constant_free=True)
    A, B, c = s.rows()
    A[1][2] = B[1][2] = ctx.one
    return s.with_rows(A, B, c)


def test_scale_row_identity_and_example():
    s = random_scheme(4, EXACT, np.random.default_rng(0))
    assert scale_row(s, 2, 1) == s
    t = scale_row(s, 2, 3)
    assert t != s and expand(t) == expand(s)


@given(seeds, fracs, fracs, st.integers(1, 4), st.sampled_from("AB"))
@settings(max_examples=50)
def test_scale_row_group_law(seed, a, b, k, side):
    s = random_scheme(4, EXACT, np.random.default_rng(seed))
    assert scale_row(scale_row(s, k, q(a), side), k, q(b), side) == scale_row(s, k, q(a) * q(b), side)
    assert scale_row(scale_row(s, k, q(a), side), k, 1 / q(a), side) == s


def test_scale_row_rejects_zero():
    s = random_scheme(2, EXACT, np.random.default_rng(0))
    with pytest.raises(TransformError):
        scale_row(s, 1, 0)
    with pytest.raises(TransformError):
        scale_row(s, 3, 2)


def test_shift_first_column_examples():
    s = random_scheme(3, EXACT, np.random.default_rng(1))
    assert shift_first_column(s, 2, 0) == s
    t = shift_first_column(s, 1, -s.a(1, 1))
    assert t.a(1, 1) == 0 and expand(t) == expand(s)


@given(seeds, fracs, st.integers(1, 4), st.sampled_from("AB"))
@settings(max_examples=50)
def test_shift_first_column_inverse(seed, a, k, side):
    s = random_scheme(4, EXACT, np.random.default_rng(seed))
    t = shift_first_column(s, k, q(a), side)
    assert expand(t) == expand(s)
    assert shift_first_column(t, k, -q(a), side) == s


@pytest.mark.parametrize("side", ["A", "B"])
def test_shift_variants_reach_constant_free(side):
    rng = np.random.default_rng(2)
    for m in (2, 3, 4, 5):
        s = random_scheme(m, EXACT, rng)
        t = s
        for k in range(1, m + 1):
            for sd in (side, "B" if side == "A" else "A"):
                t = shift_first_column(t, k, -t.get(sd, k, 1), sd)
        assert all(t.get(sd, k, 1) == 0 for k in range(1, m + 1) for sd in "AB")
        assert expand(t) == expand(s)


def test_zero_b22_examples():
    rng = np.random.default_rng(3)
    s = b22_ready(4, rng)
    assert zero_b22(s, 0) == s
    t = zero_b22(s, s.b(2, 2))
    assert t.b(2, 2) == 0 and expand(t) == expand(s)
    u = zero_b22(s, q(_nonzero(EXACT, rng)))
    assert expand(u) == expand(s)


def test_zero_b22_needs_its_hypotheses():
    rng = np.random.default_rng(4)
    with pytest.raises(TransformError, match="constant-free"):
        zero_b22(random_scheme(3, EXACT, rng), 1)
    s = b22_ready(3, rng)
    A, B, c = s.rows()
    A[1][2] = EXACT.convert(2)
    with pytest.raises(TransformError, match="a23"):
        zero_b22(s.with_rows(A, B, c), 1)


def test_zero_b22_with_general_first_row():
    # the first product need not be a plain square; a12 * b12 rescales the correction
    s = b22_ready(3, np.random.default_rng(5))
    A, B, c = s.rows()
    A[0][1], B[0][1] = EXACT.convert(3), EXACT.convert("-1/2")
    s = s.with_rows(A, B, c)
    assert expand(zero_b22(s, EXACT.convert("5/3"))) == expand(s)


def test_adjust_row3_examples():
    rng = np.random.default_rng(6)
    s = row3_ready(5, rng)
    t = adjust_row3(s, EXACT.convert("-1/2"))
    assert t.b(3, 3) == t.a(3, 3) + 1 and expand(t) == expand(s)
    u = adjust_row3(s, 2)
    assert u.a(3, 3) - u.b(3, 3) == 4 and expand(u) == expand(s)
    assert row3_constraint(s, 0, 0) == 0
    assert adjust_row3_pair(s, 0, 0) == s


def test_adjust_row3_pair_rejects_off_constraint():
    s = row3_ready(4, np.random.default_rng(7))
    assert row3_constraint(s, 1, 1) != 0
    with pytest.raises(TransformError, match="constraint"):
        adjust_row3_pair(s, 1, 1)


def test_adjust_row3_needs_zero_b22():
    s = row3_ready(4, np.random.default_rng(8))
    A, B, c = s.rows()
    B[1][1] = EXACT.one
    with pytest.raises(TransformError, match="b22"):
        adjust_row3(s.with_rows(A, B, c), 1)


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_normalize_reaches_canonical_form(m):
    rng = np.random.default_rng(m)
    for _ in range(10):
        s = random_scheme(m, EXACT, rng)
        t = normalize(s)
        assert is_canonical(t) == []
        assert expand(t) == expand(s)
        assert normalize(t) == t


def test_normalize_in_double_is_accurate():
    rng = np.random.default_rng(9)
    for _ in range(20):
        s = random_scheme(4, DOUBLE, rng)
        t = normalize(s)
        assert is_canonical(t, tol=1e-12) == []
        assert poly_approx_eq(expand(s), expand(t), 1e-12)


def test_canonical_form_has_m_squared_free_entries():
    for m in range(3, 9):
        total = 2 * sum(k + 1 for k in range(1, m + 1)) + m + 2
        fixed = 4 * m + 2  # first columns, last entries, b22, b33
        assert ParamMask.canonical(m).s == total - fixed == m * m


def test_epsilon_example_normalizes_row3():
    s = epsilon_example(1)
    t = normalize(s)
    assert t.b(3, 3) == t.a(3, 3) + 1
    assert expand(t) == expand(s)
    assert [int(v) for v in expand(t).coeffs] == [0] * 7 + [1, 1]


def test_normalize_skips_reduced_rows_with_report():
    s = random_scheme(4, EXACT, np.random.default_rng(10))
    A, B, c = s.rows()
    B[1][2] = EXACT.zero  # b23 = 0: row 2 of B is reduced
    s = s.with_rows(A, B, c)
    t, report = normalize_with_report(s)
    assert expand(t) == expand(s)
    assert any("B2" in msg for msg in report.skipped)
    assert any("zero_b22" in msg for msg in report.skipped)


def test_normalization_records_replay():
    s = random_scheme(4, EXACT, np.random.default_rng(11))
    t, report = normalize_with_report(s)
    u = s
    for rec in report.records:
        u = apply_record(u, rec)
    assert expand(u) == expand(t)
    with pytest.raises(TransformError):
        apply_record(s, TransformRecord("rotate"))


def test_transforms_preserve_expansion_in_double(rng):
    for m in (3, 4, 5, 6):
        s = random_scheme(m, DOUBLE, rng)
        for t in (scale_row(s, 2, 0.7, "B"), shift_first_column(s, m, -1.3, "B")):
            assert poly_approx_eq(expand(s), expand(t), 1e-10)
        r = row3_ready(m, rng, DOUBLE)
        assert poly_approx_eq(expand(r), expand(adjust_row3(r, to_ctx(DOUBLE, 0.9))), 1e-10)
        b = b22_ready(m, rng, DOUBLE)
        assert poly_approx_eq(expand(b), expand(zero_b22(b, 1.7)), 1e-10)
