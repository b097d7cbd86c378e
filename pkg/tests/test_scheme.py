from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_scheme, scheme_to_fractions
from oracles import matrix_horner, naive_expand, strip
from polyscheme import (
    COMPLEX,
    DOUBLE,
    EXACT,
    ReductionPattern,
    Scheme,
    SchemeError,
    ScalarContextError,
    apply_to_matrix,
    expand,
    extended,
    structural_degree,
    validate,
)
from polyscheme.catalog import enumerate_structures
from polyscheme.fixtures import NAMED_PATTERNS, load_fixture, named_pattern
from polyscheme.scheme import q_degrees


def exact_coeffs(p):
    return strip(Fraction(int(v.numerator), int(v.denominator)) for v in p.coeffs)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_expand_matches_naive_rational_oracle(m):
    rng = np.random.default_rng(m)
    for _ in range(20):
        s = random_scheme(m, EXACT, rng)
        assert exact_coeffs(expand(s)) == strip(naive_expand(*scheme_to_fractions(s)))


def test_expand_degree_bound():
    rng = np.random.default_rng(3)
    for m in range(1, 7):
        s = random_scheme(m, DOUBLE, rng)
        assert expand(s).nominal_degree <= 2**m


def test_squaring_fixture():
    s = load_fixture("squaring")
    assert exact_coeffs(expand(s)) == [0, 0, 1]


@given(st.lists(st.fractions(-5, 5, max_denominator=6), min_size=5, max_size=5),
       st.lists(st.fractions(-5, 5, max_denominator=6), min_size=5, max_size=5))
@settings(max_examples=40)
def test_expansion_is_linear_in_c(c1, c2):
    base = random_scheme(3, EXACT, np.random.default_rng(0))

    def with_c(c):
        return Scheme(base.A, base.B, [f"{q.numerator}/{q.denominator}" for q in c], EXACT)

    lhs = expand(with_c([2 * x - 3 * y for x, y in zip(c1, c2)]))
    rhs = expand(with_c(c1)) * 2 - expand(with_c(c2)) * 3
    assert lhs == rhs


@pytest.mark.parametrize("ctx", [DOUBLE, COMPLEX, extended(128)])
def test_apply_to_matrix_matches_horner_and_counts_products(ctx):
    rng = np.random.default_rng(11)
    for m in (1, 2, 3, 4):
        s = random_scheme(m, ctx, rng)
        X = ctx.random(rng, (5, 5), radius=0.5)
        Y, count = apply_to_matrix(s, X)
        assert count == m
        ref = matrix_horner(expand(s).coeffs, X)
        diff = max(ctx.abs(v) for v in (Y - ref).ravel())
        assert diff <= 1e-11 * max(1, max(ctx.abs(v) for v in ref.ravel()))


def test_apply_to_matrix_exact_and_eigenvalues():
    s = random_scheme(3, EXACT, np.random.default_rng(5))
    X = EXACT.array([["1/2", "0"], ["0", "-3"]])
    Y, count = apply_to_matrix(s, X)
    p = expand(s)
    assert count == 3
    assert Y[0, 0] == p(EXACT.convert("1/2")) and Y[1, 1] == p(EXACT.convert(-3))
    assert Y[0, 1] == 0 and Y[1, 0] == 0


def test_apply_to_matrix_returns_intermediates():
    s = random_scheme(2, DOUBLE, np.random.default_rng(2))
    X = np.eye(3) * 2.0
    _, _, Q = apply_to_matrix(s, X, return_q=True)
    assert len(Q) == 4
    np.testing.assert_allclose(Q[1], X)


def test_apply_to_matrix_rejects_bad_input():
    s = random_scheme(2, DOUBLE, np.random.default_rng(2))
    with pytest.raises(SchemeError):
        apply_to_matrix(s, np.ones((2, 3)))
    with pytest.raises(ScalarContextError):
        apply_to_matrix(s, np.eye(2) * 1j)


def test_validate_reports_each_problem():
    good = random_scheme(2, DOUBLE, np.random.default_rng(0))
    assert validate(good) == []
    bad = Scheme(good.A, [good.B[0], [0, 1]], [1, 2, 3], DOUBLE, m=2)
    problems = validate(bad)
    assert any("B row 2" in p for p in problems)
    assert any("c-length" in p for p in problems)
    with pytest.raises(SchemeError):
        expand(bad)


def test_pattern_ids_round_trip():
    for name, (m, pid) in NAMED_PATTERNS.items():
        p = named_pattern(name)
        assert p.pattern_id == pid
        assert ReductionPattern.from_id(m, p.pattern_id) == p
    with pytest.raises(SchemeError):
        ReductionPattern.from_id(3, "A1:1")
    with pytest.raises(SchemeError):
        ReductionPattern.from_id(3, "C2:2")


def test_named_pattern_degrees():
    assert structural_degree(named_pattern("m4-deg12")) == 12
    assert structural_degree(named_pattern("m5-a45-a56")) == 20
    assert structural_degree(named_pattern("m6-deg32")) == 32
    assert structural_degree(ReductionPattern.unreduced(5)) == 32
    assert q_degrees(ReductionPattern.unreduced(3)) == [0, 1, 2, 4, 8]


def test_empty_factor_is_rejected():
    with pytest.raises(SchemeError):
        structural_degree(ReductionPattern.from_id(2, "A2:2;A2:3"))


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_structural_degree_matches_generic_expansion(m):
    rng = np.random.default_rng(m)
    for e in enumerate_structures(m, r_max=3):
        A = [[0] + [rng.uniform(0.5, 2) if on else 0 for on in row[1:]] for row in e.pattern.A_mask]
        B = [[0] + [rng.uniform(0.5, 2) if on else 0 for on in row[1:]] for row in e.pattern.B_mask]
        s = Scheme(A, B, [1.0] * (m + 2), DOUBLE)
        assert expand(s).effective_degree() == e.degree, e.pattern.pattern_id
        assert ReductionPattern.of_scheme(s) == e.pattern


def test_replace_and_get():
    s = random_scheme(3, EXACT, np.random.default_rng(1))
    before = s.a(2, 3)
    t = s.replace({("A", 2, 3): EXACT.convert(7), ("c", 1): EXACT.convert(0)})
    assert t.a(2, 3) == 7 and t.get("c", 1) == 0
    assert s.a(2, 3) == before
