import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polyscheme import DOUBLE, EXACT, Scheme  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(n: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_LINES.append(f"criterion {n} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


def _value(ctx, rng, lo=-1.0, hi=1.0):
    if ctx.is_exact:
        num = int(rng.integers(-9, 10))
        den = int(rng.integers(1, 5))
        return Fraction(num, den)
    if ctx.is_complex:
        return complex(rng.uniform(lo, hi), rng.uniform(lo, hi))
    return float(rng.uniform(lo, hi))


def _nonzero(ctx, rng):
    """Magnitude in [1/2, 2] with a random sign."""
    if ctx.is_exact:
        v = Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 3)))
    else:
        v = float(rng.uniform(0.5, 2.0))
    return v if rng.random() < 0.5 else -v


def to_ctx(ctx, v):
    if isinstance(v, Fraction):
        return ctx.convert(f"{v.numerator}/{v.denominator}")
    return ctx.convert(v)


def random_scheme(m, ctx, rng, *, constant_free=False, unit_last=False, unreduced=True):
    """Random valid scheme; last row entries are bounded away from zero when ``unreduced``."""
    rows = {"A": [], "B": []}
    for side in ("A", "B"):
        for k in range(1, m + 1):
            row = [_value(ctx, rng) for _ in range(k + 1)]
            if constant_free:
                row[0] = 0
            if unit_last:
                row[-1] = 1
            elif unreduced:
                row[-1] = _nonzero(ctx, rng)
            rows[side].append([to_ctx(ctx, v) for v in row])
    c = [to_ctx(ctx, _value(ctx, rng)) for _ in range(m + 2)]
    return Scheme(rows["A"], rows["B"], c, ctx)


def scheme_to_fractions(s):
    def f(v):
        return Fraction(int(v.numerator), int(v.denominator))

    return ([[f(v) for v in r] for r in s.A], [[f(v) for v in r] for r in s.B], [f(v) for v in s.c])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["exact", "double"])
def ctx(request):
    return EXACT if request.param == "exact" else DOUBLE
