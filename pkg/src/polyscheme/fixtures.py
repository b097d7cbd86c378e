"""Reference schemes, targets and named reduction patterns."""
from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from math import factorial

from .analysis import ParamMask
from .io import scheme_from_dict
from .poly import Polynomial
from .scalars import DOUBLE, EXACT, ScalarContext
from .scheme import ReductionPattern, Scheme, SchemeError

__all__ = [
    "epsilon_example",
    "load_fixture",
    "exp8_scheme",
    "exp8_mask",
    "exp_taylor",
    "NAMED_PATTERNS",
    "named_pattern",
    "deg12_mask",
    "named_mask",
]


def epsilon_example(eps=1, ctx: ScalarContext = EXACT) -> Scheme:
    """Three-multiplication scheme for ``x^7 + eps x^8``; the limit ``eps -> 0`` is not attainable."""
    e = Fraction(eps)
    if e == 0:
        raise SchemeError("eps must be nonzero")
    A = [
        [0, 1],
        [0, 1 / (2 * e), 1],
        [0, (7 + 8 * e**2 - 16 * e**4) / (128 * e**5), -1 / (8 * e**2) - Fraction(1, 2), 1],
    ]
    B = [
        [0, 1],
        [0, 0, 1],
        [0, (-7 + 8 * e**2 + 16 * e**4) / (128 * e**5), -1 / (8 * e**2) + Fraction(1, 2), 1],
    ]
    c = [0, 0, (49 - 288 * e**4 + 256 * e**8) / (16384 * e**9), (-5 + 16 * e**4) / (64 * e**3), e]

    def conv(v):
        v = Fraction(v)
        return f"{v.numerator}/{v.denominator}"

    return Scheme([[conv(v) for v in r] for r in A], [[conv(v) for v in r] for r in B], [conv(v) for v in c], ctx)


def load_fixture(name: str, ctx: ScalarContext | None = None) -> Scheme:
    """Bundled scheme file ``data/<name>.json``."""
    text = resources.files("polyscheme").joinpath("data").joinpath(f"{name}.json").read_text()
    return scheme_from_dict(json.loads(text), ctx)[0]


def exp8_scheme(ctx: ScalarContext | None = None) -> Scheme:
    """The m=5 scheme for the degree-20 Taylor polynomial of ``exp(8x)``."""
    return load_fixture("exp8_m5", ctx)


def exp8_mask() -> ParamMask:
    """The 21 unknowns of the m=5 degree-20 fit: 14 entries of A and B plus all of ``c``."""
    names = ["b22", "a42", "a43", "a52", "a53", "a54", "b32", "b42", "b43", "b44", "b52", "b53", "b54", "b55"]
    return ParamMask.from_names(5, names + [f"c{j}" for j in range(1, 8)])


def exp_taylor(degree: int, scale=1, ctx: ScalarContext = DOUBLE) -> Polynomial:
    """Taylor polynomial of ``exp(scale x)``; coefficients are rounded once from exact rationals."""
    a = Fraction(scale)
    coeffs = [a**k / factorial(k) for k in range(degree + 1)]
    return Polynomial([f"{q.numerator}/{q.denominator}" for q in coeffs], ctx)


NAMED_PATTERNS = {
    # degree 12 with four products; b22, b32, b33 are normalization zeros
    "m4-deg12": (4, "A2:3;B2:2;B3:2;B3:3"),
    # degree 20 with five products
    "m5-a45-a56": (5, "A4:5;A5:6"),
    # degree 32 with six products
    "m6-deg32": (6, "B2:2;B4:5;B5:6;B6:7"),
}


def named_pattern(name: str) -> ReductionPattern:
    """Pattern by name (see ``NAMED_PATTERNS``) or ``m<m>:<pattern-id>``."""
    if name in NAMED_PATTERNS:
        m, pid = NAMED_PATTERNS[name]
        return ReductionPattern.from_id(m, pid)
    if name.startswith("m") and ":" in name:
        head, pid = name.split(":", 1)
        try:
            m = int(head[1:])
        except ValueError:
            raise SchemeError(f"unknown pattern {name!r}") from None
        return ReductionPattern.from_id(m, pid)
    raise SchemeError(f"unknown pattern {name!r}; known: {sorted(NAMED_PATTERNS)} or m<m>:<id>")


def deg12_mask() -> ParamMask:
    """Unknowns of the degree-12 structure; ``a22``, ``b44`` and the unit entries stay fixed."""
    names = ["a32", "a33", "a42", "a43", "a44", "b42", "b43"]
    return ParamMask.from_names(4, names + [f"c{j}" for j in range(1, 7)])


_NAMED_MASKS = {"m4-deg12": deg12_mask, "m5-a45-a56": exp8_mask}


def named_mask(name: str) -> ParamMask | None:
    """Default unknowns for a named pattern, or None to let the fitter choose."""
    f = _NAMED_MASKS.get(name)
    return f() if f else None
