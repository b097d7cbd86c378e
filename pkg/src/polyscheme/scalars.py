"""Scalar contexts: which field (real/complex) and which arithmetic.

Three arithmetics are supported:

* ``"double"``   -- IEEE binary64, stored in ``float64``/``complex128`` arrays.
* ``int`` bits   -- extended precision through a private :mod:`mpmath` context,
  stored in object arrays of ``mpf``/``mpc``.
* ``"exact"``    -- rational arithmetic (``gmpy2.mpq``), real field only.  Used
  by oracles and golden tests, where equivalences hold exactly.

Every numerical routine in the package takes its arithmetic from a
:class:`ScalarContext`, so the same code path runs in all three modes.
"""
from __future__ import annotations

import cmath
import functools
import math
import numbers
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import mpmath
import numpy as np

__all__ = [
    "ScalarContext",
    "ScalarContextError",
    "DOUBLE",
    "COMPLEX",
    "EXACT",
    "extended",
    "parse_context",
]


class ScalarContextError(ValueError):
    """Raised when values from incompatible scalar contexts are combined."""


@functools.lru_cache(maxsize=None)
def _mp_context(bits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


_MPQ = type(gmpy2.mpq(0))


@dataclass(frozen=True)
class ScalarContext:
    """Field kind and arithmetic shared by all values in one computation.

    Parameters
    ----------
    field : {"real", "complex"}
    precision : "double", "exact", or an int number of significand bits
        (at least 106) for extended precision.
    """

    field: str = "real"
    precision: object = "double"

    def __post_init__(self):
        if self.field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        p = self.precision
        if isinstance(p, str):
            if p not in ("double", "exact"):
                raise ValueError(f"unknown precision {p!r}")
            if p == "exact" and self.field == "complex":
                raise ValueError("exact arithmetic is only available for the real field")
        elif isinstance(p, numbers.Integral) and not isinstance(p, bool):
            if p < 106:
                raise ValueError("extended precision needs at least 106 significand bits")
        else:
            raise ValueError(f"unknown precision {p!r}")

    # -- classification -------------------------------------------------
    @property
    def is_complex(self) -> bool:
        return self.field == "complex"

    @property
    def is_double(self) -> bool:
        return self.precision == "double"

    @property
    def is_exact(self) -> bool:
        return self.precision == "exact"

    @property
    def is_extended(self) -> bool:
        return not isinstance(self.precision, str)

    @property
    def bits(self) -> int | None:
        """Significand bits, or None in exact mode."""
        if self.is_double:
            return 53
        if self.is_exact:
            return None
        return int(self.precision)

    @property
    def mp(self):
        if not self.is_extended:
            raise ScalarContextError(f"{self} has no mpmath context")
        return _mp_context(int(self.precision))

    @property
    def dtype(self):
        if self.is_double:
            return np.complex128 if self.is_complex else np.float64
        return object

    def __str__(self):
        prec = self.precision if isinstance(self.precision, str) else f"bits:{self.precision}"
        return f"{self.field}/{prec}"

    # -- tolerances -----------------------------------------------------
    @property
    def eps(self) -> float:
        """Unit roundoff (0 in exact mode)."""
        if self.is_exact:
            return 0.0
        return 2.0 ** -self.bits

    @property
    def trim_threshold(self) -> float:
        """Relative size below which trailing coefficients count as dust."""
        if self.is_double:
            return 1e-12
        if self.is_exact:
            return 0.0
        return 2.0 ** -(self.bits / 2)

    @property
    def rank_threshold(self) -> float:
        if self.is_double:
            return 1e-8
        if self.is_exact:
            raise ScalarContextError("numerical rank is not defined in exact mode")
        return 2.0 ** -(self.bits / 2)

    # -- conversion -----------------------------------------------------
    def convert(self, x):
        """Convert ``x`` into a scalar of this context.

        Accepts Python numbers, ``Fraction``, ``mpq``, ``mpf``/``mpc``, numpy
        scalars, decimal or ``"p/q"`` strings, and ``[re, im]`` pairs.
        Complex values with nonzero imaginary part are rejected by real
        contexts.
        """
        if isinstance(x, (list, tuple)):
            if len(x) != 2:
                raise ScalarContextError(f"complex pair must have 2 entries, got {x!r}")
            re, im = (self._convert_real(v) for v in x)
            if im != 0 and not self.is_complex:
                raise ScalarContextError(f"complex value {x!r} in real context {self}")
            if not self.is_complex:
                return re
            return self._make_complex(re, im)
        if isinstance(x, str):
            s = x.strip()
            if s.startswith("(") or s.endswith("j"):
                x = complex(s.replace(" ", ""))
            else:
                return self._finish(self._convert_real(s))
        if isinstance(x, (complex, np.complexfloating, mpmath.mpc)) or (
            hasattr(x, "imag") and not isinstance(x, (numbers.Real, _MPQ, mpmath.mpf))
        ):
            re, im = x.real, x.imag
            if im != 0 and not self.is_complex:
                raise ScalarContextError(f"complex value {x!r} in real context {self}")
            if not self.is_complex:
                return self._convert_real(re)
            return self._make_complex(self._convert_real(re), self._convert_real(im))
        return self._finish(self._convert_real(x))

    def _finish(self, re):
        return self._make_complex(re, self._convert_real(0)) if self.is_complex else re

    def _make_complex(self, re, im):
        if self.is_double:
            return complex(re, im)
        return self.mp.mpc(re, im)

    def _convert_real(self, x):
        if self.is_double:
            if isinstance(x, str):
                return float(Fraction(x)) if "/" in x else float(x)
            if isinstance(x, mpmath.mpf):
                return float(x)
            return float(x)
        if self.is_exact:
            if isinstance(x, _MPQ):
                return x
            if isinstance(x, str):
                return gmpy2.mpq(Fraction(x))
            if isinstance(x, mpmath.mpf):
                man, exp = x.man_exp
                return gmpy2.mpq(int(man)) * gmpy2.mpq(2) ** int(exp)
            if isinstance(x, (np.floating, np.integer)):
                x = x.item()
            return gmpy2.mpq(x)
        mp = self.mp
        if isinstance(x, (Fraction, _MPQ)):
            return mp.mpf(int(x.numerator)) / int(x.denominator)
        if isinstance(x, str):
            if "/" in x:
                f = Fraction(x)
                return mp.mpf(f.numerator) / f.denominator
            return mp.mpf(x)
        if isinstance(x, (np.floating, np.integer)):
            x = x.item()
        if isinstance(x, mpmath.mpf):
            return mp.mpf(x)
        return mp.mpf(x)

    def array(self, values) -> np.ndarray:
        """1-D or nested sequence -> array of this context's scalars."""
        arr = np.asarray(values, dtype=object) if not isinstance(values, np.ndarray) else values
        out = np.empty(arr.shape, dtype=self.dtype)
        flat_in = arr.reshape(-1)
        flat_out = out.reshape(-1)
        for i, v in enumerate(flat_in):
            flat_out[i] = self.convert(v)
        return out

    def zeros(self, shape) -> np.ndarray:
        if self.dtype is not object:
            return np.zeros(shape, dtype=self.dtype)
        out = np.empty(shape, dtype=object)
        out.fill(self.zero)
        return out

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.one
        return out

    @property
    def zero(self):
        return self.convert(0)

    @property
    def one(self):
        return self.convert(1)

    # -- elementary functions ------------------------------------------
    def abs(self, x):
        """Absolute value as a real scalar of this precision."""
        if self.is_double:
            return abs(complex(x)) if self.is_complex else abs(float(x))
        return abs(x)

    def sqrt(self, x):
        if self.is_exact:
            raise ScalarContextError("sqrt is not available in exact mode")
        if self.is_double:
            if self.is_complex or x < 0:
                return cmath.sqrt(x)
            return math.sqrt(x)
        return self.mp.sqrt(x)

    def real_sqrt(self, x):
        """Square root of a nonnegative real number at this precision."""
        if self.is_exact:
            raise ScalarContextError("sqrt is not available in exact mode")
        if self.is_double:
            return math.sqrt(float(x))
        return self.mp.sqrt(self.mp.mpf(x))

    def conj(self, x):
        return x.conjugate() if self.is_complex else x

    def to_float(self, x) -> float | complex:
        if self.is_complex:
            return complex(x)
        return float(x)

    def format(self, x) -> str | list:
        """Serialize a scalar losslessly at this precision."""
        if self.is_complex:
            return [self._format_real(x.real), self._format_real(x.imag)]
        return self._format_real(x)

    def _format_real(self, x) -> str:
        if self.is_double:
            return repr(float(x))
        if self.is_exact:
            q = gmpy2.mpq(x)
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        digits = int(math.ceil(self.bits * math.log10(2))) + 2
        return self.mp.nstr(x, digits, strip_zeros=False, min_fixed=-1, max_fixed=-1) if x != 0 else "0"

    # -- randomness -----------------------------------------------------
    def random(self, rng: np.random.Generator, shape=(), radius: float = 1.0):
        """Uniform draws on [-radius, radius] (real) or the radius disk (complex).

        Exact mode draws rationals with denominator 8 so that oracle
        arithmetic stays cheap.
        """
        size = int(np.prod(shape)) if shape != () else 1
        if self.is_exact:
            den = 8
            nums = rng.integers(-int(radius * den), int(radius * den) + 1, size=size)
            vals = [gmpy2.mpq(int(v), den) for v in nums]
        elif self.is_complex:
            rho = radius * np.sqrt(rng.uniform(0.0, 1.0, size=size))
            phi = rng.uniform(0.0, 2 * np.pi, size=size)
            vals = [self.convert(complex(r * np.cos(t), r * np.sin(t))) for r, t in zip(rho, phi)]
        else:
            vals = [self.convert(float(v)) for v in rng.uniform(-radius, radius, size=size)]
        if shape == ():
            return vals[0]
        out = np.empty(size, dtype=self.dtype)
        for i, v in enumerate(vals):
            out[i] = v
        return out.reshape(shape)


DOUBLE = ScalarContext("real", "double")
COMPLEX = ScalarContext("complex", "double")
EXACT = ScalarContext("real", "exact")


def extended(bits: int, field: str = "real") -> ScalarContext:
    return ScalarContext(field, int(bits))


def parse_context(precision: str = "double", field: str = "real") -> ScalarContext:
    """Parse the command-line spelling ``double``, ``exact`` or ``bits:<n>``."""
    precision = precision.strip()
    if precision.startswith("bits:"):
        return ScalarContext(field, int(precision[5:]))
    return ScalarContext(field, precision)
