"""Dense univariate polynomials in the monomial basis."""
from __future__ import annotations

import numpy as np

from .scalars import DOUBLE, ScalarContext, ScalarContextError

__all__ = ["Polynomial", "poly_mul", "poly_approx_eq", "horner_eval", "convolve"]


def convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full convolution of two coefficient arrays of the same dtype."""
    if a.dtype != object:
        return np.convolve(a, b)
    # object arrays: loop over the shorter operand, vectorise the longer
    if len(a) < len(b):
        a, b = b, a
    out = np.empty(len(a) + len(b) - 1, dtype=object)
    out.fill(a[0] * 0)
    for i, bi in enumerate(b):
        if bi != 0:
            out[i : i + len(a)] += a * bi
    return out


class Polynomial:
    """Polynomial ``sum_k coeffs[k] x**k`` over a scalar context.

    The coefficient array is never modified after construction.  The zero
    polynomial is stored as ``[0]``.
    """

    __slots__ = ("coeffs", "ctx")

    def __init__(self, coeffs, ctx: ScalarContext = DOUBLE):
        if isinstance(coeffs, np.ndarray) and coeffs.dtype == ctx.dtype and coeffs.ndim == 1:
            arr = coeffs.copy()
        else:
            arr = ctx.array(list(coeffs))
        if arr.size == 0:
            arr = ctx.zeros(1)
        arr.flags.writeable = False
        self.coeffs = arr
        self.ctx = ctx

    @classmethod
    def _wrap(cls, arr: np.ndarray, ctx: ScalarContext) -> "Polynomial":
        p = cls.__new__(cls)
        if arr.size == 0:
            arr = ctx.zeros(1)
        arr.flags.writeable = False
        p.coeffs = arr
        p.ctx = ctx
        return p

    @classmethod
    def monomial(cls, k: int, ctx: ScalarContext = DOUBLE) -> "Polynomial":
        arr = ctx.zeros(k + 1)
        arr[k] = ctx.one
        return cls._wrap(arr, ctx)

    @property
    def nominal_degree(self) -> int:
        return len(self.coeffs) - 1

    def effective_degree(self, threshold: float | None = None) -> int:
        """Largest k with ``|coeff_k| > threshold * max|coeff|`` (0 for the zero polynomial)."""
        if threshold is None:
            threshold = self.ctx.trim_threshold
        mags = [self.ctx.abs(v) for v in self.coeffs]
        top = max(mags)
        if top == 0:
            return 0
        cut = top * threshold
        for k in range(len(mags) - 1, -1, -1):
            if mags[k] > cut:
                return k
        return 0

    def trimmed(self, threshold: float | None = None) -> "Polynomial":
        return Polynomial._wrap(self.coeffs[: self.effective_degree(threshold) + 1].copy(), self.ctx)

    def padded(self, length: int) -> np.ndarray:
        """Coefficient array zero-padded (or truncated) to ``length``."""
        out = self.ctx.zeros(length)
        n = min(length, len(self.coeffs))
        out[:n] = self.coeffs[:n]
        return out

    def _check(self, other: "Polynomial"):
        if not isinstance(other, Polynomial):
            raise TypeError(f"expected Polynomial, got {type(other).__name__}")
        if other.ctx != self.ctx:
            raise ScalarContextError(f"mixing scalar contexts {self.ctx} and {other.ctx}")

    def __add__(self, other):
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial._wrap(self.padded(n) + other.padded(n), self.ctx)

    def __sub__(self, other):
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial._wrap(self.padded(n) - other.padded(n), self.ctx)

    def __neg__(self):
        return Polynomial._wrap(-self.coeffs, self.ctx)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return poly_mul(self, other)
        return Polynomial._wrap(self.coeffs * self.ctx.convert(other), self.ctx)

    __rmul__ = __mul__

    def __call__(self, x):
        return horner_eval(self, x)

    def __eq__(self, other):
        if not isinstance(other, Polynomial) or other.ctx != self.ctx:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return bool(np.all(self.padded(n) == other.padded(n)))

    __hash__ = None

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        return f"Polynomial({[self.ctx.format(v) for v in self.coeffs]}, ctx={self.ctx})"


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    """Product of two polynomials; nominal degree is ``deg p + deg q``."""
    p._check(q)
    return Polynomial._wrap(convolve(p.coeffs, q.coeffs), p.ctx)


def poly_approx_eq(p: Polynomial, q: Polynomial, rel_tol: float) -> bool:
    """True iff ``max|p_k - q_k| <= rel_tol * max(1, max|p_k|, max|q_k|)``."""
    p._check(q)
    ctx = p.ctx
    n = max(len(p.coeffs), len(q.coeffs))
    a, b = p.padded(n), q.padded(n)
    diff = max(ctx.abs(v) for v in a - b)
    scale = max([1] + [ctx.abs(v) for v in a] + [ctx.abs(v) for v in b])
    return bool(diff <= rel_tol * scale)


def horner_eval(p: Polynomial, x):
    """Evaluate ``p`` at scalar ``x`` with the Horner recurrence."""
    x = p.ctx.convert(x)
    acc = p.ctx.zero
    for coeff in reversed(p.coeffs):
        acc = acc * x + coeff
    return acc
