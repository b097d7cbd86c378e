"""Independent reference implementations used only by the tests.

None of these import the package's arithmetic: polynomials are plain lists
of ``Fraction`` (or complex) and products are schoolbook double loops.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def schoolbook_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _axpy(acc, a, q):
    if len(acc) < len(q):
        acc = acc + [0] * (len(q) - len(acc))
    return [acc[i] + (a * q[i] if i < len(q) else 0) for i in range(len(acc))]


def naive_expand(A, B, c):
    """Expand a scheme given as nested lists of Fractions."""
    Q = [[Fraction(1)], [Fraction(0), Fraction(1)]]
    for ra, rb in zip(A, B):
        fa, fb = [0], [0]
        for j, v in enumerate(ra):
            fa = _axpy(fa, v, Q[j])
        for j, v in enumerate(rb):
            fb = _axpy(fb, v, Q[j])
        Q.append(schoolbook_mul(fa, fb))
    out = [0]
    for j, v in enumerate(c):
        out = _axpy(out, v, Q[j])
    return out


def strip(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def power_sum(p, x):
    return sum(c * x**k for k, c in enumerate(p))


def matrix_horner(coeffs, X):
    n = X.shape[0]
    acc = np.zeros_like(X)
    for c in reversed(list(coeffs)):
        acc = acc @ X + c * np.eye(n, dtype=X.dtype)
    return acc


def fd_jacobian(expand_coeffs, s, positions, length):
    """Central differences with h = eps^(1/3) * max(1, |theta|)."""
    h0 = np.finfo(float).eps ** (1 / 3)
    cols = []
    for pos in positions:
        v = s.get(*pos)
        h = h0 * max(1.0, abs(v))
        plus = expand_coeffs(s.replace({pos: v + h}), length)
        minus = expand_coeffs(s.replace({pos: v - h}), length)
        cols.append((plus - minus) / (2 * h))
    return np.array(cols).T


def brute_force_structures(m, r_max):
    """Exhaustive breadth-first search over single reductions.

    A pattern is a tuple of 2m tuples of booleans (A rows then B rows, first
    column excluded).  Returns ``{pattern: (r, degree)}``.
    """
    start = tuple(tuple([True] * k) for k in range(1, m + 1)) * 2

    def degree(p):
        deg = [0, 1]
        for k in range(m):
            ra, rb = p[k], p[m + k]
            da = max(deg[j + 1] for j, on in enumerate(ra) if on)
            db = max(deg[j + 1] for j, on in enumerate(rb) if on)
            deg.append(da + db)
        return max(deg)

    seen = {start: 0}
    frontier = [start]
    for r in range(1, r_max + 1):
        nxt = []
        for p in frontier:
            for row in range(2 * m):
                on = [j for j, v in enumerate(p[row]) if v]
                if len(on) <= 1:
                    continue
                newrow = list(p[row])
                newrow[on[-1]] = False
                q = p[:row] + (tuple(newrow),) + p[row + 1 :]
                if q not in seen:
                    seen[q] = r
                    nxt.append(q)
        frontier = nxt
    return {p: (r, degree(p)) for p, r in seen.items()}


def brute_pattern_id(p, m):
    parts = []
    for side, off in (("A", 0), ("B", m)):
        for k in range(1, m + 1):
            for j, on in enumerate(p[off + k - 1], start=2):
                if not on:
                    parts.append(f"{side}{k}:{j}")
    return ";".join(parts)
