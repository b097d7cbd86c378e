"""Singular value decomposition by one-sided Jacobi rotations.

Written against :class:`~polyscheme.scalars.ScalarContext` so the same code
runs in double, complex and extended precision.  Tall matrices are first
reduced to a square triangular factor with Householder QR, which shortens
the columns the rotations work on.
"""
from __future__ import annotations

import numpy as np

from .scalars import COMPLEX, DOUBLE, ScalarContext

__all__ = ["svd", "householder_qr", "singular_values"]


def _infer_ctx(M: np.ndarray, ctx: ScalarContext | None) -> ScalarContext:
    if ctx is not None:
        return ctx
    if M.dtype == object:
        raise ValueError("pass a ScalarContext for object arrays")
    return COMPLEX if np.iscomplexobj(M) else DOUBLE


def _sqnorm(x: np.ndarray, ctx: ScalarContext):
    if not ctx.is_complex:
        return np.dot(x, x)
    if ctx.is_double:
        return float(np.vdot(x, x).real)
    return sum((v.real * v.real + v.imag * v.imag for v in x), ctx.mp.mpf(0))


def _dot(x: np.ndarray, y: np.ndarray, ctx: ScalarContext):
    """x^H y"""
    if not ctx.is_complex:
        return np.dot(x, y)
    if ctx.is_double:
        return np.vdot(x, y)
    return np.dot(np.conjugate(x), y)


def householder_qr(M: np.ndarray, ctx: ScalarContext | None = None, want_q: bool = True):
    """Thin QR of a tall matrix: ``M = Q R`` with ``Q`` n x p, ``R`` p x p upper triangular."""
    M = np.asarray(M)
    ctx = _infer_ctx(M, ctx)
    n, p = M.shape
    R = M.astype(ctx.dtype, copy=True)
    reflectors = []
    for j in range(p):
        x = R[j:, j]
        nx2 = _sqnorm(x, ctx)
        if nx2 == 0:
            reflectors.append(None)
            continue
        nx = ctx.real_sqrt(nx2)
        x0 = x[0]
        ax0 = ctx.abs(x0)
        phase = x0 / ax0 if ax0 != 0 else ctx.one
        v = x.copy()
        v[0] = x0 + phase * nx
        vn2 = _sqnorm(v, ctx)
        w = np.dot(np.conjugate(v) if ctx.is_complex else v, R[j:, j:])
        R[j:, j:] -= np.multiply.outer(v, w) * (2 / vn2)
        R[j + 1 :, j] = ctx.zero
        reflectors.append((v, vn2))
    Rsq = R[:p, :].copy()
    if not want_q:
        return None, Rsq
    Q = ctx.zeros((n, p))
    for i in range(p):
        Q[i, i] = ctx.one
    for j in range(p - 1, -1, -1):
        ref = reflectors[j]
        if ref is None:
            continue
        v, vn2 = ref
        w = np.dot(np.conjugate(v) if ctx.is_complex else v, Q[j:, :])
        Q[j:, :] -= np.multiply.outer(v, w) * (2 / vn2)
    return Q, Rsq


def _jacobi(W: np.ndarray, ctx: ScalarContext, want_v: bool, max_sweeps: int):
    """Orthogonalize the rows of ``W`` (the columns of the original matrix) in place."""
    p = W.shape[0]
    V = None
    if want_v:
        V = ctx.zeros((p, p))
        for i in range(p):
            V[i, i] = ctx.one
    tol = 8 * ctx.eps
    half = ctx.convert("1/2") if not ctx.is_double else 0.5
    if ctx.is_complex and not ctx.is_double:
        half = ctx.mp.mpf(half.real)
    for _ in range(max_sweeps):
        norms = [_sqnorm(W[i], ctx) for i in range(p)]
        rotated = False
        for i in range(p - 1):
            for j in range(i + 1, p):
                a, b = norms[i], norms[j]
                if a == 0 or b == 0:
                    continue
                gamma = _dot(W[i], W[j], ctx)
                g = ctx.abs(gamma)
                if g == 0 or g <= tol * ctx.real_sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) * half / g
                t = 1 / (abs(zeta) + ctx.real_sqrt(1 + zeta * zeta))
                if zeta < 0:
                    t = -t
                cs = 1 / ctx.real_sqrt(1 + t * t)
                sn = cs * t
                if ctx.is_complex:
                    ph = (gamma / g).conjugate()
                    wj = W[j] * ph
                else:
                    ph = None
                    wj = W[j] if gamma > 0 else -W[j]
                wi = W[i]
                W[i], W[j] = wi * cs - wj * sn, wi * sn + wj * cs
                norms[i], norms[j] = a - t * g, b + t * g
                for q in (i, j):
                    if not norms[q] > 0:  # cancellation in the cached update
                        norms[q] = _sqnorm(W[q], ctx)
                if want_v:
                    if ctx.is_complex:
                        vj = V[j] * ph
                    else:
                        vj = V[j] if gamma > 0 else -V[j]
                    vi = V[i]
                    V[i], V[j] = vi * cs - vj * sn, vi * sn + vj * cs
        if not rotated:
            break
    return W, V


def svd(M, ctx: ScalarContext | None = None, compute_uv: bool = True, max_sweeps: int = 60):
    """Singular value decomposition ``M = U diag(s) Vh``.

    Returns ``(U, s, Vh)`` (economy size, ``s`` descending) or just ``s`` when
    ``compute_uv`` is false.  ``s`` holds real scalars of the context's
    precision.
    """
    M = np.asarray(M)
    ctx = _infer_ctx(M, ctx)
    n, p = M.shape
    if n < p:
        MH = np.conjugate(M.T) if ctx.is_complex else M.T
        if not compute_uv:
            return svd(MH, ctx, False, max_sweeps)
        U, s, Vh = svd(MH, ctx, True, max_sweeps)
        conj = (lambda X: np.conjugate(X.T)) if ctx.is_complex else (lambda X: X.T)
        return conj(Vh), s, conj(U)
    if p == 0:
        s = np.zeros(0) if ctx.is_double else np.empty(0, dtype=object)
        return (ctx.zeros((n, 0)), s, ctx.zeros((0, 0))) if compute_uv else s

    if n > p:
        Q, R = householder_qr(M, ctx, want_q=compute_uv)
    else:
        Q, R = None, M.astype(ctx.dtype, copy=True)
    # rows of W are the columns of R
    W = np.ascontiguousarray(R.T).astype(ctx.dtype, copy=True)
    W, V = _jacobi(W, ctx, compute_uv, max_sweeps)

    sig = [ctx.real_sqrt(_sqnorm(W[i], ctx)) for i in range(p)]
    order = sorted(range(p), key=lambda i: sig[i], reverse=True)
    s = np.array([sig[i] for i in order], dtype=np.float64 if ctx.is_double else object)
    if not compute_uv:
        return s
    Ur = ctx.zeros((p, p))
    for col, i in enumerate(order):
        if sig[i] != 0:
            Ur[:, col] = W[i] / sig[i]
    # columns for zero singular values are left as zero vectors
    U = Ur if Q is None else Q @ Ur
    Vh = np.array([V[i] for i in order], dtype=ctx.dtype)
    if ctx.is_complex:
        Vh = np.conjugate(Vh)
    return U, s, Vh


def singular_values(M, ctx: ScalarContext | None = None):
    return svd(M, ctx, compute_uv=False)
