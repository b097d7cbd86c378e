"""
Any degree-12 polynomial with four products
===========================================

The coefficient ladder solves for the scheme entries one at a time, from the
top coefficient down, so no nonlinear solver is needed.
"""
from math import factorial

import numpy as np

from polyscheme import apply_to_matrix, expand, extended
from polyscheme.fixtures import exp_taylor
from polyscheme.solve import paterson_stockmeyer, refine, solve_degree12

p = exp_taylor(12)
s = solve_degree12(p)
print(s)

# four products against six for Paterson-Stockmeyer on the same polynomial
print("ladder products:", s.m, " Paterson-Stockmeyer products:", paterson_stockmeyer(p).m)

# the entries are large (a42 is about 3e9) which costs digits in double
got = expand(s).padded(13)
print("relative coefficient errors:", ["%.0e" % (abs(a - b) / b) for a, b in zip(got, p.coeffs)])

# solving directly in 128-bit arithmetic removes that loss
ctx = extended(128)
s128 = solve_degree12(exp_taylor(12, 1, ctx))
got = expand(s128).padded(13)
print("128-bit worst relative error: %.1e" % max(float(abs(a - b) / b) for a, b in zip(got, exp_taylor(12, 1, ctx).coeffs)))

# or a double solution can be polished by Newton steps at higher precision
ctx = extended(256)
target = exp_taylor(12, 1, ctx)
polished = refine(s, target, ctx)
print("refined residual: %.1e" % float(max(abs(a - b) for a, b in zip(expand(polished).padded(13), target.coeffs))))

# applied to a matrix the same large entries cancel, so expect about
# 1e-16 times the largest entry as the absolute error
X = np.array([[0.1, 0.4], [-0.2, 0.3]])
Y, count = apply_to_matrix(s, X)
series = sum(np.linalg.matrix_power(X, k) / factorial(k) for k in range(13))
print(count, "products, difference to the series: %.1e" % np.abs(Y - series).max())
Y128, _ = apply_to_matrix(s128, s128.ctx.array(X))
print("same in 128-bit arithmetic: %.1e" % np.abs(np.array(Y128, dtype=float) - series).max())
