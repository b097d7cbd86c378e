"""
A polynomial that three products reach only in the limit
=========================================================

The bundled three-product scheme computes x^7 + eps x^8 for every nonzero
eps.  As eps shrinks the entries blow up, so x^7 itself is a limit point.
"""
from fractions import Fraction

import numpy as np

from polyscheme import DOUBLE, EXACT, apply_to_matrix, expand
from polyscheme.fixtures import epsilon_example

# exact rational arithmetic reproduces the target with no rounding at all
for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 10)):
    p = expand(epsilon_example(eps, EXACT))
    print(f"eps={eps}:", [str(v) for v in p.coeffs])

# the size of the largest entry grows like eps^-9
for k in range(1, 6):
    eps = Fraction(1, 10**k)
    s = epsilon_example(eps, EXACT)
    biggest = max(abs(v) for _, v in s.entries())
    print(f"eps=1e-{k}: largest entry {float(biggest):.2e}")

# in double precision the same growth eats the accuracy of the x^7 term
X = np.diag([0.9, 0.5, -0.3])
for k in (1, 2, 3, 4):
    s = epsilon_example(Fraction(1, 10**k), DOUBLE)
    Y, count = apply_to_matrix(s, X)
    exact = np.diag(X) ** 7 + 10.0**-k * np.diag(X) ** 8
    print(f"eps=1e-{k}: {count} products, max error {np.abs(np.diag(Y) - exact).max():.1e}")
