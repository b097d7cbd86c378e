"""
How many polynomials do m products reach?
=========================================

The rank of the Jacobian of the expansion map at a random canonical scheme
estimates the dimension of the reachable set.  It comes out as m^2, well
below the 2^m + 1 coefficients of a degree-2^m polynomial once m >= 5.
"""
import time

from polyscheme import dimension_estimate, extended, jacobian
from polyscheme.analysis import ParamMask, random_canonical_scheme
from polyscheme.svd import singular_values
import numpy as np

for m in (3, 4, 5):
    t0 = time.perf_counter()
    print(f"m={m}: rank {dimension_estimate(m, trials=10)} of {2**m + 1} coefficients ({time.perf_counter() - t0:.2f}s)")

# at m=6 the Jacobian is badly conditioned, so the rank decision needs more bits
ctx = extended(128)
s = random_canonical_scheme(6, ctx, np.random.default_rng(0))
sig = singular_values(jacobian(s, ParamMask.canonical(6)).values, ctx)
print("m=6 singular value spread: %.1e" % float(sig[0] / sig[-1]))
print("m=6 rank at 128 bits:", dimension_estimate(6, trials=2, ctx=ctx))
