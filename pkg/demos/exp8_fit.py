"""
Fitting a five-product scheme to a degree-20 exponential
========================================================

The bundled m=5 scheme matches the Taylor polynomial of exp(8x) to degree
20.  Here we perturb its free entries and let the damped Newton fitter find
its way back, first in double and then in 128-bit arithmetic.
"""
import numpy as np

from polyscheme import DOUBLE, extended
from polyscheme.analysis import fitting_condition
from polyscheme.fixtures import exp_taylor, named_pattern, exp8_mask, exp8_scheme
from polyscheme.solve import FitOptions, fit

ref = exp8_scheme(DOUBLE)
target = exp_taylor(20, 8)
mask = exp8_mask()
print("unknowns:", ", ".join(mask.names()))
print("condition number at the solution: %.3g" % fitting_condition(ref, target, mask))

rng = np.random.default_rng(0)
for ctx in (DOUBLE, extended(128)):
    base = exp8_scheme(ctx)
    noisy = base.replace({p: base.get(*p) * ctx.convert(1 + 1e-3 * rng.uniform(-1, 1)) for p in mask.positions()})
    s, rep = fit(exp_taylor(20, 8, ctx), named_pattern("m5-a45-a56"), mask=mask, start=noisy, opts=FitOptions(ctx=ctx))
    print(f"{ctx}: converged={rep.converged} after {rep.iterations} iterations, "
          f"residual {float(rep.final_residual_norm):.1e}, steps {rep.step_kinds}")
    print("   a42 =", ctx.format(s.a(4, 2)), "  b55 =", ctx.format(s.b(5, 5)))
