"""Recover a vector potential for the field of a point charge on the unit ball.

The charge field x/|x|^3 is not solenoidal at the origin, so the datum is
regularized along a string running away from the star center.  The script
solves curl w = g, then compares w with the closed-form potential: the two
differ by a gradient, so their difference should be nearly curl- and
divergence-free.

Run with ``python demos/point_charge.py [n]`` (default n = 48, about half a minute; below about
24 the regularized datum is too coarse to pass the solenoidal gate).
"""

import sys

import numpy as np

from divcurl import Field, SolveReport, build_ball_domain, solve_divcurl
from divcurl import diffops as D
from divcurl import fields as F
from divcurl.verify import norm_on

n = int(sys.argv[1]) if len(sys.argv) > 1 else 48
a = np.array([0.0, 0.0, -0.5])
dom = build_ball_domain(1.0, n, star_center=a)
u = -a / np.linalg.norm(a)

g = Field.from_function(dom, lambda p: F.string_regularized_coulomb(p, direction=u))
report = SolveReport()
w = solve_divcurl(None, g, tol=0.05, report=report)
print(f"n={n}: solved in {report.runtime:.1f} s")

region = F.example_region(dom, direction=u)
g_true = Field.from_function(dom, F.coulomb)
gn = norm_on(g_true.values, region, dom.h)

wc_vals = F.coulomb_closed_form(dom.grid.coords.reshape(-1, 3), a).reshape(dom.grid.shape + (3,))
wc_vals[~np.isfinite(wc_vals)] = 0.0
wc = Field(dom, wc_vals, dom.mask)

for label, fld in (("solver", w), ("closed form", wc), ("difference", w - wc)):
    target = 0.0 if label == "difference" else g_true.values
    curl = norm_on(D.curl(fld).values - target, region, dom.h) / gn
    div = norm_on(D.divergence(fld).values, region, dom.h) / gn
    print(f"  {label:12s} curl residual {curl:.3f}   div residual {div:.3f}")

# the solver and the closed form share their finite-difference error, which
# is why the difference is much cleaner than either field alone
