"""Static Maxwell fields with variable permeability, then the energy view.

Part one solves the static system for f^2 = 1 + x3^2/2 and source e3 and
prints its residuals.  Part two minimizes the curl energy for boundary
data grad(x1 x2) and shows the energy dropping to zero: a gradient field
has no curl, so the minimum is zero.

Run with ``python demos/maxwell_energy.py [n]``.
"""

import sys

import numpy as np

from divcurl import BoundaryField, Conductivity, Field, SolveReport, build_ball_domain, extract_boundary, solve_maxwell
from divcurl import variational as V

n = int(sys.argv[1]) if len(sys.argv) > 1 else 24
dom = build_ball_domain(1.0, n)

f = Conductivity.from_function(dom, lambda p: np.sqrt(1 + p[:, 2] ** 2 / 2))
g = Field.from_function(dom, lambda p: np.tile([0.0, 0.0, 1.0], (len(p), 1)))
report = SolveReport()
E, H = solve_maxwell(f, g, report=report)
print(f"Maxwell, n={n}")
for name, chk in report.residuals.checks.items():
    print(f"  {name:12s} {chk.relative:.2e}")

phi = BoundaryField.from_function(extract_boundary(dom), lambda p: np.stack([p[:, 1], p[:, 0], 0 * p[:, 0]], 1))
problem = V.EnergyProblem(Conductivity.constant(dom), phi)
init = V.harmonic_extension(problem) + V.random_test_field(problem, np.random.default_rng(0))
W, rep = V.minimize(problem, init)
e = rep.energies
print(f"energy minimization: {len(e) - 1} iterations, monotone={rep.monotone}")
print(f"  energy {e[0]:.3e} -> {e[-1]:.3e}")
