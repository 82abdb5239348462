"""From a conductivity problem to a solution of the main Vekua equation.

With f = exp(x3/2) we solve div(f^2 grad u) = 0 for boundary data x1/f,
lift W0 = f u to a full quaternion field W and check that the vector part
satisfies the double curl equation.  The scalar part is written to VTK.

Run with ``python demos/vekua_pipeline.py [n] [out.vtk]``.
"""

import sys

import numpy as np

from divcurl import BoundaryField, Conductivity, build_ball_domain, extract_boundary, solve_conductivity, vekua_complete
from divcurl import io as qio
from divcurl.suites import double_curl_check
from divcurl.verify import residual_conductivity, residual_vekua

n = int(sys.argv[1]) if len(sys.argv) > 1 else 24
out = sys.argv[2] if len(sys.argv) > 2 else None

dom = build_ball_domain(1.0, n)
f = Conductivity.from_function(dom, lambda p: np.exp(p[:, 2] / 2))
b = extract_boundary(dom)
x1 = BoundaryField.from_function(b, lambda p: p[:, 0])
data = BoundaryField(b, x1.values[:, 0] / f.at(b.points))

u = solve_conductivity(f, None, data)
W = vekua_complete(f, f.f * u)

print(f"n={n}")
print(f"  conductivity residual  {residual_conductivity(f.f, u)['conductivity'].relative:.2e}")
print(f"  Vekua residual         {residual_vekua(f.f, W)['vekua'].relative:.2e}")
res, scale = double_curl_check(f, W.vector_part())
print(f"  double curl residual   {res / scale:.2e}")

if out:
    qio.write_vtk(W.scalar_part(), out, name="W0")
    print(f"  scalar part written to {out}")
