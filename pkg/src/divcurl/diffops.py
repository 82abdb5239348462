"""Finite-difference operators and ray-integral operators on star-shaped domains.

Local operators use centered differences where both axis neighbors carry
samples and second-order one-sided differences at the support edge.  Ray
operators (radial moments, antigradient, monogenic completion) integrate
along segments from the star center with Gauss-Jacobi rules in ``t`` and
trilinear interpolation of grid data.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import OutOfDomainError, PreconditionError, StencilError
from .grid import Field, _shift, _shift_bool, extend

__all__ = [
    "RayQuadrature",
    "partial",
    "gradient",
    "divergence",
    "curl",
    "laplacian",
    "dirac",
    "radial_moment",
    "antigradient",
    "monogenic_completion",
    "complete_from_vector",
    "l2_norm",
    "relative_residual",
    "solenoidal_residual",
    "irrotational_residual",
    "harmonic_residual",
    "check_solenoidal",
    "check_irrotational",
    "check_harmonic",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-2
ZERO_SCALE = 1e-14
_CHUNK = 16384


# ---------------------------------------------------------------- stencils

def _partial_array(values, support, axis, h):
    v0 = values
    sp1, sm1 = _shift_bool(support, axis, 1), _shift_bool(support, axis, -1)
    sp2, sm2 = _shift_bool(support, axis, 2), _shift_bool(support, axis, -2)
    vp1, vm1 = _shift(values, axis, 1), _shift(values, axis, -1)
    vp2, vm2 = _shift(values, axis, 2), _shift(values, axis, -2)

    central = support & sp1 & sm1
    fwd = support & ~central & sp1 & sp2
    bwd = support & ~central & ~fwd & sm1 & sm2
    fwd1 = support & ~(central | fwd | bwd) & sp1
    bwd1 = support & ~(central | fwd | bwd | fwd1) & sm1
    isolated = support & ~(central | fwd | bwd | fwd1 | bwd1)
    if isolated.any():
        raise StencilError(
            f"{int(isolated.sum())} voxels have no neighbor along axis {axis}; cannot differentiate"
        )
    out = np.zeros_like(values)
    c = lambda m: m[..., None]  # noqa: E731
    out = np.where(c(central), (vp1 - vm1) / (2 * h), out)
    out = np.where(c(fwd), (-3 * v0 + 4 * vp1 - vp2) / (2 * h), out)
    out = np.where(c(bwd), (3 * v0 - 4 * vm1 + vm2) / (2 * h), out)
    out = np.where(c(fwd1), (vp1 - v0) / h, out)
    out = np.where(c(bwd1), (v0 - vm1) / h, out)
    return out


def partial(u: Field, axis: int) -> Field:
    """Derivative of every component of ``u`` along ``axis``."""
    return Field(u.domain, _partial_array(u.values, u.support, axis, u.grid.spacing), u.support)


def _jacobian(v: Field) -> np.ndarray:
    """``J[..., c, a] = d v_c / d x_a``."""
    h = v.grid.spacing
    return np.stack([_partial_array(v.values, v.support, a, h) for a in range(3)], axis=-1)


def gradient(u: Field) -> Field:
    if u.components != 1:
        raise ValueError("gradient expects a scalar field")
    return Field(u.domain, _jacobian(u)[..., 0, :], u.support)


def divergence(v: Field) -> Field:
    if v.components != 3:
        raise ValueError("divergence expects a vector field")
    J = _jacobian(v)
    return Field(v.domain, J[..., 0, 0] + J[..., 1, 1] + J[..., 2, 2], v.support)


def _curl_from_jacobian(J):
    return np.stack(
        [J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]],
        axis=-1,
    )


def curl(v: Field) -> Field:
    if v.components != 3:
        raise ValueError("curl expects a vector field")
    return Field(v.domain, _curl_from_jacobian(_jacobian(v)), v.support)


def laplacian(u: Field) -> Field:
    """Componentwise ``div grad``, built from the same first-derivative stencils.

    Composing the first-order stencils keeps ``curl curl = grad div - lap``
    exact on voxels where every stencil is centered.
    """
    h = u.grid.spacing
    out = np.zeros_like(u.values)
    for a in range(3):
        d = _partial_array(u.values, u.support, a, h)
        out += _partial_array(d, u.support, a, h)
    return Field(u.domain, out, u.support)


def dirac(w: Field, side: str = "left") -> Field:
    """Moisil-Teodorescu operator applied from the left (``Dw``) or right (``wD``).

    ``Dw = -div w + grad w0 + curl w``; ``wD = -div w + grad w0 - curl w``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    w = w.as_quaternion()
    J = _jacobian(w)
    out = np.zeros_like(w.values)
    out[..., 0] = -(J[..., 1, 0] + J[..., 2, 1] + J[..., 3, 2])
    rot = _curl_from_jacobian(J[..., 1:, :])
    out[..., 1:] = J[..., 0, :] + (rot if side == "left" else -rot)
    return Field(w.domain, out, w.support)


# ------------------------------------------------------------------ norms

def l2_norm(values: np.ndarray, h: float = 1.0) -> float:
    """Discrete L2 norm with voxel weights ``h**3``; ``values`` is ``(N, c)``."""
    return float(np.sqrt(np.sum(np.asarray(values) ** 2) * h**3))


def relative_residual(residual: float, scale: float) -> float:
    return residual / scale if scale >= ZERO_SCALE else residual


def length_scale(domain) -> float:
    """Cube root of the masked volume; converts field norms into derivative units."""
    return float((domain.n_masked * domain.h**3) ** (1.0 / 3.0))


def _region(field: Field, region):
    if region is None:
        region = field.domain.interior()
        if not np.any(region & field.support):
            region = field.support
    return np.asarray(region, dtype=bool) & field.support


def solenoidal_residual(g: Field, region=None) -> float:
    """``||div g|| / sum_ab ||d_b g_a||`` over ``region`` (interior by default).

    Every residual scale sums the norms of all partials, so fields whose
    diagonal derivatives vanish (e.g. ``grad(x1 x2)``) still get a
    meaningful scale, plus ``||g|| / l`` with ``l`` the domain length
    scale, so constant and linear data are not judged noise against noise.
    """
    r = _region(g, region)
    J = _jacobian(g)[r]
    h = g.grid.spacing
    res = l2_norm(J[:, 0, 0] + J[:, 1, 1] + J[:, 2, 2], h)
    return relative_residual(res, _jacobian_scale(J, g.values[r], h, g.domain))


def _jacobian_scale(J, values, h, domain) -> float:
    parts = sum(l2_norm(J[:, i, j], h) for i in range(3) for j in range(3))
    return parts + l2_norm(values, h) / length_scale(domain)


def irrotational_residual(g: Field, region=None) -> float:
    r = _region(g, region)
    J = _jacobian(g)[r]
    h = g.grid.spacing
    res = l2_norm(_curl_from_jacobian(J), h)
    return relative_residual(res, _jacobian_scale(J, g.values[r], h, g.domain))


def harmonic_residual(u: Field, region=None) -> float:
    """``||lap u||`` against ``sum_ab ||d_b d_a u|| + ||grad u|| / l`` (componentwise for vector fields)."""
    r = _region(u, region)
    h = u.grid.spacing
    first = [_partial_array(u.values, u.support, a, h) for a in range(3)]
    lap = 0.0
    ell = length_scale(u.domain)
    scale = sum(l2_norm(first[a][r], h) for a in range(3)) / ell
    for a in range(3):
        for b in range(3):
            d2 = _partial_array(first[a], u.support, b, h)[r]
            scale += l2_norm(d2, h)
            if a == b:
                lap = lap + d2
    return relative_residual(l2_norm(lap, h), scale)


def check_solenoidal(g: Field, tol: float = DEFAULT_TOL, what: str = "g") -> float:
    res = solenoidal_residual(g)
    if not res <= tol:
        raise PreconditionError(f"{what} is not solenoidal: relative ||div {what}|| = {res:.3e} > {tol:g}", res, tol)
    return res


def check_irrotational(g: Field, tol: float = DEFAULT_TOL, what: str = "g") -> float:
    res = irrotational_residual(g)
    if not res <= tol:
        raise PreconditionError(f"{what} is not irrotational: relative ||curl {what}|| = {res:.3e} > {tol:g}", res, tol)
    return res


def check_harmonic(u: Field, tol: float = DEFAULT_TOL, what: str = "w0") -> float:
    res = harmonic_residual(u)
    if not res <= tol:
        raise PreconditionError(f"{what} is not harmonic: relative ||lap {what}|| = {res:.3e} > {tol:g}", res, tol)
    return res


# ------------------------------------------------------------ ray integrals

@dataclass(frozen=True)
class RayQuadrature:
    """Rule for ``int_0^1 t**alpha p(t) dt``, exact for ``deg p <= 2*count - 1``.

    ``alpha = 0`` is Gauss-Legendre on [0, 1]; other exponents use the
    Gauss-Jacobi rule so the weight ``t**alpha`` is integrated exactly.
    """

    count: int = 32
    alpha: float = 0.0

    def __post_init__(self):
        if self.count < 8:
            raise ValueError("ray quadrature needs at least 8 nodes")
        if not self.alpha > -1:
            raise ValueError("ray quadrature exponent must exceed -1")

    @property
    def nodes(self) -> np.ndarray:
        return _jacobi_rule(self.count, float(self.alpha))[0]

    @property
    def weights(self) -> np.ndarray:
        return _jacobi_rule(self.count, float(self.alpha))[1]


@lru_cache(maxsize=64)
def _jacobi_rule(count, alpha):
    if alpha == 0.0:
        x, w = np.polynomial.legendre.leggauss(count)
    else:
        x, w = roots_jacobi(count, 0.0, alpha)
    t = 0.5 * (1.0 + x)
    w = w * 2.0 ** (-alpha - 1.0)
    return t, w


def _sampler(w):
    """Return ``points -> values`` for a Field (extended past its support) or a callable."""
    if isinstance(w, Field):
        ext = extend(w, 2)

        def sample(pts):
            return ext.sample(pts)

        return sample, w.components

    def sample_callable(pts):
        v = np.asarray(w(pts), dtype=float)
        return v[..., None] if v.ndim == pts.ndim - 1 else v

    return sample_callable, None


def _ray_integral(sample, center, points, quad: RayQuadrature, combine):
    """``sum_k w_k combine(x', F(a + t_k x'))`` for every row of ``points``."""
    t, wts = quad.nodes, quad.weights
    out = None
    for start in range(0, len(points), _CHUNK):
        x = points[start : start + _CHUNK]
        xp = x - center
        pts = center + t[None, :, None] * xp[:, None, :]
        vals = sample(pts.reshape(-1, 3)).reshape(len(x), len(t), -1)
        contrib = np.einsum("k,nkc->nc", wts, combine(xp[:, None, :], vals))
        if out is None:
            out = np.empty((len(points), contrib.shape[1]))
        out[start : start + len(x)] = contrib
    return out


def _center_of(w, center):
    if center is not None:
        return np.asarray(center, dtype=float)
    if isinstance(w, Field):
        return w.domain.star_center
    return np.zeros(3)


def _evaluate_on(w, points, combine, quad, center):
    sample, _ = _sampler(w)
    c = _center_of(w, center)
    if isinstance(w, Field):
        pts = w.grid.coords[w.support]
        vals = _ray_integral(sample, c, pts, quad, combine)
        out = np.zeros(w.grid.shape + (vals.shape[1],))
        out[w.support] = vals
        return Field(w.domain, out, w.support)
    if points is None:
        raise ValueError("evaluation points are required for callable inputs")
    pts = np.asarray(points, dtype=float)
    return _ray_integral(sample, c, pts.reshape(-1, 3), quad, combine).reshape(pts.shape[:-1] + (-1,))


def radial_moment(w, alpha: float, center=None, points=None, count: int = 32):
    """``I^alpha[w](x) = int_0^1 t**alpha w(a + t (x - a)) dt``.

    ``w`` is a :class:`Field` (result on its support) or a callable taking
    ``(N, 3)`` points (result at ``points``).
    """
    quad = RayQuadrature(count, alpha)
    try:
        return _evaluate_on(w, points, lambda xp, v: v, quad, center)
    except OutOfDomainError as exc:
        raise OutOfDomainError(f"radial moment ray left the sampled region: {exc}") from exc


def weighted_moment_minus_one(G, center=None, points=None, count: int = 32):
    """``I^{-1}[(|x'|^2 / 2) G]`` with the ``t**2`` from ``|t x'|^2`` folded in.

    The integrand ``t**-1 (t**2 |x'|**2 / 2) G(a + t x')`` is regular, so the
    rule uses weight ``t**1``.
    """
    quad = RayQuadrature(count, 1.0)
    return _evaluate_on(
        G, points, lambda xp, v: 0.5 * np.sum(xp * xp, axis=-1)[..., None] * v, quad, center
    )


def antigradient(g, base=None, points=None, tol: float = DEFAULT_TOL, check: bool = True, count: int = 32):
    """Potential ``psi(x) = int_0^1 (x - a) . g(a + t (x - a)) dt`` with ``psi(a) = 0``."""
    if isinstance(g, Field):
        if g.components != 3:
            raise ValueError("antigradient expects a vector field")
        if check:
            check_irrotational(g, tol)
    quad = RayQuadrature(count, 0.0)
    return _evaluate_on(g, points, lambda xp, v: np.sum(xp * v, axis=-1)[..., None], quad, base)


def monogenic_completion(w0, center=None, points=None, grad=None, tol: float = DEFAULT_TOL, check: bool = True, count: int = 32):
    """Vector partner ``S[w0](x) = int_0^1 t x' x grad w0(a + t x') dt``, ``x' = x - a``.

    For a Field, ``grad w0`` is computed once by finite differences and
    interpolated along rays.  For a callable ``w0`` pass its gradient as
    ``grad``.
    """
    quad = RayQuadrature(count, 1.0)
    combine = lambda xp, v: np.cross(np.broadcast_to(xp, v.shape), v)  # noqa: E731
    if isinstance(w0, Field):
        if w0.components != 1:
            raise ValueError("monogenic completion expects a scalar field")
        if check:
            check_harmonic(w0, tol)
        G = gradient(w0) if grad is None else grad
        out = _evaluate_on(G, None, combine, quad, center if center is not None else w0.domain.star_center)
        return out.with_support(w0.support)
    if grad is None:
        raise ValueError("callable inputs need an explicit gradient")
    return _evaluate_on(grad, points, combine, quad, center)


def complete_from_vector(w: Field, tol: float = DEFAULT_TOL, base=None) -> Field:
    """Scalar ``w0 = -A[curl w]`` making ``w0 + w`` monogenic.

    ``w`` must be harmonic and solenoidal.
    """
    if w.components != 3:
        raise ValueError("complete_from_vector expects a vector field")
    check_harmonic(w, tol, "w")
    check_solenoidal(w, tol, "w")
    return -antigradient(curl(w), base=base, check=False)
