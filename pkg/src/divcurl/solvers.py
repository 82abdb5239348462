"""Constructive solution formulas for div-curl, double-curl, Vekua and static Maxwell problems.

All solvers are pipelines of the volume integrals in :mod:`divcurl.integral`
and the ray operators in :mod:`divcurl.diffops`.  Every "arbitrary
harmonic function" in the general solutions defaults to zero; callers can
supply one through the ``h`` argument.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import diffops as D
from .errors import ConfigurationError, PreconditionError, SolverError
from .grid import BoundaryField, Domain, Field, extend
from .integral import DEFAULT_QUADRATURE, QuadratureConfig, newton_potential, single_layer, teodorescu
from .quaternion import qconj_arrays, qmul_arrays
from .verify import ResidualSuite, dirac_log, norm_on, quaternion_scale, region_mask, residual_conductivity, residual_divcurl, residual_vekua

__all__ = [
    "Conductivity",
    "SolveReport",
    "VekuaOperatorTag",
    "curl_inverse",
    "solve_divcurl",
    "double_curl_inverse",
    "solve_divcurl_boundary",
    "grigorev_solution",
    "vekua_complete",
    "vekua_operator_apply",
    "vekua_antiderivative",
    "solve_conductivity",
    "hilbert_transform",
    "solve_maxwell",
    "cg",
]


class Conductivity:
    """Positive conductivity factor ``f`` (the conductivity itself is ``f**2``).

    ``func`` is an optional analytic form used to evaluate ``f`` off the
    grid, e.g. at boundary quadrature points.
    """

    def __init__(self, f: Field, func=None):
        if f.components != 1:
            raise ConfigurationError("conductivity factor must be a scalar field")
        v = f.values[..., 0][f.domain.mask]
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ConfigurationError("conductivity factor f must be finite and positive on the mask")
        self.f = f.with_support(f.domain.mask)
        self.func = func
        self.f_min = float(v.min())
        self.f_max = float(v.max())

    @classmethod
    def from_function(cls, domain: Domain, func) -> "Conductivity":
        return cls(Field.from_function(domain, func), func)

    @classmethod
    def constant(cls, domain: Domain, value: float = 1.0) -> "Conductivity":
        return cls.from_function(domain, lambda p: np.full(len(p), float(value)))

    @property
    def domain(self) -> Domain:
        return self.f.domain

    @cached_property
    def f_sq(self) -> Field:
        return self.f * self.f

    @cached_property
    def f_inv_sq(self) -> Field:
        return Field(self.domain, 1.0 / np.where(self.domain.mask, self.f.values[..., 0], 1.0) ** 2)

    @cached_property
    def dlog(self) -> np.ndarray:
        """``Df / f`` as a quaternion array."""
        return dirac_log(self.f)

    def at(self, points) -> np.ndarray:
        """``f`` at arbitrary points (analytic if available, else interpolated)."""
        points = np.asarray(points, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(points), dtype=float).reshape(len(points))
        return extend(self.f, 2).sample(points)[:, 0]


@dataclass
class SolveReport:
    """Residuals, gauge choice, iteration counts and timing for one solve."""

    residuals: ResidualSuite = field(default_factory=ResidualSuite)
    gauge: str = "h = 0"
    iterations: dict = field(default_factory=dict)
    runtime: float = 0.0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "residuals": self.residuals.to_dict(),
            "gauge": self.gauge,
            "iterations": dict(self.iterations),
            "runtime": self.runtime,
            "notes": list(self.notes),
        }


class VekuaOperatorTag(str, enum.Enum):
    V = "V"
    VBAR = "Vbar"
    V1 = "V1"
    VBAR1 = "Vbar1"


def _timed(report, start):
    if report is not None:
        report.runtime += time.perf_counter() - start


def _add_gauge(w: Field, h: Field | None, tol: float, check: bool) -> Field:
    if h is None:
        return w
    if check:
        D.check_harmonic(h, tol, "h")
    return w + D.gradient(h)


def _record_divcurl(report, w, g0, g):
    if report is None:
        return
    report.residuals.merge(residual_divcurl(w, g0, g))
    report.residuals.merge(residual_divcurl(w, g0, g, "full"), "full_")


# ------------------------------------------------------------- div-curl

def curl_inverse(g: Field, tol: float = D.DEFAULT_TOL, check: bool = True, config: QuadratureConfig = DEFAULT_QUADRATURE, report: SolveReport | None = None, count: int = 32) -> Field:
    """Right inverse of the curl on solenoidal data: ``T03[g] - S[T01[g]]``."""
    return solve_divcurl(None, g, None, tol, check, config, report, count)


def solve_divcurl(g0: Field | None, g: Field | None, h: Field | None = None, tol: float = D.DEFAULT_TOL, check: bool = True, config: QuadratureConfig = DEFAULT_QUADRATURE, report: SolveReport | None = None, count: int = 32) -> Field:
    """General solution ``-T02[g0] + T03[g] - S[T01[g]] + grad h`` of ``div w = g0``, ``curl w = g``."""
    start = time.perf_counter()
    ref = g if g is not None else g0
    if ref is None:
        raise ConfigurationError("need g0 or g")
    if g0 is not None and g0.components != 1:
        raise ConfigurationError("g0 must be a scalar field")
    if g is not None and g.components != 3:
        raise ConfigurationError("g must be a vector field")
    if g is not None and check:
        D.check_solenoidal(g, tol, "g")
    dom = ref.domain
    # one pass on the quaternion -g0 + g gives T01[g], -T02[g0] + T03[g]
    q = np.zeros(dom.grid.shape + (4,))
    if g0 is not None:
        q[..., 0] = -g0.values[..., 0]
    if g is not None:
        q[..., 1:] = g.values
    T = teodorescu(Field(dom, q), config)
    w = T.vector_part()
    if g is not None:
        w = w - D.monogenic_completion(T.scalar_part(), check=False, count=count)
    w = _add_gauge(w.with_support(dom.mask), h, tol, check)
    if report is not None:
        report.gauge = "h = 0" if h is None else "h supplied"
    _record_divcurl(report, w, g0, g)
    _timed(report, start)
    return w


def double_curl_inverse(g: Field, tol: float = D.DEFAULT_TOL, check: bool = True, config: QuadratureConfig = DEFAULT_QUADRATURE, report: SolveReport | None = None, count: int = 32) -> Field:
    """Right inverse of ``curl curl``: ``-L[g] - I^{-1}[(|x'|^2/2) grad T01[g]]``."""
    start = time.perf_counter()
    if g.components != 3:
        raise ConfigurationError("g must be a vector field")
    if check:
        D.check_solenoidal(g, tol, "g")
    L = newton_potential(g, config)
    T01 = teodorescu(g, config).scalar_part()
    corr = D.weighted_moment_minus_one(D.gradient(T01), count=count)
    w = (-L - corr).with_support(g.domain.mask)
    if report is not None:
        cc = D.curl(D.curl(w))
        mask = g.domain.interior()
        hh = g.grid.spacing
        report.residuals.add("curlcurl", norm_on(cc.values - g.values, mask, hh), norm_on(g.values, mask, hh))
    _timed(report, start)
    return w


def solve_divcurl_boundary(phi: BoundaryField, domain: Domain, config: QuadratureConfig = DEFAULT_QUADRATURE, report: SolveReport | None = None, count: int = 32) -> Field:
    """Field with prescribed SI boundary values: ``-M[eta x phi] - S[M[phi . eta]]``.

    Uses ``T03[g] = -M[eta x g]`` and ``T01[g] = M[g . eta]`` for SI
    fields ``g`` (Stokes and divergence theorems), so the result equals the
    volume curl inverse of the extension.  Only meaningful when ``phi`` is
    the trace of a solenoidal and irrotational field ``g``; then
    ``div w = 0`` and ``curl w = g``.  This cannot be verified from
    boundary data alone.
    """
    start = time.perf_counter()
    if phi.components != 3:
        raise ConfigurationError("boundary data must be vector valued")
    b = phi.boundary
    sl_report = {}
    cross = BoundaryField(b, np.cross(b.normals, phi.values))
    dot = BoundaryField(b, np.sum(phi.values * b.normals, axis=1))
    Mx = single_layer(cross, domain, config, sl_report)
    Md = single_layer(dot, domain, config, sl_report)
    w = -Mx - D.monogenic_completion(Md, check=False, count=count)
    if report is not None:
        report.notes.append(f"near-singular single-layer evaluations: {sl_report.get('near_singular', 0)}")
    _timed(report, start)
    return w


def grigorev_solution(g0: Field | None, g: Field | None, tol: float = D.DEFAULT_TOL, check: bool = True, report: SolveReport | None = None, count: int = 32) -> Field:
    """Ray-integral solution ``-x' x I^1[g] + grad((|x'|^2/4) I^{1/2}[g0 - x'.I^2[curl g]])``.

    Requires harmonic ``g0`` and harmonic, solenoidal ``g``.
    """
    start = time.perf_counter()
    ref = g if g is not None else g0
    if ref is None:
        raise ConfigurationError("need g0 or g")
    dom = ref.domain
    a = dom.star_center
    g0 = Field.zeros(dom, 1) if g0 is None else g0
    g = Field.zeros(dom, 3) if g is None else g
    if check:
        D.check_harmonic(g0, tol, "g0")
        D.check_solenoidal(g, tol, "g")
        for c in range(3):
            D.check_harmonic(g.component(c), tol, f"g[{c}]")
    xp = dom.grid.coords - a
    I1 = D.radial_moment(g, 1.0, count=count)
    I2 = D.radial_moment(D.curl(g), 2.0, count=count)
    q = g0 - Field(dom, np.sum(xp * I2.values, axis=-1), I2.support)
    Ih = D.radial_moment(q, 0.5, count=count)
    pot = Ih * Field(dom, 0.25 * np.sum(xp * xp, axis=-1))
    w = Field(dom, -np.cross(xp, I1.values), I1.support) + D.gradient(pot)
    w = w.with_support(dom.mask)
    _record_divcurl(report, w, g0, g)
    _timed(report, start)
    return w


# ------------------------------------------------------------------ Vekua

def vekua_operator_apply(tag, f: Conductivity, W: Field) -> Field:
    """Apply ``V``, ``Vbar``, ``V1`` or ``Vbar1`` to a quaternion field.

    ``V W = DW - (Df/f) conj W``; ``Vbar W = WD - conj(W) (Df/f)``;
    ``V1 W = WD + (Df/f) W``; ``Vbar1 W = DW + W (Df/f)``.
    """
    tag = VekuaOperatorTag(tag)
    W = W.as_quaternion()
    q = f.dlog
    if tag is VekuaOperatorTag.V:
        out = D.dirac(W, "left").values - qmul_arrays(q, qconj_arrays(W.values))
    elif tag is VekuaOperatorTag.VBAR:
        out = D.dirac(W, "right").values - qmul_arrays(qconj_arrays(W.values), q)
    elif tag is VekuaOperatorTag.V1:
        out = D.dirac(W, "right").values + qmul_arrays(q, W.values)
    else:
        out = D.dirac(W, "left").values + qmul_arrays(W.values, q)
    return Field(W.domain, out, W.support & f.f.support)


def _ratio(a: Field, f: Conductivity) -> Field:
    fv = np.where(f.domain.mask, f.f.values[..., 0], 1.0)
    return Field(a.domain, a.values / fv[..., None], a.support & f.domain.mask)


def vekua_complete(f: Conductivity, W0: Field, h: Field | None = None, tol: float = D.DEFAULT_TOL, check: bool = True, config: QuadratureConfig = DEFAULT_QUADRATURE, report: SolveReport | None = None, count: int = 32) -> Field:
    """Vector partner of ``W0`` so that ``W0 + W`` solves the main Vekua equation.

    ``f W = T03[-f^2 grad(W0/f)] + S[T01[f^2 grad(W0/f)]] + grad h``.
    ``W0/f`` must satisfy ``div(f^2 grad(W0/f)) = 0``.
    """
    start = time.perf_counter()
    if W0.components != 1:
        raise ConfigurationError("W0 must be a scalar field")
    u = _ratio(W0, f)
    if check:
        res = residual_conductivity(f.f, u)["conductivity"]
        if res.relative > tol:
            raise PreconditionError(
                f"W0/f does not satisfy the conductivity equation: relative residual {res.relative:.3e} > {tol:.1e}",
                res.relative,
                tol,
            )
    V = f.f_sq * D.gradient(u)
    T = teodorescu(V, config)
    fW = -T.vector_part() + D.monogenic_completion(T.scalar_part(), check=False, count=count)
    fW = _add_gauge(fW.with_support(f.domain.mask), h, tol, check)
    Wv = _ratio(fW, f)
    W = Field.quaternion(W0.with_support(f.domain.mask), Wv)
    if report is not None:
        report.residuals.merge(residual_vekua(f.f, W))
        report.gauge = "h = 0" if h is None else "h supplied"
    _timed(report, start)
    return W


def _vbar1_residual(f: Conductivity, G: Field):
    Gq = G.as_quaternion()
    mask = f.domain.interior()
    hh = f.domain.h
    DG = D.dirac(Gq, "left").values
    right = qmul_arrays(Gq.values, f.dlog)
    res = norm_on(DG + right, mask, hh)
    scale = quaternion_scale(Gq, mask) + norm_on(right, mask, hh)
    return D.relative_residual(res, scale)


def vekua_antiderivative(f: Conductivity, G: Field, h: Field | None = None, tol: float = D.DEFAULT_TOL, check: bool = True, config: QuadratureConfig = DEFAULT_QUADRATURE, report: SolveReport | None = None, count: int = 32) -> Field:
    """Solution ``W`` of ``V W = 0`` with ``Vbar W = G`` for a purely vectorial ``G``.

    ``W = (f A[G/f] - T03[fG]/f + S[T01[fG]]/f + grad(h)/f) / 2``; the
    precondition ``Vbar1 G = 0`` (``G/f`` irrotational, ``fG``
    solenoidal) is checked first.
    """
    start = time.perf_counter()
    if G.components != 3:
        raise ConfigurationError("G must be a vector field")
    if check:
        rel = _vbar1_residual(f, G)
        if rel > tol:
            raise PreconditionError(f"Vbar1 G = 0 fails: relative residual {rel:.3e} > {tol:.1e}", rel, tol)
    dom = f.domain
    A = D.antigradient(_ratio(G, f), check=False, count=count)
    fG = f.f * G
    T = teodorescu(fG, config)
    vec = -T.vector_part() + D.monogenic_completion(T.scalar_part(), check=False, count=count)
    vec = _add_gauge(vec.with_support(dom.mask), h, tol, check)
    W = Field.quaternion((f.f * A).with_support(dom.mask), _ratio(vec, f)) * 0.5
    if report is not None:
        hh = dom.h
        mask = dom.interior()
        VW = vekua_operator_apply("V", f, W).values
        VbW = vekua_operator_apply("Vbar", f, W).values
        Gq = G.as_quaternion().values
        scale = quaternion_scale(W, mask) + norm_on(qmul_arrays(f.dlog, W.values), mask, hh)
        report.residuals.add("V", norm_on(VW, mask, hh), scale)
        report.residuals.add("Vbar", norm_on(VbW - Gq, mask, hh), norm_on(Gq, mask, hh))
    _timed(report, start)
    return W


# ----------------------------------------------------------- conductivity

def cg(matvec, b: np.ndarray, tol: float = 1e-10, maxiter: int | None = None, precond: np.ndarray | None = None, x0=None):
    """Conjugate gradients for SPD systems; returns ``(x, iterations, history)``.

    ``history`` holds ``||r|| / ||b||`` per iteration.  Raises
    :class:`SolverError` if ``tol`` is not reached within ``maxiter``.
    """
    n = b.shape[0]
    maxiter = 10 * n if maxiter is None else maxiter
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - matvec(x)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), 0, [0.0]
    z = r * precond if precond is not None else r
    p = z.copy()
    rz = r @ z
    history = [np.linalg.norm(r) / bnorm]
    for it in range(1, maxiter + 1):
        if history[-1] <= tol:
            return x, it - 1, history
        Ap = matvec(p)
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        history.append(np.linalg.norm(r) / bnorm)
        z = r * precond if precond is not None else r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    if history[-1] <= tol:
        return x, maxiter, history
    raise SolverError(f"CG did not reach {tol:.1e} in {maxiter} iterations (last {history[-1]:.3e})", history)


def _conductivity_system(f: Conductivity, g0: Field | None, boundary_value):
    """Symmetric 7-point system ``A u = b`` for ``-div(f^2 grad u) = -g0``.

    Interior faces use the harmonic mean of ``f^2``.  A face whose
    neighbor is outside the mask is replaced by the boundary crossing at
    fraction ``theta`` of a cell; its value enters the right-hand side and
    only the diagonal is modified, which keeps ``A`` symmetric.
    """
    import scipy.sparse as sp

    dom = f.domain
    mask = dom.mask
    h = dom.h
    idx = np.argwhere(mask)
    n = len(idx)
    lookup = -np.ones(dom.grid.shape, dtype=np.int64)
    lookup[tuple(idx.T)] = np.arange(n)
    f2 = (f.f.values[..., 0] ** 2)[tuple(idx.T)]
    diag = np.zeros(n)
    b = np.zeros(n) if g0 is None else -g0.values[..., 0][tuple(idx.T)].copy()
    rows, cols, vals = [], [], []
    for axis in range(3):
        for sign in (1, -1):
            nb = idx.copy()
            nb[:, axis] += sign
            inside = np.all((nb >= 0) & (nb < np.array(dom.grid.shape)), axis=1)
            j = np.full(n, -1, dtype=np.int64)
            j[inside] = lookup[tuple(nb[inside].T)]
            has = j >= 0
            i_in = np.nonzero(has)[0]
            fj = f2[j[i_in]]
            fi = f2[i_in]
            c = 2 * fi * fj / (fi + fj) / h**2
            diag[i_in] += c
            rows.append(i_in)
            cols.append(j[i_in])
            vals.append(-c)
            i_bd = np.nonzero(~has)[0]
            if len(i_bd):
                pts, theta = dom.boundary_points_along(idx[i_bd], axis, sign)
                c = f2[i_bd] / (theta * h**2)
                diag[i_bd] += c
                b[i_bd] += c * boundary_value(pts)
    rows = np.concatenate(rows + [np.arange(n)])
    cols = np.concatenate(cols + [np.arange(n)])
    vals = np.concatenate(vals + [diag])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return A, b, idx, diag


def solve_conductivity(f: Conductivity, g0: Field | None, phi, tol: float = 1e-10, maxiter: int | None = None, jacobi: bool = False, report: SolveReport | None = None) -> Field:
    """Solve ``div(f^2 grad u) = g0`` with Dirichlet data ``phi``.

    ``phi`` is a :class:`BoundaryField`, a callable on points, a number,
    or None (zero data).
    """
    start = time.perf_counter()
    if phi is None:
        bv = lambda p: np.zeros(len(p))  # noqa: E731
    elif isinstance(phi, BoundaryField):
        if phi.components != 1:
            raise ConfigurationError("conductivity boundary data must be scalar")
        bv = lambda p: phi.evaluate(p)[:, 0]  # noqa: E731
    elif callable(phi):
        bv = lambda p: np.asarray(phi(p), dtype=float).reshape(len(p))  # noqa: E731
    else:
        val = float(phi)
        bv = lambda p: np.full(len(p), val)  # noqa: E731
    if g0 is not None and (g0.components != 1 or not np.all(np.isfinite(g0.values))):
        raise ConfigurationError("g0 must be a finite scalar field")
    A, b, idx, diag = _conductivity_system(f, g0, bv)
    pre = 1.0 / diag if jacobi else None
    x, its, hist = cg(A.dot, b, tol, maxiter, pre)
    out = np.zeros(f.domain.grid.shape)
    out[tuple(idx.T)] = x
    u = Field(f.domain, out)
    if report is not None:
        report.iterations["cg"] = its
        report.iterations["cg_final_relative_residual"] = hist[-1]
        report.residuals.merge(residual_conductivity(f.f, u, g0))
    _timed(report, start)
    return u


def hilbert_transform(f: Conductivity, phi: BoundaryField, domain: Domain | None = None, tol: float = D.DEFAULT_TOL, check: bool = False, config: QuadratureConfig = DEFAULT_QUADRATURE, report: SolveReport | None = None, count: int = 32) -> BoundaryField:
    """Boundary values of the vector part of the Vekua solution with scalar trace ``phi``.

    Solves the conductivity problem for ``u`` with data ``phi / f``, forms
    ``W0 = f u``, completes it and samples the vector part at each boundary
    point pulled ``1.5 h`` inward along the normal.
    """
    domain = f.domain if domain is None else domain
    if phi.components != 1:
        raise ConfigurationError("Hilbert transform expects scalar boundary data")
    b = phi.boundary
    fb = f.at(b.points)
    data = BoundaryField(b, phi.values[:, 0] / fb)
    u = solve_conductivity(f, None, data, report=report)
    W = vekua_complete(f, f.f * u, tol=tol, check=check, config=config, report=report, count=count)
    pts = b.points - 1.5 * domain.h * b.normals
    vals = extend(W.vector_part(), 2).sample(pts)
    return BoundaryField(b, vals)


def solve_maxwell(f: Conductivity, g: Field, tol: float = D.DEFAULT_TOL, check: bool = True, config: QuadratureConfig = DEFAULT_QUADRATURE, report: SolveReport | None = None, count: int = 32, cg_tol: float = 1e-10):
    """Static Maxwell system with permeability ``f^2``; returns ``(E, H)``.

    ``B = T03[g] - S[T01[g]]``; ``h`` solves ``div(f^2 grad h) = -grad(f^2).B``
    with ``h = 0`` on the boundary; ``H = B + grad h``;
    ``E = T03[f^2 H] - S[T01[f^2 H]]``.
    """
    start = time.perf_counter()
    if g.components != 3:
        raise ConfigurationError("g must be a vector field")
    if check:
        D.check_solenoidal(g, tol, "g")
    dom = g.domain
    B = curl_inverse(g, check=False, config=config, count=count)
    grad_f2 = D.gradient(f.f_sq)
    src = Field(dom, -np.sum(grad_f2.values * B.values, axis=-1))
    sub = SolveReport()
    hfield = solve_conductivity(f, src, None, tol=cg_tol, report=sub)
    H = (B + D.gradient(hfield)).with_support(dom.mask)
    E = curl_inverse(f.f_sq * H, check=False, config=config, count=count)
    if report is not None:
        report.iterations.update(sub.iterations)
        report.gauge = "h1 = 0"
        report.residuals.merge(maxwell_residuals(f, g, E, H))
    _timed(report, start)
    return E, H


def maxwell_residuals(f: Conductivity, g: Field, E: Field, H: Field, region=None, tolerance: float | None = None) -> ResidualSuite:
    """Residuals of ``div(f^2 H) = 0``, ``div E = 0``, ``curl H = g``, ``curl E = f^2 H``
    and ``curl(f^-2 curl E) = g``."""
    mask, tag = region_mask(g.domain, region)
    hh = g.grid.spacing
    suite = ResidualSuite()
    f2H = f.f_sq * H
    gv = g.values
    # divergence residuals are measured against the sum of all first partials
    for name, v in (("div_f2H", f2H), ("div_E", E)):
        J = [[D.partial(v.component(a), b).values for b in range(3)] for a in range(3)]
        scale = sum(norm_on(J[a][b], mask, hh) for a in range(3) for b in range(3))
        scale += norm_on(v.values, mask, hh) / D.length_scale(g.domain)
        suite.add(name, norm_on(J[0][0] + J[1][1] + J[2][2], mask, hh), scale, tag, tolerance)
    suite.add("curl_H", norm_on(D.curl(H).values - gv, mask, hh), norm_on(gv, mask, hh), tag, tolerance)
    suite.add("curl_E", norm_on(D.curl(E).values - f2H.values, mask, hh), norm_on(f2H.values, mask, hh), tag, tolerance)
    dc = D.curl(f.f_inv_sq * D.curl(E))
    suite.add("double_curl", norm_on(dc.values - gv, mask, hh), norm_on(gv, mask, hh), tag, tolerance)
    return suite
