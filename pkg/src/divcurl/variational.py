"""Quadratic curl energy with Dirichlet data and its conjugate-gradient minimizer.

Degrees of freedom are the samples on masked voxels.  The edge layer
(masked voxels with an unmasked face neighbor) carries the boundary data
and is held fixed; everything else is free.  The discrete curl is the
sparse matrix form of :func:`divcurl.diffops.curl`, so its transpose is the
exact adjoint used by the gradient.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import diffops as D
from .errors import ConfigurationError, PreconditionError, StencilError
from .grid import BoundaryField, Domain, Field, _shift_bool
from .solvers import Conductivity, solve_conductivity

__all__ = [
    "EnergyProblem",
    "MinimizeReport",
    "partial_matrix",
    "curl_matrix",
    "gradient_matrix",
    "energy",
    "energy_gradient",
    "harmonic_extension",
    "minimize",
    "weak_residual",
]

MODES = ("double-curl", "conductivity-scalar")
BOUNDARY_TOL = D.DEFAULT_TOL


def partial_matrix(support: np.ndarray, axis: int, h: float) -> sp.csr_matrix:
    """Sparse matrix of the first-derivative stencil on the voxels of ``support``.

    Rows and columns follow ``np.argwhere(support)``.  Stencil selection
    mirrors :func:`divcurl.diffops.partial`.
    """
    idx = np.argwhere(support)
    n = len(idx)
    lookup = -np.ones(support.shape, dtype=np.int64)
    lookup[tuple(idx.T)] = np.arange(n)
    sp1, sm1 = _shift_bool(support, axis, 1), _shift_bool(support, axis, -1)
    sp2, sm2 = _shift_bool(support, axis, 2), _shift_bool(support, axis, -2)
    central = support & sp1 & sm1
    fwd = support & ~central & sp1 & sp2
    bwd = support & ~central & ~fwd & sm1 & sm2
    fwd1 = support & ~(central | fwd | bwd) & sp1
    bwd1 = support & ~(central | fwd | bwd | fwd1) & sm1
    if np.any(support & ~(central | fwd | bwd | fwd1 | bwd1)):
        raise StencilError(f"isolated voxels along axis {axis}")

    rows, cols, vals = [], [], []

    def add(case, offsets_coeffs):
        sel = case[tuple(idx.T)]
        r = np.nonzero(sel)[0]
        for k, c in offsets_coeffs:
            nb = idx[r].copy()
            nb[:, axis] += k
            rows.append(r)
            cols.append(lookup[tuple(nb.T)])
            vals.append(np.full(len(r), c / h))

    add(central, [(1, 0.5), (-1, -0.5)])
    add(fwd, [(0, -1.5), (1, 2.0), (2, -0.5)])
    add(bwd, [(0, 1.5), (-1, -2.0), (-2, 0.5)])
    add(fwd1, [(1, 1.0), (0, -1.0)])
    add(bwd1, [(0, 1.0), (-1, -1.0)])
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def gradient_matrix(support: np.ndarray, h: float) -> sp.csr_matrix:
    """``(3N, N)`` discrete gradient; output blocks are the x, y, z components."""
    return sp.vstack([partial_matrix(support, a, h) for a in range(3)]).tocsr()


def curl_matrix(support: np.ndarray, h: float) -> sp.csr_matrix:
    """``(3N, 3N)`` discrete curl acting on component-blocked vectors."""
    P = [partial_matrix(support, a, h) for a in range(3)]
    Z = sp.csr_matrix(P[0].shape)
    return sp.bmat(
        [[Z, -P[2], P[1]], [P[2], Z, -P[0]], [-P[1], P[0], Z]], format="csr"
    )


@dataclass
class EnergyProblem:
    """Minimize the curl energy (or the scalar conductivity energy) with fixed edge values.

    ``phi`` supplies the Dirichlet data; it is sampled at the edge-layer
    voxel centers.  ``source`` is ``g`` (vector, double-curl mode) or
    ``g0`` (scalar, conductivity mode).
    """

    f: Conductivity
    phi: BoundaryField | None = None
    source: Field | None = None
    mode: str = "double-curl"
    tol: float = D.DEFAULT_TOL

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}")
        want = 3 if self.mode == "double-curl" else 1
        if self.phi is not None and self.phi.components != want:
            raise ConfigurationError(f"{self.mode} boundary data needs {want} components")
        if self.source is not None:
            if self.source.components != want:
                raise ConfigurationError(f"{self.mode} source needs {want} components")
            if self.mode == "double-curl":
                D.check_solenoidal(self.source, self.tol, "source")
        dom = self.domain
        self._idx = np.argwhere(dom.mask)
        self._fixed_vox = dom.edge[tuple(self._idx.T)]
        h = dom.h
        if self.mode == "double-curl":
            self._op = curl_matrix(dom.mask, h)
            w = self.f.f_inv_sq.values[..., 0][tuple(self._idx.T)]
        else:
            self._op = gradient_matrix(dom.mask, h)
            w = (self.f.f_sq.values[..., 0])[tuple(self._idx.T)]
        self._weight = np.tile(w, 3)
        self._fixed = np.tile(self._fixed_vox, self.components)

    @property
    def domain(self) -> Domain:
        return self.f.domain

    @property
    def components(self) -> int:
        return 3 if self.mode == "double-curl" else 1

    @property
    def h3(self) -> float:
        return self.domain.h ** 3

    def boundary_values(self) -> np.ndarray:
        """Data on the edge-layer voxels, shape ``(n_edge, components)``.

        The edge layer sits up to a cell inside the boundary, so the data is
        carried there by the componentwise harmonic extension of ``phi``
        rather than by projecting voxel centers onto the boundary.
        """
        return self._extension[tuple(self._idx[self._fixed_vox].T)]

    @cached_property
    def _extension(self) -> np.ndarray:
        dom = self.domain
        if self.phi is None:
            return np.zeros(dom.grid.shape + (self.components,))
        one = Conductivity.constant(dom)
        comps = []
        for c in range(self.components):
            data = BoundaryField(self.phi.boundary, self.phi.values[:, c])
            comps.append(solve_conductivity(one, None, data).values[..., 0])
        return np.stack(comps, axis=-1)

    # flatten / unflatten: component-blocked vectors over masked voxels
    def flatten(self, W: Field) -> np.ndarray:
        if W.components != self.components:
            raise ConfigurationError(f"{self.mode} mode expects a {self.components}-component field")
        return W.values[tuple(self._idx.T)].T.reshape(-1).copy()

    def unflatten(self, x: np.ndarray) -> Field:
        vals = np.zeros(self.domain.grid.shape + (self.components,))
        vals[tuple(self._idx.T)] = x.reshape(self.components, -1).T
        return Field(self.domain, vals)

    def source_vector(self) -> np.ndarray:
        if self.source is None:
            return np.zeros(self.components * len(self._idx))
        return self.flatten(self.source.with_support(self.domain.mask))

    def check_boundary(self, x: np.ndarray, tol: float = BOUNDARY_TOL) -> None:
        got = x.reshape(self.components, -1).T[self._fixed_vox]
        want = self.boundary_values()
        err = np.max(np.abs(got - want)) if len(want) else 0.0
        scale = max(1.0, np.max(np.abs(want)) if len(want) else 1.0)
        if err > tol * scale:
            raise PreconditionError(f"field does not match the boundary data on the edge layer (max error {err:.3e})", err, tol)


@dataclass
class MinimizeReport:
    energies: list = field(default_factory=list)
    gradient_norms: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    warning: str = ""

    @property
    def monotone(self) -> bool:
        e = np.asarray(self.energies)
        return bool(np.all(np.diff(e) <= 1e-12 * max(1.0, abs(e[0]))))

    def to_dict(self) -> dict:
        return {
            "energies": list(self.energies),
            "final_gradient_norm": self.gradient_norms[-1] if self.gradient_norms else None,
            "iterations": self.iterations,
            "converged": self.converged,
            "monotone": self.monotone,
            "warning": self.warning,
        }


def _energy_flat(problem: EnergyProblem, x: np.ndarray) -> float:
    y = problem._op @ x
    e = problem.h3 * float(np.sum(problem._weight * y * y))
    s = problem.source_vector()
    if problem.mode == "double-curl":
        e -= 2 * problem.h3 * float(s @ x)
    else:
        e += 2 * problem.h3 * float(s @ x)
    return e


def _gradient_flat(problem: EnergyProblem, x: np.ndarray) -> np.ndarray:
    y = problem._op @ x
    grad = 2 * problem.h3 * (problem._op.T @ (problem._weight * y))
    s = problem.source_vector()
    grad += (-2 if problem.mode == "double-curl" else 2) * problem.h3 * s
    grad[problem._fixed] = 0.0
    return grad


def energy(problem: EnergyProblem, W: Field, check_boundary: bool = True) -> float:
    """Discrete energy ``h^3 sum f^-2 |curl W|^2`` (minus ``2 h^3 sum g.W`` with a source);
    scalar mode: ``h^3 sum f^2 |grad W0|^2 + 2 h^3 sum g0 W0``."""
    x = problem.flatten(W)
    if check_boundary:
        problem.check_boundary(x)
    return _energy_flat(problem, x)


def energy_gradient(problem: EnergyProblem, W: Field, check_boundary: bool = True) -> Field:
    """Gradient of :func:`energy` in the sample values, zero on the fixed edge layer."""
    x = problem.flatten(W)
    if check_boundary:
        problem.check_boundary(x)
    return problem.unflatten(_gradient_flat(problem, x))


def harmonic_extension(problem: EnergyProblem) -> Field:
    """Componentwise harmonic extension of the data; it defines the edge-layer values."""
    return Field(problem.domain, problem._extension.copy())


def minimize(problem: EnergyProblem, initial: Field | None = None, tol: float = 1e-8, maxiter: int | None = None):
    """Conjugate gradients on the free samples; returns ``(W, MinimizeReport)``.

    Stops when the free gradient norm falls below ``tol`` times its initial
    value, or after ``maxiter`` (default ``10 N``) iterations, in which
    case the last iterate is returned with a warning flag.
    """
    if initial is None:
        initial = harmonic_extension(problem)
    x = problem.flatten(initial)
    problem.check_boundary(x)
    free = ~problem._fixed
    Q = problem._op.T @ sp.diags(problem._weight) @ problem._op
    Q = (problem.h3 * Q).tocsr()
    Qff = Q[free][:, free]
    s = problem.source_vector()
    sign = 1.0 if problem.mode == "double-curl" else -1.0
    # energy = x^T Q x - 2 sign h^3 s^T x; on free samples: xf^T Qff xf - 2 xf^T rhs + const
    rhs = sign * problem.h3 * s[free] - Q[free][:, ~free] @ x[~free]
    xf = x[free].copy()
    n = len(xf)
    maxiter = 10 * n if maxiter is None else maxiter
    report = MinimizeReport()

    r = rhs - Qff @ xf
    p = r.copy()
    rr = r @ r
    g0 = 2 * np.sqrt(rr)
    report.energies.append(_energy_flat(problem, x))
    report.gradient_norms.append(g0)
    it = 0
    while it < maxiter and 2 * np.sqrt(rr) > tol * g0 and g0 > 0:
        Ap = Qff @ p
        pAp = p @ Ap
        if pAp <= 0:
            break
        alpha = rr / pAp
        xf += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
        x[free] = xf
        report.energies.append(_energy_flat(problem, x))
        report.gradient_norms.append(2 * np.sqrt(rr))
    x[free] = xf
    report.iterations = it
    report.converged = bool(g0 == 0 or 2 * np.sqrt(rr) <= tol * g0)
    if not report.converged:
        report.warning = f"stopped after {it} iterations at gradient ratio {2 * np.sqrt(rr) / g0:.3e}"
        warnings.warn(report.warning, RuntimeWarning, stacklevel=2)
    return problem.unflatten(x), report


def bilinear(problem: EnergyProblem, U: Field, V: Field) -> float:
    """``a(U, V) = h^3 sum f^-2 curl U . curl V`` (or ``f^2 grad U . grad V``)."""
    a = problem._op @ problem.flatten(U)
    b = problem._op @ problem.flatten(V)
    return problem.h3 * float(np.sum(problem._weight * a * b))


def weak_residual(problem: EnergyProblem, W: Field, v: Field, reference: Field | None = None) -> float:
    """Relative defect of the weak equation ``a(W, v) = <source, v>`` for one test field.

    The scale is ``sqrt(a(R, R) a(v, v)) + |<source, v>|`` with ``R`` the
    reference field (the initial iterate, when given) so that a vanishing
    minimum energy does not make the ratio ill-defined.
    """
    R = W if reference is None else reference
    lv = problem.h3 * float(problem.source_vector() @ problem.flatten(v))
    if problem.mode != "double-curl":
        lv = -lv
    res = abs(bilinear(problem, W, v) - lv)
    scale = np.sqrt(max(bilinear(problem, R, R), 0.0) * max(bilinear(problem, v, v), 0.0)) + abs(lv)
    return D.relative_residual(res, scale)


def random_test_field(problem: EnergyProblem, rng: np.random.Generator) -> Field:
    """Random smooth-ish test field vanishing on the fixed edge layer."""
    dom = problem.domain
    X = dom.grid.coords
    comps = []
    for _ in range(problem.components):
        c = rng.normal(size=10)
        x, y, z = X[..., 0], X[..., 1], X[..., 2]
        comps.append(c[0] + c[1] * x + c[2] * y + c[3] * z + c[4] * x * y + c[5] * y * z + c[6] * x * z + c[7] * x * x + c[8] * y * y + c[9] * z * z)
    vals = np.stack(comps, axis=-1)
    vals[dom.edge] = 0.0
    return Field(dom, vals)
