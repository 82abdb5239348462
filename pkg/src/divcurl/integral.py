"""Weakly singular volume and surface potentials on voxel domains.

Volume integrals are direct sums over the masked source voxels.  Far from
the evaluation point each voxel contributes kernel-at-center times
``h**3``; within ``near_radius`` cells the exact cell integral of the
kernel is used instead.  The cell holding the evaluation point is split
into 4x4x4 sub-cells recursively, ``singular_subdivision_depth`` times,
discarding only the innermost sub-cells that touch the point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ConfigurationError, SingularPointError
from .grid import BoundaryField, Domain, Field

__all__ = [
    "QuadratureConfig",
    "NearSingularWarning",
    "cauchy_kernel",
    "newton_potential",
    "teodorescu",
    "t1",
    "t2",
    "t3",
    "single_layer",
]


class NearSingularWarning(UserWarning):
    """A surface potential was evaluated very close to a quadrature point."""


@dataclass(frozen=True)
class QuadratureConfig:
    singular_subdivision_depth: int = 2
    eval_subset: int = 1
    near_radius: int = 2

    def __post_init__(self):
        if self.singular_subdivision_depth < 1:
            raise ConfigurationError("singular_subdivision_depth must be >= 1")
        if self.eval_subset < 1:
            raise ConfigurationError("eval_subset stride must be >= 1")
        if self.near_radius < 0:
            raise ConfigurationError("near_radius must be >= 0")


DEFAULT_QUADRATURE = QuadratureConfig()


def cauchy_kernel(x) -> np.ndarray:
    """``E(x) = Vec(conj(x)) / (4 pi |x|^3) = -x / (4 pi |x|^3)`` for pure vectors."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(r == 0):
        raise SingularPointError("Cauchy kernel is singular at the origin")
    return -x / (4 * np.pi * r**3)


# ----------------------------------------------------------- near field

_GAUSS_N = 4


def _unit_kernels(u):
    r = np.linalg.norm(u, axis=-1)
    lval = -1.0 / (4 * np.pi * r)
    evec = -u / (4 * np.pi * r[:, None] ** 3)
    return lval, evec


def _cube_integral(center, size, depth):
    """Integrals of -1/(4 pi |u|) and -u/(4 pi |u|^3) over a cube (origin = target)."""
    center = np.asarray(center, dtype=float)
    if np.all(np.abs(center) <= 0.5 * size + 1e-12):
        if depth == 0:
            return 0.0, np.zeros(3)
        sub = size / 4
        lsum, esum = 0.0, np.zeros(3)
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    c = center + sub * (np.array([i, j, k]) - 1.5)
                    l, e = _cube_integral(c, sub, depth - 1)
                    lsum += l
                    esum += e
        return lsum, esum
    if np.linalg.norm(center) < 1.5 * size and size > 1.0 / 64:
        sub = size / 2
        lsum, esum = 0.0, np.zeros(3)
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    c = center + sub * (np.array([i, j, k]) - 0.5)
                    l, e = _cube_integral(c, sub, depth)
                    lsum += l
                    esum += e
        return lsum, esum
    x, w = np.polynomial.legendre.leggauss(_GAUSS_N)
    x = 0.5 * size * x
    w = (0.5 * size) * w
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    W = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
    pts = center + np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    lval, evec = _unit_kernels(pts)
    return float(W @ lval), W @ evec


@lru_cache(maxsize=8)
def near_tables(near_radius: int, depth: int):
    """Offsets and correction weights for unit spacing.

    Returns ``offsets`` (n, 3) and, per offset, the Newton and Cauchy
    corrections ``cell integral - far-field point value`` (the point value
    is zero at the center offset).  Scale by ``h**2`` and ``h``.
    """
    r = np.arange(-near_radius, near_radius + 1)
    offsets = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    dl = np.zeros(len(offsets))
    de = np.zeros((len(offsets), 3))
    for n, o in enumerate(offsets):
        l, e = _cube_integral(o.astype(float), 1.0, depth)
        if np.any(o != 0):
            lf, ef = _unit_kernels(o[None].astype(float))
            l -= lf[0]
            e = e - ef[0]
        dl[n] = l
        de[n] = e
    return offsets.astype(np.int64), dl, de


def _cauchy_matrix(e):
    """4x4 matrices mapping q to ``(e . q_vec, -q0 e - e x q_vec)``."""
    e1, e2, e3 = e[:, 0], e[:, 1], e[:, 2]
    z = np.zeros_like(e1)
    return np.stack(
        [
            np.stack([z, e1, e2, e3], -1),
            np.stack([-e1, z, e3, -e2], -1),
            np.stack([-e2, -e3, z, e1], -1),
            np.stack([-e3, e2, -e1, z], -1),
        ],
        axis=1,
    )


# ------------------------------------------------------ evaluation sets

def _stride_axes(dims, stride):
    axes = []
    for n in dims:
        ax = list(range(0, n, stride))
        if ax[-1] != n - 1:
            ax.append(n - 1)
        axes.append(np.array(ax))
    return axes


def _evaluation_plan(domain: Domain, targets: np.ndarray, stride: int):
    """Lattice points to evaluate and a callback producing values on ``targets``."""
    t_idx = np.argwhere(targets)
    if stride == 1:
        return t_idx, lambda vals: vals
    axes = _stride_axes(domain.grid.shape, stride)
    cell, frac = [], []
    for a in range(3):
        k = np.clip(np.searchsorted(axes[a], t_idx[:, a], side="right") - 1, 0, len(axes[a]) - 2)
        lo, hi = axes[a][k], axes[a][k + 1]
        cell.append(k)
        frac.append((t_idx[:, a] - lo) / (hi - lo))
    cell = np.stack(cell, 1)
    frac = np.stack(frac, 1)
    corners = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)])
    ckeys = cell[:, None, :] + corners[None]  # (N, 8, 3) coarse indices
    flat = ckeys.reshape(-1, 3)
    uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
    inverse = inverse.reshape(len(t_idx), 8)
    e_idx = np.stack([axes[a][uniq[:, a]] for a in range(3)], 1)
    wts = np.ones((len(t_idx), 8))
    for c, (i, j, k) in enumerate(corners):
        wts[:, c] = (
            (frac[:, 0] if i else 1 - frac[:, 0])
            * (frac[:, 1] if j else 1 - frac[:, 1])
            * (frac[:, 2] if k else 1 - frac[:, 2])
        )

    def finish(vals):
        return np.einsum("nc,ncp->np", wts, vals[inverse])

    return e_idx, finish


def _volume_setup(w: Field, config: QuadratureConfig):
    domain = w.domain
    src = domain.mask & w.support
    if not src.any():
        raise ConfigurationError("volume integral over an empty mask")
    s_idx = np.argwhere(src)
    lookup = -np.ones(domain.grid.shape, dtype=np.int64)
    lookup[tuple(s_idx.T)] = np.arange(len(s_idx))
    e_idx, finish = _evaluation_plan(domain, domain.mask, config.eval_subset)
    return s_idx, lookup, e_idx, finish


def _split(idx):
    f = idx.astype(float)
    return np.ascontiguousarray(f[:, 0]), np.ascontiguousarray(f[:, 1]), np.ascontiguousarray(f[:, 2])


def newton_potential(w: Field, config: QuadratureConfig = DEFAULT_QUADRATURE) -> Field:
    """``L[w](x) = -int_Omega w(y) / (4 pi |y - x|) dy`` on the domain mask, per component."""
    s_idx, lookup, e_idx, finish = _volume_setup(w, config)
    h = w.grid.spacing
    vals = np.ascontiguousarray(w.values[tuple(s_idx.T)])
    out = _kernels.newton_far(*_split(e_idx), *_split(s_idx), vals, h * h)
    offsets, dl, _ = near_tables(config.near_radius, config.singular_subdivision_depth)
    weights = (h * h * dl)[:, None, None]
    for c in range(vals.shape[1]):
        out[:, c] += _kernels.near_correction(e_idx, lookup, np.ascontiguousarray(vals[:, c : c + 1]), offsets, weights)[:, 0]
    res = np.zeros(w.grid.shape + (vals.shape[1],))
    res[w.domain.mask] = finish(out)
    return Field(w.domain, res)


def teodorescu(w: Field, config: QuadratureConfig = DEFAULT_QUADRATURE) -> Field:
    """``T[w](x) = -int_Omega E(y - x) w(y) dy`` (quaternion product) on the mask."""
    q = w.as_quaternion()
    s_idx, lookup, e_idx, finish = _volume_setup(q, config)
    h = q.grid.spacing
    vals = np.ascontiguousarray(q.values[tuple(s_idx.T)])
    out = _kernels.cauchy_far(*_split(e_idx), *_split(s_idx), vals, h)
    offsets, _, de = near_tables(config.near_radius, config.singular_subdivision_depth)
    out += _kernels.near_correction(e_idx, lookup, vals, offsets, _cauchy_matrix(h * de))
    res = np.zeros(q.grid.shape + (4,))
    res[q.domain.mask] = finish(out)
    return Field(q.domain, res)


def t1(w: Field, config: QuadratureConfig = DEFAULT_QUADRATURE) -> Field:
    """``T01[w](x) = int_Omega E(y - x) . w(y) dy``."""
    if w.components != 3:
        raise ValueError("t1 expects a vector field")
    return teodorescu(w, config).scalar_part()


def t2(w0: Field, config: QuadratureConfig = DEFAULT_QUADRATURE) -> Field:
    """``T02[w0](x) = -int_Omega w0(y) E(y - x) dy``."""
    if w0.components != 1:
        raise ValueError("t2 expects a scalar field")
    return teodorescu(w0, config).vector_part()


def t3(w: Field, config: QuadratureConfig = DEFAULT_QUADRATURE) -> Field:
    """``T03[w](x) = -int_Omega E(y - x) x w(y) dy``."""
    if w.components != 3:
        raise ValueError("t3 expects a vector field")
    return teodorescu(w, config).vector_part()


def t1_t3(w: Field, config: QuadratureConfig = DEFAULT_QUADRATURE):
    """``(T01[w], T03[w])`` from a single Teodorescu pass."""
    T = teodorescu(w, config)
    return T.scalar_part(), T.vector_part()


def single_layer(density: BoundaryField, domain: Domain, config: QuadratureConfig = DEFAULT_QUADRATURE, report: dict | None = None) -> Field:
    """``M[w](x) = int_dOmega w(y) / (4 pi |y - x|) ds_y`` at the masked voxel centers.

    Evaluation points closer than ``h/2`` to a quadrature point are counted
    in ``report["near_singular"]`` and trigger a :class:`NearSingularWarning`.
    """
    b = density.boundary
    h = domain.h
    e_idx, finish = _evaluation_plan(domain, domain.mask, config.eval_subset)
    pts = domain.grid.center(e_idx)
    dens = np.ascontiguousarray(density.values * b.weights[:, None])
    bp = b.points
    out = _kernels.single_layer_sum(
        *(np.ascontiguousarray(pts[:, a]) for a in range(3)),
        *(np.ascontiguousarray(bp[:, a]) for a in range(3)),
        dens,
    )
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(bp).query(pts)
    n_near = int(np.count_nonzero(dist < 0.5 * h))
    if report is not None:
        report["near_singular"] = report.get("near_singular", 0) + n_near
    if n_near:
        warnings.warn(
            f"single-layer potential evaluated within h/2 of the boundary at {n_near} points",
            NearSingularWarning,
            stacklevel=2,
        )
    res = np.zeros(domain.grid.shape + (density.components,))
    res[domain.mask] = finish(out)
    return Field(domain, res)
