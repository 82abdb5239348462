"""Voxel grids, star-shaped domains, boundary quadrature and sampled fields."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import ConfigurationError, OutOfDomainError

__all__ = [
    "Grid",
    "Domain",
    "BoundarySet",
    "Field",
    "BoundaryField",
    "build_ball_domain",
    "build_box_domain",
    "custom_domain",
    "extract_boundary",
    "interpolate",
    "extend",
]

DEFAULT_PAD = 3
STAR_SAMPLES = np.linspace(0.1, 0.9, 9)


@dataclass(frozen=True)
class Grid:
    """Uniform isotropic lattice of voxel centers.

    Voxel ``(i, j, k)`` has center ``origin + spacing * (i, j, k)``.
    """

    dims: tuple
    origin: tuple
    spacing: float

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        origin = tuple(float(o) for o in self.origin)
        if len(dims) != 3 or len(origin) != 3:
            raise ConfigurationError("grid needs three dims and a 3-vector origin")
        if min(dims) < 4:
            raise ConfigurationError(f"grid dims must be >= 4 in each axis, got {dims}")
        if not self.spacing > 0:
            raise ConfigurationError(f"grid spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def shape(self):
        return self.dims

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def coords(self) -> np.ndarray:
        """Voxel-center coordinates, shape ``(nx, ny, nz, 3)``."""
        axes = [self.origin[a] + self.spacing * np.arange(self.dims[a]) for a in range(3)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def to_index(self, points) -> np.ndarray:
        """Continuous lattice coordinates of physical points."""
        return (np.asarray(points, dtype=float) - np.asarray(self.origin)) / self.spacing

    def center(self, idx) -> np.ndarray:
        return np.asarray(self.origin) + self.spacing * np.asarray(idx, dtype=float)


@dataclass(frozen=True, eq=False)
class Domain:
    """Masked region of a grid, star-shaped about ``star_center``.

    ``kind`` is ``"ball"``, ``"box"`` or ``"custom"``; ``params`` holds the
    analytic description for the first two (``radius``/``center`` or
    ``lo``/``hi``).
    """

    grid: Grid
    mask: np.ndarray
    star_center: np.ndarray
    kind: str = "custom"
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != self.grid.shape:
            raise ConfigurationError("mask shape does not match grid dims")
        if not mask.any():
            raise ConfigurationError("domain mask is empty")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        a = np.asarray(self.star_center, dtype=float).reshape(3)
        object.__setattr__(self, "star_center", a)
        if self.kind not in ("ball", "box", "custom"):
            raise ConfigurationError(f"unknown domain kind {self.kind!r}")
        idx = np.rint(self.grid.to_index(a)).astype(int)
        if np.any(idx < 0) or np.any(idx >= np.array(self.grid.shape)) or not mask[tuple(idx)]:
            raise ConfigurationError(f"star center {a} does not lie in a masked voxel")
        if self.kind == "custom":
            self._check_star_shaped()

    def _check_star_shaped(self):
        a = self.star_center
        x = self.grid.coords[self.mask]
        pts = a + STAR_SAMPLES[:, None, None] * (x[None] - a)
        idx = np.rint(self.grid.to_index(pts.reshape(-1, 3))).astype(int)
        inside = np.all((idx >= 0) & (idx < np.array(self.grid.shape)), axis=1)
        ok = np.zeros(len(idx), dtype=bool)
        ok[inside] = self.mask[tuple(idx[inside].T)]
        if not ok.all():
            raise ConfigurationError(
                f"mask is not star-shaped about {a}: {np.count_nonzero(~ok)} ray samples leave the mask"
            )

    @property
    def h(self) -> float:
        return self.grid.spacing

    @property
    def n_masked(self) -> int:
        return int(np.count_nonzero(self.mask))

    def with_star_center(self, center) -> "Domain":
        return Domain(self.grid, self.mask, center, self.kind, dict(self.params))

    @cached_property
    def depth(self) -> np.ndarray:
        """Euclidean distance (in voxels) from each voxel to the nearest unmasked one."""
        return ndimage.distance_transform_edt(self.mask)

    def interior(self, margin: float = 2.0) -> np.ndarray:
        """Voxels at least ``margin`` cells away from the mask edge layer."""
        return self.mask & (self.depth >= margin + 1.0 - 1e-9)

    @cached_property
    def edge(self) -> np.ndarray:
        """Masked voxels with at least one unmasked face neighbor."""
        return self.mask & ~ndimage.binary_erosion(self.mask, border_value=0)

    def crossing_fraction(self, idx: np.ndarray, axis: int, sign: int) -> np.ndarray:
        """Fraction ``s/h`` in (0, 1] at which the segment from voxel ``idx``
        towards its ``sign`` neighbor along ``axis`` meets the boundary."""
        h = self.h
        c = self.grid.center(idx)
        if self.kind == "ball":
            c = c - np.asarray(self.params["center"])
            r = self.params["radius"]
            ca = c[:, axis] * sign
            disc = np.maximum(ca**2 - np.sum(c * c, axis=1) + r * r, 0.0)
            s = -ca + np.sqrt(disc)
        elif self.kind == "box":
            lo = np.asarray(self.params["lo"])
            hi = np.asarray(self.params["hi"])
            s = hi[axis] - c[:, axis] if sign > 0 else c[:, axis] - lo[axis]
        else:
            s = np.full(len(c), 0.5 * h)
        return np.clip(s / h, 1e-3, 1.0)

    def boundary_points_along(self, idx: np.ndarray, axis: int, sign: int):
        theta = self.crossing_fraction(idx, axis, sign)
        p = self.grid.center(idx)
        p[:, axis] += sign * theta * self.h
        return p, theta


def _padded_grid(lo, hi, n_cells, pad):
    h = (hi - lo) / n_cells
    origin = np.full(3, lo + 0.5 * h - pad * h)
    return Grid((n_cells + 2 * pad,) * 3, origin, h)


def build_ball_domain(radius: float = 1.0, n: int = 32, star_center=None, center=(0.0, 0.0, 0.0), pad: int = DEFAULT_PAD) -> Domain:
    """Ball of ``radius`` discretized with ``n`` voxels across its diameter.

    Voxel centers sit symmetrically about ``center``; ``pad`` unmasked layers
    surround the ball so that fields can be extended past the mask.
    """
    if not radius > 0:
        raise ConfigurationError(f"radius must be positive, got {radius}")
    if int(n) < 8:
        raise ConfigurationError(f"n must be >= 8, got {n}")
    n = int(n)
    center = np.asarray(center, dtype=float)
    grid = _padded_grid(-radius, radius, n, pad)
    grid = Grid(grid.dims, np.asarray(grid.origin) + center, grid.spacing)
    r = np.linalg.norm(grid.coords - center, axis=-1)
    mask = r < radius
    a = center if star_center is None else star_center
    return Domain(grid, mask, a, "ball", {"radius": float(radius), "center": tuple(center), "n": n})


def build_box_domain(lo=(-0.5, -0.5, -0.5), hi=(0.5, 0.5, 0.5), n: int = 16, star_center=None, pad: int = DEFAULT_PAD) -> Domain:
    """Axis-aligned cube whose faces coincide with voxel faces."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    side = hi - lo
    if np.any(side <= 0) or not np.allclose(side, side[0]):
        raise ConfigurationError("box domains must be cubes with hi > lo")
    if int(n) < 4:
        raise ConfigurationError(f"n must be >= 4, got {n}")
    n = int(n)
    h = side[0] / n
    origin = lo + 0.5 * h - pad * h
    grid = Grid((n + 2 * pad,) * 3, origin, h)
    x = grid.coords
    mask = np.all((x > lo) & (x < hi), axis=-1)
    a = 0.5 * (lo + hi) if star_center is None else star_center
    return Domain(grid, mask, a, "box", {"lo": tuple(lo), "hi": tuple(hi), "n": n})


def custom_domain(grid: Grid, mask, star_center) -> Domain:
    """Arbitrary mask; rejected unless star-shaped about ``star_center``."""
    return Domain(grid, mask, star_center, "custom", {})


@dataclass(frozen=True, eq=False)
class BoundarySet:
    """Quadrature points on the boundary with outward unit normals.

    ``latlong`` is set for analytic sphere rules: ``(mu_nodes, n_phi, center,
    radius)``; it enables smooth interpolation of boundary data.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    latlong: tuple | None = None

    def __len__(self):
        return len(self.points)

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))


def sphere_quadrature(radius=1.0, center=(0.0, 0.0, 0.0), n_theta=64, n_phi=128) -> BoundarySet:
    """Gauss-Legendre in ``cos(theta)`` times the trapezoid rule in ``phi``."""
    mu, wmu = np.polynomial.legendre.leggauss(int(n_theta))
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    M, P = np.meshgrid(mu, phi, indexing="ij")
    s = np.sqrt(1 - M**2)
    normals = np.stack([s * np.cos(P), s * np.sin(P), M], axis=-1).reshape(-1, 3)
    center = np.asarray(center, dtype=float)
    points = center + radius * normals
    weights = np.repeat(wmu, n_phi) * (2 * np.pi / n_phi) * radius**2
    return BoundarySet(points, normals, weights, (mu, int(n_phi), center, float(radius)))


def _face_quadrature(domain: Domain) -> BoundarySet:
    mask = domain.mask
    h = domain.h
    pts, nrm = [], []
    for axis in range(3):
        for sign in (1, -1):
            nb = _shift_bool(mask, axis, sign)
            exposed = mask & ~nb
            idx = np.argwhere(exposed)
            p = domain.grid.center(idx)
            p[:, axis] += 0.5 * sign * h
            n = np.zeros_like(p)
            n[:, axis] = sign
            pts.append(p)
            nrm.append(n)
    points = np.concatenate(pts)
    normals = np.concatenate(nrm)
    return BoundarySet(points, normals, np.full(len(points), h * h))


def extract_boundary(domain: Domain, n_theta: int | None = None, n_phi: int | None = None) -> BoundarySet:
    """Boundary quadrature: analytic sphere rule for balls, exposed faces otherwise."""
    if domain.kind == "ball":
        if n_theta is None:
            n_theta = max(32, 2 * int(domain.params.get("n", 32)))
        if n_phi is None:
            n_phi = 2 * n_theta
        return sphere_quadrature(domain.params["radius"], domain.params["center"], n_theta, n_phi)
    return _face_quadrature(domain)


def _shift_bool(a: np.ndarray, axis: int, k: int) -> np.ndarray:
    """``out[i] = a[i + k]`` along ``axis``; False where out of range."""
    return _shift(a, axis, k, False)


def _shift(a: np.ndarray, axis: int, k: int, fill=0.0) -> np.ndarray:
    out = np.full_like(a, fill)
    n = a.shape[axis]
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if k >= 0:
        src[axis] = slice(k, n)
        dst[axis] = slice(0, n - k)
    else:
        src[axis] = slice(0, n + k)
        dst[axis] = slice(-k, n)
    out[tuple(dst)] = a[tuple(src)]
    return out


class Field:
    """Grid-sampled function with 1, 3 or 4 components.

    ``values`` has shape ``grid.dims + (components,)``.  Samples are
    meaningful only where ``support`` is True (the domain mask unless a
    field was extended); elsewhere they are held at zero.
    """

    __array_priority__ = 100

    def __init__(self, domain: Domain, values, support=None):
        values = np.asarray(values, dtype=float)
        shape = domain.grid.shape
        if values.shape == shape:
            values = values[..., None]
        if values.shape[:3] != shape or values.ndim != 4 or values.shape[3] not in (1, 3, 4):
            raise ConfigurationError(f"field values of shape {values.shape} do not match grid {shape}")
        support = domain.mask if support is None else np.asarray(support, dtype=bool)
        values = np.where(support[..., None], values, 0.0)
        self.domain = domain
        self.values = values
        self.support = support

    # construction -----------------------------------------------------
    @classmethod
    def from_function(cls, domain: Domain, func, support=None) -> "Field":
        """Sample ``func(points[..., 3]) -> values[...]`` or ``values[..., c]``."""
        support = domain.mask if support is None else support
        pts = domain.grid.coords[support]
        vals = np.asarray(func(pts), dtype=float)
        comps = 1 if vals.ndim == 1 else vals.shape[-1]
        out = np.zeros(domain.grid.shape + (comps,))
        out[support] = vals.reshape(len(pts), comps)
        return cls(domain, out, support)

    @classmethod
    def zeros(cls, domain: Domain, components: int = 1, support=None) -> "Field":
        return cls(domain, np.zeros(domain.grid.shape + (components,)), support)

    @classmethod
    def quaternion(cls, scalar: "Field | None" = None, vector: "Field | None" = None) -> "Field":
        ref = scalar if scalar is not None else vector
        if ref is None:
            raise ValueError("need a scalar or vector part")
        out = np.zeros(ref.domain.grid.shape + (4,))
        support = np.ones(ref.domain.grid.shape, dtype=bool)
        if scalar is not None:
            out[..., 0] = scalar.values[..., 0]
            support &= scalar.support
        if vector is not None:
            out[..., 1:] = vector.values
            support &= vector.support
        return cls(ref.domain, out, support)

    # accessors --------------------------------------------------------
    @property
    def grid(self) -> Grid:
        return self.domain.grid

    @property
    def components(self) -> int:
        return self.values.shape[-1]

    @property
    def data(self) -> np.ndarray:
        """Values with the component axis squeezed for scalar fields."""
        return self.values[..., 0] if self.components == 1 else self.values

    def component(self, i: int) -> "Field":
        return Field(self.domain, self.values[..., i : i + 1], self.support)

    def scalar_part(self) -> "Field":
        if self.components not in (1, 4):
            raise ValueError("vector fields have no scalar part")
        return self.component(0)

    def vector_part(self) -> "Field":
        if self.components == 3:
            return self
        if self.components != 4:
            raise ValueError("scalar fields have no vector part")
        return Field(self.domain, self.values[..., 1:], self.support)

    def as_quaternion(self) -> "Field":
        if self.components == 4:
            return self
        if self.components == 1:
            return Field.quaternion(scalar=self)
        return Field.quaternion(vector=self)

    def on(self, region) -> np.ndarray:
        """Samples restricted to a boolean region, shape ``(N, components)``."""
        return self.values[np.asarray(region, dtype=bool) & self.support]

    def with_support(self, support) -> "Field":
        return Field(self.domain, self.values, support)

    def copy(self) -> "Field":
        return Field(self.domain, self.values.copy(), self.support.copy())

    # arithmetic -------------------------------------------------------
    def _binary(self, other, op):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ConfigurationError("fields live on different grids")
            a, b = self.values, other.values
            if a.shape[-1] != b.shape[-1] and 1 not in (a.shape[-1], b.shape[-1]):
                raise ValueError(f"cannot combine {a.shape[-1]} and {b.shape[-1]} component fields")
            return Field(self.domain, op(a, b), self.support & other.support)
        return Field(self.domain, op(self.values, np.asarray(other, dtype=float)), self.support)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        def div(a, b):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(b != 0, a / np.where(b != 0, b, 1.0), 0.0)

        return self._binary(other, div)

    def __neg__(self):
        return Field(self.domain, -self.values, self.support)

    def __repr__(self):
        return f"Field(components={self.components}, dims={self.grid.dims}, n_support={int(self.support.sum())})"

    def sample(self, points) -> np.ndarray:
        """Trilinear interpolation at ``points`` (shape ``(..., 3)``)."""
        return _trilinear(self, np.asarray(points, dtype=float))


def interpolate(field: Field, point) -> np.ndarray:
    """Trilinear value of ``field`` at a single point (one entry per component)."""
    return field.sample(np.asarray(point, dtype=float)[None])[0]


def _trilinear(field: Field, points: np.ndarray) -> np.ndarray:
    shape = points.shape[:-1]
    p = field.grid.to_index(points.reshape(-1, 3))
    dims = np.array(field.grid.shape)
    base = np.floor(p).astype(np.int64)
    base = np.clip(base, 0, dims - 2)
    frac = p - base
    if np.any(p < -1e-9) or np.any(p > dims - 1 + 1e-9):
        raise OutOfDomainError("interpolation point outside the grid hull")
    vals = field.values
    sup = field.support
    out = np.zeros((len(p), field.components))
    bad = np.zeros(len(p), dtype=bool)
    for dx in (0, 1):
        wx = frac[:, 0] if dx else 1 - frac[:, 0]
        for dy in (0, 1):
            wy = frac[:, 1] if dy else 1 - frac[:, 1]
            for dz in (0, 1):
                wz = frac[:, 2] if dz else 1 - frac[:, 2]
                w = wx * wy * wz
                i, j, k = base[:, 0] + dx, base[:, 1] + dy, base[:, 2] + dz
                out += w[:, None] * vals[i, j, k]
                bad |= (w > 1e-12) & ~sup[i, j, k]
    if bad.any():
        q = field.grid.origin + field.grid.spacing * p[np.argmax(bad)]
        raise OutOfDomainError(
            f"{int(bad.sum())} interpolation points touch voxels without valid samples (e.g. {q})"
        )
    return out.reshape(shape + (field.components,))


def extend(field: Field, layers: int = 2) -> Field:
    """Extend samples ``layers`` voxels past the support by linear extrapolation.

    Each new voxel averages the two-point linear extrapolations available
    along the six axis directions, falling back to copying a neighbor.
    """
    vals = field.values.copy()
    sup = field.support.copy()
    for _ in range(layers):
        acc_lin = np.zeros_like(vals)
        n_lin = np.zeros(sup.shape)
        acc_const = np.zeros_like(vals)
        n_const = np.zeros(sup.shape)
        for axis in range(3):
            for sign in (1, -1):
                s1 = _shift_bool(sup, axis, sign)
                s2 = _shift_bool(sup, axis, 2 * sign)
                v1 = _shift(vals, axis, sign)
                v2 = _shift(vals, axis, 2 * sign)
                lin = s1 & s2
                acc_lin += np.where(lin[..., None], 2 * v1 - v2, 0.0)
                n_lin += lin
                acc_const += np.where(s1[..., None], v1, 0.0)
                n_const += s1
        new = ~sup & (n_const > 0)
        est = np.where(
            (n_lin > 0)[..., None],
            acc_lin / np.maximum(n_lin, 1)[..., None],
            acc_const / np.maximum(n_const, 1)[..., None],
        )
        vals = np.where(new[..., None], est, vals)
        sup = sup | new
    return Field(field.domain, vals, sup)


class BoundaryField:
    """Values attached to the points of a :class:`BoundarySet`."""

    def __init__(self, boundary: BoundarySet, values):
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != len(boundary) or values.shape[1] not in (1, 3):
            raise ConfigurationError("boundary values must be (M,) or (M, 3)")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("boundary values must be finite")
        self.boundary = boundary
        self.values = values

    @classmethod
    def from_function(cls, boundary: BoundarySet, func) -> "BoundaryField":
        return cls(boundary, func(boundary.points))

    @property
    def components(self) -> int:
        return self.values.shape[1]

    @cached_property
    def _tree(self):
        return cKDTree(self.boundary.points)

    def evaluate(self, points) -> np.ndarray:
        """Boundary data at arbitrary points near the boundary.

        Sphere rules interpolate bilinearly in ``(cos theta, phi)`` after
        radial projection; other rules use the nearest quadrature point.
        """
        points = np.asarray(points, dtype=float)
        if self.boundary.latlong is None:
            _, idx = self._tree.query(points)
            return self.values[idx]
        mu_nodes, n_phi, center, _ = self.boundary.latlong
        d = points - center
        r = np.linalg.norm(d, axis=1)
        mu = np.clip(d[:, 2] / np.where(r > 0, r, 1.0), -1.0, 1.0)
        phi = np.mod(np.arctan2(d[:, 1], d[:, 0]), 2 * np.pi)
        n_mu = len(mu_nodes)
        i = np.clip(np.searchsorted(mu_nodes, mu) - 1, 0, n_mu - 2)
        tm = np.clip((mu - mu_nodes[i]) / (mu_nodes[i + 1] - mu_nodes[i]), 0.0, 1.0)
        fp = phi / (2 * np.pi) * n_phi - 0.5
        j0 = np.floor(fp).astype(int)
        tp = fp - j0
        j0 %= n_phi
        j1 = (j0 + 1) % n_phi
        v = self.values.reshape(n_mu, n_phi, -1)
        return (
            (1 - tm)[:, None] * ((1 - tp)[:, None] * v[i, j0] + tp[:, None] * v[i, j1])
            + tm[:, None] * ((1 - tp)[:, None] * v[i + 1, j0] + tp[:, None] * v[i + 1, j1])
        )
