"""Residual suites, closed-form comparators and convergence-order fits.

A :class:`ResidualSuite` collects named checks.  Each check stores the
residual norm, the scale it is measured against, their ratio, the region
tag and a tolerance, and serializes to a flat JSON object.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import diffops as D
from .errors import ConfigurationError
from .grid import Field
from .quaternion import qconj_arrays, qmul_arrays

__all__ = [
    "Check",
    "ResidualSuite",
    "ConvergenceEstimate",
    "REGION_TAGS",
    "region_mask",
    "norm_on",
    "residual_divcurl",
    "residual_vekua",
    "residual_conductivity",
    "convergence_order",
    "EXPERIMENTS",
]

# "example" is the shell-minus-tube region of the point-charge example
REGION_TAGS = ("interior", "full", "example")
ZERO_SCALE = D.ZERO_SCALE


@dataclass
class Check:
    residual: float
    scale: float
    relative: float
    region: str
    tolerance: float | None = None
    expect: str = "pass"

    @property
    def within(self) -> bool:
        if self.tolerance is None:
            return bool(np.isfinite(self.relative))
        return bool(self.relative <= self.tolerance)

    @property
    def passed(self) -> bool:
        """True when the outcome matches ``expect`` (negative controls must exceed the tolerance)."""
        return self.within if self.expect == "pass" else not self.within

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "scale": self.scale,
            "relative": self.relative,
            "region": self.region,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "expect": self.expect,
        }


@dataclass
class ResidualSuite:
    checks: dict = field(default_factory=dict)

    def add(self, name: str, residual: float, scale: float, region: str = "interior", tolerance: float | None = None, expect: str = "pass") -> Check:
        if region not in REGION_TAGS:
            raise ConfigurationError(f"region tag must be one of {REGION_TAGS}")
        if expect not in ("pass", "fail"):
            raise ConfigurationError("expect must be 'pass' or 'fail'")
        rel = D.relative_residual(residual, scale)
        chk = Check(float(residual), float(scale), float(rel), region, tolerance, expect)
        self.checks[name] = chk
        return chk

    def merge(self, other: "ResidualSuite", prefix: str = "") -> "ResidualSuite":
        for k, v in other.checks.items():
            self.checks[prefix + k] = v
        return self

    def __getitem__(self, name) -> Check:
        return self.checks[name]

    def __contains__(self, name) -> bool:
        return name in self.checks

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed(self) -> list:
        return [k for k, c in self.checks.items() if not c.passed]

    def relatives(self) -> dict:
        return {k: c.relative for k, c in self.checks.items()}

    def to_dict(self) -> dict:
        return {k: c.to_dict() for k, c in self.checks.items()}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def region_mask(domain, region) -> tuple[np.ndarray, str]:
    """Resolve ``region`` (tag, boolean mask or None) to ``(mask, tag)``."""
    if region is None or (isinstance(region, str) and region == "interior"):
        return domain.interior(), "interior"
    if isinstance(region, str):
        if region == "full":
            return domain.mask.copy(), "full"
        raise ConfigurationError(f"unknown region {region!r}")
    return np.asarray(region, dtype=bool) & domain.mask, "example"


def norm_on(values: np.ndarray, region: np.ndarray, h: float) -> float:
    """L2 norm (``h**3`` weights) of grid ``values`` restricted to ``region``."""
    v = values[region]
    return D.l2_norm(v, h)


def _same_grid(*fields):
    ref = fields[0].grid
    for f in fields[1:]:
        if f is not None and f.grid != ref:
            raise ConfigurationError("fields live on different grids")


def residual_divcurl(w: Field, g0: Field | None, g: Field | None, region=None, tolerance: float | None = None) -> ResidualSuite:
    """``||div w - g0||`` and ``||curl w - g||`` relative to ``||g0||`` and ``||g||``."""
    _same_grid(w, g0, g)
    mask, tag = region_mask(w.domain, region)
    h = w.grid.spacing
    suite = ResidualSuite()
    div = D.divergence(w).values
    rot = D.curl(w).values
    g0v = np.zeros_like(div) if g0 is None else g0.values
    gv = np.zeros_like(rot) if g is None else g.values
    suite.add("div", norm_on(div - g0v, mask, h), norm_on(g0v, mask, h), tag, tolerance)
    suite.add("curl", norm_on(rot - gv, mask, h), norm_on(gv, mask, h), tag, tolerance)
    return suite


def dirac_log(f: Field) -> np.ndarray:
    """Quaternion array of ``Df / f`` (a pure vector)."""
    out = np.zeros(f.grid.shape + (4,))
    fv = f.values[..., 0]
    safe = np.where(f.support, fv, 1.0)
    out[..., 1:] = D.gradient(f).values / safe[..., None]
    return out


def quaternion_scale(W: Field, mask: np.ndarray) -> float:
    """``sum_ab ||d_b W_a|| + ||W|| / l`` over ``mask``."""
    h = W.grid.spacing
    parts = sum(norm_on(D.partial(W.component(a), b).values, mask, h) for a in range(W.components) for b in range(3))
    return parts + norm_on(W.values, mask, h) / D.length_scale(W.domain)


def residual_vekua(f: Field, W: Field, region=None, tolerance: float | None = None) -> ResidualSuite:
    """Main Vekua equation ``DW = (Df/f) conj(W)`` and its split form.

    ``vekua`` is ``||DW - (Df/f) conj W||`` over ``sum_ab ||d_b W_a|| +
    ||(Df/f) W|| + ||W|| / l`` (all partials rather than ``||DW||`` alone,
    which vanishes up to rounding for monogenic ``W``);
    ``system`` is ``||D(f W_vec) + f^2 grad(W0/f)||`` over the sum of the
    two norms.
    """
    _same_grid(f, W)
    W = W.as_quaternion()
    mask, tag = region_mask(W.domain, region)
    h = W.grid.spacing
    suite = ResidualSuite()
    DW = D.dirac(W, "left").values
    rhs = qmul_arrays(dirac_log(f), qconj_arrays(W.values))
    scale = quaternion_scale(W, mask) + norm_on(rhs, mask, h)
    suite.add("vekua", norm_on(DW - rhs, mask, h), scale, tag, tolerance)

    fv = f.values[..., 0]
    fW = Field(W.domain, W.values[..., 1:] * fv[..., None], W.support & f.support).as_quaternion()
    lhs = D.dirac(fW, "left").values
    ratio = Field(W.domain, W.values[..., 0] / np.where(f.support, fv, 1.0), W.support & f.support)
    src = np.zeros_like(lhs)
    src[..., 1:] = (fv**2)[..., None] * D.gradient(ratio).values
    suite.add("system", norm_on(lhs + src, mask, h), norm_on(lhs, mask, h) + norm_on(src, mask, h), tag, tolerance)
    return suite


def residual_conductivity(f: Field, u: Field, g0: Field | None = None, region=None, tolerance: float | None = None) -> ResidualSuite:
    """``||div(f^2 grad u) - g0||`` against ``sum_ab ||d_b(f^2 d_a u)|| + ||f^2 grad u|| / l + ||g0||``."""
    _same_grid(f, u, g0)
    mask, tag = region_mask(u.domain, region)
    h = u.grid.spacing
    f2 = f.values[..., 0] ** 2
    flux = Field(u.domain, f2[..., None] * D.gradient(u).values, u.support & f.support)
    J = [[D.partial(flux.component(a), b).values for b in range(3)] for a in range(3)]
    lhs = J[0][0] + J[1][1] + J[2][2]
    g0v = np.zeros_like(lhs) if g0 is None else g0.values
    scale = sum(norm_on(J[a][b], mask, h) for a in range(3) for b in range(3)) + norm_on(g0v, mask, h)
    scale += norm_on(flux.values, mask, h) / D.length_scale(u.domain)
    suite = ResidualSuite()
    suite.add("conductivity", norm_on(lhs - g0v, mask, h), scale, tag, tolerance)
    return suite


# ------------------------------------------------------------ convergence

@dataclass
class ConvergenceEstimate:
    resolutions: list
    spacings: list
    errors: list
    order: float | None
    flag: str = ""

    def to_dict(self) -> dict:
        return {
            "resolutions": list(self.resolutions),
            "spacings": list(self.spacings),
            "errors": list(self.errors),
            "order": self.order,
            "flag": self.flag,
        }


ROUNDING_FLOOR = 1e-12


def fit_order(spacings: Sequence[float], errors: Sequence[float]) -> tuple[float | None, str]:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    e = np.asarray(errors, dtype=float)
    if np.any(~np.isfinite(e)):
        raise ValueError("errors must be finite")
    if np.all(e <= ROUNDING_FLOOR):
        return None, "rounding-floor"
    if np.any(e <= 0):
        raise ValueError("errors must be positive for an order fit")
    slope = np.polyfit(np.log(np.asarray(spacings, dtype=float)), np.log(e), 1)[0]
    return float(slope), ""


def _exp_dirac_teodorescu(n: int):
    from .grid import build_ball_domain
    from .integral import teodorescu

    dom = build_ball_domain(1.0, n)
    w = Field.from_function(dom, lambda p: np.stack([p[:, 1], 0 * p[:, 1], 0 * p[:, 1]], 1)).as_quaternion()
    DT = D.dirac(teodorescu(w), "left")
    inn = dom.interior()
    return D.l2_norm(DT.values[inn] - w.values[inn], dom.h) / D.l2_norm(w.values[inn], dom.h), dom.h


def _exp_newton_ball(n: int):
    from .grid import build_ball_domain
    from .integral import newton_potential

    dom = build_ball_domain(1.0, n)
    L = newton_potential(Field.from_function(dom, lambda p: np.ones(len(p))))
    exact = -(3 - np.sum(dom.grid.coords**2, axis=-1)) / 6
    m = dom.mask
    return float(np.max(np.abs(L.values[..., 0][m] - exact[m])) / np.max(np.abs(exact[m]))), dom.h


def _exp_conductivity(n: int):
    from .grid import BoundaryField, build_ball_domain, extract_boundary
    from .solvers import Conductivity, solve_conductivity

    dom = build_ball_domain(1.0, n)
    f = Conductivity.from_function(dom, lambda p: np.sqrt(1 + p[:, 2] ** 2 / 2))
    # div((1 + z^2/2) grad(xy)) = 0 since grad(xy) has no z component
    u_exact = Field.from_function(dom, lambda p: p[:, 0] * p[:, 1])
    phi = BoundaryField.from_function(extract_boundary(dom), lambda p: p[:, 0] * p[:, 1])
    u = solve_conductivity(f, None, phi)
    m = dom.mask
    return D.l2_norm(u.values[m] - u_exact.values[m], dom.h) / D.l2_norm(u_exact.values[m], dom.h), dom.h


def _exp_interp_linear(n: int):
    from .grid import build_ball_domain

    dom = build_ball_domain(1.0, n)
    u = Field.from_function(dom, lambda p: 1 + p[:, 0] - 2 * p[:, 1] + 0.5 * p[:, 2])
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(200, 3))
    pts *= 0.5 * rng.uniform(0, 1, size=(200, 1)) / np.linalg.norm(pts, axis=1, keepdims=True)
    exact = 1 + pts[:, 0] - 2 * pts[:, 1] + 0.5 * pts[:, 2]
    return float(np.max(np.abs(u.sample(pts)[:, 0] - exact))), dom.h


EXPERIMENTS: dict[str, Callable[[int], tuple[float, float]]] = {
    "dirac-teodorescu": _exp_dirac_teodorescu,
    "newton-ball": _exp_newton_ball,
    "conductivity": _exp_conductivity,
    "interp-linear": _exp_interp_linear,
}


def convergence_order(runner, resolutions: Sequence[int]) -> ConvergenceEstimate:
    """Run ``runner(n) -> (error, h)`` (or a registered experiment name) and fit the order."""
    if len(resolutions) < 2:
        raise ConfigurationError("convergence study needs at least two resolutions")
    if isinstance(runner, str):
        if runner not in EXPERIMENTS:
            raise ConfigurationError(f"unknown experiment {runner!r}; choose from {sorted(EXPERIMENTS)}")
        runner = EXPERIMENTS[runner]
    errors, spacings = [], []
    for n in resolutions:
        err, h = runner(int(n))
        errors.append(float(err))
        spacings.append(float(h))
    order, flag = fit_order(spacings, errors)
    return ConvergenceEstimate(list(resolutions), spacings, errors, order, flag)


def error_ratio(est: ConvergenceEstimate) -> float:
    """Ratio of the coarsest to the finest error."""
    return est.errors[0] / est.errors[-1] if est.errors[-1] > 0 else math.inf
