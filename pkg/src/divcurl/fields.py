"""Analytic test fields, including the point-charge example and its closed form.

Every builtin is a function of an ``(N, 3)`` point array returning ``(N,)``
scalars or ``(N, 3)`` vectors.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .grid import Domain, Field

__all__ = [
    "BUILTINS",
    "builtin_field",
    "coulomb",
    "coulomb_closed_form",
    "string_regularized_coulomb",
    "example_region",
]

COULOMB_CUTOFF = 0.2


def _zero(p):
    return np.zeros(len(p))


def _one(p):
    return np.ones(len(p))


def _x1(p):
    return p[:, 0].copy()


def _x1x2(p):
    return p[:, 0] * p[:, 1]


def _e3(p):
    out = np.zeros_like(p)
    out[:, 2] = 1.0
    return out


def coulomb(p, cutoff: float = COULOMB_CUTOFF):
    """``x / |x|^3``, set to zero for ``|x| < cutoff``."""
    r = np.linalg.norm(p, axis=-1, keepdims=True)
    out = np.zeros_like(p, dtype=float)
    keep = r[:, 0] >= cutoff
    out[keep] = p[keep] / r[keep] ** 3
    return out


def _expz(p):
    return np.exp(p[:, 2] / 2)


def _gradx1x2(p):
    out = np.zeros_like(p)
    out[:, 0] = p[:, 1]
    out[:, 1] = p[:, 0]
    return out


def _x(p):
    return np.array(p, dtype=float)


def _r2(p):
    return np.sum(p * p, axis=-1)


def _e1(p):
    out = np.zeros_like(p)
    out[:, 0] = 1.0
    return out


def _quadz(p):
    return np.sqrt(1 + p[:, 2] ** 2 / 2)


# name -> (components, function)
BUILTINS = {
    "zero": (1, _zero),
    "one": (1, _one),
    "x1": (1, _x1),
    "x1x2": (1, _x1x2),
    "e3": (3, _e3),
    "coulomb": (3, coulomb),
    "expz": (1, _expz),
    "gradx1x2": (3, _gradx1x2),
    # extras used by the negative controls and the variable-coefficient demos
    "x": (3, _x),
    "r2": (1, _r2),
    "e1": (3, _e1),
    "quadz": (1, _quadz),
}


def builtin_field(name: str, domain: Domain, components: int | None = None) -> Field:
    """Sample a builtin on ``domain``.

    ``zero`` adapts to the requested component count; for other names a
    mismatching ``components`` raises :class:`ConfigurationError`.
    """
    if name not in BUILTINS:
        raise ConfigurationError(f"unknown builtin field {name!r}; choose from {sorted(BUILTINS)}")
    comps, func = BUILTINS[name]
    if name == "zero" and components is not None:
        return Field.zeros(domain, components)
    if components is not None and components != comps:
        kind = {1: "scalar", 3: "vector"}
        raise ConfigurationError(f"builtin {name!r} is a {kind[comps]} field, expected {kind.get(components, components)}")
    return Field.from_function(domain, func)


def coulomb_closed_form(p, a):
    """Vector potential ``(a x x) / (|x| (a.x + |a||x|))`` of ``x/|x|^3``.

    Singular on the ray from the origin pointing away from ``a``.
    """
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    r = np.linalg.norm(p, axis=-1)
    den = r * (p @ a + np.linalg.norm(a) * r)
    return np.cross(np.broadcast_to(a, p.shape), p) / den[:, None]


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s * s)


def _dsmoothstep(s):
    inside = (s > 0) & (s < 1)
    return np.where(inside, 30 * s * s * (1 - s) ** 2, 0.0)


def string_regularized_coulomb(p, direction=(0.0, 0.0, 1.0), core=(0.02, 0.3), tube=0.1):
    """Smooth, exactly solenoidal field equal to ``x/|x|^3`` away from a core and a tube.

    The field is ``curl(chi A)`` where ``A = -(r + u.x)/(r rho^2) (u x x)``
    is the monopole potential whose string runs along ``+u`` and ``chi``
    is a smooth cutoff: zero for ``|x| < core[0]``, one for
    ``|x| > core[1]``, and switched off inside the cylinder ``rho < tube``
    on the ``u.x > 0`` side.  Flux leaves through the sphere and returns
    through the tube, so the divergence vanishes identically.
    """
    p = np.asarray(p, dtype=float)
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    r0, r1 = core
    r = np.linalg.norm(p, axis=-1)
    z = p @ u
    perp = p - z[:, None] * u
    rho = np.linalg.norm(perp, axis=-1)
    rs = np.where(r > 0, r, 1.0)
    rhos = np.where(rho > 0, rho, 1.0)

    sr = (r - r0) / (r1 - r0)
    cr, dcr = _smoothstep(sr), _dsmoothstep(sr) / (r1 - r0)
    st = rho / tube
    on_string_side = z > 0
    ct = np.where(on_string_side, _smoothstep(st), 1.0)
    dct = np.where(on_string_side, _dsmoothstep(st) / tube, 0.0)
    chi = cr * ct
    grad_chi = (ct * dcr)[:, None] * p / rs[:, None] + (cr * dct)[:, None] * perp / rhos[:, None]

    # (r + z) / rho^2 = 1 / (r - z), regular away from the string
    live = chi > 0
    coef = np.zeros_like(r)
    coef[live] = -1.0 / (r[live] * (r[live] - z[live]))
    A = coef[:, None] * np.cross(np.broadcast_to(u, p.shape), p)
    radial = np.zeros_like(p)
    radial[live] = p[live] / r[live, None] ** 3
    return chi[:, None] * radial + np.cross(grad_chi, A)


def example_region(domain: Domain, direction=(0.0, 0.0, 1.0), inner=0.3, outer=0.9, tube=0.15) -> np.ndarray:
    """Shell ``inner <= |x| <= outer`` minus a cylinder of radius ``tube`` around the ``+direction`` ray."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    X = domain.grid.coords
    r = np.linalg.norm(X, axis=-1)
    z = X @ u
    rho = np.linalg.norm(X - z[..., None] * u, axis=-1)
    return domain.mask & (r >= inner) & (r <= outer) & ~((z > 0) & (rho < tube))
