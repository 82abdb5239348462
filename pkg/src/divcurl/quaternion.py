"""Real quaternion arithmetic.

A quaternion ``x = x0 + x1 e1 + x2 e2 + x3 e3`` is stored as four float64
components ``(x0, x1, x2, x3)``.  Scalar-valued objects (:class:`Quaternion`)
and array-valued helpers operating on trailing axes of length 4 are both
provided; the latter are what the field operators use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Quaternion",
    "qmul",
    "qconj",
    "qmul_arrays",
    "qconj_arrays",
    "scalar_part",
    "vector_part",
]


@dataclass(frozen=True)
class Quaternion:
    """Quaternion with scalar part ``s`` and vector part ``v``."""

    s: float = 0.0
    v: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "v", tuple(float(c) for c in self.v))
        if len(self.v) != 3:
            raise ValueError("vector part must have three components")

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float)
        return cls(a[0], (a[1], a[2], a[3]))

    @classmethod
    def unit(cls, i: int) -> "Quaternion":
        """Return ``e_i`` for ``i`` in 0..3 (``e_0 = 1``)."""
        a = np.zeros(4)
        a[i] = 1.0
        return cls.from_array(a)

    def to_array(self) -> np.ndarray:
        return np.array((self.s, *self.v))

    @property
    def sc(self) -> "Quaternion":
        return Quaternion(self.s)

    @property
    def vec(self) -> "Quaternion":
        return Quaternion(0.0, self.v)

    def __add__(self, other):
        other = _coerce(other)
        return Quaternion.from_array(self.to_array() + other.to_array())

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return Quaternion.from_array(self.to_array() - other.to_array())

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return Quaternion.from_array(-self.to_array())

    def __mul__(self, other):
        return qmul(self, _coerce(other))

    def __rmul__(self, other):
        return qmul(_coerce(other), self)

    def conj(self) -> "Quaternion":
        return qconj(self)

    def __abs__(self) -> float:
        return float(np.linalg.norm(self.to_array()))


def _coerce(x) -> Quaternion:
    if isinstance(x, Quaternion):
        return x
    if np.isscalar(x):
        return Quaternion(float(x))
    return Quaternion.from_array(x)


def qmul_arrays(a, b) -> np.ndarray:
    """Quaternion product along the trailing axis of broadcastable arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, av = a[..., 0], a[..., 1:]
    b0, bv = b[..., 0], b[..., 1:]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a0 * b0 - np.sum(av * bv, axis=-1)
    out[..., 1:] = a0[..., None] * bv + b0[..., None] * av + np.cross(av, bv)
    return out


def qconj_arrays(a) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Return ``a0 b0 - a.b + a0 b + b0 a + a x b``."""
    return Quaternion.from_array(qmul_arrays(a.to_array(), b.to_array()))


def qconj(a: Quaternion) -> Quaternion:
    return Quaternion(a.s, tuple(-c for c in a.v))


def scalar_part(a: Quaternion) -> float:
    return a.s


def vector_part(a: Quaternion) -> np.ndarray:
    return np.array(a.v)
