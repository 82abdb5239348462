import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divcurl.quaternion import Quaternion, qconj, qconj_arrays, qmul, qmul_arrays

finite = st.floats(-10, 10, allow_nan=False)
quat = st.tuples(finite, finite, finite, finite).map(np.array)


def test_unit_products():
    e1, e2, e3 = (Quaternion.unit(i) for i in (1, 2, 3))
    assert (e1 * e2).to_array() == pytest.approx(e3.to_array())
    assert (e2 * e3).to_array() == pytest.approx(e1.to_array())
    assert (e3 * e1).to_array() == pytest.approx(e2.to_array())
    for e in (e1, e2, e3):
        assert (e * e).to_array() == pytest.approx([-1, 0, 0, 0])


def test_vector_product_splits_into_dot_and_cross():
    a, b = np.array([1.0, 2, 3]), np.array([-2.0, 0.5, 4])
    p = qmul(Quaternion(0, a), Quaternion(0, b))
    assert p.s == pytest.approx(-a @ b)
    assert np.allclose(p.v, np.cross(a, b))


@given(quat, quat, quat)
def test_associative(a, b, c):
    lhs = qmul_arrays(qmul_arrays(a, b), c)
    rhs = qmul_arrays(a, qmul_arrays(b, c))
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(lhs).max()))


@given(quat, quat)
def test_norm_multiplicative_and_conjugate_reverses(a, b):
    ab = qmul_arrays(a, b)
    assert np.linalg.norm(ab) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), rel=1e-9, abs=1e-9)
    assert np.allclose(qconj_arrays(ab), qmul_arrays(qconj_arrays(b), qconj_arrays(a)), atol=1e-8)


@given(quat)
def test_conjugate_gives_squared_norm(a):
    p = qmul_arrays(a, qconj_arrays(a))
    assert p[0] == pytest.approx(a @ a, rel=1e-12, abs=1e-12)
    assert np.allclose(p[1:], 0, atol=1e-9)


def test_class_matches_arrays_and_coercion():
    a = Quaternion(1, (2, 3, 4))
    b = Quaternion(-1, (0.5, 0, 2))
    assert np.allclose((a * b).to_array(), qmul_arrays(a.to_array(), b.to_array()))
    assert (2 * a).to_array() == pytest.approx(2 * a.to_array())
    assert (a + 1).s == 2
    assert (1 - a).s == 0
    assert qconj(a).v == (-2, -3, -4)
    assert abs(a) == pytest.approx(np.sqrt(30))
    assert a.sc.v == (0, 0, 0) and a.vec.s == 0


def test_rejects_wrong_vector_length():
    with pytest.raises(ValueError):
        Quaternion(0, (1, 2))


def test_array_broadcasting():
    a = np.random.default_rng(0).normal(size=(5, 4))
    out = qmul_arrays(a, np.array([1.0, 0, 0, 0]))
    assert np.allclose(out, a)
