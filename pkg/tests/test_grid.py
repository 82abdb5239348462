import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divcurl.errors import ConfigurationError, OutOfDomainError
from divcurl.grid import (
    BoundaryField,
    Field,
    Grid,
    build_ball_domain,
    build_box_domain,
    custom_domain,
    extend,
    extract_boundary,
    interpolate,
    sphere_quadrature,
)


def test_ball_is_symmetric_and_padded(ball16):
    m = ball16.mask
    assert np.array_equal(m, m[::-1]) and np.array_equal(m, m.transpose(1, 0, 2))
    assert not m[0].any() and not m[-1].any()
    assert ball16.h == pytest.approx(2 / 16)
    # volume of masked voxels approaches 4 pi / 3
    assert ball16.n_masked * ball16.h**3 == pytest.approx(4 * np.pi / 3, rel=0.05)


def test_box_faces_on_voxel_faces():
    d = build_box_domain(n=8)
    assert d.n_masked == 8**3
    assert d.crossing_fraction(np.argwhere(d.edge)[:1], 0, 1)[0] > 0


def test_bad_parameters_rejected():
    with pytest.raises(ConfigurationError):
        build_ball_domain(-1.0, 16)
    with pytest.raises(ConfigurationError):
        build_ball_domain(1.0, 4)
    with pytest.raises(ConfigurationError):
        build_ball_domain(1.0, 16, star_center=(2.0, 0, 0))


def test_non_star_shaped_custom_mask_rejected():
    g = Grid((20, 20, 20), (0.0, 0.0, 0.0), 1.0)
    X = g.coords
    # an annulus-like torus around z: not star-shaped about any voxel inside
    rho = np.hypot(X[..., 0] - 9.5, X[..., 1] - 9.5)
    mask = (rho > 4) & (rho < 8) & (np.abs(X[..., 2] - 9.5) < 3)
    center = g.center(np.argwhere(mask)[:1])[0]
    with pytest.raises(ConfigurationError):
        custom_domain(g, mask, center)
    ok = custom_domain(g, np.abs(X - 9.5).max(axis=-1) < 6, (9.5, 9.5, 9.5))
    assert ok.kind == "custom"


def test_interior_and_edge(ball16):
    assert (ball16.interior() <= ball16.mask).all()
    assert not (ball16.interior() & ball16.edge).any()
    assert ball16.interior(0).sum() == ball16.n_masked


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_trilinear_exact_on_linear(c0, c1, c2, c3):
    d = build_ball_domain(1.0, 12)
    f = Field.from_function(d, lambda p: c0 + c1 * p[:, 0] + c2 * p[:, 1] + c3 * p[:, 2])
    pts = np.random.default_rng(0).uniform(-0.45, 0.45, size=(30, 3))
    exact = c0 + c1 * pts[:, 0] + c2 * pts[:, 1] + c3 * pts[:, 2]
    assert np.allclose(f.sample(pts)[:, 0], exact, atol=1e-10)


def test_sample_outside_support_raises(ball16):
    f = Field.from_function(ball16, lambda p: p[:, 0])
    with pytest.raises(OutOfDomainError):
        f.sample(np.array([[0.99, 0.0, 0.0]]))
    with pytest.raises(OutOfDomainError):
        interpolate(f, [5.0, 0, 0])


def test_extend_is_exact_for_linear(ball16):
    f = Field.from_function(ball16, lambda p: 1 + 2 * p[:, 0] - p[:, 2])
    e = extend(f, 2)
    assert e.support.sum() > f.support.sum()
    X = ball16.grid.coords[e.support]
    assert np.allclose(e.values[e.support][:, 0], 1 + 2 * X[:, 0] - X[:, 2])


def test_field_arithmetic_and_parts(ball16):
    s = Field.from_function(ball16, lambda p: p[:, 0])
    v = Field.from_function(ball16, lambda p: p)
    q = Field.quaternion(s, v)
    assert q.components == 4
    assert np.allclose(q.scalar_part().values, s.values)
    assert np.allclose(q.vector_part().values, v.values)
    assert np.allclose((v * s).values, v.values * s.values)
    assert np.allclose((s / s).values[ball16.mask & (np.abs(ball16.grid.coords[..., 0]) > 0.01)], 1)
    assert v.as_quaternion().components == 4
    other = Field.from_function(build_ball_domain(1.0, 12), lambda p: p[:, 0])
    with pytest.raises(ConfigurationError):
        s + other
    with pytest.raises(ConfigurationError):
        Field(ball16, np.zeros((3, 3, 3)))


def test_sphere_quadrature_integrates_polynomials():
    b = sphere_quadrature(1.0, n_theta=16, n_phi=32)
    assert b.area == pytest.approx(4 * np.pi)
    assert np.sum(b.weights * b.points[:, 2] ** 2) == pytest.approx(4 * np.pi / 3)
    assert np.allclose(b.points, b.normals)


def test_boundary_field_evaluate(ball16):
    b = extract_boundary(ball16)
    bf = BoundaryField.from_function(b, lambda p: p[:, 0] * p[:, 1])
    pts = np.array([[0.6, 0.8, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(bf.evaluate(pts)[:, 0], pts[:, 0] * pts[:, 1], atol=1e-2)
    with pytest.raises(ConfigurationError):
        BoundaryField(b, np.full(len(b), np.nan))
