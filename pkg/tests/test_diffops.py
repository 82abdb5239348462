import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divcurl import diffops as D
from divcurl.errors import PreconditionError, StencilError
from divcurl.grid import Field, Grid, build_ball_domain, custom_domain


def _quadratic(c):
    def f(p):
        x, y, z = p.T
        return c[0] + c[1] * x + c[2] * y + c[3] * z + c[4] * x * y + c[5] * y * z + c[6] * x * z + c[7] * x * x + c[8] * y * y + c[9] * z * z

    def grad(p):
        x, y, z = p.T
        return np.stack([c[1] + c[4] * y + c[6] * z + 2 * c[7] * x, c[2] + c[4] * x + c[5] * z + 2 * c[8] * y, c[3] + c[5] * y + c[6] * x + 2 * c[9] * z], 1)

    return f, grad


coeffs = st.lists(st.floats(-3, 3), min_size=10, max_size=10)


@given(coeffs)
def test_gradient_exact_on_quadratics_including_edges(c):
    d = build_ball_domain(1.0, 12)
    f, grad = _quadratic(c)
    g = D.gradient(Field.from_function(d, f))
    exact = grad(d.grid.coords[d.mask])
    assert np.allclose(g.values[d.mask], exact, atol=1e-9)


def test_div_curl_and_curl_grad_vanish(ball16, rng):
    c = rng.normal(size=10)
    f, _ = _quadratic(c)
    u = Field.from_function(ball16, f)
    inn = ball16.interior()
    assert np.abs(D.curl(D.gradient(u)).values[inn]).max() < 1e-9
    v = Field.from_function(ball16, lambda p: np.stack([p[:, 1] ** 2 * p[:, 2], p[:, 0] * p[:, 2], p[:, 0] ** 2], 1))
    assert np.abs(D.divergence(D.curl(v)).values[inn]).max() < 1e-9


def test_dirac_conventions(ball16):
    x = Field.from_function(ball16, lambda p: p)
    Dx = D.dirac(x)
    assert np.allclose(Dx.values[ball16.mask][:, 0], -3)
    assert np.allclose(Dx.values[ball16.mask][:, 1:], 0)
    rot = Field.from_function(ball16, lambda p: np.stack([-p[:, 1], p[:, 0], 0 * p[:, 0]], 1))
    left = D.dirac(rot, "left").values[ball16.mask]
    right = D.dirac(rot, "right").values[ball16.mask]
    assert np.allclose(left[:, 1:], [0, 0, 2]) and np.allclose(right[:, 1:], [0, 0, -2])
    s = Field.from_function(ball16, lambda p: p[:, 0] * p[:, 1])
    assert np.allclose(D.dirac(s).values[..., 1:], D.gradient(s).values)


def test_laplacian_of_quadratic(ball16):
    u = Field.from_function(ball16, lambda p: np.sum(p * p, axis=1))
    assert np.allclose(D.laplacian(u).values[ball16.interior()], 6)


def test_isolated_voxel_raises():
    g = Grid((5, 5, 5), (0.0, 0.0, 0.0), 1.0)
    mask = np.zeros((5, 5, 5), bool)
    mask[2, 2, 2] = True
    dom = custom_domain(g, mask, (2.0, 2.0, 2.0))
    with pytest.raises(StencilError):
        D.gradient(Field(dom, np.ones((5, 5, 5))))


def test_precondition_gates(ball16):
    with pytest.raises(PreconditionError) as exc:
        D.check_solenoidal(Field.from_function(ball16, lambda p: p))
    assert exc.value.residual > exc.value.tolerance
    with pytest.raises(PreconditionError):
        D.check_harmonic(Field.from_function(ball16, lambda p: np.sum(p * p, 1)))
    with pytest.raises(PreconditionError):
        D.check_irrotational(Field.from_function(ball16, lambda p: np.stack([-p[:, 1], p[:, 0], 0 * p[:, 0]], 1)))
    # constant and linear data pass rather than being judged noise against noise
    assert D.check_solenoidal(Field.from_function(ball16, lambda p: np.tile([0, 0, 1.0], (len(p), 1)))) < 1e-12
    assert D.check_harmonic(Field.from_function(ball16, lambda p: p[:, 0])) < 1e-12
    assert D.check_irrotational(Field.from_function(ball16, lambda p: np.stack([p[:, 1], p[:, 0], 0 * p[:, 0]], 1))) < 1e-12


def test_relative_residual_zero_scale():
    assert D.relative_residual(0.3, 0.0) == 0.3
    assert D.relative_residual(0.3, 3.0) == pytest.approx(0.1)


@given(st.floats(-0.9, 4.0), st.integers(0, 5))
def test_ray_rule_exact_on_monomials(alpha, k):
    q = D.RayQuadrature(16, alpha)
    assert np.sum(q.weights * q.nodes**k) == pytest.approx(1 / (alpha + k + 1), rel=1e-12)


def test_ray_rule_validation():
    with pytest.raises(ValueError):
        D.RayQuadrature(4, 0.0)
    with pytest.raises(ValueError):
        D.RayQuadrature(16, -1.0)


def test_radial_moment_constant_and_field(ball16):
    one = Field.from_function(ball16, lambda p: np.ones(len(p)))
    r = D.radial_moment(one, 2.0)
    assert np.allclose(r.values[ball16.mask], 1 / 3)
    pts = np.array([[0.3, 0.1, -0.2]])
    # I^a[x1](x) = x1 / (a + 2) about the origin
    assert D.radial_moment(lambda p: p[:, 0], 1.0, np.zeros(3), pts)[0, 0] == pytest.approx(0.1)


def test_antigradient_recovers_potential(ball16):
    g = Field.from_function(ball16, lambda p: np.stack([p[:, 1], p[:, 0], 2 * p[:, 2]], 1))
    psi = D.antigradient(g)
    X = ball16.grid.coords[ball16.mask]
    assert np.allclose(psi.values[ball16.mask][:, 0], X[:, 0] * X[:, 1] + X[:, 2] ** 2, atol=1e-10)
    with pytest.raises(PreconditionError):
        D.antigradient(Field.from_function(ball16, lambda p: np.stack([-p[:, 1], p[:, 0], 0 * p[:, 0]], 1)))


def test_antigradient_shifted_base():
    d = build_ball_domain(1.0, 16, star_center=(0.2, -0.1, 0.3))
    g = Field.from_function(d, lambda p: np.tile([1.0, 2.0, 3.0], (len(p), 1)))
    psi = D.antigradient(g)
    X = d.grid.coords[d.mask] - d.star_center
    assert np.allclose(psi.values[d.mask][:, 0], X @ [1, 2, 3])


def test_monogenic_completion_closed_form():
    pts = np.random.default_rng(2).uniform(-0.5, 0.5, (20, 3))
    S = D.monogenic_completion(None, np.zeros(3), pts, grad=lambda p: np.tile([1.0, 0, 0], (len(p), 1)))
    # S[x1] = x x e1 / 2
    assert np.allclose(S, np.cross(pts, [1.0, 0, 0]) / 2)
    with pytest.raises(ValueError):
        D.monogenic_completion(lambda p: p[:, 0], np.zeros(3), pts)


def test_complete_from_vector(ball16):
    # w = x x e1 / 2 has curl -e1, so the scalar partner is x1
    w = Field.from_function(ball16, lambda p: np.cross(p, [1.0, 0, 0]) / 2)
    w0 = D.complete_from_vector(w)
    assert np.allclose(w0.values[ball16.mask][:, 0], ball16.grid.coords[ball16.mask][:, 0])
    q = Field.quaternion(w0, w)
    assert np.abs(D.dirac(q).values[ball16.interior()]).max() < 1e-9
