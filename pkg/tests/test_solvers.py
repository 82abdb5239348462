import numpy as np
import pytest

from divcurl import diffops as D
from divcurl import solvers as S
from divcurl.errors import ConfigurationError, PreconditionError, SolverError
from divcurl.grid import BoundaryField, Field, build_ball_domain, extract_boundary
from divcurl.verify import residual_divcurl, residual_vekua


def _vec(dom, func):
    return Field.from_function(dom, func)


def e3(p):
    out = np.zeros_like(p)
    out[:, 2] = 1
    return out


def test_divcurl_with_scalar_source_is_x_over_3(ball24):
    one = Field.from_function(ball24, lambda p: np.ones(len(p)))
    rep = S.SolveReport()
    w = S.solve_divcurl(one, None, report=rep)
    inn = ball24.interior()
    X = ball24.grid.coords[inn]
    assert np.abs(w.values[inn] - X / 3).max() < 5e-3
    assert rep.residuals["div"].relative < 0.02 and "full_div" in rep.residuals
    assert rep.runtime > 0 and rep.gauge == "h = 0"


def test_curl_inverse_of_constant(ball24):
    g = _vec(ball24, e3)
    w = S.curl_inverse(g)
    s = residual_divcurl(w, None, g)
    assert s["curl"].relative < 0.01 and s["div"].relative < 0.01


def test_gauge_term(ball16):
    g = _vec(ball16, e3)
    h = Field.from_function(ball16, lambda p: p[:, 0] * p[:, 1])
    w0 = S.solve_divcurl(None, g)
    w1 = S.solve_divcurl(None, g, h)
    assert np.allclose((w1 - w0).values[ball16.mask], D.gradient(h).values[ball16.mask])
    with pytest.raises(PreconditionError):
        S.solve_divcurl(None, g, Field.from_function(ball16, lambda p: np.sum(p * p, 1)))


def test_divcurl_misuse(ball16):
    with pytest.raises(ConfigurationError):
        S.solve_divcurl(None, None)
    with pytest.raises(ConfigurationError):
        S.solve_divcurl(None, Field.from_function(ball16, lambda p: p[:, 0]))
    with pytest.raises(PreconditionError):
        S.curl_inverse(_vec(ball16, lambda p: p))
    # the gate can be bypassed
    S.curl_inverse(_vec(ball16, lambda p: p), check=False)


def test_double_curl_inverse(ball24):
    g = _vec(ball24, e3)
    rep = S.SolveReport()
    S.double_curl_inverse(g, report=rep)
    assert rep.residuals["curlcurl"].relative < 0.02


def test_boundary_solver_matches_volume_solver(ball16):
    b = extract_boundary(ball16)
    phi = BoundaryField.from_function(b, e3)
    with pytest.warns(Warning):
        w = S.solve_divcurl_boundary(phi, ball16)
    s = residual_divcurl(w, None, _vec(ball16, e3))
    assert s["curl"].relative < 0.01 and s["div"].relative < 0.01


@pytest.mark.parametrize("data", ["e3", "x1", "both"])
def test_grigorev_exact_on_polynomials(ball16, data):
    g0 = Field.from_function(ball16, lambda p: p[:, 0]) if data in ("x1", "both") else None
    g = _vec(ball16, e3) if data in ("e3", "both") else None
    w = S.grigorev_solution(g0, g)
    s = residual_divcurl(w, g0, g)
    assert s["div"].relative < 1e-10 and s["curl"].relative < 1e-10
    with pytest.raises(PreconditionError):
        S.grigorev_solution(Field.from_function(ball16, lambda p: np.sum(p * p, 1)), None)


def test_conductivity_validation(ball16):
    with pytest.raises(ConfigurationError):
        S.Conductivity.from_function(ball16, lambda p: p[:, 0])
    f = S.Conductivity.from_function(ball16, lambda p: np.exp(p[:, 2] / 2))
    assert f.at(np.zeros((1, 3)))[0] == pytest.approx(1)
    assert np.allclose((f.f_sq.values * f.f_inv_sq.values)[ball16.mask], 1)


def test_vekua_operators_on_f(ball16):
    f = S.Conductivity.from_function(ball16, lambda p: np.exp(p[:, 2] / 2))
    W = f.f.as_quaternion()
    inn = ball16.interior()
    assert np.abs(S.vekua_operator_apply("V", f, W).values[inn]).max() < 1e-10
    # 1/f solves V1 W = 0 (right-hand version)
    Winv = Field.from_function(ball16, lambda p: np.exp(-p[:, 2] / 2)).as_quaternion()
    assert np.abs(S.vekua_operator_apply("V1", f, Winv).values[inn]).max() < 1e-10
    with pytest.raises(ValueError):
        S.vekua_operator_apply("W", f, W)


def test_vekua_complete_f_one_is_monogenic(ball16):
    one = S.Conductivity.constant(ball16)
    W0 = Field.from_function(ball16, lambda p: p[:, 0])
    rep = S.SolveReport()
    W = S.vekua_complete(one, W0, report=rep)
    assert rep.residuals["vekua"].relative < 0.05
    assert np.abs(D.dirac(W).values[ball16.interior()]).max() < 0.02
    with pytest.raises(PreconditionError):
        S.vekua_complete(one, Field.from_function(ball16, lambda p: np.sum(p * p, 1)))


def test_vekua_antiderivative(ball24):
    f = S.Conductivity.from_function(ball24, lambda p: np.exp(p[:, 2] / 2))
    G = Field.from_function(ball24, lambda p: np.stack([np.exp(p[:, 2] / 2), 0 * p[:, 0], 0 * p[:, 0]], 1))
    rep = S.SolveReport()
    S.vekua_antiderivative(f, G, report=rep)
    assert rep.residuals["V"].relative < 0.05 and rep.residuals["Vbar"].relative < 0.05
    bad = Field.from_function(ball24, lambda p: np.stack([np.exp(-p[:, 2] / 2), 0 * p[:, 0], 0 * p[:, 0]], 1))
    with pytest.raises(PreconditionError):
        S.vekua_antiderivative(f, bad)


def test_cg_solves_spd_and_reports_failure(rng):
    A = rng.normal(size=(30, 30))
    A = A @ A.T + 30 * np.eye(30)
    b = rng.normal(size=30)
    x, its, hist = S.cg(lambda v: A @ v, b, 1e-12)
    assert np.allclose(A @ x, b) and hist[-1] <= 1e-12 and its <= 300
    with pytest.raises(SolverError) as exc:
        S.cg(lambda v: A @ v, b, 1e-14, maxiter=2)
    assert len(exc.value.history) == 3
    x0, its0, _ = S.cg(lambda v: A @ v, np.zeros(30))
    assert its0 == 0 and not x0.any()


@pytest.mark.parametrize("n", [16, 24])
def test_conductivity_manufactured(n):
    dom = build_ball_domain(1.0, n)
    f = S.Conductivity.from_function(dom, lambda p: np.sqrt(1 + p[:, 2] ** 2 / 2))
    rep = S.SolveReport()
    u = S.solve_conductivity(f, None, lambda p: p[:, 0] * p[:, 1], jacobi=n == 24, report=rep)
    exact = Field.from_function(dom, lambda p: p[:, 0] * p[:, 1])
    m = dom.mask
    err = np.linalg.norm(u.values[m] - exact.values[m]) / np.linalg.norm(exact.values[m])
    assert err < 1e-2
    assert rep.iterations["cg_final_relative_residual"] <= 1e-10


def test_conductivity_boundary_forms(ball16):
    f = S.Conductivity.constant(ball16)
    u = S.solve_conductivity(f, None, 2.0)
    assert np.allclose(u.values[ball16.mask], 2.0)
    zero = S.solve_conductivity(f, None, None)
    assert not zero.values.any()
    g0 = Field.from_function(ball16, lambda p: np.full(len(p), 6.0))
    u = S.solve_conductivity(f, g0, lambda p: np.ones(len(p)))
    X = ball16.grid.coords[ball16.mask]
    assert np.abs(u.values[ball16.mask][:, 0] - np.sum(X * X, 1)).max() < 0.02
    with pytest.raises(ConfigurationError):
        S.solve_conductivity(f, None, BoundaryField.from_function(extract_boundary(ball16), lambda p: p))
    with pytest.raises(SolverError):
        S.solve_conductivity(f, g0, 1.0, maxiter=2)


def test_hilbert_transform_f_one(ball24):
    one = S.Conductivity.constant(ball24)
    b = extract_boundary(ball24)
    phi = BoundaryField.from_function(b, lambda p: p[:, 0])
    H = S.hilbert_transform(one, phi)
    # W = x1 + x x e1 / 2, sampled 1.5 h inside the sphere
    pts = b.points - 1.5 * ball24.h * b.normals
    exact = np.cross(pts, [1.0, 0, 0]) / 2
    assert np.abs(H.values - exact).max() < 0.02


def test_maxwell_small():
    dom = build_ball_domain(1.0, 16)
    f = S.Conductivity.from_function(dom, lambda p: np.sqrt(1 + p[:, 2] ** 2 / 2))
    rep = S.SolveReport()
    E, H = S.solve_maxwell(f, _vec(dom, e3), report=rep)
    assert all(c.relative < 0.1 for c in rep.residuals.checks.values())
    assert "cg" in rep.iterations
