import warnings

import numpy as np
import pytest

from divcurl import diffops as D
from divcurl.errors import ConfigurationError, SingularPointError
from divcurl.grid import BoundaryField, Field, build_ball_domain, extract_boundary, sphere_quadrature
from divcurl.integral import (
    NearSingularWarning,
    QuadratureConfig,
    cauchy_kernel,
    near_tables,
    newton_potential,
    single_layer,
    t1,
    t1_t3,
    t2,
    t3,
    teodorescu,
)

# integral of 1/|u| over the unit cube centered at the origin
CUBE_CONSTANT = 2.3800772030


def test_cauchy_kernel():
    x = np.array([[1.0, 2.0, 2.0]])
    assert np.allclose(cauchy_kernel(x), -x / (4 * np.pi * 27))
    with pytest.raises(SingularPointError):
        cauchy_kernel(np.zeros((1, 3)))


def test_config_validation():
    for kw in ({"singular_subdivision_depth": 0}, {"eval_subset": 0}, {"near_radius": -1}):
        with pytest.raises(ConfigurationError):
            QuadratureConfig(**kw)


def test_near_table_self_cell_converges_and_symmetries():
    errs = []
    for depth in (1, 2, 3):
        off, dl, de = near_tables(1, depth)
        c = np.all(off == 0, axis=1)
        errs.append(abs(-dl[c][0] * 4 * np.pi - CUBE_CONSTANT))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 0.01 * CUBE_CONSTANT
    off, dl, de = near_tables(2, 2)
    flip = {tuple(o): i for i, o in enumerate(off)}
    j = np.array([flip[tuple(-o)] for o in off])
    assert np.allclose(dl, dl[j]) and np.allclose(de, -de[j])


def test_newton_potential_of_one(ball24):
    L = newton_potential(Field.from_function(ball24, lambda p: np.ones(len(p))))
    r2 = np.sum(ball24.grid.coords**2, axis=-1)
    exact = -(3 - r2) / 6
    m = ball24.mask
    assert np.max(np.abs(L.values[..., 0][m] - exact[m])) < 0.02 * np.max(np.abs(exact[m]))
    lap = D.laplacian(L)
    assert np.allclose(lap.values[ball24.interior()], 1, atol=0.03)


def test_teodorescu_right_inverse_and_parts(ball16):
    w = Field.from_function(ball16, lambda p: np.stack([p[:, 1], 0 * p[:, 0], 0 * p[:, 0]], 1))
    T = teodorescu(w)
    inn = ball16.interior()
    err = np.linalg.norm(D.dirac(T).values[inn][:, 1:] - w.values[inn]) / np.linalg.norm(w.values[inn])
    assert err < 0.01
    a, b = t1_t3(w)
    assert np.array_equal(a.values, t1(w).values) and np.array_equal(b.values, t3(w).values)
    s = Field.from_function(ball16, lambda p: p[:, 0])
    assert np.array_equal(t2(s).values, teodorescu(s).vector_part().values)
    with pytest.raises(ValueError):
        t1(s)
    with pytest.raises(ValueError):
        t2(w)


def test_linearity_and_determinism(ball16, rng):
    a = Field(ball16, rng.normal(size=ball16.grid.shape + (4,)))
    b = Field(ball16, rng.normal(size=ball16.grid.shape + (4,)))
    Ta, Tb, Tab = teodorescu(a), teodorescu(b), teodorescu(a + 2 * b)
    assert np.allclose(Tab.values, Ta.values + 2 * Tb.values, atol=1e-12)
    assert np.array_equal(teodorescu(a).values, Ta.values)


def test_eval_subset_interpolates(ball24):
    w = Field.from_function(ball24, lambda p: np.ones(len(p)))
    full = newton_potential(w)
    coarse = newton_potential(w, QuadratureConfig(eval_subset=2))
    m = ball24.mask
    assert np.max(np.abs(full.values[m] - coarse.values[m])) < 5e-3


def test_single_layer_constant_density(ball16):
    b = extract_boundary(ball16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearSingularWarning)
        M = single_layer(BoundaryField(b, np.ones(len(b))), ball16)
    # for the unit sphere, int 1/(4 pi |y - x|) dS = 1 inside
    assert np.allclose(M.values[ball16.interior()], 1.0, atol=1e-6)
    assert np.allclose(M.values[ball16.mask], 1.0, atol=2e-2)


def test_single_layer_near_surface_warns():
    d = build_ball_domain(1.0, 16)
    b = sphere_quadrature(1.0 - 0.02, n_theta=16, n_phi=32)
    rep = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        single_layer(BoundaryField(b, np.ones(len(b))), d, report=rep)
    assert rep.get("near_singular", 0) > 0
    assert any(issubclass(c.category, NearSingularWarning) for c in caught)
