import numpy as np
import pytest

from divcurl import fields as F
from divcurl.errors import ConfigurationError

STEP = 1e-4


def _jac(func, pts):
    cols = []
    for a in range(3):
        e = np.zeros(3)
        e[a] = STEP
        cols.append((func(pts + e) - func(pts - e)) / (2 * STEP))
    return np.stack(cols, axis=-1)  # [n, component, axis]


def _div(func, pts):
    J = _jac(func, pts)
    return J[:, 0, 0] + J[:, 1, 1] + J[:, 2, 2]


def _curl(func, pts):
    J = _jac(func, pts)
    return np.stack([J[:, 2, 1] - J[:, 1, 2], J[:, 0, 2] - J[:, 2, 0], J[:, 1, 0] - J[:, 0, 1]], 1)


def _away_from_axis(rng, count, tube):
    pts = rng.uniform(-0.9, 0.9, (4 * count, 3))
    r = np.linalg.norm(pts, axis=1)
    keep = (r > 0.3) & (r < 0.9) & (np.hypot(pts[:, 0], pts[:, 1]) > tube)
    return pts[keep][:count]


@pytest.mark.parametrize("a", [(0.0, 0.0, -0.5), (0.3, -0.2, 0.1)])
def test_closed_form_is_a_curl_potential(a, rng):
    a = np.asarray(a)
    u = -a / np.linalg.norm(a)
    pts = rng.uniform(-0.9, 0.9, (400, 3))
    r = np.linalg.norm(pts, axis=1)
    # stay away from the singular ray along u
    along = pts @ u
    perp = np.linalg.norm(pts - along[:, None] * u, axis=1)
    pts = pts[(r > 0.3) & ((along < 0) | (perp > 0.2))][:100]
    w = lambda p: F.coulomb_closed_form(p, a)  # noqa: E731
    assert np.allclose(_curl(w, pts), F.coulomb(pts), rtol=1e-5, atol=1e-5)
    assert np.abs(_div(w, pts)).max() < 1e-4


def test_regularized_datum_matches_and_is_solenoidal(rng):
    pts = _away_from_axis(rng, 100, 0.1)
    assert np.allclose(F.string_regularized_coulomb(pts), F.coulomb(pts))
    anywhere = rng.uniform(-0.9, 0.9, (300, 3))
    scale = np.abs(_jac(F.string_regularized_coulomb, anywhere)).max()
    assert np.abs(_div(F.string_regularized_coulomb, anywhere)).max() < 1e-6 * scale
    assert np.allclose(F.string_regularized_coulomb(np.zeros((1, 3))), 0)


def test_coulomb_cutoff():
    p = np.array([[0.1, 0, 0], [0.5, 0, 0]])
    v = F.coulomb(p)
    assert np.allclose(v[0], 0) and np.allclose(v[1], [4, 0, 0])


def test_builtins(ball16):
    for name, (comps, _) in F.BUILTINS.items():
        assert F.builtin_field(name, ball16).components == comps
    assert F.builtin_field("zero", ball16, 3).components == 3
    with pytest.raises(ConfigurationError):
        F.builtin_field("one", ball16, 3)
    with pytest.raises(ConfigurationError):
        F.builtin_field("nope", ball16)


def test_example_region(ball16):
    reg = F.example_region(ball16)
    X = ball16.grid.coords[reg]
    r = np.linalg.norm(X, axis=1)
    assert reg.any() and (r >= 0.3).all() and (r <= 0.9).all()
    assert not ((X[:, 2] > 0) & (np.hypot(X[:, 0], X[:, 1]) < 0.15)).any()
