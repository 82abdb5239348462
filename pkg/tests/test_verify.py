import json

import numpy as np
import pytest

from divcurl.errors import ConfigurationError
from divcurl.grid import Field, build_ball_domain
from divcurl.verify import (
    ResidualSuite,
    convergence_order,
    error_ratio,
    fit_order,
    residual_conductivity,
    residual_divcurl,
    residual_vekua,
)


def test_check_semantics_and_json_keys():
    s = ResidualSuite()
    s.add("a", 1.0, 4.0, tolerance=0.5)
    s.add("b", 1.0, 0.0)
    s.add("c", 3.0, 1.0, "full", 0.5, expect="fail")
    assert s["a"].relative == 0.25 and s["a"].passed
    assert s["b"].relative == 1.0 and s["b"].passed  # zero-scale fallback, no tolerance
    assert s["c"].passed and s.all_pass
    d = json.loads(s.to_json())
    assert set(d["a"]) >= {"residual", "scale", "relative", "region", "pass", "tolerance"}
    s.add("d", 1.0, 1.0, tolerance=0.1)
    assert not s.all_pass and s.failed() == ["d"]
    with pytest.raises(ConfigurationError):
        s.add("e", 1, 1, region="nowhere")
    with pytest.raises(ConfigurationError):
        s.add("e", 1, 1, expect="maybe")


def test_merge_prefix():
    a, b = ResidualSuite(), ResidualSuite()
    b.add("x", 1, 2)
    a.merge(b, "p_")
    assert "p_x" in a


def test_residual_divcurl_examples(ball24):
    w = Field.from_function(ball24, lambda p: p / 3)
    one = Field.from_function(ball24, lambda p: np.ones(len(p)))
    s = residual_divcurl(w, one, None)
    assert s["div"].relative < 0.02 and s["curl"].relative < 0.02
    z = residual_divcurl(Field.zeros(ball24, 3), None, None)
    assert z["div"].relative == 0 and z["curl"].relative == 0
    with pytest.raises(ConfigurationError):
        residual_divcurl(w, Field.from_function(build_ball_domain(1.0, 16), lambda p: p[:, 0]), None)


def test_residual_vekua_positive_and_negative(ball16):
    f = Field.from_function(ball16, lambda p: np.exp(p[:, 2] / 2))
    assert residual_vekua(f, f)["vekua"].relative < 1e-10
    W = Field.from_function(ball16, lambda p: np.tile([1.0, 1.0, 0, 0], (len(p), 1)))
    assert residual_vekua(f, W)["vekua"].relative > 0.1


def test_residual_conductivity_manufactured(ball16):
    f = Field.from_function(ball16, lambda p: np.sqrt(1 + p[:, 2] ** 2 / 2))
    u = Field.from_function(ball16, lambda p: p[:, 0] * p[:, 1])
    assert residual_conductivity(f, u)["conductivity"].relative < 1e-10
    bad = Field.from_function(ball16, lambda p: p[:, 2] ** 2)
    assert residual_conductivity(f, bad)["conductivity"].relative > 0.1


def test_fit_order():
    h = np.array([0.1, 0.05, 0.025])
    order, flag = fit_order(h, 3 * h**2)
    assert order == pytest.approx(2) and flag == ""
    assert fit_order(h, [1e-15, 1e-16, 1e-15]) == (None, "rounding-floor")
    with pytest.raises(ValueError):
        fit_order(h, [1.0, 0.0, 1.0])


def test_convergence_order_experiments():
    est = convergence_order("interp-linear", [8, 12])
    assert est.flag == "rounding-floor"
    est = convergence_order("newton-ball", [16, 32])
    assert error_ratio(est) >= 1.8
    est = convergence_order(lambda n: (1.0 / n, 2.0 / n), [8, 16])
    assert est.order == pytest.approx(1)
    with pytest.raises(ConfigurationError):
        convergence_order("interp-linear", [8])
    with pytest.raises(ConfigurationError):
        convergence_order("nope", [8, 16])


def test_dirac_teodorescu_order():
    est = convergence_order("dirac-teodorescu", [16, 24, 32])
    assert est.order >= 1.0
