import json

import numpy as np
import pytest

from divcurl.errors import ConfigurationError
from divcurl.suites import SUITES, commutation_checks, run_suite


@pytest.mark.parametrize("name,n", [("commutation", None), ("negative-controls", 16), ("monogenic", 16), ("grigorev", 16), ("variational", 16)])
def test_fast_suites_pass(name, n):
    res = run_suite(name, n)
    assert res.all_pass, res.checks.failed()
    # every suite carries at least one negative control that is expected to fail
    assert any(c.expect == "fail" for c in res.checks.checks.values())
    json.dumps(res.to_dict())


def test_controls_are_outside_tolerance():
    res = run_suite("negative-controls", 16)
    for c in res.checks.checks.values():
        if c.expect == "fail":
            assert c.relative > c.tolerance


def test_commutation_other_exponents():
    s = commutation_checks(alphas=(3.0,), seed=5, count=16)
    assert s.all_pass


def test_unknown_suite():
    with pytest.raises(ConfigurationError):
        run_suite("nope")
    assert {"example-ball", "maxwell", "vekua", "conductivity"} <= set(SUITES)


def test_suite_is_deterministic():
    a = run_suite("monogenic", 16).checks.to_dict()
    b = run_suite("monogenic", 16).checks.to_dict()
    assert a == b
    assert np.isfinite([c["relative"] for c in a.values()]).all()
