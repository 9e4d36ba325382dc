import math

import numpy as np
import pytest
from scipy import integrate

import fcurve


def test_representer_closed_form():
    s = fcurve.Space()
    h1 = fcurve.h_curve(s, 1.0)
    assert h1(1.0) == pytest.approx(2.0 - math.exp(-1.0), rel=1e-6)
    f = fcurve.Curve.from_function(s, lambda x: math.cos(x) + 2.0)
    assert fcurve.inner_product(h1, f) == pytest.approx(f(1.0), abs=1e-10)


def test_shift_and_nodes():
    s = fcurve.Space(alpha=1.0, x_max=2.0, dx=0.01)
    f = fcurve.Curve.from_nodes(s, list(np.linspace(0.0, 1.0, s.cells + 1)))
    g = fcurve.shift(f, 0.5)
    assert g(0.0) == pytest.approx(f(0.5))
    assert len(s.nodes()) == s.cells + 1


def test_exp_kernel_correlation_against_scipy():
    def cov(x, y):
        lo, hi = min(x, y), max(x, y)
        return integrate.quad(lambda v: math.exp(-0.5 * (hi - v) - v), 0.0, lo, epsabs=1e-14)[0]

    rho = cov(1.0, 2.0) / math.sqrt(cov(1.0, 1.0) * cov(2.0, 2.0))
    assert fcurve.exp_kernel_correlation(1.0, 0.5, 1.0, 2.0) == pytest.approx(rho, abs=1e-12)


def test_simulate_is_reproducible():
    t1, a = fcurve.simulate(paths=2, seed=3)
    t2, b = fcurve.simulate(paths=2, seed=3)
    assert a.shape == (2, len(t1), 1251)
    assert np.array_equal(a, b)
    assert np.array_equal(t1, t2)


def test_errors_are_typed():
    with pytest.raises(fcurve.ConfigError):
        fcurve.simulate("builtin:missing")
    with pytest.raises(fcurve.ConfigError):
        fcurve.exp_kernel_correlation(1.0, 2.0, 1.0, 2.0)
    s = fcurve.Space()
    with pytest.raises(fcurve.ConfigError):
        fcurve.schur_bound(s, "nothing(a=1)")


def test_acceptance_criterion_from_python():
    r = fcurve.run_criterion(9)
    assert r["passed"]
    assert r["metrics"]["closed_form_vs_quadrature"] < 1e-6
