from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import beta as beta_fn

from minball.fr_integrals import (BOUNDED, LOG, POWER, FRQuery, classify_asymptotics, cone_probe, estimate_I,
                                  estimate_J, harmonic_dim, expected_class, mc_estimator, series_estimator,
                                  series_I, series_J)
from minball.geometry import DomainError
from minball.sampling import invariant_integral


@pytest.mark.parametrize("k, n, want", [(0, 2, 1), (1, 2, 3), (2, 2, 5), (1, 3, 4), (2, 3, 9), (3, 4, 30)])
def test_harmonic_dim(k, n, want):
    # degree-k harmonics in n+1 real variables
    assert harmonic_dim(k, n) == want


@pytest.mark.parametrize("c", [-0.5, 0.0, 1.5])
@pytest.mark.parametrize("s", [0.0, 1.0])
def test_values_at_origin(c, s):
    assert series_I(0.0, FRQuery(c)) == 1.0
    assert math.isclose(series_J(0.0, FRQuery(c, s, n=3)), 0.5 * beta_fn(2, s + 1), rel_tol=1e-12)
    assert series_I(0.0, FRQuery(c, d=1)) == 0.0


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("c, s, d", [(-0.5, 0.0, 0), (0.0, 1.0, 0), (1.0, 0.5, 1), (0.5, 0.0, 2)])
@pytest.mark.parametrize("r", [0.3, 0.8])
def test_series_J_matches_deterministic_quadrature(n, c, s, d, r):
    q = FRQuery(c, s, d, n=n)
    expo = n + c + s + 1
    g = lambda x, u: np.abs(x) ** (2 * d) / np.abs(1 - x) ** expo
    got = invariant_integral(g, r, n, s)
    assert math.isclose(series_J(r, q), got, rel_tol=2e-5)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("c, d", [(-0.5, 0), (0.0, 1), (1.0, 0)])
@pytest.mark.parametrize("r", [0.5, 0.9])
def test_series_I_matches_monte_carlo(n, c, d, r):
    q = FRQuery(c, d=d, n=n)
    est = estimate_I(cone_probe(r, n), q, np.random.default_rng(7), 200_000)
    assert abs(est.value - series_I(r, q)) < 4 * est.stderr


@pytest.mark.parametrize("r", [0.5, 0.9])
def test_series_J_matches_monte_carlo(r):
    q = FRQuery(0.5, 1.0, n=2)
    est = estimate_J(cone_probe(r, 2), q, 64, 50_000, np.random.default_rng(8))
    assert abs(est.value - series_J(r, q)) < 4 * est.stderr


def test_rotational_invariance():
    q = FRQuery(0.5, n=3)
    g = np.random.default_rng(9)
    o, _ = np.linalg.qr(g.normal(size=(4, 4)))
    z = cone_probe(0.8, 3)
    a = estimate_I(z, q, np.random.default_rng(1), 200_000)
    b = estimate_I(o @ z, q, np.random.default_rng(2), 200_000)
    assert abs(a.value - b.value) < 4 * math.hypot(a.stderr, b.stderr)


@given(st.floats(-0.9, 2.0), st.floats(-0.5, 2.0), st.integers(0, 2))
def test_series_increasing_in_radius(c, s, d):
    q = FRQuery(c, s, d)
    rs = [0.1, 0.4, 0.7, 0.95]
    vi = [series_I(r, q) for r in rs]
    vj = [series_J(r, q) for r in rs]
    assert all(b >= a for a, b in zip(vi, vi[1:]))
    assert all(b >= a for a, b in zip(vj, vj[1:]))


@pytest.mark.parametrize("c, want", [(-1.0, BOUNDED), (-0.25, BOUNDED), (0.0, LOG), (0.5, POWER), (2.0, POWER)])
def test_expected_class(c, want):
    assert expected_class(c) == want


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("which", ["I", "J"])
@pytest.mark.parametrize("c", [-0.5, 0.0, 0.5, 1.5])
@pytest.mark.parametrize("d", [0, 1])
def test_classification_matches_expected(n, which, c, d):
    q = FRQuery(c, 0.5, d, n=n)
    res = classify_asymptotics(q, series_estimator(q, which))
    assert res.label == expected_class(c)
    if res.label == POWER:
        assert res.exponent == c
        assert abs(res.fitted_exponent - c) < 0.1
    assert len(res.rows) == len(q.radii)


def test_classification_with_monte_carlo_on_easy_cell():
    q = FRQuery(1.0, radii=(0.5, 0.9, 0.99))
    res = classify_asymptotics(q, mc_estimator(q, "I", 3, 200_000))
    assert res.label == POWER


@pytest.mark.parametrize("kw", [dict(s=-1.0), dict(d=-1), dict(radii=(0.9, 0.5)), dict(radii=(0.5, 1.0)),
                                dict(pairing="other")])
def test_query_validation(kw):
    with pytest.raises(DomainError):
        FRQuery(0.5, **kw)


def test_series_rejects_bilinear_pairing():
    with pytest.raises(DomainError):
        series_I(0.5, FRQuery(0.5, d=1, pairing="bilinear"))
    with pytest.raises(DomainError):
        classify_asymptotics(FRQuery(0.5, radii=(0.5, 0.9)), series_estimator(FRQuery(0.5)))
