from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import beta as beta_fn

from minball.fr_integrals import harmonic_dim
from minball.geometry import DomainError, bilinear, minimal_norm
from minball.sampling import (NonFiniteError, RngState, beta_mass, gauss_jacobi_unit, invariant_integral,
                              mc_integrate, radial_angular_integrate, read_cloud_csv, sample_ball_star,
                              sample_boundary, sample_haar_frames, sample_M, sample_streams,
                              write_cloud_csv)


def test_haar_frames_orthonormal(rng):
    x, y = sample_haar_frames(rng, 4, 500)
    assert np.allclose(np.sum(x * x, 1), 1) and np.allclose(np.sum(y * y, 1), 1)
    assert np.allclose(np.sum(x * y, 1), 0, atol=1e-12)


def test_boundary_points_on_cone(rng):
    z = sample_boundary(rng, 3, 1000)
    assert np.allclose(bilinear(z, z), 0, atol=1e-12)
    assert np.allclose(np.linalg.norm(z, axis=1), 1)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_boundary_moments_match_harmonic_dimensions(n, k):
    # E|xi0 . conj(xi)|^{2k} = 1 / dim(harmonics of degree k in n+1 variables)
    g = np.random.default_rng(100 * n + k)
    xi = sample_boundary(g, n, 200_000)
    xi0 = np.zeros(n + 1, complex)
    xi0[:2] = [1 / math.sqrt(2), 1j / math.sqrt(2)]
    vals = np.abs(xi @ np.conj(xi0)) ** (2 * k)
    est, se = vals.mean(), vals.std() / math.sqrt(len(vals))
    assert abs(est - 1 / harmonic_dim(k, n)) < 4 * se


@pytest.mark.parametrize("n", [2, 3])
def test_sample_M_radial_law(n):
    cl = sample_M(7, n, 1.5, 100_000)
    u = cl.radii_sq
    # t^2 ~ Beta(n-1, s+1)
    mean = (n - 1) / (n - 1 + 2.5)
    assert abs(u.mean() - mean) < 4 * u.std() / math.sqrt(len(u))
    assert np.isclose(cl.weights.sum(), beta_mass(n, 1.5))


def test_beta_mass_gamma_form():
    for n in (2, 3, 4):
        for s in (0, 1, 2.5):
            gam = 0.5 * math.gamma(n - 1) * math.gamma(s + 1) / math.gamma(n + s)
            assert math.isclose(beta_mass(n, s), gam, rel_tol=1e-12)
    with pytest.raises(DomainError):
        beta_mass(2, -1)


def test_ball_star_cloud():
    cl = sample_ball_star(3, 2, 50_000)
    assert np.all(minimal_norm(cl.points) < 1)
    assert math.isclose(cl.total_mass, 1.0, rel_tol=1e-12)
    w = sample_ball_star(3, 2, 50_000, s=1.0)
    # normalized volume: E(1 - N*^2) over B* = 1/(1 + 2n/2) for a norm ball of real dim 2n
    assert abs(w.total_mass - 1 / 3) < 4 * w.mass_stderr


def test_seed_determinism_and_workers():
    a = sample_streams(sample_M, 42, 10_000, workers=1, n=2, s=0.0)
    b = sample_streams(sample_M, 42, 10_000, workers=4, n=2, s=0.0)
    c = sample_streams(sample_M, 43, 10_000, workers=1, n=2, s=0.0)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.points, c.points)
    assert np.array_equal(RngState(5, 1).generator().random(3), RngState(5, 1).generator().random(3))


def test_mc_integrate_rejects_nonfinite():
    cl = sample_M(1, 2, 0.0, 100)
    with pytest.raises(NonFiniteError):
        mc_integrate(lambda z: np.where(np.arange(len(z)) == 5, np.nan, 1.0), cl)


@pytest.mark.parametrize("s", [0.0, 1.0, 2.5])
def test_radial_angular_constant(s):
    est = radial_angular_integrate(lambda w: np.ones(w.shape[:-1]), 3, s, angular_count=100)
    assert math.isclose(est.value, beta_mass(3, s), rel_tol=1e-12)


@given(st.integers(4, 40), st.floats(-0.9, 3), st.floats(0, 3))
def test_gauss_jacobi_moments(count, a, b):
    x, w = gauss_jacobi_unit(count, a, b)
    # exact for x^k, k < 2 count
    for k in (0, 1, 3):
        assert math.isclose(np.sum(w * x**k), beta_fn(b + k + 1, a + 1), rel_tol=1e-9)


def test_invariant_integral_constant_and_radial():
    v = invariant_integral(lambda x, u: np.ones_like(x, dtype=float), 0.7, 3, 0.5)
    assert math.isclose(v, beta_mass(3, 0.5), rel_tol=1e-12)
    v = invariant_integral(lambda x, u: np.full(x.shape, u), 0.7, 2, 0.0)
    assert math.isclose(v, 0.5 * beta_fn(2, 1), rel_tol=1e-12)


def test_cloud_csv_roundtrip(tmp_path):
    cl = sample_ball_star(9, 2, 300, s=1.0)
    path = tmp_path / "cloud.csv"
    write_cloud_csv(cl, path)
    back = read_cloud_csv(path)
    assert back.domain == cl.domain and back.n == cl.n and back.s == cl.s
    assert np.allclose(back.points, cl.points) and np.allclose(back.weights, cl.weights)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_modulus_law_moments(n):
    # E V^k = 1/d_k, and the quadrature rule built on it reproduces the moments
    from scipy.integrate import quad

    from minball.fr_integrals import harmonic_dim
    from minball.sampling import modulus_law

    for k in range(5):
        val, _ = quad(lambda v: v**k * modulus_law(n, v), 0, 1, limit=200)
        assert math.isclose(val, 1 / harmonic_dim(k, n), rel_tol=1e-8)
    R = 0.5
    for k in range(4):
        # int_M |w.conj(xi)|^{2k} dm = (R^{2k}/d_k) (1/2) B(n-1+k, 1)
        got = invariant_integral(lambda x, u: np.abs(x) ** (2 * k), R, n, 0.0)
        want = R ** (2 * k) / harmonic_dim(k, n) * beta_mass(n, 0.0) * (n - 1) / (n - 1 + k)
        assert math.isclose(got, want, rel_tol=1e-10)


def test_invariant_integral_resolves_boundary_peak():
    # |1 - x|^{-c} with c above the critical order: the value at R -> 1 grows like (1-R^2)^{-(c-n-1-s)}
    n, s, c = 2, 0.0, 4.0
    g = lambda x, u: np.abs(1 - x) ** (-c)
    a, b = (invariant_integral(g, R, n, s) for R in (0.999, 0.9999))
    slope = math.log(b / a) / math.log((1 - 0.999**2) / (1 - 0.9999**2))
    assert abs(slope - (c - n - 1 - s)) < 0.01
