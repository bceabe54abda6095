"""Edge predictors: cofactors, the normalized kernel, the erfc density
profile, the Faddeeva plasma kernel, and the bulk limit."""

import cmath
import math

import numpy as np
import pytest

from edgedpp.errors import UsageError
from edgedpp.geometry import edge_point_sample
from edgedpp.kernel import ModelParams, rho1_density, truncated_exp_series
from edgedpp.predictors import (
    bulk_prediction,
    cofactor_cn,
    d1_refined_prediction,
    edge_density_prediction,
    edge_density_second_term,
    edge_kernel_prediction,
    normalized_kernel,
)


def test_cofactor_unimodular_and_trivial_cases():
    rng = np.random.default_rng(2)
    for d, tau in [(1, 0.0), (2, 0.5), (3, 0.7)]:
        params = ModelParams(d=d, tau=tau, n=64)
        ep = edge_point_sample(params, 3)
        for _ in range(20):
            u = rng.uniform(-1, 1, d) + 1j * rng.uniform(-1, 1, d)
            c = cofactor_cn(tau, 64, ep.z, u)
            assert abs(abs(c) - 1.0) <= 1e-14
        assert cofactor_cn(tau, 64, ep.z, np.zeros(d)) == 1.0


def test_cofactor_cancels_on_diagonal():
    params = ModelParams(d=2, tau=0.5, n=32)
    ep = edge_point_sample(params, 7)
    u = np.array([0.3 - 0.2j, 0.4j])
    c = cofactor_cn(0.5, 32, ep.z, u)
    assert abs(c * np.conj(c) - 1.0) <= 1e-15


def test_normalized_kernel_routes_agree():
    rng = np.random.default_rng(5)
    for d, tau in [(1, 0.5), (2, 0.0), (2, 0.6), (3, 0.3)]:
        params = ModelParams(d=d, tau=tau, n=128)
        ep = edge_point_sample(params, 11)
        u = rng.uniform(-0.7, 0.7, d) + 1j * rng.uniform(-0.7, 0.7, d)
        v = rng.uniform(-0.7, 0.7, d) + 1j * rng.uniform(-0.7, 0.7, d)
        samp = normalized_kernel(params, ep, u, v)
        assert samp.route_gap <= 1e-9


def test_normalized_kernel_diagonal_limits():
    for d, tau in [(1, 0.0), (2, 0.5)]:
        gaps = []
        for n in (64, 256, 1024):
            params = ModelParams(d=d, tau=tau, n=n)
            ep = edge_point_sample(params, 13)
            samp = normalized_kernel(params, ep, np.zeros(d), np.zeros(d))
            assert abs(samp.L.imag) <= 1e-9
            gaps.append(abs(samp.L - 0.5))
        assert gaps[-1] < gaps[0]
        assert gaps[-1] <= 0.05


def test_normalized_kernel_hermitian_symmetry():
    params = ModelParams(d=2, tau=0.4, n=64)
    ep = edge_point_sample(params, 17)
    u = np.array([0.2 + 0.3j, -0.1j])
    v = np.array([-0.4j, 0.15 + 0.2j])
    a = normalized_kernel(params, ep, u, v).L
    b = normalized_kernel(params, ep, v, u).L
    assert abs(a - np.conj(b)) <= 1e-10 * max(abs(a), 1e-6)


def test_normalized_kernel_reduces_to_ginibre_edge_law():
    # d = 1, tau = 0: the normalized kernel equals the ratio of the
    # truncated exponential to the full one, computed independently
    n = 400
    params = ModelParams(d=1, tau=0.0, n=n)
    ep = edge_point_sample(params, 19)
    u = np.array([0.3 + 0.2j])
    v = np.array([-0.25 + 0.1j])
    samp = normalized_kernel(params, ep, u, v)
    zeta = complex((ep.z[0] + u[0] / math.sqrt(n)) * np.conj(ep.z[0] + v[0] / math.sqrt(n)))
    series = truncated_exp_series(n * zeta, n)
    ref = series.value * cmath.exp(-n * zeta)
    assert abs(samp.L - ref) <= 1e-10 * max(abs(ref), 1e-6)


def test_edge_kernel_prediction_values():
    params = ModelParams(d=2, tau=0.3, n=16)
    ep = edge_point_sample(params, 23)
    assert abs(edge_kernel_prediction(ep, np.zeros(2), np.zeros(2)) - 0.5) <= 1e-15
    lam = 0.8
    val = edge_kernel_prediction(ep, lam * ep.normal, lam * ep.normal)
    from edgedpp.special import erfc_complex

    assert abs(val - 0.5 * erfc_complex(math.sqrt(2) * lam)) <= 1e-13
    big = edge_kernel_prediction(ep, 6.0 * ep.normal, 6.0 * ep.normal)
    assert abs(big) <= 1e-14
    neg = edge_kernel_prediction(ep, -6.0 * ep.normal, -6.0 * ep.normal)
    assert abs(neg - 1.0) <= 1e-14


def test_edge_density_prediction_origin_and_tails():
    params = ModelParams(d=2, tau=0.0, n=1024)
    ep = edge_point_sample(params, 29)
    want = 2.0 / (2.0 * math.pi**2) - 1.0 * 2.0 / (
        3.0 * math.pi**2 * math.sqrt(2.0 * math.pi) * math.sqrt(1024)
    )
    assert abs(edge_density_prediction(params, ep, 0.0, 1024) - want) <= 1e-14
    assert edge_density_prediction(params, ep, 8.0, 1024) <= 1e-20


def test_edge_density_prediction_matches_exact_kernel():
    for d, tau in [(1, 0.0), (1, 0.5), (2, 0.5)]:
        n = 1024
        params = ModelParams(d=d, tau=tau, n=n)
        ep = edge_point_sample(params, 31)
        rn = math.sqrt(n)
        for lam in (-0.5, 0.0, 0.75):
            val = n**d * rho1_density(params, rn * ep.z + lam * ep.normal)
            pred = edge_density_prediction(params, ep, lam, n)
            second = edge_density_second_term(params, ep, lam, n)
            assert abs(val - pred) <= 0.35 * max(abs(second), 1e-4)


def test_bulk_prediction_values():
    assert abs(bulk_prediction(2, np.zeros(2), np.zeros(2)) - math.pi**-2) <= 1e-16
    u = np.array([0.4 + 0.2j, -0.3j])
    assert abs(bulk_prediction(2, u, u) - math.pi**-2) <= 1e-16
    rng = np.random.default_rng(37)
    for _ in range(20):
        a = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        b = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        assert abs(bulk_prediction(2, a, b)) <= math.pi**-2 + 1e-15


def test_d1_refined_prediction_origin_value():
    tau, n = 0.5, 4096
    params = ModelParams(d=1, tau=tau, n=n)
    ep = edge_point_sample(params, 41)
    got = d1_refined_prediction(ep, 0.0, 0.0, n)
    want = 1.0 / (2.0 * math.pi) - ep.kappa / (3.0 * math.sqrt(2.0 * math.pi**3) * math.sqrt(n))
    assert abs(got - want) <= 1e-15


def test_d1_refined_symmetry():
    params = ModelParams(d=1, tau=0.4, n=256)
    ep = edge_point_sample(params, 43)
    u, v = 0.3 + 0.1j, -0.2j
    a = d1_refined_prediction(ep, u, v, 256)
    b = d1_refined_prediction(ep, v, u, 256)
    assert abs(a - np.conj(b)) <= 1e-14


def test_d1_refined_diagonal_matches_density_profile():
    # at u = v = lambda the kernel-level prediction carries the same two
    # terms as the density profile (d = 1, where n rho_1 = K exactly)
    tau, n = 0.45, 2048
    params = ModelParams(d=1, tau=tau, n=n)
    ep = edge_point_sample(params, 47)
    rng = np.random.default_rng(48)
    for lam in rng.uniform(-1.2, 1.2, 10):
        kernel_pred = d1_refined_prediction(ep, lam, lam, n).real
        dens_pred = edge_density_prediction(params, ep, float(lam), n)
        assert abs(kernel_pred - dens_pred) <= 1e-13


def test_edge_kernel_residual_uniform_over_boundary():
    # dense sweep of the elliptic angle at fixed n: the sqrt(n)-scaled
    # residual stays bounded along the whole boundary arc
    from edgedpp.geometry import edge_point

    tau, n = 0.5, 256
    params = ModelParams(d=1, tau=tau, n=n)
    u = np.array([0.4 + 0.2j])
    v = np.array([-0.3 + 0.1j])
    worst = 0.0
    for eta in np.linspace(0.02, math.pi / 2 - 0.02, 50):
        ep = edge_point(params, float(eta), np.array([1.0]), np.array([1.0]))
        samp = normalized_kernel(params, ep, u, v)
        pred = edge_kernel_prediction(ep, u, v)
        worst = max(worst, abs(samp.L - pred) * math.sqrt(n))
    assert worst <= 2.0


def test_kernel_tau_to_zero_continuity():
    # the tau = 0 kernel is the tau -> 0 limit of the Hermite form
    from edgedpp.kernel import kernel_exact, kernel_tau0_closed

    rng = np.random.default_rng(59)
    z = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
    w = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
    tiny = kernel_exact(ModelParams(d=2, tau=1e-8, n=6), z, w)
    zero = kernel_tau0_closed(ModelParams(d=2, tau=0.0, n=6), z, w)
    assert abs(tiny - zero) <= 1e-6 * abs(zero)


def test_d1_refined_requires_d1():
    params = ModelParams(d=2, tau=0.4, n=16)
    ep = edge_point_sample(params, 53)
    with pytest.raises(UsageError):
        d1_refined_prediction(ep, 0.1, 0.1, 16)
