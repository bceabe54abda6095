"""Exact kernel evaluation: weights, weighted Hermite sequences, the
convolution evaluator against brute-force enumeration, densities, and
determinantal correlations."""

import itertools
import math

import numpy as np
import pytest

from edgedpp.errors import DomainError, UsageError
from edgedpp.kernel import (
    ModelParams,
    correlation_k,
    kernel_exact,
    kernel_exact_log,
    kernel_tau0_closed,
    log_weight_omega,
    phi_sequence,
    rho1_density,
    weight_omega,
)

from oracles import hermite_phi10_oracle


def kernel_brute_force(params: ModelParams, z, w) -> complex:
    """Naive multi-index enumeration with plain Hermite recurrences."""
    tau, n, d = params.tau, params.n, params.d

    def phi_direct(x, j):
        if tau == 0.0:
            return x**j / math.sqrt(math.factorial(j))
        c = math.sqrt((1 - tau**2) / (2 * tau))
        h = [1.0 + 0j, 2 * c * x]
        for k in range(1, j + 1):
            h.append(2 * c * x * h[k] - 2 * k * h[k - 1])
        return math.sqrt((tau / 2) ** j / math.factorial(j)) * h[j]

    total = 0j
    for jj in itertools.product(range(n), repeat=d):
        if sum(jj) >= n:
            continue
        term = 1.0 + 0j
        for k in range(d):
            term *= phi_direct(z[k], jj[k]) * np.conj(phi_direct(w[k], jj[k]))
        total += term
    pref = (math.sqrt(1 - tau**2) / math.pi) ** d
    logw = 0.5 * sum(log_weight_omega(z[k], tau) + log_weight_omega(w[k], tau) for k in range(d))
    return pref * math.exp(logw) * total


def test_model_params_validation():
    with pytest.raises(DomainError):
        ModelParams(d=0, tau=0.5, n=4)
    with pytest.raises(DomainError):
        ModelParams(d=1, tau=1.0, n=4)
    with pytest.raises(DomainError):
        ModelParams(d=1, tau=-0.1, n=4)
    with pytest.raises(DomainError):
        ModelParams(d=1, tau=0.5, n=0)
    assert ModelParams(d=2, tau=0.0, n=8).point_count == math.comb(9, 2)


def test_weight_omega_values():
    assert weight_omega(0.0, 0.3) == 1.0
    assert abs(weight_omega(1.0, 0.0) - math.exp(-1.0)) <= 1e-16
    assert abs(weight_omega(1j, 0.5) - math.exp(-1.5)) <= 1e-16
    with pytest.raises(DomainError):
        weight_omega(1.0, 1.0)


def test_phi_sequence_low_degrees():
    tau = 0.4
    for x in (0.3 + 0.2j, -1.5j, 2.0):
        seq = phi_sequence(x, tau, 3)
        assert abs(seq[0].value - 1.0) <= 1e-15
        assert abs(seq[1].value - math.sqrt(1 - tau**2) * x) <= 1e-14 * max(1.0, abs(x))


def test_phi_sequence_degree_ten_against_dd_oracle():
    x, tau = 2.0 + 1.0j, 0.3
    seq = phi_sequence(x, tau, 11)
    ref = hermite_phi10_oracle(x, tau)
    assert abs(seq[10].value - ref) <= 1e-11 * abs(ref)


def test_phi_sequence_rejects_tau_zero():
    with pytest.raises(UsageError):
        phi_sequence(1.0, 0.0, 4)


def test_kernel_zero_index_only():
    for d in (1, 2, 3):
        params = ModelParams(d=d, tau=0.0, n=5)
        z = np.zeros(d, dtype=complex)
        assert abs(kernel_exact(params, z, z) - math.pi ** (-d)) <= 1e-14


def test_kernel_two_term_direct_sum():
    # K_2(1, 1) = pi^{-1} e^{-(1+1)/2} (1 + 1) = 2 e^{-1} / pi
    params = ModelParams(d=1, tau=0.0, n=2)
    val = kernel_exact(params, [1.0], [1.0])
    assert abs(val - 2.0 * math.exp(-1.0) / math.pi) <= 1e-15


def test_kernel_matches_brute_force_enumeration():
    rng = np.random.default_rng(3)
    for d in (1, 2, 3):
        for tau in (0.0, 0.5):
            for n in (2, 4, 8):
                params = ModelParams(d=d, tau=tau, n=n)
                z = rng.uniform(-1, 1, d) + 1j * rng.uniform(-1, 1, d)
                w = rng.uniform(-1, 1, d) + 1j * rng.uniform(-1, 1, d)
                got = kernel_exact(params, z, w)
                ref = kernel_brute_force(params, z, w)
                assert abs(got - ref) <= 1e-12 * abs(ref)


def test_kernel_matches_brute_force_enumeration_d3_n16():
    # one larger multi-index enumeration (816 indices) as a heavier oracle
    rng = np.random.default_rng(77)
    params = ModelParams(d=3, tau=0.6, n=16)
    z = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
    w = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
    got = kernel_exact(params, z, w)
    ref = kernel_brute_force(params, z, w)
    assert abs(got - ref) <= 1e-12 * abs(ref)


def test_tau0_closed_form_j_zero_case():
    params = ModelParams(d=2, tau=0.0, n=6)
    z = np.array([1.0, 1.0j])
    w = np.array([1.0j, 1.0])  # z.w = 1 conj(i) + i conj(1) = -i + i = 0
    zw = np.sum(z * np.conj(w))
    assert abs(zw) < 1e-15
    expect = math.pi ** (-2) * math.exp(-0.5 * (2.0 + 2.0))
    assert abs(kernel_tau0_closed(params, z, w) - expect) <= 1e-15


def test_tau0_closed_matches_exact():
    rng = np.random.default_rng(9)
    for d in (1, 2, 3):
        params = ModelParams(d=d, tau=0.0, n=16)
        for _ in range(50):
            z = rng.uniform(-1.5, 1.5, d) + 1j * rng.uniform(-1.5, 1.5, d)
            w = rng.uniform(-1.5, 1.5, d) + 1j * rng.uniform(-1.5, 1.5, d)
            a = kernel_exact(params, z, w)
            b = kernel_tau0_closed(params, z, w)
            assert abs(a - b) <= 1e-12 * abs(b)


def test_tau0_closed_is_ginibre_at_d1():
    params = ModelParams(d=1, tau=0.0, n=7)
    z, w = 0.8 + 0.3j, -0.2 + 0.5j
    direct = (
        math.exp(-0.5 * (abs(z) ** 2 + abs(w) ** 2))
        / math.pi
        * sum((z * np.conj(w)) ** j / math.factorial(j) for j in range(7))
    )
    assert abs(kernel_tau0_closed(params, [z], [w]) - direct) <= 1e-15 * abs(direct)


def test_tau0_closed_rejects_positive_tau():
    with pytest.raises(UsageError):
        kernel_tau0_closed(ModelParams(d=1, tau=0.2, n=4), [0.0], [0.0])


def test_rho1_integrates_to_one_by_monte_carlo():
    # Importance-sampled integral of rho1 over C at d = 1, n = 4; the
    # spot checks below confirm rho1_density agrees with the vectorized
    # diagonal used for speed.
    params = ModelParams(d=1, tau=0.0, n=4)
    rng = np.random.default_rng(12)
    m = 200_000
    sigma = math.sqrt(2.5)  # proposal wide enough for the n=4 support
    pts = rng.normal(0, sigma, m) + 1j * rng.normal(0, sigma, m)
    q = np.exp(-np.abs(pts) ** 2 / (2 * sigma**2)) / (2 * math.pi * sigma**2)
    r2 = np.abs(pts) ** 2
    diag = np.exp(-r2) / math.pi * sum(r2**j / math.factorial(j) for j in range(4))
    for i in range(5):
        assert abs(rho1_density(params, [pts[i]]) - diag[i] / 4.0) <= 1e-14
    est = float(np.mean(diag / 4.0 / q))
    assert abs(est - 1.0) <= 5e-3


def test_rho1_point_values():
    for n in (1, 4, 16):
        params = ModelParams(d=1, tau=0.0, n=n)
        assert abs(n * rho1_density(params, [0.0]) - 1.0 / math.pi) <= 1e-14


def test_rho1_nonnegative_on_random_points():
    rng = np.random.default_rng(21)
    params = ModelParams(d=2, tau=0.3, n=6)
    for _ in range(1000):
        z = rng.uniform(-3, 3, 2) + 1j * rng.uniform(-3, 3, 2)
        assert rho1_density(params, z) >= 0.0


def test_correlation_identical_points_vanishes():
    params = ModelParams(d=2, tau=0.4, n=5)
    z = np.array([0.3 + 0.1j, -0.2j])
    val = correlation_k(params, [z, z])
    assert abs(val) <= 1e-12


def test_correlation_pair_closed_form_n2():
    params = ModelParams(d=2, tau=0.0, n=2)
    rng = np.random.default_rng(31)
    for _ in range(20):
        z = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        w = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        got = correlation_k(params, [z, w])
        zw = complex(np.sum(z * np.conj(w)))
        expect = (
            (np.sum(np.abs(z - w) ** 2) + np.sum(np.abs(z) ** 2) * np.sum(np.abs(w) ** 2) - abs(zw) ** 2)
            * math.exp(-np.sum(np.abs(z) ** 2) - np.sum(np.abs(w) ** 2))
            / math.pi**4
        )
        assert abs(got - expect) <= 1e-12 * max(abs(expect), 1e-6)


def test_correlation_negative_association():
    params = ModelParams(d=1, tau=0.5, n=8)
    rng = np.random.default_rng(41)
    for _ in range(25):
        z = rng.uniform(-1.5, 1.5, 1) + 1j * rng.uniform(-1.5, 1.5, 1)
        w = rng.uniform(-1.5, 1.5, 1) + 1j * rng.uniform(-1.5, 1.5, 1)
        rho2 = correlation_k(params, [z, w])
        bound = kernel_exact(params, z, z).real * kernel_exact(params, w, w).real
        assert rho2 <= bound * (1 + 1e-12)


def test_correlation_rejects_large_k():
    params = ModelParams(d=1, tau=0.0, n=2)
    pts = [[0.1 * k] for k in range(7)]
    with pytest.raises(UsageError):
        correlation_k(params, pts)


def test_correlation_k_six_points():
    params = ModelParams(d=1, tau=0.3, n=12)
    rng = np.random.default_rng(71)
    pts = [rng.uniform(-1, 1, 1) + 1j * rng.uniform(-1, 1, 1) for _ in range(6)]
    val = correlation_k(params, pts)
    assert math.isfinite(val)
    assert val >= -1e-10


def test_hermitian_symmetry():
    rng = np.random.default_rng(51)
    for d, tau, n in [(1, 0.0, 8), (2, 0.3, 6), (3, 0.7, 4)]:
        params = ModelParams(d=d, tau=tau, n=n)
        for _ in range(10):
            z = rng.uniform(-1.5, 1.5, d) + 1j * rng.uniform(-1.5, 1.5, d)
            w = rng.uniform(-1.5, 1.5, d) + 1j * rng.uniform(-1.5, 1.5, d)
            a = kernel_exact(params, z, w)
            b = np.conj(kernel_exact(params, w, z))
            assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300)


def test_positive_semidefiniteness():
    rng = np.random.default_rng(61)
    params = ModelParams(d=2, tau=0.4, n=5)
    for trial in range(5):
        pts = [rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2) for _ in range(4)]
        mat = np.array([[kernel_exact(params, a, b) for b in pts] for a in pts])
        eig = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
        assert eig.min() >= -1e-10 * np.trace(mat).real


def test_orthonormality_by_gauss_quadrature():
    # 2D Gauss-Hermite grid adapted to the anisotropic weight, j, k <= 6
    for tau in (0.3, 0.7):
        xg, wx = np.polynomial.hermite.hermgauss(60)
        sx = 1.0 / math.sqrt(1.0 - tau)
        sy = 1.0 / math.sqrt(1.0 + tau)
        X, Y = np.meshgrid(xg * sx, xg * sy, indexing="ij")
        W = np.outer(wx, wx) * sx * sy
        Z = X + 1j * Y
        # phi_j on the grid by the normalized recurrence
        c = math.sqrt(1.0 - tau * tau)
        phis = [np.ones_like(Z), c * Z]
        for j in range(1, 7):
            phis.append((c * Z * phis[j] - tau * math.sqrt(j) * phis[j - 1]) / math.sqrt(j + 1))
        # weight ratio: omega(z) e^{x^2/sx^2 + y^2/sy^2} = e^{0} by construction
        pref = math.sqrt(1.0 - tau * tau) / math.pi
        for j in range(7):
            for k in range(7):
                val = pref * np.sum(W * phis[j] * np.conj(phis[k]))
                target = 1.0 if j == k else 0.0
                assert abs(val - target) <= 1e-6


def test_dimension_mismatch_rejected():
    params = ModelParams(d=2, tau=0.0, n=3)
    with pytest.raises(UsageError):
        kernel_exact(params, [1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        kernel_exact(params, [1.0, float("nan")], [1.0, 2.0])


def test_kernel_log_form_tracks_value():
    params = ModelParams(d=1, tau=0.5, n=64)
    z = np.array([8.0 + 1.0j])  # |z| ~ sqrt(n), weights far below double range
    k = kernel_exact_log(params, z, z)
    assert np.isfinite(k.log_mag)
    assert abs(abs(k.phase) - 1.0) <= 1e-12
