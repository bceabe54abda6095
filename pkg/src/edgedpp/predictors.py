"""Edge predictors: the erfc density profile, the higher-dimensional
Faddeeva plasma kernel, the bulk limit, and the refined d = 1 expansion.

The central normalized object is

    L = c_n(z, u) conj(c_n(z, v)) pi^d exp((|u|^2+|v|^2)/2 - u.v)
        K_n(sqrt(n) z + u, sqrt(n) z + v)

for a boundary point z, with unimodular gauge cofactors c_n that cancel
in every determinant.  L equals the pole-normalized contour value N
exactly (not just asymptotically), which gives two independent
evaluation routes; normalized_kernel computes both and records their
discrepancy.  As n grows,

    L = 1/2 erfc((u.n + n.v)/sqrt 2) + O(1/sqrt n)

with n the outward unit normal, and on the diagonal the density profile

    n^d rho_1(sqrt(n) z + lambda n)
      = d!/(2 pi^d) erfc(sqrt 2 lambda)
        + (kappa/sqrt n) d!/(3 pi^d sqrt(2 pi))
          (lambda^2 - 1 - 3 tau^2 (d-1)/((1-tau^2) kappa^{2/3})) e^{-2 lambda^2}
        + O(1/n).

The (d-1) coefficient and the overall 1/sqrt(n) normalization were fixed
against the exact kernel (see tests); they differ from some printed forms
of these expansions by a factor 2 and by the sign/scale of the (d-1)
term.  The cofactor below is likewise the one that makes the two routes
agree to rounding:

    c_n(z, u) = exp(i tau/2 Im(u^2) - i sqrt(n) Im(u . (z - tau conj z))).

The expansions stop at the 1/sqrt(n) order; the O(1/n) term of the d = 1
density profile involves arclength derivatives of kappa and is out of
scope here.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .contour import DEFAULT_CONTOUR, ContourConfig, integral_I_tau, integral_I_zero
from .errors import ConsistencyError, DomainError, UsageError
from .geometry import EdgePoint, saddle_frame, zpm_map
from .kernel import ModelParams, as_point, kernel_exact_log
from .special import LogMagnitudePhase, erfc_complex, erfcx_complex

__all__ = [
    "NormalizedKernelSample",
    "dot_product",
    "gaussian_normalizer_log",
    "cofactor_cn",
    "normalized_kernel",
    "edge_kernel_prediction",
    "edge_density_prediction",
    "bulk_prediction",
    "d1_refined_prediction",
]

from dataclasses import dataclass


@dataclass(frozen=True)
class NormalizedKernelSample:
    """Cofactor- and Gaussian-normalized kernel value with route diagnostics."""

    L: complex
    z: EdgePoint
    u: np.ndarray
    v: np.ndarray
    n: int
    route_gap: float


def dot_product(x: np.ndarray, y: np.ndarray) -> complex:
    """Dot product x . y = sum_k x_k conj(y_k)."""
    return complex(np.sum(np.asarray(x) * np.conj(np.asarray(y))))


def _vec_square(x: np.ndarray) -> complex:
    """Analytic square sum x^2 = sum_k x_k^2 (no conjugation)."""
    return complex(np.sum(np.asarray(x) ** 2))


def cofactor_cn(tau: float, n: int, z, u) -> complex:
    """Unimodular gauge cofactor c_n(z, u).

    exp(i tau/2 Im(u^2)) exp(-i sqrt(n) Im(u . (z - tau conj z))); identically
    the phase that cancels the oscillating part of the weight/phase product,
    so that the normalized kernel L is route independent.  At tau = 0 it
    reduces to exp(-i sqrt(n) Im(u . z)), the usual Ginibre cocycle.
    """
    if not (0.0 <= tau < 1.0):
        raise DomainError(f"tau must lie in [0, 1), got {tau}")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    m = z - tau * np.conj(z)
    f = math.sqrt(n) * dot_product(u, m).imag - 0.5 * tau * _vec_square(u).imag
    return cmath.exp(-1j * f)


def gaussian_normalizer_log(d: int, u: np.ndarray, v: np.ndarray) -> complex:
    """log of pi^d exp((|u|^2+|v|^2)/2 - u.v), as a complex exponent."""
    uu = float(np.sum(np.abs(u) ** 2))
    vv = float(np.sum(np.abs(v) ** 2))
    return d * math.log(math.pi) + 0.5 * (uu + vv) - dot_product(u, v)


def normalized_kernel(
    params: ModelParams,
    edge: EdgePoint,
    u,
    v,
    config: ContourConfig = DEFAULT_CONTOUR,
    gap_tol: float = 1e-6,
) -> NormalizedKernelSample:
    """The normalized kernel L at a boundary point, by both routes.

    Route A: exact kernel at the scaled arguments times cofactors and the
    Gaussian normalizer.  Route B: the pole-normalized contour value.  The
    two agree identically in exact arithmetic; a relative gap beyond
    gap_tol raises ConsistencyError.  The returned L is the route B value.
    """
    u = as_point(params, u)
    v = as_point(params, v)
    tau, n, d = params.tau, params.n, params.d
    rn = math.sqrt(n)
    k_log = kernel_exact_log(params, rn * edge.z + u, rn * edge.z + v)
    cof = cofactor_cn(tau, n, edge.z, u) * np.conj(cofactor_cn(tau, n, edge.z, v))
    route_a = (
        k_log
        * LogMagnitudePhase.from_log(gaussian_normalizer_log(d, u, v))
        * LogMagnitudePhase.from_complex(complex(cof))
    )
    if tau == 0.0:
        zeta = dot_product(edge.z + u / rn, edge.z + v / rn)
        route_b = integral_I_zero(params, zeta, config)
    else:
        zp, zm = zpm_map(params, edge.z, u, v)
        frame = saddle_frame(params, zp, zm)
        route_b = integral_I_tau(params, frame, config)
    gap = abs(route_a.ratio_to(route_b) - 1.0)
    if gap > gap_tol:
        raise ConsistencyError(
            f"normalized kernel routes disagree: relative gap {gap:.3e} (n={n}, d={d}, tau={tau})"
        )
    return NormalizedKernelSample(
        L=route_b.value, z=edge, u=u, v=v, n=n, route_gap=gap
    )


def edge_kernel_prediction(edge: EdgePoint, u, v) -> complex:
    """Leading Faddeeva plasma value 1/2 erfc((u.n + n.v)/sqrt 2)."""
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    s = dot_product(u, edge.normal) + dot_product(edge.normal, v)
    arg = s / math.sqrt(2.0)
    if (arg * arg).real > 600.0:
        return 0.5 * cmath.exp(-arg * arg) * erfcx_complex(arg)
    return 0.5 * erfc_complex(arg)


def _density_terms(params: ModelParams, edge: EdgePoint, lam: float, n: int) -> tuple[float, float]:
    d, tau = params.d, params.tau
    kappa = edge.kappa
    fact = math.factorial(d)
    lead = fact / (2.0 * math.pi**d) * erfc_complex(math.sqrt(2.0) * lam).real
    bracket = lam * lam - 1.0
    if tau != 0.0:
        bracket -= 3.0 * tau * tau * (d - 1) / ((1.0 - tau * tau) * kappa ** (2.0 / 3.0))
    second = (
        (kappa / math.sqrt(n))
        * fact
        / (3.0 * math.pi**d * math.sqrt(2.0 * math.pi))
        * bracket
        * math.exp(-2.0 * lam * lam)
    )
    return lead, second


def edge_density_prediction(
    params: ModelParams, edge: EdgePoint, lam: float, n: int | None = None
) -> float:
    """Two-term edge density profile for n^d rho_1(sqrt(n) z + lambda n).

    d!/(2 pi^d) erfc(sqrt 2 lambda)
      + (kappa/sqrt n) d!/(3 pi^d sqrt(2 pi))
        (lambda^2 - 1 - 1_{tau != 0} 3 tau^2 (d-1)/((1-tau^2) kappa^{2/3}))
        e^{-2 lambda^2}.
    """
    n = params.n if n is None else n
    lead, second = _density_terms(params, edge, lam, n)
    return lead + second


def edge_density_second_term(params: ModelParams, edge: EdgePoint, lam: float, n: int) -> float:
    """The 1/sqrt(n) term alone (used by the acceptance leading-order check)."""
    return _density_terms(params, edge, lam, n)[1]


def bulk_prediction(d: int, u, v) -> complex:
    """Bulk scaling limit pi^{-d} exp(u.v - (|u|^2+|v|^2)/2)."""
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if u.size != d or v.size != d:
        raise UsageError(f"u, v must have {d} coordinates")
    uu = float(np.sum(np.abs(u) ** 2))
    vv = float(np.sum(np.abs(v) ** 2))
    return math.pi ** (-d) * cmath.exp(dot_product(u, v) - 0.5 * (uu + vv))


def d1_refined_prediction(edge: EdgePoint, u: complex, v: complex, n: int) -> complex:
    """Refined d = 1 expansion of the normalized kernel at u n, v n displacements.

    (1/2 pi) e^{u conj(v) - (|u|^2+|v|^2)/2} erfc((u + conj v)/sqrt 2)
      + (kappa / sqrt n) e^{-(|u|^2+u^2+|v|^2+conj(v)^2)/2}
        (u^2 + conj(v)^2 - u conj(v) - 1) / (3 sqrt(2 pi^3)).

    This is the kernel itself (not the pole-normalized L); multiply by
    pi e^{(|u|^2+|v|^2)/2 - u conj v} to compare with L.
    """
    if edge.z.size != 1:
        raise UsageError("d1_refined_prediction requires a one-dimensional edge point")
    if not (0.0 < edge.tau < 1.0):
        raise UsageError("d1_refined_prediction requires 0 < tau < 1")
    u = complex(u)
    vb = complex(v).conjugate()
    kappa = edge.kappa
    lead = (
        1.0
        / (2.0 * math.pi)
        * cmath.exp(u * vb - 0.5 * (abs(u) ** 2 + abs(vb) ** 2))
        * erfc_complex((u + vb) / math.sqrt(2.0))
    )
    second = (
        (kappa / math.sqrt(n))
        * cmath.exp(-0.5 * (abs(u) ** 2 + u * u + abs(vb) ** 2 + vb * vb))
        * (u * u + vb * vb - u * vb - 1.0)
        / (3.0 * math.sqrt(2.0 * math.pi**3))
    )
    return lead + second
