"""Stable evaluation of the single contour-integral kernel representations.

For 0 < tau < 1 the kernel at scaled arguments equals a weight factor
times

    I(z_pm) = -(1/2 pi i) oint e^{n F(s)} / ((s - tau) (1 - s^2)^{d/2}) ds

over a small loop around the origin, with F the phase of
geometry.PhaseFunction.  The loop is deformed to a circle through the
dominant saddle 1/a; when the deformation crosses the simple pole at
s = tau the residue is picked up.  Everything is normalized by
e^{-n F(pole)} inside the loop, so the returned quantity

    N_tau = (1 - tau^2)^{d/2} e^{-n F(tau)} I

is the order-one object the edge expansions describe (N -> 1 deep in the
bulk, 1/2 on the edge, 0 outside).  At tau = 0 the same machinery applies
to F(s) = zeta s - log s with the pole at s = 1 and

    N_0 = e^{-n F(1)} I.

The trapezoid rule on a circle converges geometrically in the node count
with rate set by the angular distance to the nearest singularity, here
the pole at distance ~ offset/sqrt(n); the default node count 64 sqrt(n)
therefore already resolves it, and the adaptive doubling loop merely
certifies convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContourError, DomainError, QuadratureError, UsageError
from .geometry import SaddleFrame
from .kernel import ModelParams, truncated_exp_series
from .special import LogMagnitudePhase, stable_sum_arrays

__all__ = [
    "ContourConfig",
    "DEFAULT_CONTOUR",
    "integral_I_tau",
    "integral_I_zero",
    "integral_I_zero_closed",
    "kernel_via_contour_log",
    "max_principle_check",
    "pole_enclosed_tau",
]

# Keep the circle out of the branch region of (1 - s^2)^{d/2}.
_MAX_RADIUS_TAU = 0.999
# Cap the base circle below the essential singularities at +-1.  Whenever
# the saddle circle |a|^{-1} exceeds the cap the configuration is bulk-like
# (|a|^{-1} > tau always holds there), the pole stays enclosed on either
# circle, and by Cauchy's theorem the value is unchanged.
_RADIUS_CAP_TAU = 0.93
# Refuse when the pole ends up closer than this many 1/sqrt(n) units.
_MIN_POLE_GAP = 1e-3


@dataclass(frozen=True)
class ContourConfig:
    """Quadrature knobs for the circle contour.

    radius_offset is the relative radius shift in units of 1/sqrt(n): the
    circle is |a|^{-1} (1 +- radius_offset/sqrt(n)), with the sign chosen
    away from the pole.
    """

    node_count: int = 512
    radius_offset: float = 1.0
    tolerance: float = 1e-10
    max_doublings: int = 8

    def __post_init__(self) -> None:
        if self.node_count < 64:
            raise DomainError("node_count must be >= 64")
        if not (self.tolerance > 0.0):
            raise DomainError("tolerance must be positive")
        if not (0.0 < self.radius_offset < 100.0):
            raise DomainError("radius_offset must lie in (0, 100)")
        if self.max_doublings < 1:
            raise DomainError("max_doublings must be >= 1")


DEFAULT_CONTOUR = ContourConfig()


def _choose_radius(base: float, pole: float, n: int, offset: float) -> tuple[float, bool]:
    """Radius near the saddle circle, nudged away from (or past) the pole.

    The natural gap base - pole decides the side: positive gap keeps the
    pole inside, nonpositive pushes the circle inward so the pole stays
    outside.  The relative nudge offset/sqrt(n) (capped at 5% so small n
    stays near the saddle circle) adds to the gap on the same side, so
    |r - pole| >= base * nudge always.
    """
    gap = base - pole
    sign = 1.0 if gap > 0.0 else -1.0
    nudge = min(offset / math.sqrt(n), 0.05)
    r = base * (1.0 + sign * nudge)
    return r, r > pole


def _converged(a: LogMagnitudePhase, b: LogMagnitudePhase, tol: float) -> bool:
    if a.log_mag == -math.inf and b.log_mag == -math.inf:
        return True
    if a.log_mag == -math.inf or b.log_mag == -math.inf:
        return False
    return abs(a.ratio_to(b) - 1.0) <= tol


def _reject_hopeless_cancellation(
    log_mag: np.ndarray, val: LogMagnitudePhase, r: float, n: int
) -> None:
    """Refuse configurations whose node sum cancels beyond double capability.

    The L1 norm of the node values against the magnitude of their sum
    measures the digits lost; past ~e^34 no node count can recover the
    relative tolerance, which happens only near degenerate saddle
    configurations the quadratic theory excludes anyway.
    """
    if val.log_mag == -math.inf:
        return
    shift = float(np.max(log_mag))
    l1_log = shift + math.log(float(np.sum(np.exp(log_mag - shift))))
    if l1_log - val.log_mag > 34.0:
        raise ContourError(
            "cancellation beyond double precision on the contour "
            f"(near-degenerate configuration: radius {r:.4g}, n={n})"
        )


def _trapezoid_nodes(count: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(count) / count


def _quadrature_tau(
    frame: SaddleFrame, params: ModelParams, r: float, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-node (log magnitude, phase) of the normalized integrand sum.

    Contribution of node s: -(1/count) e^{n (F(s) - F(tau))} (1-tau^2)^{d/2}
    * s / ((s - tau) (1 - s^2)^{d/2}).
    """
    tau, d, n = params.tau, params.d, params.n
    theta = _trapezoid_nodes(count)
    s = r * np.exp(1j * theta)
    one_minus_s2 = 1.0 - s * s
    if np.any(one_minus_s2.real <= 0.0):
        raise ContourError("contour touches the branch region of (1 - s^2)^{d/2}")
    df = frame.phase.F(s) - frame.phase.F_at_pole()
    rest = s / ((s - tau) * one_minus_s2 ** (0.5 * d))
    log_mag = n * df.real + np.log(np.abs(rest))
    log_mag += 0.5 * d * math.log1p(-tau * tau) - math.log(count)
    phase = np.exp(1j * (n * df.imag)) * (rest / np.abs(rest)) * (-1.0)
    return log_mag, phase


def integral_I_tau(
    params: ModelParams,
    frame: SaddleFrame,
    config: ContourConfig = DEFAULT_CONTOUR,
    include_residue: bool = True,
) -> LogMagnitudePhase:
    """Pole-normalized contour value N_tau = (1-tau^2)^{d/2} e^{-n F(tau)} I.

    Trapezoid rule on the circle |s| = |a|^{-1} (1 +- offset/sqrt(n)); the
    residue term +1 is added whenever the circle encloses the pole s = tau.
    Node count doubles until two successive values agree to the relative
    tolerance.  include_residue=False returns the bare circle integral,
    which deep in the bulk is exactly N_tau - 1 and stays representable in
    log form long after the difference underflows in doubles.
    """
    tau, n = params.tau, params.n
    if not (0.0 < tau < 1.0):
        raise UsageError("integral_I_tau requires 0 < tau < 1")
    cap = max(_RADIUS_CAP_TAU, 0.5 * (1.0 + tau))
    base = min(frame.radius, cap)
    r, pole_inside = _choose_radius(base, tau, n, config.radius_offset)
    if base == cap:
        r = min(r, 0.5 * (cap + 1.0) - 0.03)
    if r >= _MAX_RADIUS_TAU:
        raise ContourError(f"contour radius {r:.6f} reaches the branch region at |s| = 1")
    if abs(r - tau) < _MIN_POLE_GAP / math.sqrt(n):
        raise ContourError("pole lies within 1e-3/sqrt(n) of the contour")

    count = max(config.node_count, 64 * math.isqrt(n - 1) + 64)
    prev = None
    for _ in range(config.max_doublings + 1):
        log_mag, phase = _quadrature_tau(frame, params, r, count)
        if pole_inside and include_residue:
            log_mag = np.append(log_mag, 0.0)
            phase = np.append(phase, 1.0 + 0.0j)
        val = stable_sum_arrays(log_mag, phase)
        _reject_hopeless_cancellation(log_mag, val, r, n)
        if prev is not None and _converged(val, prev, config.tolerance):
            return val
        prev = val
        count *= 2
    raise QuadratureError(
        f"contour integral did not converge: n={n}, radius={r:.6g}, "
        f"final node count {count // 2}, tolerance {config.tolerance:g}"
    )


def pole_enclosed_tau(params: ModelParams, frame: SaddleFrame, config: ContourConfig = DEFAULT_CONTOUR) -> bool:
    """Whether the chosen circle encloses the pole s = tau."""
    r, inside = _choose_radius(frame.radius, params.tau, params.n, config.radius_offset)
    return inside


def integral_I_zero(
    params: ModelParams,
    zeta: complex,
    config: ContourConfig = DEFAULT_CONTOUR,
    include_residue: bool = True,
) -> LogMagnitudePhase:
    """Pole-normalized value N_0 = e^{-n F(1)} I for the tau = 0 phase.

    F(s) = zeta s - log s with pole at s = 1 and F(1) = zeta.  At zeta = 0
    the integral is the residue polynomial and equals 1 exactly.
    """
    n = params.n
    zeta = complex(zeta)
    if not (math.isfinite(zeta.real) and math.isfinite(zeta.imag)):
        raise DomainError("zeta must be finite")
    if zeta == 0:
        if not include_residue:
            raise UsageError("zeta = 0 bypasses quadrature; no residue split exists")
        return LogMagnitudePhase(0.0, 1.0 + 0.0j)

    base = 1.0 / abs(zeta)
    r, pole_inside = _choose_radius(base, 1.0, n, config.radius_offset)
    if abs(r - 1.0) < _MIN_POLE_GAP / math.sqrt(n):
        raise ContourError("pole lies within 1e-3/sqrt(n) of the contour")

    count = max(config.node_count, 64 * math.isqrt(n - 1) + 64)
    prev = None
    for _ in range(config.max_doublings + 1):
        theta = _trapezoid_nodes(count)
        s = r * np.exp(1j * theta)
        df = zeta * s - np.log(s) - zeta
        rest = s / (s - 1.0)
        log_mag = n * df.real + np.log(np.abs(rest)) - math.log(count)
        phase = np.exp(1j * (n * df.imag)) * (rest / np.abs(rest)) * (-1.0)
        if pole_inside and include_residue:
            log_mag = np.append(log_mag, 0.0)
            phase = np.append(phase, 1.0 + 0.0j)
        val = stable_sum_arrays(log_mag, phase)
        _reject_hopeless_cancellation(log_mag, val, r, n)
        if prev is not None and _converged(val, prev, config.tolerance):
            return val
        prev = val
        count *= 2
    raise QuadratureError(
        f"contour integral did not converge: n={n}, zeta={zeta!r}, "
        f"final node count {count // 2}, tolerance {config.tolerance:g}"
    )


def kernel_via_contour_log(
    params: ModelParams, z, w, config: ContourConfig = DEFAULT_CONTOUR
) -> LogMagnitudePhase:
    """K_n(sqrt(n) z, sqrt(n) w) through the contour representation.

    pi^{-d} prod_k sqrt(omega(sqrt n z_k) omega(sqrt n w_k)) e^{n F(pole)} N,
    the route independent of the Hermite/monomial sums; z and w are the
    unscaled droplet-coordinate points.
    """
    from .geometry import saddle_frame, zpm_map  # local import, no cycle at module load
    from .kernel import as_point, log_weight_omega

    d, tau, n = params.d, params.tau, params.n
    z = as_point(params, z)
    w = as_point(params, w)
    rn = math.sqrt(n)
    log_w = 0.5 * sum(
        log_weight_omega(complex(rn * z[k]), tau) + log_weight_omega(complex(rn * w[k]), tau)
        for k in range(d)
    )
    if tau == 0.0:
        zeta = complex(np.sum(z * np.conj(w)))
        big_n = integral_I_zero(params, zeta, config)
        nf_pole = n * zeta
    else:
        zp, zm = zpm_map(params, z, np.zeros(d), rn * (w - z))
        frame = saddle_frame(params, zp, zm)
        big_n = integral_I_tau(params, frame, config)
        nf_pole = n * frame.phase.F_at_pole()
    pref = LogMagnitudePhase.from_log(complex(log_w - d * math.log(math.pi)) + nf_pole)
    return big_n * pref


def integral_I_zero_closed(params: ModelParams, zeta: complex) -> LogMagnitudePhase:
    """Residue closed form of the same quantity: e^{-n zeta} sum_{j<n} (n zeta)^j / j!."""
    zeta = complex(zeta)
    series = truncated_exp_series(params.n * zeta, params.n)
    return series * LogMagnitudePhase.from_log(-params.n * zeta)


def max_principle_check(frame: SaddleFrame, grid_size: int = 10_000) -> float:
    """Largest violation of Re F(s) <= Re F(1/a) on the circle |s| = |a|^{-1}.

    Nonpositive (up to rounding) whenever the dominant-saddle inequality
    holds; the returned value is max over the grid of Re F(s) - Re F(1/a).
    """
    if grid_size < 8:
        raise DomainError("grid_size must be >= 8")
    theta = _trapezoid_nodes(grid_size)
    s = frame.radius * np.exp(1j * theta)
    re_f = frame.phase.F(s).real
    return float(np.max(re_f) - frame.F_at_a_inv.real)
