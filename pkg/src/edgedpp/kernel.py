"""Exact evaluation of the finite-n correlation kernel on C^d.

The kernel of the elliptic Ginibre-type process with non-Hermiticity
0 < tau < 1 is a sum over multi-indices j with total degree |j| < n of
per-coordinate factors

    sqrt(omega(z_k) omega(w_k)) phi_{j_k}(z_k) conj(phi_{j_k}(w_k)),

where omega(z) = exp(-|z|^2 + tau Re z^2) and phi_j is the weighted
Hermite polynomial sqrt((tau/2)^j / j!) H_j(sqrt((1-tau^2)/(2 tau)) z),
all multiplied by (sqrt(1-tau^2)/pi)^d.  At tau = 0 the same structure
holds with phi_j(z) = z^j / sqrt(j!) and omega(z) = exp(-|z|^2), and the
whole sum collapses to a truncated exponential of the dot product.

Evaluation is by per-coordinate degree sequences T_k[j] followed by a
truncated convolution over coordinates, so the cost is O(d n^2) instead
of the O(n^d) multi-index enumeration.  Every factor is carried as a
(log magnitude, phase) pair because individual terms reach exp(O(n))
while the kernel itself stays of order pi^{-d} near the droplet edge.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from math import comb, lgamma
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, DomainError, UsageError
from .special import LogMagnitudePhase, stable_sum_arrays

__all__ = [
    "ModelParams",
    "weight_omega",
    "phi_sequence",
    "kernel_exact",
    "kernel_exact_log",
    "kernel_tau0_closed",
    "rho1_density",
    "correlation_k",
    "truncated_exp_series",
]

_NEG_INF = -math.inf


@dataclass(frozen=True)
class ModelParams:
    """Dimension d, non-Hermiticity tau in [0, 1), total-degree cutoff n."""

    d: int
    tau: float
    n: int

    def __post_init__(self) -> None:
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d}")
        if not (0.0 <= self.tau < 1.0) or not math.isfinite(self.tau):
            raise DomainError(f"tau must lie in [0, 1), got {self.tau}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "n", int(self.n))

    @property
    def point_count(self) -> int:
        """Number of points of the process: C(n+d-1, d)."""
        return comb(self.n + self.d - 1, self.d)


def as_point(params: ModelParams, coords) -> np.ndarray:
    """Validate and convert kernel arguments to a length-d complex vector."""
    arr = np.atleast_1d(np.asarray(coords, dtype=complex))
    if arr.ndim != 1 or arr.size != params.d:
        raise UsageError(f"point must have {params.d} coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise DomainError("point coordinates must be finite")
    return arr


def weight_omega(zeta: complex, tau: float) -> float:
    """Planar weight omega(zeta) = exp(-|zeta|^2 + tau Re zeta^2)."""
    if not (0.0 <= tau < 1.0):
        raise DomainError(f"tau must lie in [0, 1), got {tau}")
    zeta = complex(zeta)
    if not (math.isfinite(zeta.real) and math.isfinite(zeta.imag)):
        raise DomainError("zeta must be finite")
    return math.exp(log_weight_omega(zeta, tau))


def log_weight_omega(zeta: complex, tau: float) -> float:
    zeta = complex(zeta)
    return -abs(zeta) ** 2 + tau * (zeta * zeta).real


def _phi_log_arrays(x: complex, tau: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Weighted Hermite values phi_0..phi_{n-1} at x as (log |.|, phase) arrays.

    Normalized three-term recurrence:
        phi_{j+1} = (sqrt(1-tau^2) x phi_j - tau sqrt(j) phi_{j-1}) / sqrt(j+1),
    with phi_0 = 1 and phi_1 = sqrt(1-tau^2) x.  The iterates are rescaled
    whenever they leave [1e-150, 1e150] and the scale is tracked in log form,
    so arbitrarily large degrees and arguments are safe.
    """
    c = math.sqrt(1.0 - tau * tau)
    logs = np.full(n, _NEG_INF)
    phases = np.ones(n, dtype=complex)
    prev = 0.0 + 0.0j
    cur = 1.0 + 0.0j
    scale = 0.0  # running log of the factor divided out
    for j in range(n):
        if cur == 0:
            logs[j] = _NEG_INF
            phases[j] = 1.0
        else:
            a = abs(cur)
            logs[j] = scale + math.log(a)
            phases[j] = cur / a
        nxt = (c * x * cur - tau * math.sqrt(j) * prev) / math.sqrt(j + 1)
        prev, cur = cur, nxt
        m = max(abs(cur), abs(prev))
        if m > 1e150 or (0.0 < m < 1e-150):
            shift = math.log(m)
            factor = math.exp(-shift)
            prev *= factor
            cur *= factor
            scale += shift
    return logs, phases


def phi_sequence(x: complex, tau: float, n: int) -> list[LogMagnitudePhase]:
    """The n weighted Hermite values phi_0(x) .. phi_{n-1}(x), overflow safe.

    Only defined for 0 < tau < 1; the tau = 0 kernel takes the closed
    monomial route and never needs these.
    """
    if tau == 0.0:
        raise UsageError("phi_sequence is the 0 < tau < 1 path; use the tau = 0 kernel form")
    if not (0.0 < tau < 1.0):
        raise DomainError(f"tau must lie in (0, 1), got {tau}")
    if n < 1:
        raise DomainError("n must be >= 1")
    x = complex(x)
    if not (math.isfinite(x.real) and math.isfinite(x.imag)):
        raise DomainError("x must be finite")
    logs, phases = _phi_log_arrays(x, tau, n)
    return [LogMagnitudePhase(float(l), complex(p)) for l, p in zip(logs, phases)]


def _monomial_log_arrays(prod: complex, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Degree sequence (z w~)^j / j! at tau = 0, as (log |.|, phase) arrays."""
    logs = np.full(n, _NEG_INF)
    phases = np.ones(n, dtype=complex)
    j = np.arange(n, dtype=float)
    if prod == 0:
        logs[0] = 0.0
        return logs, phases
    mag = abs(prod)
    ang = cmath.phase(prod)
    lg = np.array([lgamma(k + 1.0) for k in range(n)])
    logs = j * math.log(mag) - lg
    phases = np.exp(1j * (j * ang))
    return logs, phases


def _coordinate_sequence(
    params: ModelParams, zk: complex, wk: complex
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted degree sequence T_k[j] for one coordinate pair, log/phase form.

    Includes the per-coordinate prefactor sqrt(1-tau^2)/pi (1/pi at tau=0)
    and the weight factor sqrt(omega(z_k) omega(w_k)), so the kernel is the
    plain truncated convolution of these sequences.
    """
    tau, n = params.tau, params.n
    log_w = 0.5 * (log_weight_omega(zk, tau) + log_weight_omega(wk, tau))
    if tau == 0.0:
        logs, phases = _monomial_log_arrays(zk * wk.conjugate(), n)
        pref = log_w - math.log(math.pi)
    else:
        lz, pz = _phi_log_arrays(zk, tau, n)
        lw, pw = _phi_log_arrays(wk, tau, n)
        logs = lz + lw
        phases = pz * np.conj(pw)
        pref = log_w + 0.5 * math.log(1.0 - tau * tau) - math.log(math.pi)
    return logs + pref, phases


def _convolve_truncated(
    la: np.ndarray, pa: np.ndarray, lb: np.ndarray, pb: np.ndarray, nmax: int
) -> tuple[np.ndarray, np.ndarray]:
    """Degree-truncated convolution of two (log, phase) sequences.

    Computes c_m = sum_{i+j=m} a_i b_j for m < nmax with a per-degree
    max-shift, which keeps the full exp(O(n)) dynamic range intact.
    """
    la = np.asarray(la, dtype=float)
    lb = np.asarray(lb, dtype=float)
    outer_log = la[:, None] + lb[None, :]
    outer_phase = pa[:, None] * pb[None, :]
    ka, kb = la.size, lb.size
    m_count = min(nmax, ka + kb - 1)
    logs = np.full(m_count, _NEG_INF)
    phases = np.ones(m_count, dtype=complex)
    flipped_log = outer_log[:, ::-1]
    flipped_phase = outer_phase[:, ::-1]
    for m in range(m_count):
        dl = np.diagonal(flipped_log, offset=kb - 1 - m)
        dp = np.diagonal(flipped_phase, offset=kb - 1 - m)
        shift = float(np.max(dl))
        if shift == _NEG_INF:
            continue
        s = complex(np.sum(dp * np.exp(dl - shift)))
        if s == 0:
            continue
        logs[m] = shift + math.log(abs(s))
        phases[m] = s / abs(s)
    return logs, phases


def kernel_exact_log(params: ModelParams, z, w) -> LogMagnitudePhase:
    """K_n(z, w) via the per-coordinate convolution, in log/phase form."""
    z = as_point(params, z)
    w = as_point(params, w)
    logs, phases = _coordinate_sequence(params, complex(z[0]), complex(w[0]))
    for k in range(1, params.d):
        lk, pk = _coordinate_sequence(params, complex(z[k]), complex(w[k]))
        logs, phases = _convolve_truncated(logs, phases, lk, pk, params.n)
    return stable_sum_arrays(logs, phases)


def kernel_exact(params: ModelParams, z, w) -> complex:
    """Correlation kernel K_n(z, w), summed over all |j| < n.

    Arguments are the raw (unscaled) points; any sqrt(n) scaling is the
    caller's choice.  Internally overflow safe for arguments of size
    O(sqrt(n)); the returned complex may still overflow for points far
    outside the droplet, where K_n is genuinely astronomical or zero.
    """
    return kernel_exact_log(params, z, w).value


def truncated_exp_series(x: complex, nterms: int) -> LogMagnitudePhase:
    """sum_{j < nterms} x^j / j! in log/phase form."""
    if nterms < 1:
        raise DomainError("nterms must be >= 1")
    logs, phases = _monomial_log_arrays(complex(x), nterms)
    return stable_sum_arrays(logs, phases)


def kernel_tau0_closed(params: ModelParams, z, w) -> complex:
    """Closed form at tau = 0: pi^{-d} exp(-(|z|^2+|w|^2)/2) sum_{j<n} (z.w)^j / j!."""
    return kernel_tau0_closed_log(params, z, w).value


def kernel_tau0_closed_log(params: ModelParams, z, w) -> LogMagnitudePhase:
    if params.tau != 0.0:
        raise UsageError("kernel_tau0_closed requires tau = 0")
    z = as_point(params, z)
    w = as_point(params, w)
    zw = complex(np.sum(z * np.conj(w)))
    series = truncated_exp_series(zw, params.n)
    log_pref = -0.5 * (np.sum(np.abs(z) ** 2) + np.sum(np.abs(w) ** 2)) - params.d * math.log(
        math.pi
    )
    return LogMagnitudePhase(series.log_mag + float(log_pref), series.phase)


def rho1_density(params: ModelParams, z) -> float:
    """Average one-point density K_n(z, z) / C(n+d-1, d), total mass one."""
    k = kernel_exact_log(params, z, z)
    val = k.value
    scale = max(abs(val), 1.0)
    if abs(val.imag) > 1e-10 * scale:
        raise ConsistencyError(f"diagonal kernel value not real: {val!r}")
    rho = val.real / params.point_count
    return max(rho, 0.0) if rho > -1e-12 * scale else rho


def correlation_k(params: ModelParams, pts: Sequence) -> float:
    """k-point correlation det(K_n(z_i, z_j))_{i,j <= k}, for k <= 6.

    Returned as the unnormalized determinant (an intensity, not a
    probability density); any point-count normalization is the caller's
    choice.
    """
    points = [as_point(params, p) for p in pts]
    k = len(points)
    if not 1 <= k <= 6:
        raise UsageError(f"correlation_k supports 1 <= k <= 6 points, got {k}")
    mat = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            mat[i, j] = kernel_exact(params, points[i], points[j])
    det = complex(np.linalg.det(mat))
    scale = max(abs(det), 1.0)
    if abs(det.imag) > 1e-10 * scale:
        raise ConsistencyError(f"correlation determinant not real: {det!r}")
    return det.real
