"""Nystrom Fredholm determinants and the spacing distributions built on them.

G_sigma(t) is the determinant of the tempered sine kernel on (-t, t). The
real-part spacing law at weak non-Hermiticity is

    P(s, sigma) = 1 + (1/2) G_sigma'(s/2),     density = (1/4) G_sigma''(s/2),

with sigma = 0 the Gaudin-Mehta law F1 and sigma = inf the Poisson law F0.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import IllConditionedError
from .kernels import rescaled_kernel_and_derivs
from .quadrature import composite_rule, gauss_legendre, map_rule

DEFAULT_M = 80
ILL_CONDITIONED = 1e-14


@dataclass(frozen=True)
class FredholmResult:
    log_det: float
    det: float
    nystrom_eigs: np.ndarray
    m: int


class LogDetDerivs(NamedTuple):
    log_g: float
    dlog_g: float
    d2log_g: float
    eigs: np.ndarray


@dataclass
class SpacingCurve:
    s_grid: np.ndarray
    cdf: np.ndarray
    density: np.ndarray
    sigma: float
    m: int
    clamp: float = 0.0


def _eig_one_minus(mat):
    mat = 0.5 * (mat + mat.T)
    lam, vec = np.linalg.eigh(mat)
    gap = 1.0 - lam
    if np.min(gap) < ILL_CONDITIONED:
        raise IllConditionedError(f"1 - lambda_max = {np.min(gap):.3e} on the Nystrom matrix")
    return lam, vec, gap


def nystrom_log_det(kernel, interval, m=DEFAULT_M):
    """log det(I - K) on `interval` via an m-point Gauss-Legendre Nystrom matrix."""
    a, b = interval
    rule = map_rule(gauss_legendre(m), a, b)
    x = rule.nodes
    sw = np.sqrt(rule.weights)
    kmat = kernel.eval(x[:, None], x[None, :])
    lam, _, gap = _eig_one_minus(sw[:, None] * kmat * sw[None, :])
    log_det = float(np.sum(np.log(gap)))
    return FredholmResult(log_det, math.exp(log_det), lam, int(m))


def log_det_with_t_derivs(sigma, t, m=DEFAULT_M):
    """log G_sigma(t) and its first two t-derivatives.

    The kernel is rescaled to (-1, 1) so that only the kernel depends on t;
    with M, M', M'' its Nystrom matrices and R = (I - M)^{-1},
        (log G)'  = -tr(R M'),
        (log G)'' = -tr(R M'') - tr(R M' R M').
    sigma = 0 is the classical sine kernel, sigma = inf the Poisson limit.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if math.isinf(sigma):
        return LogDetDerivs(-2.0 * t, -2.0, 0.0, np.zeros(0))
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    rule = gauss_legendre(m)
    x = rule.nodes
    sw = np.sqrt(rule.weights)
    wmat = sw[:, None] * sw[None, :]
    k, dk, d2k = rescaled_kernel_and_derivs(sigma, t, x[:, None], x[None, :])
    lam, vec, gap = _eig_one_minus(wmat * k)
    a1 = vec.T @ (wmat * dk) @ vec
    a2 = vec.T @ (wmat * d2k) @ vec
    inv = 1.0 / gap
    d1 = -float(np.sum(np.diag(a1) * inv))
    d2 = -float(np.sum(np.diag(a2) * inv)) - float(np.sum((a1 * inv[:, None]) * (a1 * inv[None, :])))
    return LogDetDerivs(float(np.sum(np.log(gap))), d1, d2, lam)


def _cdf_density(sigma, s, m):
    log_g, d1, d2, _ = log_det_with_t_derivs(sigma, 0.5 * s, m)
    g = math.exp(log_g)
    return 1.0 + 0.5 * g * d1, 0.25 * g * (d2 + d1 * d1)


def weak_spacing_cdf(sigma, s, m=DEFAULT_M):
    """Real-part spacing CDF at weak non-Hermiticity, clamped to [0, 1]."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    raw, _ = _cdf_density(sigma, s, m)
    return min(max(raw, 0.0), 1.0)


def weak_spacing_density(sigma, s, m=DEFAULT_M):
    if s < 0:
        raise ValueError("s must be nonnegative")
    return _cdf_density(sigma, s, m)[1]


def gaudin_mehta_cdf(s, m=DEFAULT_M):
    """F1(s) = 1 + (1/2) D'(s/2) with D the sine-kernel determinant on (-t, t)."""
    return weak_spacing_cdf(0.0, s, m)


def gaudin_mehta_density(s, m=DEFAULT_M):
    return weak_spacing_density(0.0, s, m)


def poisson_cdf(s):
    return -math.expm1(-s) if s > 0 else 0.0


def spacing_curve(sigma, s_grid, m=DEFAULT_M):
    """CDF and density on a grid; `clamp` records the largest [0, 1] correction."""
    s_grid = np.asarray(s_grid, dtype=float)
    if math.isinf(sigma):
        cdf = -np.expm1(-s_grid)
        return SpacingCurve(s_grid, cdf, np.exp(-s_grid), sigma, m)
    raw = np.array([_cdf_density(sigma, s, m) for s in s_grid])
    cdf = np.clip(raw[:, 0], 0.0, 1.0)
    clamp = float(np.max(np.abs(cdf - raw[:, 0]))) if raw.size else 0.0
    return SpacingCurve(s_grid, cdf, raw[:, 1], sigma, m, clamp)


def _small_s_integral(sigma, m_per_panel=32):
    # int_{[0,2]^2} (x-y)^2 e^{-(pi sigma)^2 (x-y)^2 / 2} = 2 int_0^2 (2-d) d^2 e^{-a d^2} dd
    a = 0.5 * (math.pi * sigma) ** 2
    breaks = [0.0, 2.0]
    if a > 0:
        width = 1.0 / math.sqrt(a)
        breaks = sorted({0.0, 2.0, *[min(2.0, c * width) for c in (1, 3, 6, 10)]})
    rule = composite_rule(breaks, m_per_panel)
    d = rule.nodes
    return 2.0 * float(np.dot(rule.weights, (2.0 - d) * d * d * np.exp(-a * d * d)))


def small_s_coefficient(sigma):
    """(pi^2 / 8) * int_{[0,2]^2} (x-y)^2 exp(-(pi sigma)^2 (x-y)^2 / 2) dx dy."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return math.pi ** 2 / 8.0 * _small_s_integral(sigma)


def density_at_zero(sigma, m_per_panel=32):
    """Exact s -> 0 limit of the spacing density: (1/4) int_{[0,2]^2} (1 - g^2).

    g^2 = exp(-(pi sigma)^2 (x-y)^2 / 2). Zero only at sigma = 0, and it
    tends to the Poisson value 1 as sigma -> inf.
    """
    if sigma == 0:
        return 0.0
    if math.isinf(sigma):
        return 1.0
    a = 0.5 * (math.pi * sigma) ** 2
    width = 1.0 / math.sqrt(a)
    breaks = sorted({0.0, 2.0, *[min(2.0, c * width) for c in (1, 3, 6, 10)]})
    rule = composite_rule(breaks, m_per_panel)
    d = rule.nodes
    # 1 - e^{-a d^2} via expm1 keeps accuracy for small sigma
    return 0.5 * float(np.dot(rule.weights, (2.0 - d) * -np.expm1(-a * d * d)))
