"""Sine-type kernels: classical sine, tempered sine and the finite-temperature
family with weight w, plus the weight measures themselves.

A finite-temperature kernel has the form

    K(x, y) = int_0^inf cos(pi (x - y) z) w(z) dz,

and the tempered sine kernel is the special case w = w_alpha with
alpha = t / sigma.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConvergenceError
from .quadrature import composite_rule, refine_breakpoints
from .specfun import erfc, sinc_pi

SQRT_PI = np.sqrt(np.pi)


def weight_w_alpha(alpha, z):
    """w_alpha(z) = Phi(alpha (z + 1)) - Phi(alpha (z - 1))."""
    z = np.asarray(z, dtype=float)
    # written through erfc so that the tail keeps relative accuracy
    return 0.5 * (erfc(alpha * (z - 1.0)) - erfc(alpha * (z + 1.0)))


def weight_dw_alpha(alpha, z):
    """Derivative of w_alpha: two Gaussian bumps of width 1/alpha at z = -1, 1."""
    z = np.asarray(z, dtype=float)
    a2 = alpha * alpha
    return (alpha / SQRT_PI) * (np.exp(-a2 * (z + 1.0) ** 2) - np.exp(-a2 * (z - 1.0) ** 2))


@dataclass(frozen=True)
class WeightMeasure:
    """A weight w: [0, inf) -> [0, 1), truncated at z_max.

    `kind` is "erf_difference", "indicator_unit" or "tabulated". The
    indicator is the alpha -> inf limit of w_alpha and has a point-mass
    derivative -delta(z - 1); its `dw` returns zeros away from z = 1.
    """

    kind: str
    alpha: Optional[float] = None
    z_max: float = 1.0
    w_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    dw_func: Optional[Callable] = field(default=None, compare=False, repr=False)
    extra_breaks: tuple = ()

    @classmethod
    def erf_difference(cls, alpha):
        if not alpha > 0:
            raise ValueError(f"alpha must be positive, got {alpha!r}")
        return cls("erf_difference", alpha=float(alpha), z_max=1.0 + 8.0 / alpha)

    @classmethod
    def indicator_unit(cls):
        return cls("indicator_unit", z_max=1.0)

    @classmethod
    def tabulated(cls, w, dw, z_max, breaks=()):
        return cls("tabulated", z_max=float(z_max), w_func=w, dw_func=dw,
                   extra_breaks=tuple(breaks))

    def w(self, z):
        z = np.abs(np.asarray(z, dtype=float))
        if self.kind == "erf_difference":
            return weight_w_alpha(self.alpha, z)
        if self.kind == "indicator_unit":
            return np.where(z < 1.0, 1.0, 0.0)
        return np.asarray(self.w_func(z), dtype=float)

    def dw(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "erf_difference":
            return weight_dw_alpha(self.alpha, z)
        if self.kind == "indicator_unit":
            return np.zeros_like(z)
        return np.asarray(self.dw_func(z), dtype=float)

    def breakpoints(self):
        """Panel layout on (0, z_max) resolving the structure of w near z = 1."""
        if self.kind == "erf_difference":
            a = self.alpha
            # 1 - 8/alpha keeps the Gaussian tail out of the wide first panel when alpha is large
            pts = [0.0, max(0.0, 1.0 - 8.0 / a), max(0.0, 1.0 - 3.0 / a), 1.0 + 3.0 / a, self.z_max]
        elif self.kind == "indicator_unit":
            pts = [0.0, 1.0]
        else:
            pts = [0.0, *self.extra_breaks, self.z_max]
        return np.unique(np.asarray(pts, dtype=float))

    def mass(self, m_per_panel=32):
        """int_0^z_max w(z) dz."""
        if self.kind == "indicator_unit":
            return 1.0
        rule = composite_rule(refine_breakpoints(self.breakpoints(), 1.0), m_per_panel)
        return float(np.dot(rule.weights, self.w(rule.nodes)))


def tempered_sine_eval(t, sigma, a, b):
    """S_t^sigma(a, b) = sinc(a - b) exp(-(pi sigma (a - b) / (2 t))^2)."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return sinc_pi(d) * np.exp(-(np.pi * sigma * d / (2.0 * t)) ** 2)


def _finite_temp_quad(weight, d, m_per_panel):
    dmax = float(np.max(np.abs(d))) if np.size(d) else 0.0
    width = min(1.0, 8.0 / max(dmax, 1e-300))
    rule = composite_rule(refine_breakpoints(weight.breakpoints(), width), m_per_panel)
    wz = rule.weights * weight.w(rule.nodes)
    flat = d.reshape(-1)
    out = np.empty(flat.size)
    # chunked to bound the (len(d), len(rule)) temporary
    step = max(1, 2_000_000 // max(len(rule), 1))
    for i in range(0, flat.size, step):
        out[i:i + step] = np.cos(np.pi * np.outer(flat[i:i + step], rule.nodes)) @ wz
    return out.reshape(d.shape)


def finite_temp_eval(weight, x, y, m_per_panel=32, tol=1e-10):
    """K(x, y) = int_0^z_max cos(pi (x - y) z) w(z) dz by composite Gauss-Legendre.

    The value is recomputed with twice the panel order; a change larger than
    `tol` raises ConvergenceError.
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if weight.kind == "indicator_unit":
        return sinc_pi(d)
    coarse = _finite_temp_quad(weight, d, m_per_panel)
    fine = _finite_temp_quad(weight, d, 2 * m_per_panel)
    gap = np.max(np.abs(fine - coarse)) if d.size else 0.0
    if gap > tol:
        raise ConvergenceError(f"finite-temperature kernel quadrature changed by {gap:.2e} on refinement")
    return fine[()] if fine.ndim == 0 else fine


def rescaled_kernel_and_derivs(sigma, t, x, y):
    """Kernel of G_sigma(t) mapped to the fixed interval (-1, 1), with its
    first two t-derivatives.

    With d = x - y and g = exp(-(pi sigma d / 2)^2):
        k = sin(pi t d) / (pi d) * g,  dk/dt = cos(pi t d) g,
        d2k/dt2 = -pi d sin(pi t d) g.
    `sigma = 0` gives the classical sine kernel (g = 1).
    """
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    g = np.exp(-(0.5 * np.pi * sigma * d) ** 2) if sigma > 0 else np.ones_like(d)
    ptd = np.pi * t * d
    k = t * sinc_pi(t * d) * g
    dk = np.cos(ptd) * g
    d2k = -np.pi * d * np.sin(ptd) * g
    return k, dk, d2k


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric translation-invariant kernel on an interval.

    kind: "classical_sine", "tempered_sine" (needs t, sigma) or
    "finite_temperature" (needs weight).
    """

    kind: str
    t: Optional[float] = None
    sigma: Optional[float] = None
    weight: Optional[WeightMeasure] = None

    @classmethod
    def classical_sine(cls):
        return cls("classical_sine")

    @classmethod
    def tempered_sine(cls, t, sigma):
        if not (t > 0 and sigma > 0):
            raise ValueError("tempered sine kernel needs t > 0 and sigma > 0")
        return cls("tempered_sine", t=float(t), sigma=float(sigma))

    @classmethod
    def finite_temperature(cls, weight):
        return cls("finite_temperature", weight=weight)

    def eval(self, x, y):
        if self.kind == "classical_sine":
            return sinc_pi(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.kind == "tempered_sine":
            return tempered_sine_eval(self.t, self.sigma, x, y)
        if self.kind == "finite_temperature":
            return finite_temp_eval(self.weight, x, y)
        raise ValueError(f"unknown kernel kind {self.kind!r}")

    def diagonal(self):
        if self.kind == "finite_temperature":
            return self.weight.mass()
        return 1.0
