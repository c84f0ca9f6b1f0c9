"""Gauss-Legendre rules, affine maps and composite (panel) rules."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError

MAX_ORDER = 512


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return self.nodes.size

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))


def _legendre_and_derivative(m, x):
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, m + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = m * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


@lru_cache(maxsize=64)
def _gl_nodes_weights(m):
    if m == 1:
        return np.array([0.0]), np.array([2.0])
    k = np.arange(1, m + 1)
    # Chebyshev-type initial guesses, descending
    x = np.cos(np.pi * (k - 0.25) / (m + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(m, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise ConvergenceError(f"Legendre root iteration did not converge for m={m}")
    _, dp = _legendre_and_derivative(m, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = x[::-1].copy()
    w = w[::-1].copy()
    # exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_legendre(m):
    """m-point Gauss-Legendre rule on (-1, 1), nodes ascending."""
    if int(m) != m or not 1 <= m <= MAX_ORDER:
        raise ValueError(f"rule order must be an integer in [1, {MAX_ORDER}], got {m!r}")
    x, w = _gl_nodes_weights(int(m))
    return QuadratureRule(x.copy(), w.copy(), (-1.0, 1.0))


def map_rule(rule, a, b):
    """Affine image of `rule` onto (a, b)."""
    if not a < b:
        raise ValueError(f"map_rule needs a < b, got ({a}, {b})")
    lo, hi = rule.interval
    scale = (b - a) / (hi - lo)
    nodes = a + (rule.nodes - lo) * scale
    return QuadratureRule(nodes, rule.weights * scale, (float(a), float(b)))


def composite_rule(breakpoints, m_per_panel):
    """Concatenate m-point Gauss-Legendre panels between consecutive breakpoints."""
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or bp.size < 2:
        raise ValueError("composite_rule needs at least two breakpoints")
    if np.any(np.diff(bp) <= 0):
        raise ValueError(f"breakpoints must be strictly ascending, got {bp.tolist()}")
    base = gauss_legendre(m_per_panel)
    nodes, weights = [], []
    for a, b in zip(bp[:-1], bp[1:]):
        panel = map_rule(base, a, b)
        nodes.append(panel.nodes)
        weights.append(panel.weights)
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), (bp[0], bp[-1]))


def refine_breakpoints(breakpoints, max_width):
    """Split every panel wider than `max_width` into equal sub-panels."""
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    out = [bp[0]]
    for a, b in zip(bp[:-1], bp[1:]):
        pieces = max(1, int(np.ceil((b - a) / max_width)))
        out.extend(np.linspace(a, b, pieces + 1)[1:])
    return np.asarray(out)
