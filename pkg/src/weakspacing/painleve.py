"""Integro-differential Painleve system for finite-temperature sine determinants.

For K(x, y) = int_0^inf cos(pi (x-y) z) w(z) dz on (-t, t) the fields
q(t, z), p(t, z) obey

    dq/dt =  z p - 2 R_anti q,
    dp/dt = -pi^2 z q + 2 R_anti p,      t R_anti = -int q p dw,

and d/dt log D = -2 R(t, t) with
    R(t, t) = -int z (p^2 + pi^2 q^2) dw - 2 t R_anti^2.

The measure dw = w'(z) dz is discretized on a composite Gauss-Legendre grid,
so every quantity here is exact for the discretized weight.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ConvergenceError
from .kernels import WeightMeasure
from .quadrature import composite_rule, refine_breakpoints

T0 = 1e-6
U_GUARD = 1e-5
NODES_PER_PANEL = 24
MAX_PANEL_WIDTH = 1.0
STEP_TOL = 1e-8
GEOM_RATIO = 0.05
MAX_AUTO_REFINE = 4
FD_STEP = 3e-3


@dataclass(frozen=True)
class PainleveGrid:
    z_nodes: np.ndarray
    dw_weights: np.ndarray
    alpha: Optional[float]
    w_mass: float
    kind: str = "alpha"

    @property
    def point_mass(self):
        return self.kind == "point_mass"

    @classmethod
    def from_alpha(cls, alpha, nodes_per_panel=NODES_PER_PANEL, max_width=MAX_PANEL_WIDTH):
        weight = WeightMeasure.erf_difference(alpha)
        rule = composite_rule(refine_breakpoints(weight.breakpoints(), max_width), nodes_per_panel)
        z = rule.nodes
        return cls(z, rule.weights * weight.dw(z), float(alpha), weight.mass())

    @classmethod
    def from_point_mass(cls):
        # alpha -> inf: w is the indicator of (-1, 1), dw = -delta(z - 1)
        return cls(np.array([1.0]), np.array([-1.0]), None, 1.0, "point_mass")

    @classmethod
    def from_measure(cls, z_nodes, dw_weights):
        z = np.asarray(z_nodes, dtype=float)
        c = np.asarray(dw_weights, dtype=float)
        # int w = -int z dw after integration by parts
        return cls(z, c, None, float(-np.dot(z, c)), "measure")


@dataclass
class Trajectory:
    grid: PainleveGrid
    t: np.ndarray
    q: np.ndarray          # shape (len(t), n_z)
    p: np.ndarray
    log_d: np.ndarray
    r_diag: np.ndarray     # R(t, t)
    r_anti: np.ndarray     # R(t, -t)
    step_error: float

    def u(self):
        """u(t, z) = 2 p q / t, with the t -> 0 limit 2 z below U_GUARD."""
        return _u(self.t[:, None], self.q, self.p, self.grid.z_nodes[None, :])

    def coupling(self):
        """int u(t, z) dw(z) at every stored time."""
        return self.u() @ self.grid.dw_weights


def _u(t, q, p, z):
    t = np.asarray(t, dtype=float)
    safe = np.where(t < U_GUARD, 1.0, t)
    return np.where(t < U_GUARD, 2.0 * z + 0.0 * q, 2.0 * p * q / safe)


def coupling_R_anti(t, q, p, grid):
    """R(t, -t) = -(1/t) sum_i q_i p_i dw_i."""
    return -float(np.dot(q * p, grid.dw_weights)) / t


def coupling_R_diag(t, q, p, grid):
    ra = coupling_R_anti(t, q, p, grid)
    z = grid.z_nodes
    return -float(np.dot(z * (p * p + math.pi ** 2 * q * q), grid.dw_weights)) - 2.0 * t * ra * ra


def coupling_R_diag_fourier(t, q, p, grid):
    """R(t, t) through |r|^2 and Im r^2 with r = p - i pi q."""
    r = p - 1j * math.pi * q
    c = grid.dw_weights
    im_r2 = float(np.dot(np.imag(r * r), c))
    return -float(np.dot(grid.z_nodes * np.abs(r) ** 2, c)) - im_r2 ** 2 / (2.0 * math.pi ** 2 * t)


def ode_rhs(t, q, p, grid):
    ra = coupling_R_anti(t, q, p, grid)
    z = grid.z_nodes
    return z * p - 2.0 * ra * q, -math.pi ** 2 * z * q + 2.0 * ra * p


def free_fields(t, z):
    return np.sin(math.pi * t * z) / math.pi, np.cos(math.pi * t * z)


def initial_fields(t, grid):
    """Fields at small t: free fields plus the leading resolvent correction.

    For t -> 0 the kernel is the constant int w on (-t, t), whose resolvent
    shifts p by 2 t W / (1 - 2 t W); q is corrected only at O(t^4). Dropping
    the p shift leaves an O(t) error that the flow amplifies.
    """
    q, p = free_fields(t, grid.z_nodes)
    shift = 2.0 * t * grid.w_mass
    return q, p + shift / (1.0 - shift)


def _rhs_full(t, y, grid):
    n = grid.z_nodes.size
    q, p = y[:n], y[n:2 * n]
    dq, dp = ode_rhs(t, q, p, grid)
    return np.concatenate([dq, dp, [-2.0 * coupling_R_diag(t, q, p, grid)]])


def _rk4_step(t, y, h, grid):
    k1 = _rhs_full(t, y, grid)
    k2 = _rhs_full(t + 0.5 * h, y + 0.5 * h * k1, grid)
    k3 = _rhs_full(t + 0.5 * h, y + 0.5 * h * k2, grid)
    k4 = _rhs_full(t + h, y + h * k3, grid)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _substeps(t_start, t_end):
    # R_anti carries a 1/t, so steps near t = 0 are kept to h / t <= GEOM_RATIO
    if t_end <= t_start * (1.0 + GEOM_RATIO):
        return np.array([t_start, t_end])
    n_geom = int(math.ceil(math.log(t_end / t_start) / math.log1p(GEOM_RATIO)))
    n_lin = int(math.ceil((t_end - t_start) / (GEOM_RATIO * t_start)))
    if n_geom < n_lin:
        return np.geomspace(t_start, t_end, n_geom + 1)
    return np.linspace(t_start, t_end, n_lin + 1)


def _integrate(grid, t_max, n_steps, t0):
    q0, p0 = initial_fields(t0, grid)
    y = np.concatenate([q0, p0, [math.log1p(-2.0 * t0 * grid.w_mass)]])
    ts = np.linspace(t0, t_max, n_steps + 1)
    out = np.empty((n_steps + 1, y.size))
    out[0] = y
    for k in range(n_steps):
        sub = _substeps(ts[k], ts[k + 1])
        for a, b in zip(sub[:-1], sub[1:]):
            y = _rk4_step(a, y, b - a, grid)
        out[k + 1] = y
    return ts, out


def default_steps(grid, t_max):
    """Fixed RK4 step count: at least 400 per unit t and h * pi * z_max <= 0.04."""
    zmax = float(np.max(grid.z_nodes))
    per_unit = max(400.0, 25.0 * math.pi * zmax)
    return int(math.ceil(per_unit * (t_max - T0)))


def make_grid(alpha):
    """Grid for a positive alpha, or the point mass for alpha = inf / "point_mass"."""
    if alpha == "point_mass" or (isinstance(alpha, float) and math.isinf(alpha)):
        return PainleveGrid.from_point_mass()
    return PainleveGrid.from_alpha(alpha)


def evolve(grid, t_max, n_steps=None, check=True, tol=STEP_TOL):
    """Integrate the (q, p, log D) system from T0 to t_max with classical RK4.

    The same run is repeated with half the step; the log D discrepancy at
    t_max is stored as `step_error`. When `check` is set, a discrepancy above
    `tol` raises ConvergenceError; with the default step count the run is
    first refined up to MAX_AUTO_REFINE times.
    """
    if not 0 < t_max <= 4.0:
        raise ValueError(f"t_max must lie in (0, 4], got {t_max}")
    if not isinstance(grid, PainleveGrid):
        grid = make_grid(grid)
    auto = n_steps is None
    if auto:
        n_steps = default_steps(grid, t_max)
    n = grid.z_nodes.size
    while True:
        ts, ys = _integrate(grid, t_max, n_steps, T0)
        step_error = 0.0
        if not check:
            break
        _, fine = _integrate(grid, t_max, 2 * n_steps, T0)
        step_error = abs(fine[-1, -1] - ys[-1, -1])
        if step_error <= tol:
            break
        # default step counts are refined a few times before giving up
        if not auto or n_steps >= MAX_AUTO_REFINE * default_steps(grid, t_max):
            raise ConvergenceError(f"step halving changed log D by {step_error:.2e} (> {tol:.0e})")
        n_steps *= 2
    q, p = ys[:, :n], ys[:, n:2 * n]
    r_anti = -(q * p) @ grid.dw_weights / ts
    r_diag = -(grid.z_nodes * (p * p + math.pi ** 2 * q * q)) @ grid.dw_weights - 2.0 * ts * r_anti ** 2
    return Trajectory(grid, ts, q, p, ys[:, -1], r_diag, r_anti, step_error)


def reconstruct_log_d(traj):
    """log D(t) from the closed representation

        log D(t) = -2 t int w - int_0^t (t - s) c(s)^2 ds,   c(s) = int u(s, z) dw(z),

    written as t I1 - I2 with I1 = int c^2 and I2 = int s c^2. Both are
    accumulated by the cumulative Simpson rule over the stored (uniform)
    trajectory; the sliver (0, t0) adds t0 c(t0)^2 to I1 at O(t0^2) cost.
    """
    t = traj.t
    c2 = traj.coupling() ** 2
    t0 = t[0]
    i1 = t0 * c2[0] + cumulative_simpson(c2, x=t, initial=0.0)
    i2 = 0.5 * t0 * t0 * c2[0] + cumulative_simpson(t * c2, x=t, initial=0.0)
    return -2.0 * t * traj.grid.w_mass - (t * i1 - i2)


def _fd_derivs(f, h):
    """5-point first and second derivatives on interior points."""
    d1 = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d2 = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    return d1, d2


def squared_equation_sides(traj, i):
    """Both sides of the squared integro-differential equation at node i.

    Returns (t, lhs, rhs) on interior times, with f = t u(t, z_i):
        lhs = (f'' + 4 pi^2 z^2 f)^2,
        rhs = 4 c(t)^2 (f'^2 + 4 pi^2 z^2 f^2).
    """
    t = traj.t
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-15):
        raise ValueError("the residual needs a uniformly spaced trajectory")
    z = traj.grid.z_nodes[i]
    f = 2.0 * traj.p[:, i] * traj.q[:, i]
    d1, d2 = _fd_derivs(f, h)
    fi = f[2:-2]
    c = traj.coupling()[2:-2]
    lhs = (d2 + 4 * math.pi ** 2 * z * z * fi) ** 2
    rhs = 4 * c * c * (d1 * d1 + 4 * math.pi ** 2 * z * z * fi * fi)
    return t[2:-2], lhs, rhs


def residual_r38(traj, i, t_range=(0.1, 1.5), floor=1e-30):
    """max over t in t_range of |lhs - rhs| / (|lhs| + |rhs| + floor)."""
    t, lhs, rhs = squared_equation_sides(traj, i)
    sel = (t >= t_range[0]) & (t <= t_range[1])
    if not np.any(sel):
        raise ValueError("no trajectory points inside t_range")
    rel = np.abs(lhs - rhs)[sel] / (np.abs(lhs[sel]) + np.abs(rhs[sel]) + floor)
    return float(np.max(rel))


def log_d_second_derivative_check(traj, t_range=(0.2, 1.5), h_target=FD_STEP):
    """Max relative gap between finite-difference (log D)'' and -c(t)^2.

    The trajectory is subsampled to a difference step near `h_target`:
    finer steps amplify roundoff in log D, coarser ones truncation.
    """
    stride = max(1, int(round(h_target / (traj.t[1] - traj.t[0]))))
    t = traj.t[::stride]
    h = t[1] - t[0]
    _, d2 = _fd_derivs(traj.log_d[::stride], h)
    c = traj.coupling()[::stride][2:-2]
    tt = t[2:-2]
    sel = (tt >= t_range[0]) & (tt <= t_range[1])
    if not np.any(sel):
        raise ValueError("no trajectory points inside t_range")
    target = -c[sel] ** 2
    return float(np.max(np.abs(d2[sel] - target) / np.maximum(np.abs(target), 1e-300)))
