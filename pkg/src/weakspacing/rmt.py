"""Monte-Carlo side: elliptic Ginibre sampling, spectra, real-part spacings
under the weak non-Hermiticity scaling, and goodness-of-fit statistics.

Matrices are normalized so that E|M_jk|^2 = 1/n; the spectrum then fills the
ellipse with semi-axes 1 + tau and 1 - tau.
"""
import csv
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .errors import ConvergenceError
from .fredholm import spacing_curve
from .quadrature import composite_rule, gauss_legendre, map_rule
from .specfun import reg_gamma_q

MAX_N = 1024
RESIDUAL_TOL = 1e-8
MIN_KS_SAMPLES = 100
SKIP_WARN = 0.01


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    tau: float
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 <= self.tau < 1.0:
            raise ValueError(f"tau must lie in [0, 1), got {self.tau!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def weak(cls, n, sigma, lambda0=0.0, seed=0):
        """Weak non-Hermiticity: tau = weak_tau(n, sigma, lambda0)."""
        return cls(n, weak_tau(n, sigma, lambda0), seed)


@dataclass
class SpectrumSample:
    eigenvalues: np.ndarray
    config: Optional[EnsembleConfig] = None
    residual: float = 0.0


@dataclass(frozen=True)
class DensityProfile:
    """Limiting densities of the real parts.

    kind "ginue" (tau = 0), "elliptic" (fixed tau), or "weak" (tau -> 1,
    the semicircle of radius 2). All are normalized to unit mass.
    """

    kind: str
    tau: float = 0.0

    def __post_init__(self):
        if self.kind not in ("ginue", "elliptic", "weak"):
            raise ValueError(f"unknown density kind {self.kind!r}")

    @property
    def half_width(self):
        if self.kind == "ginue":
            return 1.0
        if self.kind == "weak":
            return 2.0
        return 1.0 + self.tau

    def evaluate(self, x):
        a = self.half_width
        x = np.asarray(x, dtype=float)
        out = 2.0 / (math.pi * a) * np.sqrt(np.clip(1.0 - (x / a) ** 2, 0.0, None))
        return out[()] if out.ndim == 0 else out

    def integral(self, m=64):
        a = self.half_width
        # substitute x = a sin(theta) to remove the square-root endpoints
        rule = map_rule(gauss_legendre(m), -0.5 * math.pi, 0.5 * math.pi)
        th = rule.nodes
        return float(np.dot(rule.weights, self.evaluate(a * np.sin(th)) * a * np.cos(th)))


def weak_tau(n, sigma, lambda0=0.0):
    """tau_n = 1 - (sigma / rho_1(lambda0))^2 / n."""
    if not abs(lambda0) < 2.0:
        raise ValueError(f"lambda0 must lie inside (-2, 2), got {lambda0}")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    c = (sigma / DensityProfile("weak").evaluate(lambda0)) ** 2
    if not n > c:
        raise ValueError(f"n = {n} too small: weak scaling needs n > {c:.6g}")
    return 1.0 - c / n


def _stream(seed, index):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def _gue(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    # diagonal variance 1/(2n), off-diagonal real and imaginary parts 1/(4n)
    return (g + g.conj().T) * (0.5 / math.sqrt(2.0 * n))


def sample_eginue(config, index=0):
    """Replicate `index` of the elliptic ensemble: sqrt(1+tau) H1 + i sqrt(1-tau) H2."""
    rng = _stream(config.seed, index)
    n, tau = config.n, config.tau
    h1 = _gue(rng, n)
    h2 = _gue(rng, n)
    return math.sqrt(1.0 + tau) * h1 + 1j * math.sqrt(1.0 - tau) * h2


def eigenvalues(matrix, config=None, check=True):
    """Dense non-Hermitian eigensolve (LAPACK geev) with an eigenpair residual check."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("eigenvalues needs a square matrix")
    if matrix.shape[0] > MAX_N:
        raise ValueError(f"matrix dimension above {MAX_N}")
    try:
        if not check:
            return SpectrumSample(np.linalg.eigvals(matrix), config)
        lam, vec = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    scale = np.linalg.norm(matrix, 2)
    residual = float(np.max(np.linalg.norm(matrix @ vec - vec * lam, axis=0))) if lam.size else 0.0
    if residual > RESIDUAL_TOL * max(scale, np.finfo(float).tiny):
        raise ConvergenceError(f"eigenpair residual {residual:.2e} exceeds {RESIDUAL_TOL:g} |M|")
    return SpectrumSample(lam, config, residual / max(scale, np.finfo(float).tiny))


def sample_spectra(config, reps, check=True):
    """(reps, n) complex array of spectra, replicate k drawn from stream k."""
    out = np.empty((reps, config.n), dtype=complex)
    for k in range(reps):
        out[k] = eigenvalues(sample_eginue(config, k), config, check).eigenvalues
    return out


@dataclass
class SpacingResult:
    spacings: np.ndarray
    skipped: int
    total: int
    method: str
    params: dict = field(default_factory=dict)

    @property
    def skip_fraction(self):
        return self.skipped / self.total if self.total else 0.0


def _real_parts(sample):
    ev = sample.eigenvalues if isinstance(sample, SpectrumSample) else sample
    return np.sort(np.real(np.asarray(ev)))


def bulk_real_spacings(samples, lambda0, unfold, window=0.1, method="window"):
    """Unfolded gaps between consecutive real parts near lambda0.

    `unfold` is n * rho(lambda0). With method "nearest" each sample gives the
    gap to the right of the real part closest to lambda0 inside the window.
    With "window" it gives every gap whose left endpoint lies in the window.
    Samples with no usable gap are skipped and counted.
    """
    if not 0 < window <= 0.2:
        raise ValueError(f"window must lie in (0, 0.2], got {window}")
    if method not in ("window", "nearest"):
        raise ValueError(f"unknown spacing method {method!r}")
    gaps, skipped, total = [], 0, 0
    for sample in samples:
        total += 1
        x = _real_parts(sample)
        lo = np.searchsorted(x, lambda0 - window, side="left")
        hi = np.searchsorted(x, lambda0 + window, side="right")
        hi = min(hi, x.size - 1)  # a left endpoint needs a right neighbour
        if hi <= lo:
            skipped += 1
            continue
        if method == "window":
            gaps.append(x[lo + 1:hi + 1] - x[lo:hi])
        else:
            j = lo + int(np.argmin(np.abs(x[lo:hi] - lambda0)))
            gaps.append(x[j + 1:j + 2] - x[j:j + 1])
    spacings = np.concatenate(gaps) * unfold if gaps else np.zeros(0)
    res = SpacingResult(spacings, skipped, total, method,
                        {"lambda0": lambda0, "unfold": unfold, "window": window})
    if res.skip_fraction > SKIP_WARN:
        warnings.warn(f"{res.skip_fraction:.1%} of samples had no real part near {lambda0}",
                      RuntimeWarning, stacklevel=2)
    return res


def ks_distance(samples, cdf):
    """Sup distance between the empirical CDF of `samples` and `cdf`.

    `cdf` must accept a sorted numpy array and return values of the same shape.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < MIN_KS_SAMPLES:
        raise ValueError(f"KS distance needs at least {MIN_KS_SAMPLES} samples, got {n}")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))


def tabulated_law(sigma, s_max=8.0, ds=0.01, m=80):
    """Vectorized CDF of the weak spacing law by interpolation of a dense table.

    Past s_max the CDF is taken as 1; sigma = inf is the exact Poisson law.
    """
    if math.isinf(sigma):
        return lambda s: -np.expm1(-np.maximum(np.asarray(s, dtype=float), 0.0))
    grid = np.arange(0.0, s_max + 0.5 * ds, ds)
    cdf = np.maximum.accumulate(spacing_curve(sigma, grid, m).cdf)

    def law(s):
        return np.interp(np.asarray(s, dtype=float), grid, cdf, left=0.0, right=1.0)

    return law


def poisson_law(s):
    return -np.expm1(-np.maximum(np.asarray(s, dtype=float), 0.0))


def ginue_line_density(n, x, panel=0.05, m_per_panel=16):
    """Exact finite-n density of Re(lambda) for the GinUE normalized to E|M_jk|^2 = 1/n:

        (1/pi) int_{-2}^{2} Q(n, n (x^2 + y^2)) dy,

    with Q the regularized upper incomplete gamma function.
    """
    if int(n) != n or not 1 <= n <= 500:
        raise ValueError(f"n must be an integer in [1, 500], got {n!r}")
    x = np.asarray(x, dtype=float)
    rule = composite_rule(np.linspace(0.0, 2.0, int(round(2.0 / panel)) + 1), m_per_panel)
    y2 = rule.nodes ** 2
    vals = reg_gamma_q(int(n), n * (x.reshape(-1, 1) ** 2 + y2[None, :]))
    out = (2.0 / math.pi) * (vals @ rule.weights)
    out = out.reshape(x.shape)
    return out[()] if out.ndim == 0 else out


def histogram_chi2(real_parts, n, bins=20, lo=-1.0, hi=1.0, m_per_bin=8):
    """Chi-square test of a real-part histogram against ginue_line_density.

    The (lo, hi) bins are complemented by one bin for the outside, so the
    expected counts sum to the sample size. Returns (statistic, dof, p-value).
    """
    x = np.asarray(real_parts, dtype=float)
    edges = np.linspace(lo, hi, bins + 1)
    observed, _ = np.histogram(x, edges)
    rule = composite_rule(edges, m_per_bin)
    dens = ginue_line_density(n, rule.nodes)
    probs = (rule.weights * dens).reshape(bins, m_per_bin).sum(axis=1)
    observed = np.append(observed, x.size - observed.sum())
    probs = np.append(probs, max(1.0 - probs.sum(), 0.0))
    expected = probs * x.size
    keep = expected > 0
    stat = float(np.sum((observed[keep] - expected[keep]) ** 2 / expected[keep]))
    dof = int(keep.sum()) - 1
    return stat, dof, float(stats.chi2.sf(stat, dof))


def pair_moment(tau, n=200, pairs=100_000, seed=0):
    """Estimate n E[M_jk M_kj] over j < k pairs; returns (mean, standard error)."""
    config = EnsembleConfig(n, tau, seed)
    iu = np.triu_indices(n, 1)
    vals = []
    k = 0
    while sum(v.size for v in vals) < pairs:
        m = sample_eginue(config, k)
        vals.append(n * np.real(m[iu] * m.T[iu]))
        k += 1
    v = np.concatenate(vals)[:pairs]
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def ellipse_fraction(eigs, tau, slack=1.15):
    """Fraction of eigenvalues with (Re/(1+tau))^2 + (Im/(1-tau))^2 <= slack."""
    eigs = np.asarray(eigs)
    r = (eigs.real / (1.0 + tau)) ** 2 + (eigs.imag / (1.0 - tau)) ** 2
    return float(np.mean(r <= slack))


def _fmt(v):
    return format(float(v), ".17g")


def write_spacings_csv(path, spacings):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s"])
        w.writerows([_fmt(s)] for s in spacings)


def write_spectrum_csv(path, eigs):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im"])
        w.writerows([_fmt(z.real), _fmt(z.imag)] for z in np.asarray(eigs, dtype=complex).ravel())


@dataclass(frozen=True)
class SpacingExperiment:
    """A full Monte-Carlo spacing run. Exactly one of sigma and tau is set."""

    n: int = 200
    reps: int = 2000
    seed: int = 42
    sigma: Optional[float] = None
    tau: Optional[float] = None
    lambda0: float = 0.0
    window: float = 0.1
    method: str = "window"

    def config(self):
        if (self.sigma is None) == (self.tau is None):
            raise ValueError("set exactly one of sigma and tau")
        if self.sigma is not None:
            return EnsembleConfig.weak(self.n, self.sigma, self.lambda0, self.seed)
        return EnsembleConfig(self.n, self.tau, self.seed)

    def density(self):
        if self.sigma is not None:
            return DensityProfile("weak")
        return DensityProfile("ginue") if self.tau == 0 else DensityProfile("elliptic", self.tau)

    def run(self, check=True):
        cfg = self.config()
        spectra = sample_spectra(cfg, self.reps, check)
        unfold = self.n * float(self.density().evaluate(self.lambda0))
        res = bulk_real_spacings(spectra, self.lambda0, unfold, self.window, self.method)
        res.params.update(asdict(self), tau_used=cfg.tau)
        return res, spectra


def ks_summary(spacings, laws):
    """KS distance of `spacings` to each named CDF in `laws`."""
    return {name: ks_distance(spacings, law) for name, law in laws.items()}
