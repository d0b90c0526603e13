"""Laplace exponents, Levy densities and exact samplers of subordinators,
plus numerical checks for complete monotonicity and stochastic dominance.

Every subordinator here is driftless and has no killing term, so
phi(lam) = int_0^inf (1 - exp(-lam t)) nu(t) dt.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .specfun import c_alpha, gamma_fn

__all__ = [
    "Stable",
    "RelativisticStable",
    "EsscherShift",
    "Empirical",
    "StableDensity",
    "RelativisticDensity",
    "Difference",
    "SubordinatorSample",
    "phi_eval",
    "esscher",
    "levy_density_eval",
    "levy_tail",
    "sample_stable",
    "sample_relativistic",
    "phi_derivative",
    "complete_monotonicity_check",
    "bernstein_check",
    "stochastic_dominance_check",
    "levy_sandwich_check",
    "CMReport",
    "DominanceReport",
    "SandwichReport",
    "SamplerBudgetError",
    "KS_COEF_99",
]

# acceptance below this rate is refused by the Esscher rejection sampler
MIN_ACCEPTANCE = 1e-6
# one-sided two-sample KS critical coefficient at 99%: sqrt(-ln(0.01)/2)
KS_COEF_99 = math.sqrt(-math.log(0.01) / 2.0)


class SamplerBudgetError(RuntimeError):
    pass


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"stable index must lie in (0, 1), got {alpha}")


# ------------------------------------------------------------ exponents

@dataclass(frozen=True)
class Stable:
    alpha: float

    def __post_init__(self):
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class RelativisticStable:
    alpha: float
    m: float

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.m < 0:
            raise ValueError("mass must be >= 0")


@dataclass(frozen=True)
class EsscherShift:
    base: object
    m: float


@dataclass(frozen=True)
class Empirical:
    """Tabulated exponent, interpolated linearly in log(lambda)."""

    lambda_grid: tuple
    phi_values: tuple

    def __init__(self, lambda_grid, phi_values):
        lg = tuple(float(v) for v in lambda_grid)
        pv = tuple(float(v) for v in phi_values)
        if len(lg) != len(pv) or len(lg) < 2:
            raise ValueError("grid and values must have equal length >= 2")
        if lg[0] <= 0 or any(b <= a for a, b in zip(lg, lg[1:])):
            raise ValueError("lambda_grid must be positive and strictly increasing")
        object.__setattr__(self, "lambda_grid", lg)
        object.__setattr__(self, "phi_values", pv)

    def is_bernstein_like(self, tol=1e-12):
        """phi nondecreasing and concave on the grid (chordal slopes)."""
        lam = np.asarray(self.lambda_grid)
        phi = np.asarray(self.phi_values)
        slopes = np.diff(phi) / np.diff(lam)
        return bool(np.all(slopes >= -tol) and np.all(np.diff(slopes) <= tol))


def phi_eval(phi, lam):
    """Evaluate the Laplace exponent ``phi`` at ``lam >= 0``."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if isinstance(phi, Stable):
        return c_alpha(phi.alpha) * lam ** phi.alpha
    if isinstance(phi, RelativisticStable):
        a = phi.alpha
        return c_alpha(a) * ((lam + phi.m) ** a - phi.m ** a)
    if isinstance(phi, EsscherShift):
        return phi_eval(phi.base, lam + phi.m) - phi_eval(phi.base, phi.m)
    if isinstance(phi, Empirical):
        if lam == 0.0:
            return 0.0
        grid = phi.lambda_grid
        if not grid[0] * (1 - 1e-12) <= lam <= grid[-1] * (1 + 1e-12):
            raise ValueError(
                f"lambda={lam} outside empirical grid [{grid[0]}, {grid[-1]}]"
            )
        return float(np.interp(math.log(lam), np.log(grid), phi.phi_values))
    raise TypeError(f"not a Laplace exponent: {phi!r}")


def phi_derivative(phi, lam):
    """phi'(lam) for the closed-form exponents (lam > 0)."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    if isinstance(phi, Stable):
        return c_alpha(phi.alpha) * phi.alpha * lam ** (phi.alpha - 1.0)
    if isinstance(phi, RelativisticStable):
        return c_alpha(phi.alpha) * phi.alpha * (lam + phi.m) ** (phi.alpha - 1.0)
    if isinstance(phi, EsscherShift):
        return phi_derivative(phi.base, lam + phi.m)
    raise TypeError(f"no closed-form derivative for {phi!r}")


def esscher(phi, m):
    """Esscher transform: the exponent lam -> phi(lam + m) - phi(m).

    Closed-form families are kept closed form and nested shifts are
    collapsed, so composition is exact in floating point.
    """
    if m < 0:
        raise ValueError("mass must be >= 0")
    if m == 0:
        return phi
    if isinstance(phi, Stable):
        return RelativisticStable(phi.alpha, m)
    if isinstance(phi, RelativisticStable):
        return RelativisticStable(phi.alpha, phi.m + m)
    if isinstance(phi, EsscherShift):
        return EsscherShift(phi.base, phi.m + m)
    return EsscherShift(phi, m)


# ------------------------------------------------------------ Levy densities

@dataclass(frozen=True)
class StableDensity:
    alpha: float

    def __post_init__(self):
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class RelativisticDensity:
    alpha: float
    m: float

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.m < 0:
            raise ValueError("mass must be >= 0")


@dataclass(frozen=True)
class Difference:
    a: object
    b: object


def levy_density_eval(nu, t):
    """Levy density value at ``t > 0``; a Difference may be negative."""
    if not t > 0:
        raise ValueError("t must be positive")
    if isinstance(nu, StableDensity):
        return c_alpha(nu.alpha) * t ** (-1.0 - nu.alpha)
    if isinstance(nu, RelativisticDensity):
        a = nu.alpha
        return c_alpha(a) * t ** (-1.0 - a) * math.exp(-nu.m * t)
    if isinstance(nu, Difference):
        if _is_stable_minus_relativistic(nu):
            a, m = nu.a.alpha, nu.b.m
            return c_alpha(a) * t ** (-1.0 - a) * -math.expm1(-m * t)
        return levy_density_eval(nu.a, t) - levy_density_eval(nu.b, t)
    raise TypeError(f"not a Levy density: {nu!r}")


def _is_stable_minus_relativistic(nu):
    return (
        isinstance(nu.a, StableDensity)
        and isinstance(nu.b, RelativisticDensity)
        and nu.a.alpha == nu.b.alpha
    )


def levy_tail(nu, s, rtol=1e-10):
    """Tail mass nu((s, inf))."""
    if s <= 0:
        raise ValueError("tail mass diverges at s = 0")
    if isinstance(nu, StableDensity):
        return s ** (-nu.alpha) / gamma_fn(1.0 - nu.alpha)
    if isinstance(nu, RelativisticDensity) and nu.m == 0:
        return levy_tail(StableDensity(nu.alpha), s)
    f = lambda t: levy_density_eval(nu, t)
    # integrate in u = log t; the integrand decays at least like t**-alpha
    g = lambda u: f(math.exp(u)) * math.exp(u)
    lo = math.log(s)
    cuts = [lo, lo + 5.0, lo + 50.0, max(lo + 50.0, 700.0)]
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        if b > a:
            total += integrate.quad(g, a, b, epsabs=0.0, epsrel=rtol, limit=400)[0]
    return total


# ------------------------------------------------------------ sampling

@dataclass
class SubordinatorSample:
    t: float
    draws: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)
        if self.draws.size and not np.all(self.draws > 0):
            raise ValueError("subordinator draws must be positive")


def _standard_positive_stable(alpha, rng, size):
    # Kanter's representation: E exp(-lam S) = exp(-lam**alpha)
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    a = (np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)) * (
        np.sin((1.0 - alpha) * u) / e
    ) ** ((1.0 - alpha) / alpha)
    return a


def sample_stable(alpha, t, rng, size=None):
    """Draw S_t with E exp(-lam S_t) = exp(-t c_alpha lam**alpha)."""
    _check_alpha(alpha)
    if not t > 0:
        raise ValueError("t must be positive")
    n = 1 if size is None else size
    draws = _standard_positive_stable(alpha, rng, n) * (c_alpha(alpha) * t) ** (1.0 / alpha)
    # u = 0 exactly would give 0; the uniform never hits it in practice
    draws = np.maximum(draws, np.finfo(float).tiny)
    return float(draws[0]) if size is None else draws


def sample_relativistic(alpha, m, t, rng, size=None):
    """Draw S_t of the relativistic stable subordinator by Esscher rejection:
    propose from the stable law, accept with probability exp(-m S)."""
    _check_alpha(alpha)
    if m < 0:
        raise ValueError("mass must be >= 0")
    if m == 0:
        return sample_stable(alpha, t, rng, size)
    rate = math.exp(-t * c_alpha(alpha) * m ** alpha)
    if rate < MIN_ACCEPTANCE:
        raise SamplerBudgetError(
            f"acceptance rate {rate:.3g} below {MIN_ACCEPTANCE:g}; reduce t or m"
        )
    n = 1 if size is None else size
    out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        batch = max(16, int(need / rate * 1.1) + 8)
        prop = sample_stable(alpha, t, rng, batch)
        keep = prop[rng.uniform(size=batch) < np.exp(-m * prop)]
        take = min(need, keep.size)
        out[filled:filled + take] = keep[:take]
        filled += take
    return float(out[0]) if size is None else out


# ------------------------------------------------------------ checks

@dataclass
class CMReport:
    ok: bool
    worst_violation: float
    failed_order: Optional[int] = None


def complete_monotonicity_check(f, grid, order):
    """Check (-1)**k f[x_i, ..., x_{i+k}] >= -tol for k = 0..order."""
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < order + 1:
        raise ValueError("grid too short for requested order")
    if not (np.all(x > 0) and np.all(np.diff(x) > 0)):
        raise ValueError("grid must be positive and strictly increasing")
    if not 0 <= order <= 6:
        raise ValueError("order must be in 0..6")
    dd = np.array([float(f(v)) for v in x])
    tol = 1e-9 * abs(dd[0]) + 1e-12
    worst = 0.0
    failed = None
    for k in range(order + 1):
        if k > 0:
            dd = (dd[1:] - dd[:-1]) / (x[k:] - x[:-k])
        signed = (-1) ** k * dd
        viol = float(np.max(-signed))
        if viol > worst:
            worst = viol
        if viol > tol and failed is None:
            failed = k
    return CMReport(failed is None, worst, failed)


def bernstein_check(f, fprime, grid, order):
    """f >= 0 on the grid and f' completely monotone up to ``order``.

    This is the Bernstein property of a difference of exponents whose
    Levy densities are ordered; f itself is then increasing, hence not CM.
    """
    vals = np.array([float(f(v)) for v in np.asarray(grid, dtype=float)])
    neg = float(max(0.0, np.max(-vals)))
    rep = complete_monotonicity_check(fprime, grid, order)
    tol = 1e-9 * abs(vals[0]) + 1e-12
    if neg > tol:
        return CMReport(False, max(neg, rep.worst_violation), 0)
    return rep


@dataclass
class DominanceReport:
    ok: bool
    max_cdf_crossing: float
    critical_value: float


def stochastic_dominance_check(lower, upper, min_draws=100):
    """One-sided test that ``lower`` is stochastically smaller than ``upper``.

    ok iff sup_s (F_upper(s) - F_lower(s)) stays within the 99% one-sided
    Kolmogorov-Smirnov band.  Infinite draws (censored) never enter a CDF.
    """
    if lower.t != upper.t:
        raise ValueError("samples must be taken at the same local-time level")
    a = np.sort(lower.draws)
    b = np.sort(upper.draws)
    if a.size < min_draws or b.size < min_draws:
        raise ValueError(f"need at least {min_draws} draws per sample")
    pts = np.concatenate([a, b])
    pts = pts[np.isfinite(pts)]
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    crossing = float(max(0.0, np.max(fb - fa))) if pts.size else 0.0
    crit = KS_COEF_99 * math.sqrt((a.size + b.size) / (a.size * b.size))
    return DominanceReport(crossing <= crit, crossing, crit)


@dataclass
class SandwichReport:
    ok: bool
    lower_violation: float
    upper_violation: float
    grid: np.ndarray = field(repr=False)
    details: dict = field(default_factory=dict, repr=False)


def levy_sandwich_check(alpha, m, t_grid, empirical_tail=None, band=None):
    """Check the Levy-measure sandwich.

    Without ``empirical_tail`` the closed-form pair is checked pointwise:
    0 <= nu_stable - nu_rel <= c_alpha (1 - exp(-m t)) / t**(1+alpha).
    With ``empirical_tail`` (tail masses at ``t_grid``) the tail sandwich
    nu_rel((s,inf)) - band <= empirical <= nu_stable((s,inf)) + band is checked.
    """
    _check_alpha(alpha)
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise ValueError("grid must be positive")
    ca = c_alpha(alpha)
    if empirical_tail is None:
        diff = np.array([
            levy_density_eval(StableDensity(alpha), s)
            - levy_density_eval(RelativisticDensity(alpha, m), s)
            for s in t
        ])
        bound = ca * -np.expm1(-m * t) / t ** (1.0 + alpha)
        scale = np.maximum(np.abs(bound), 1e-300)
        low = float(np.max(np.maximum(-diff, 0.0) / scale))
        up = float(np.max(np.maximum(diff - bound, 0.0) / scale))
        ok = low <= 1e-12 and up <= 1e-12
        return SandwichReport(ok, low, up, t, {"difference": diff, "bound": bound})
    emp = np.asarray(empirical_tail, dtype=float)
    bw = np.zeros_like(emp) if band is None else np.broadcast_to(np.asarray(band, float), emp.shape)
    lo = np.array([levy_tail(RelativisticDensity(alpha, m), s) for s in t])
    hi = np.array([levy_tail(StableDensity(alpha), s) for s in t])
    low = float(np.max(np.maximum(lo - bw - emp, 0.0)))
    up = float(np.max(np.maximum(emp - hi - bw, 0.0)))
    return SandwichReport(
        low == 0.0 and up == 0.0, low, up, t,
        {"empirical": emp, "relativistic_tail": lo, "stable_tail": hi, "band": bw},
    )
