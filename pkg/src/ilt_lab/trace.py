"""Levy densities of subordinate Brownian motions B_{S_t}.

B has variance 2t per coordinate, so the subordinated density is
mu(r) = int_0^inf (4 pi t)^(-d/2) exp(-r^2 / (4t)) nu(t) dt.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .specfun import c_alpha, gamma_fn
from .subordinator import (
    Difference,
    RelativisticDensity,
    StableDensity,
    levy_density_eval,
    sample_relativistic,
)

__all__ = [
    "TraceLevyDensity",
    "subordinated_levy_density",
    "stable_trace_density",
    "j_difference",
    "j_bound_check",
    "JBoundReport",
    "sample_trace_path",
]

# s = r^2/(4t) ranges over [S_MIN, S_MAX]; beyond S_MAX exp(-s) underflows
S_MIN = 1e-32
S_MAX = 745.0


def subordinated_levy_density(nu, d, r, rtol=1e-11):
    """Radial density of B_{S} for the subordinator Levy density ``nu``.

    The integral is taken in u = log s with s = r^2/(4t), split at s = 1
    (t = r^2/4); the integrand there is smooth and decays at both ends.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if d < 1 or int(d) != d:
        raise ValueError("d must be a positive integer")
    r2 = r * r
    pref = (math.pi * r2) ** (-d / 2.0) * r2 / 4.0

    def f(u):
        s = math.exp(u)
        return pref * s ** (d / 2.0 - 1.0) * math.exp(-s) * levy_density_eval(nu, r2 / (4.0 * s))

    total = 0.0
    for a, b in ((math.log(S_MIN), 0.0), (0.0, math.log(S_MAX))):
        val, err = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=400)
        if not math.isfinite(val):
            raise ArithmeticError("quadrature failed")
        total += val
    return total


def stable_trace_density(alpha, d, r):
    """Closed form c_alpha 4^alpha pi^(-d/2) Gamma(d/2 + alpha) r^(-d - 2 alpha)."""
    return (c_alpha(alpha) * 4.0 ** alpha * math.pi ** (-d / 2.0)
            * gamma_fn(d / 2.0 + alpha) * r ** (-d - 2.0 * alpha))


@dataclass(frozen=True)
class TraceLevyDensity:
    d: int
    nu: object

    def eval(self, r, rtol=1e-11):
        return subordinated_levy_density(self.nu, self.d, r, rtol)


def j_difference(alpha, m, d, r, rtol=1e-11):
    """mu_stable(r) - mu_relativistic(r), computed as one integral."""
    if m == 0:
        return 0.0
    return subordinated_levy_density(
        Difference(StableDensity(alpha), RelativisticDensity(alpha, m)), d, r, rtol
    )


@dataclass
class JBoundReport:
    ok: bool
    C_effective: float
    C_refined: float
    rate: float
    fitted_slope: float
    proof_constant: float
    details: dict = field(default_factory=dict, repr=False)


def _c_eff(alpha, m, d, r, rtol):
    j = np.array([j_difference(alpha, m, d, v, rtol) for v in r])
    return float(np.max(j * r ** (d + 2.0 * alpha - 2.0))), j


def j_bound_check(alpha, m, d, r_grid, rtol=1e-9):
    """C_eff = sup_grid j(r) r^(d + 2 alpha - 2), checked for stability.

    The check is repeated on a grid with log-midpoints inserted and a ten
    times tighter quadrature tolerance; ok iff C_eff is finite and both
    values agree within 1%.  ``fitted_slope`` is the log-log slope of j
    over the lowest decade of the grid, to compare with the rate
    2 - 2 alpha - d.  ``proof_constant`` is c_alpha m 4^(alpha-1)
    pi^(-d/2) Gamma(d/2 + alpha - 1) when that Gamma argument is positive
    (nan otherwise).
    """
    r = np.sort(np.asarray(r_grid, dtype=float))
    if r.size < 2 or r[0] <= 0 or r[-1] > 1:
        raise ValueError("r_grid must lie in (0, 1] with at least two points")
    rate = 2.0 - 2.0 * alpha - d
    if d / 2.0 + alpha - 1.0 > 0:
        proof = (c_alpha(alpha) * m * 4.0 ** (alpha - 1.0) * math.pi ** (-d / 2.0)
                 * gamma_fn(d / 2.0 + alpha - 1.0))
    else:
        proof = math.nan
    if m == 0:
        return JBoundReport(True, 0.0, 0.0, rate, math.nan, proof)
    c0, j = _c_eff(alpha, m, d, r, rtol)
    mids = np.sqrt(r[1:] * r[:-1])
    fine = np.sort(np.concatenate([r, mids]))
    c1, _ = _c_eff(alpha, m, d, fine, rtol / 10.0)
    low = r <= r[0] * 10.0
    if np.count_nonzero(low) >= 2:
        slope = float(np.polyfit(np.log(r[low]), np.log(j[low]), 1)[0])
    else:
        slope = float(np.polyfit(np.log(r[:2]), np.log(j[:2]), 1)[0])
    ok = math.isfinite(c0) and math.isfinite(c1) and abs(c1 - c0) <= 0.01 * abs(c0)
    return JBoundReport(ok, c0, c1, rate, slope, proof, {"r": r, "j": j})


def sample_trace_path(alpha, m, d, t_grid, rng, n_paths=None):
    """Positions B_{S_t} at the times in ``t_grid`` (starting from 0 at t=0).

    Returns an array (d, len(t_grid)), or (n_paths, d, len(t_grid)).
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t) < 0) or (t.size and t[0] < 0):
        raise ValueError("t_grid must be nonnegative and increasing")
    gaps = np.diff(np.concatenate([[0.0], t]))
    n = 1 if n_paths is None else int(n_paths)
    pos = np.zeros((n, d, t.size))
    cur = np.zeros((n, d))
    for k, g in enumerate(gaps):
        if g > 0:
            ds = sample_relativistic(alpha, m, g, rng, size=n)
            cur = cur + np.sqrt(2.0 * ds)[:, None] * rng.standard_normal((n, d))
        pos[:, :, k] = cur
    return pos[0] if n_paths is None else pos
