"""Green functions on D = (-1, 1): the closed form for the symmetric
stable process and a Monte Carlo occupation estimate for B_{S_t}.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .specfun import gamma_fn
from .streams import batch_sizes, map_tasks
from .subordinator import sample_relativistic

__all__ = [
    "GreenEstimate",
    "GreenReport",
    "green_stable_interval",
    "green_bin_average",
    "green_mc_estimate",
    "green_ratio_report",
    "expected_exit_time",
    "exit_time_guess",
    "BudgetError",
    "C_CAP",
]

C_CAP = 3.0
EXCLUSION = 0.1
MC_BATCH = 1000
N_BATCHES = 10


class BudgetError(RuntimeError):
    pass


def _kappa(beta):
    # d = 1 normalisation of the Riesz-type Green function
    return 1.0 / (2.0 ** beta * gamma_fn(beta / 2.0) ** 2)


def _riesz_integral(a, w):
    # int_0^w s^(a-1) (1+s)^(-1/2) ds
    return w ** a / a * special.hyp2f1(0.5, a, a + 1.0, -w)


def green_stable_interval(alpha2, x, y, rate=1.0):
    """Green function of D = (-1, 1) for the generator -rate (-Delta)^(alpha2/2).

    G = kappa |x-y|^(alpha2-1) int_0^w s^(alpha2/2-1) (1+s)^(-1/2) ds / rate,
    w = (1-x^2)(1-y^2)/(x-y)^2, kappa = 1 / (2^alpha2 Gamma(alpha2/2)^2).
    """
    beta = float(alpha2)
    if not 0.0 < beta < 2.0:
        raise ValueError("alpha2 must lie in (0, 2)")
    if not (-1.0 < x < 1.0 and -1.0 < y < 1.0):
        raise ValueError("x and y must lie in (-1, 1)")
    k = _kappa(beta)
    if x == y:
        if beta <= 1.0:
            raise ValueError("Green function is infinite on the diagonal for alpha2 <= 1")
        return k * (1.0 - x * x) ** (beta - 1.0) * 2.0 / (beta - 1.0) / rate
    w = (1.0 - x * x) * (1.0 - y * y) / (x - y) ** 2
    return k * abs(x - y) ** (beta - 1.0) * _riesz_integral(beta / 2.0, w) / rate


def green_bin_average(alpha2, x, lo, hi, rate=1.0):
    """Mean of G(x, .) over [lo, hi] ∩ D."""
    lo, hi = max(lo, -1.0), min(hi, 1.0)
    if hi <= lo:
        return 0.0
    pts = [x] if lo < x < hi else None
    val, _ = integrate.quad(lambda y: green_stable_interval(alpha2, x, y, rate) if y != x else 0.0,
                            lo, hi, points=pts, limit=200)
    return val / (hi - lo)


def expected_exit_time(alpha2, x, rate=1.0):
    """E_x tau_D = (1 - x^2)^(alpha2/2) / Gamma(1 + alpha2) / rate."""
    return (1.0 - x * x) ** (alpha2 / 2.0) / gamma_fn(1.0 + alpha2) / rate


def exit_time_guess(alpha, m, x):
    """Rough E_x tau_D for B_{S_t}: the stable value rescaled by
    phi_stable / phi_m at the first Dirichlet eigenvalue (pi/2)^2 of D."""
    rate = alpha / gamma_fn(1.0 - alpha)
    base = expected_exit_time(2.0 * alpha, x, rate)
    if m == 0:
        return base
    lam = (math.pi / 2.0) ** 2
    return base * lam ** alpha / ((lam + m) ** alpha - m ** alpha)


@dataclass
class GreenEstimate:
    x: float
    bins: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    n_paths: int
    h: float = float("nan")
    mean_exit_time: float = float("nan")

    @property
    def centers(self):
        return 0.5 * (self.bins[1:] + self.bins[:-1])


def _green_task(rng, index, alpha, m, x, edges, h, max_steps, sizes):
    n = sizes[index]
    pos = np.full(n, float(x))
    occ = np.zeros(edges.size - 1)
    steps_alive = 0
    for _ in range(max_steps):
        inside = np.abs(pos) < 1.0
        pos = pos[inside]
        if pos.size == 0:
            break
        steps_alive += pos.size
        k = np.searchsorted(edges, pos, side="right") - 1
        k = k[(k >= 0) & (k < occ.size)]
        occ += np.bincount(k, minlength=occ.size)
        ds = sample_relativistic(alpha, m, h, rng, size=pos.size)
        pos = pos + np.sqrt(2.0 * ds) * rng.standard_normal(pos.size)
    else:
        if np.any(np.abs(pos) < 1.0):
            raise BudgetError("paths still inside D after the step budget")
    return occ * h, steps_alive * h


def green_mc_estimate(alpha, m, x, bins, n_paths, master_seed, h=2e-3, workers=1,
                      max_time=400.0, batch=None):
    """Occupation density of B_{S_t} killed on leaving D = (-1, 1).

    Paths start at x and move on a grid of step h in the subordinator
    clock; each grid time spent inside D adds h to the bin holding the
    current position.  Paths are split into batches of
    max(MC_BATCH, n_paths / N_BATCHES); batch b uses substream b of
    ``master_seed`` and the per-bin standard error comes from the spread
    of batch means.
    """
    if not -1.0 < x < 1.0:
        raise ValueError("x must lie in D = (-1, 1)")
    if n_paths < 1000:
        raise ValueError("n_paths must be at least 1000")
    edges = np.asarray(bins, dtype=float)
    guess = exit_time_guess(alpha, m, x)
    max_steps = int(math.ceil(max_time / h))
    if guess > max_time / 10.0:
        raise BudgetError(f"expected exit time {guess:.3g} exceeds the runtime cap")
    if batch is None:
        batch = max(MC_BATCH, -(-int(n_paths) // N_BATCHES))
    sizes = batch_sizes(n_paths, batch)
    res = map_tasks(_green_task, len(sizes), master_seed, workers,
                    (float(alpha), float(m), float(x), edges, float(h), max_steps, sizes))
    width = np.diff(edges)
    occ = np.array([r[0] for r in res])
    nb = np.array(sizes, dtype=float)
    per_batch = occ / nb[:, None] / width
    values = occ.sum(axis=0) / n_paths / width
    if len(sizes) > 1:
        # weighted batch-means variance
        var = np.sum(nb[:, None] * (per_batch - values) ** 2, axis=0) / (len(sizes) - 1)
        stderr = np.sqrt(var / n_paths)
    else:
        stderr = np.full(values.shape, np.nan)
    mean_exit = sum(r[1] for r in res) / n_paths
    return GreenEstimate(float(x), edges, values, stderr, int(n_paths), float(h), mean_exit)


@dataclass
class GreenReport:
    ok: bool
    min_ratio: float
    max_ratio: float
    ratios: np.ndarray = field(repr=False)
    used: np.ndarray = field(repr=False)
    reference: np.ndarray = field(repr=False)


def green_ratio_report(est, alpha2, rate=1.0, c_cap=C_CAP, exclusion=EXCLUSION):
    """Min/max of estimate / closed form over interior bins.

    Bins whose centre lies within ``exclusion`` of the boundary or of the
    source point are left out; the closed form is averaged over each bin.
    """
    c = est.centers
    used = (np.abs(c) <= 1.0 - exclusion) & (np.abs(c - est.x) >= exclusion)
    ref = np.array([
        green_bin_average(alpha2, est.x, lo, hi, rate) if u else np.nan
        for lo, hi, u in zip(est.bins[:-1], est.bins[1:], used)
    ])
    ratios = np.where(used, est.values / np.where(used, ref, 1.0), np.nan)
    if not used.any():
        return GreenReport(False, math.nan, math.nan, ratios, used, ref)
    lo = float(np.nanmin(ratios[used]))
    hi = float(np.nanmax(ratios[used]))
    ok = lo >= 1.0 / c_cap and hi <= c_cap
    return GreenReport(ok, lo, hi, ratios, used, ref)
