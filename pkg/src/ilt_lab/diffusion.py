"""Reflected diffusions on [0, inf) with generator 1/2 d^2/dx^2 + b(x) d/dx.

Paths are simulated by reflected Euler-Maruyama (or exactly, for the pure
Bessel process), local time at 0 is approximated by counting downcrossings
of a small band [eps/2, eps], and the inverse local time is read off the
downcrossing times.  Bulk runs split paths into fixed-size batches, each
with its own random substream, so results do not depend on worker count.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special

from . import kernels
from .csvio import write_csv
from .specfun import drift_ratio, gamma_fn, rho_m
from .streams import batch_sizes, derive_substream, map_tasks
from .subordinator import SubordinatorSample

__all__ = [
    "Bessel",
    "RelativisticBessel",
    "Perturbed",
    "PowerPerturbation",
    "power_perturbation",
    "SamplePath",
    "LocalTimeEstimate",
    "InverseLocalTime",
    "EventTable",
    "CoupledRun",
    "GaugeCalibration",
    "drift_eval",
    "simulate_reflected",
    "simulate_bessel_exact",
    "simulate_coupled",
    "calibrate_gauge",
    "local_time",
    "inverse_local_time",
    "empirical_laplace_ratio",
    "excursion_tail_estimate",
    "mass_from_c1",
    "girsanov_condition_bound",
    "rho_ode_residual",
    "run_coupled",
    "run_exact_bessel",
    "write_path_csv",
    "write_inverse_csv",
    "StepSizeError",
    "ResolutionError",
    "LevelExceededError",
    "OrderingError",
    "InsufficientDataError",
]

# drift tables cover [x_floor, X_TABLE_MAX] on a log grid; held constant beyond
X_TABLE_MAX = 64.0
N_TABLE = 4097
# Euler stability: dt * sup|b| must not exceed STEP_CAP * sqrt(dt)
STEP_CAP = 1.0
CHUNK = 1000
BATCH = 256
CALIBRATION_SEED = 0x5EED


class StepSizeError(ValueError):
    pass


class ResolutionError(ValueError):
    pass


class LevelExceededError(ValueError):
    pass


class OrderingError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"stable index must lie in (0, 1), got {alpha}")


# ------------------------------------------------------------ drift fields

@dataclass(frozen=True)
class Bessel:
    alpha: float

    def __post_init__(self):
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class RelativisticBessel:
    alpha: float
    m: float

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.m < 0:
            raise ValueError("mass must be >= 0")


@dataclass(frozen=True)
class PowerPerturbation:
    """f(x) = c1 * min(1, x)**(2 alpha - 1)."""
    alpha: float
    c1: float

    def __call__(self, x):
        return self.c1 * min(1.0, x) ** (2.0 * self.alpha - 1.0)


def power_perturbation(alpha, c1):
    return PowerPerturbation(alpha, c1)


@dataclass(frozen=True)
class Perturbed:
    """Bessel drift minus f, with 0 <= f(x) <= c1 (1 ^ x)**(2 alpha - 1)."""
    alpha: float
    f: Callable
    c1: float

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.c1 < 0:
            raise ValueError("c1 must be >= 0")
        for x in np.logspace(-6, 3, 1000):
            v = float(self.f(x))
            cap = self.c1 * min(1.0, x) ** (2.0 * self.alpha - 1.0)
            if not (v >= 0.0 and v <= cap * (1.0 + 1e-12)):
                raise ValueError(f"perturbation violates 0 <= f <= c1 (1^x)^(2a-1) at x={x:g}")


def _smooth_part(fld, x):
    if isinstance(fld, Bessel):
        return 0.0
    if isinstance(fld, RelativisticBessel):
        return drift_ratio(fld.alpha, fld.m, x) if fld.m > 0 else 0.0
    if isinstance(fld, Perturbed):
        return -float(fld.f(x))
    raise TypeError(f"unknown drift field {fld!r}")


def drift_eval(fld, x):
    """b(x) = (1 - 2 alpha) / (2x) + smooth part; x must be positive."""
    if not x > 0:
        raise ValueError("drift is singular at x = 0")
    return (1.0 - 2.0 * fld.alpha) / (2.0 * x) + _smooth_part(fld, x)


@dataclass(frozen=True)
class _Plan:
    sing: np.ndarray
    tab: np.ndarray
    has_tab: np.ndarray
    logx0: float
    inv_dlog: float
    x_floor: float


@lru_cache(maxsize=64)
def _table(fld, x_floor):
    if isinstance(fld, Bessel) or (isinstance(fld, RelativisticBessel) and fld.m == 0):
        return None
    grid = np.exp(np.linspace(math.log(x_floor), math.log(X_TABLE_MAX), N_TABLE))
    return np.array([_smooth_part(fld, x) for x in grid])


def _plan(fields, dt):
    x_floor = math.sqrt(dt)
    if x_floor >= X_TABLE_MAX / 2:
        raise StepSizeError("dt too large for the drift table")
    K = len(fields)
    logx0 = math.log(x_floor)
    inv_dlog = (N_TABLE - 1) / (math.log(X_TABLE_MAX) - logx0)
    grid = np.exp(np.linspace(logx0, math.log(X_TABLE_MAX), N_TABLE))
    sing = np.array([(1.0 - 2.0 * f.alpha) / 2.0 for f in fields])
    tab = np.zeros((K, N_TABLE))
    has = np.zeros(K, dtype=np.uint8)
    for k, f in enumerate(fields):
        t = _table(f, x_floor)
        if t is not None:
            tab[k] = t
            has[k] = 1
        bmax = float(np.max(np.abs(sing[k] / grid + tab[k])))
        if dt * bmax > STEP_CAP * x_floor:
            raise StepSizeError(
                f"dt*sup|b| = {dt * bmax:.3g} exceeds the stability cap {STEP_CAP * x_floor:.3g}"
            )
    return _Plan(sing, tab, has, logx0, inv_dlog, x_floor)


def _n_steps(T, dt):
    if not (T > 0 and dt > 0):
        raise ValueError("T and dt must be positive")
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise ValueError("T must be an integer multiple of dt")
    return n


# ------------------------------------------------------------ engine

def _downcross(vals, armed, eps, step0, sink):
    s, p = kernels.downcross_chunk(vals, armed, eps, eps / 2.0, step0)
    if s.size:
        sink.append((s, p))


def _euler_block(rng, fields, x0, n_steps, dt, n_paths, eps=None, keep=False):
    """Simulate ``n_paths`` paths of each field on shared noise.

    Returns (events per field, order violations per adjacent pair, mask
    violations per adjacent pair, stored paths or None).  Steps are
    numbered 1..n_steps (state at time k*dt).
    """
    plan = _plan(fields, dt)
    K, B = len(fields), n_paths
    x = np.full((K, B), float(x0))
    buf = np.empty((K, CHUNK, B))
    armed = np.full((K, B), 1 if (eps is not None and x0 >= eps) else 0, dtype=np.uint8)
    events = [[] for _ in range(K)]
    order = np.zeros(max(K - 1, 0), dtype=np.int64)
    mask = np.zeros(max(K - 1, 0), dtype=np.int64)
    store = np.empty((K, n_steps, B)) if keep else None
    sq = math.sqrt(dt)
    done = 0
    while done < n_steps:
        c = min(CHUNK, n_steps - done)
        noise = rng.standard_normal((c, B))
        out = buf[:, :c]
        kernels.euler_chunk(noise, x, plan.sing, plan.tab, plan.has_tab, plan.logx0,
                            plan.inv_dlog, plan.x_floor, dt, sq, out)
        for k in range(K):
            if eps is not None:
                _downcross(out[k], armed[k], eps, done + 1, events[k])
            if k + 1 < K:
                lo, hi = out[k], out[k + 1]
                order[k] += np.count_nonzero(lo > hi)
                if eps is not None:
                    mask[k] += np.count_nonzero((hi <= eps) & (lo > eps))
        if keep:
            store[:, done:done + c] = out
        done += c
    return events, order, mask, store


def _exact_block(rng, alpha, x0, n_steps, dt, n_paths, eps=None, keep=False):
    B = n_paths
    z = np.full(B, float(x0) ** 2)
    buf = np.empty((CHUNK, B))
    armed = np.full(B, 1 if (eps is not None and x0 >= eps) else 0, dtype=np.uint8)
    events = []
    store = np.empty((n_steps, B)) if keep else None
    df = 2.0 - 2.0 * alpha
    done = 0
    while done < n_steps:
        c = min(CHUNK, n_steps - done)
        out = buf[:c]
        kernels.bessel_exact_chunk(rng, z, df, dt, out)
        if eps is not None:
            _downcross(out, armed, eps, done + 1, events)
        if keep:
            store[done:done + c] = out
        done += c
    return events, store


def _events_csr(sink, n_paths):
    """Sort (step, path) events by path then step; return (offsets, steps)."""
    if sink:
        steps = np.concatenate([s for s, _ in sink])
        paths = np.concatenate([p for _, p in sink])
    else:
        steps = paths = np.empty(0, dtype=np.int64)
    order = np.lexsort((steps, paths))
    steps, paths = steps[order], paths[order]
    offsets = np.searchsorted(paths, np.arange(n_paths + 1), side="left").astype(np.int64)
    return offsets, steps.astype(np.int64)


# ------------------------------------------------------------ data types

@dataclass
class SamplePath:
    """States at times dt, 2dt, ..., T (x0 is held separately)."""
    dt: float
    values: np.ndarray
    x0: float
    seed: Optional[int] = None

    @property
    def T(self):
        return self.values.size * self.dt

    @property
    def times(self):
        return self.dt * np.arange(1, self.values.size + 1)


@dataclass
class LocalTimeEstimate:
    """L(t) = gauge * (number of completed downcrossings by time t)."""
    epsilon: float
    gauge: float
    dt: float
    n_steps: int
    event_steps: np.ndarray
    x0: float = 0.0
    zero_set_mask: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def T(self):
        return self.n_steps * self.dt

    @property
    def event_times(self):
        return self.event_steps * self.dt

    @property
    def total(self):
        return self.gauge * self.event_steps.size

    def __call__(self, t):
        k = np.searchsorted(self.event_steps, np.floor(np.asarray(t) / self.dt + 1e-9), side="right")
        return self.gauge * k

    def values(self):
        """L on the grid 0, dt, ..., T."""
        counts = np.zeros(self.n_steps + 1, dtype=np.int64)
        np.add.at(counts, self.event_steps, 1)
        return self.gauge * np.cumsum(counts)


@dataclass
class InverseLocalTime:
    levels: np.ndarray
    S: np.ndarray


@dataclass
class EventTable:
    """Downcrossing steps of many paths in compressed-row form."""
    epsilon: float
    dt: float
    n_steps: int
    x0: float
    offsets: np.ndarray
    steps: np.ndarray
    gauge: float = float("nan")

    @property
    def n_paths(self):
        return self.offsets.size - 1

    @property
    def T(self):
        return self.n_steps * self.dt

    def counts(self):
        return np.diff(self.offsets)

    def path(self, i):
        s = self.steps[self.offsets[i]:self.offsets[i + 1]]
        return LocalTimeEstimate(self.epsilon, self.gauge, self.dt, self.n_steps, s, self.x0)

    def local_time_totals(self):
        return self.gauge * self.counts()

    def inverse(self, level):
        """S at one level for every path; inf where L(T) <= level (censored)."""
        k = int(math.floor(level / self.gauge))
        cnt = self.counts()
        out = np.full(self.n_paths, np.inf)
        ok = cnt > k
        out[ok] = self.steps[self.offsets[:-1][ok] + k] * self.dt
        return out

    @staticmethod
    def concat(tables):
        t0 = tables[0]
        offs, steps, base = [np.zeros(1, dtype=np.int64)], [], 0
        for t in tables:
            offs.append(t.offsets[1:] + base)
            steps.append(t.steps)
            base += t.steps.size
        return EventTable(t0.epsilon, t0.dt, t0.n_steps, t0.x0,
                          np.concatenate(offs), np.concatenate(steps), t0.gauge)

    @staticmethod
    def from_local_time(L):
        return EventTable(L.epsilon, L.dt, L.n_steps, L.x0,
                          np.array([0, L.event_steps.size], dtype=np.int64),
                          np.asarray(L.event_steps, dtype=np.int64), L.gauge)


# ------------------------------------------------------------ gauge

@dataclass(frozen=True)
class GaugeCalibration:
    epsilons: tuple
    gauges: tuple
    mean_counts: tuple
    count_slope: float

    @property
    def gauge(self):
        return self.gauges[0]


def reference_local_time_mean(T):
    """E L_T for reflected BM in the normalisation where its inverse local
    time has exponent c_{1/2} sqrt(lam): (sqrt(2)/c_{1/2}) sqrt(2T/pi) = 4 sqrt(T)."""
    return 4.0 * math.sqrt(T)


@lru_cache(maxsize=32)
def calibrate_gauge(epsilon, dt, n_paths=200, T=1.0, seed=CALIBRATION_SEED):
    """Per-downcrossing weight from reflected Brownian motion.

    The weight makes gauge * E D_T(eps) equal the reference mean of L_T, so
    the inverse local time of reflected BM has exponent c_{1/2} sqrt(lam).
    Counts are also taken at 2 eps and 4 eps; their log-log slope against
    eps (about -1 for BM) is reported as a resolution diagnostic; grid overshoot flattens it near 3 sqrt(dt).
    """
    n = _n_steps(T, dt)
    eps_list = (float(epsilon), 2.0 * epsilon, 4.0 * epsilon)
    rng = derive_substream(seed, 0)
    plan = _plan((Bessel(0.5),), dt)
    x = np.zeros((1, n_paths))
    buf = np.empty((1, CHUNK, n_paths))
    armed = [np.zeros(n_paths, dtype=np.uint8) for _ in eps_list]
    counts = np.zeros(len(eps_list))
    sq = math.sqrt(dt)
    done = 0
    while done < n:
        c = min(CHUNK, n - done)
        noise = rng.standard_normal((c, n_paths))
        out = buf[:, :c]
        kernels.euler_chunk(noise, x, plan.sing, plan.tab, plan.has_tab, plan.logx0,
                            plan.inv_dlog, plan.x_floor, dt, sq, out)
        for j, e in enumerate(eps_list):
            s, _ = kernels.downcross_chunk(out[0], armed[j], e, e / 2.0, done + 1)
            counts[j] += s.size
        done += c
    mean = counts / n_paths
    if np.any(mean <= 0):
        raise InsufficientDataError("no downcrossings during gauge calibration")
    target = reference_local_time_mean(T)
    slope = float(np.polyfit(np.log(eps_list), np.log(mean), 1)[0])
    return GaugeCalibration(eps_list, tuple(target / mean), tuple(mean), slope)


def _check_resolution(epsilon, dt):
    if epsilon < 3.0 * math.sqrt(dt) * (1.0 - 1e-12):
        raise ResolutionError(f"epsilon={epsilon:g} below the resolution limit 3*sqrt(dt)")


# ------------------------------------------------------------ single paths

def simulate_reflected(fld, x0, T, dt, rng, seed=None):
    """Reflected Euler-Maruyama path X_{k+1} = |X_k + b(X_k v sqrt(dt)) dt + sqrt(dt) xi_k|."""
    if x0 < 0:
        raise ValueError("x0 must be >= 0")
    n = _n_steps(T, dt)
    _, _, _, store = _euler_block(rng, (fld,), x0, n, dt, 1, keep=True)
    return SamplePath(dt, store[0, :, 0].copy(), float(x0), seed)


def simulate_bessel_exact(alpha, x0, T, dt, rng, seed=None):
    """Grid skeleton of the reflected Bessel process from exact squared-Bessel
    transitions of dimension 2 - 2 alpha."""
    _check_alpha(alpha)
    if x0 < 0:
        raise ValueError("x0 must be >= 0")
    n = _n_steps(T, dt)
    _, store = _exact_block(rng, alpha, x0, n, dt, 1, keep=True)
    return SamplePath(dt, store[:, 0].copy(), float(x0), seed)


@dataclass
class CouplingReport:
    order_violation: float
    mask_violation: float


def _check_drift_order(lower, upper, dt):
    for x in np.logspace(math.log10(math.sqrt(dt)), 3, 1000):
        a, b = drift_eval(lower, x), drift_eval(upper, x)
        if a > b + 1e-12 * max(abs(a), abs(b), 1.0):
            raise OrderingError(f"drift of the lower field exceeds the upper one at x={x:g}")


def simulate_coupled(field_x, field_y, x0, T, dt, rng, epsilon=None, seed=None):
    """Two reflected paths on identical noise; X is the lower-drift field.

    Returns (path_x, path_y, CouplingReport) with the fraction of grid
    points where X > Y and where Y <= eps < X.
    """
    _check_drift_order(field_x, field_y, dt)
    n = _n_steps(T, dt)
    eps = 3.0 * math.sqrt(dt) if epsilon is None else epsilon
    _, order, mask, store = _euler_block(rng, (field_x, field_y), x0, n, dt, 1, eps=eps, keep=True)
    px = SamplePath(dt, store[0, :, 0].copy(), float(x0), seed)
    py = SamplePath(dt, store[1, :, 0].copy(), float(x0), seed)
    return px, py, CouplingReport(order[0] / n, mask[0] / n)


def local_time(path, epsilon, gauge=None):
    """Downcrossing local time of a path at 0 with band [eps/2, eps]."""
    _check_resolution(epsilon, path.dt)
    if gauge is None:
        gauge = calibrate_gauge(float(epsilon), float(path.dt)).gauge
    vals = np.ascontiguousarray(path.values.reshape(-1, 1))
    armed = np.array([1 if path.x0 >= epsilon else 0], dtype=np.uint8)
    steps, _ = kernels.downcross_chunk(vals, armed, epsilon, epsilon / 2.0, 1)
    return LocalTimeEstimate(float(epsilon), float(gauge), path.dt, path.values.size,
                             steps.astype(np.int64), path.x0, path.values <= epsilon)


def inverse_local_time(L, levels):
    """S(t) = inf{s : L(s) > t} on the grid."""
    lv = np.atleast_1d(np.asarray(levels, dtype=float))
    if np.any(lv < 0):
        raise ValueError("levels must be >= 0")
    if lv.size and np.max(lv) >= L.total:
        raise LevelExceededError(f"level {np.max(lv):g} >= L(T) = {L.total:g}")
    k = np.floor(lv / L.gauge).astype(np.int64)
    return InverseLocalTime(lv, L.event_steps[k] * L.dt)


def write_path_csv(path, filename, comment=None):
    rows = zip(np.concatenate([[0.0], path.times]), np.concatenate([[path.x0], path.values]))
    write_csv(filename, ["time", "value"], rows, comment)


def write_inverse_csv(inv, filename, comment=None):
    write_csv(filename, ["level", "S"], zip(inv.levels, inv.S), comment)


# ------------------------------------------------------------ bulk runs

@dataclass
class CoupledRun:
    fields: tuple
    tables: list
    order_violation: np.ndarray
    mask_violation: np.ndarray

    @property
    def n_paths(self):
        return self.tables[0].n_paths

    def sample(self, k, level, seed=None):
        return SubordinatorSample(level, self.tables[k].inverse(level), seed)


def _coupled_task(rng, index, fields, x0, n_steps, dt, eps, sizes):
    B = sizes[index]
    events, order, mask, _ = _euler_block(rng, fields, x0, n_steps, dt, B, eps=eps)
    tables = [EventTable(eps, dt, n_steps, x0, *_events_csr(ev, B)) for ev in events]
    return tables, order, mask


def run_coupled(fields, x0, T, dt, epsilon, n_paths, master_seed, workers=1, batch=BATCH,
                check_order=True):
    """Coupled reflected Euler runs of drift-ordered ``fields`` (lowest first).

    Paths are split into batches of ``batch``; batch i draws its noise from
    substream i of ``master_seed``.  Violation fractions are per adjacent
    pair of fields over all grid points.
    """
    _check_resolution(epsilon, dt)
    fields = tuple(fields)
    if check_order:
        for lo, hi in zip(fields[:-1], fields[1:]):
            _check_drift_order(lo, hi, dt)
    n = _n_steps(T, dt)
    _plan(fields, dt)  # fill the drift-table cache before any fork
    gauge = calibrate_gauge(float(epsilon), float(dt)).gauge
    sizes = batch_sizes(n_paths, batch)
    res = map_tasks(_coupled_task, len(sizes), master_seed, workers,
                    (fields, float(x0), n, dt, float(epsilon), sizes))
    K = len(fields)
    tables = []
    for k in range(K):
        t = EventTable.concat([r[0][k] for r in res])
        t.gauge = gauge
        tables.append(t)
    total = float(n) * n_paths
    order = sum(r[1] for r in res) / total if K > 1 else np.zeros(0)
    mask = sum(r[2] for r in res) / total if K > 1 else np.zeros(0)
    return CoupledRun(fields, tables, np.asarray(order), np.asarray(mask))


def _exact_task(rng, index, alpha, x0, n_steps, dt, eps, sizes):
    B = sizes[index]
    events, _ = _exact_block(rng, alpha, x0, n_steps, dt, B, eps=eps)
    return EventTable(eps, dt, n_steps, x0, *_events_csr(events, B))


def run_exact_bessel(alpha, x0, T, dt, epsilon, n_paths, master_seed, workers=1, batch=BATCH):
    """Downcrossing events of exact Bessel skeletons, batched like run_coupled."""
    _check_alpha(alpha)
    _check_resolution(epsilon, dt)
    n = _n_steps(T, dt)
    gauge = calibrate_gauge(float(epsilon), float(dt)).gauge
    sizes = batch_sizes(n_paths, batch)
    res = map_tasks(_exact_task, len(sizes), master_seed, workers,
                    (float(alpha), float(x0), n, dt, float(epsilon), sizes))
    t = EventTable.concat(res)
    t.gauge = gauge
    return t


# ------------------------------------------------------------ estimators

def empirical_laplace_ratio(samples, lambdas, lambda_ref):
    """phi_hat(lam) / phi_hat(lam_ref) with phi_hat = -(1/t) log mean exp(-lam S_t).

    Censored (infinite) draws contribute exp(-lam S) = 0.
    """
    if not samples.t > 0:
        raise ValueError("local-time level must be positive")
    d = np.asarray(samples.draws, dtype=float)
    if d.size < 1000:
        raise InsufficientDataError("need at least 1000 draws")
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if np.any(lam <= 0) or lambda_ref <= 0:
        raise ValueError("lambdas must be positive")

    def phi(lv):
        mean = float(np.mean(np.exp(-lv * d)))
        if not mean > 0.0 or mean == 1.0:
            raise InsufficientDataError(f"Laplace transform degenerate at lambda={lv:g}")
        return -math.log(mean) / samples.t

    ref = phi(float(lambda_ref))
    return np.array([1.0 if lv == lambda_ref else phi(lv) / ref for lv in lam])


def _cycles(tab):
    """Start times and lengths of the cycles between successive bottom
    visits (downcrossing completions, and time 0 when x0 <= eps/2)."""
    t = tab.steps * tab.dt
    cnt = tab.counts()
    ends = np.empty_like(t)
    if t.size:
        ends[:-1] = t[1:]
        last = tab.offsets[1:][cnt > 0] - 1
        ends[last] = np.inf
    starts, lengths = t, ends - t
    if tab.x0 <= tab.epsilon / 2.0:
        first = np.full(tab.n_paths, np.inf)
        first[cnt > 0] = t[tab.offsets[:-1][cnt > 0]]
        starts = np.concatenate([np.zeros(tab.n_paths), starts])
        lengths = np.concatenate([first, lengths])
    return starts, lengths


def excursion_tail_estimate(L, s_grid, return_stderr=False, min_count=50):
    """Estimate nu((s, inf)) by cycles longer than s per unit local time.

    Only cycles starting before T - max(s_grid) are used, so every length
    comparison is decided inside the horizon and the estimate is
    nonincreasing in s.  ``L`` is a LocalTimeEstimate or an EventTable.
    """
    tab = EventTable.from_local_time(L) if isinstance(L, LocalTimeEstimate) else L
    s = np.asarray(s_grid, dtype=float)
    if np.any(s <= 0):
        raise ValueError("s_grid must be positive")
    if not tab.steps.size:
        raise InsufficientDataError("no local time accumulated")
    horizon = tab.T - float(np.max(s))
    if horizon <= 0:
        raise ValueError("max(s_grid) must be below the horizon T")
    starts, lengths = _cycles(tab)
    use = starts <= horizon
    lengths = lengths[use]
    n_cycles = lengths.size
    counts = np.array([np.count_nonzero(lengths > v) for v in s])
    if counts[np.argmin(s)] < min_count:
        raise InsufficientDataError(
            f"only {counts[np.argmin(s)]} excursions exceed s={np.min(s):g} (need {min_count})"
        )
    denom = tab.gauge * n_cycles
    tail = counts / denom
    if return_stderr:
        return tail, np.sqrt(counts) / denom
    return tail


# ------------------------------------------------------------ analytic checks

def _power_cap_ok(alpha, m, f, grid):
    return all(float(f(x)) <= -drift_ratio(alpha, m, x) for x in grid)


def mass_from_c1(alpha, c1, f=None):
    """Smallest m meeting both asymptotic constraints
    c1 <= sqrt(2m) and c1 <= m**alpha Gamma(1-alpha) / (2**(alpha-1) Gamma(alpha)),
    then doubled until f <= -rho_m'/rho_m on a 1e3-point log grid."""
    _check_alpha(alpha)
    if not c1 > 0:
        raise ValueError("c1 must be positive")
    A = gamma_fn(1.0 - alpha) / (2.0 ** (alpha - 1.0) * gamma_fn(alpha))
    m = max(c1 * c1 / 2.0, (c1 / A) ** (1.0 / alpha))
    f = power_perturbation(alpha, c1) if f is None else f
    grid = np.logspace(-6, 3, 1000)
    for _ in range(60):
        if _power_cap_ok(alpha, m, f, grid):
            return m
        m *= 2.0
    raise RuntimeError("no mass found dominating the perturbation")


_LAM_GAUSS = 1e5


def _negative_moment(alpha, t, x):
    """(2t)^(1-2a) E_x[X_t^(4a-2); X_t < 1] for the Bessel process of index a.

    X_t^2 / t is noncentral chi-square with 2 - 2a degrees of freedom and
    noncentrality x^2/t; expanding it as a Poisson(x^2/(2t)) mixture of
    central chi-squares gives each term through the regularised
    incomplete gamma function.
    """
    lam = x * x / (2.0 * t)
    if lam > _LAM_GAUSS:
        # X_t is then within a few sqrt(t) << x of x
        return ((2.0 * t) ** (1.0 - 2.0 * alpha) * x ** (4.0 * alpha - 2.0)
                * special.ndtr((1.0 - x) / math.sqrt(t)))
    if lam > 0:
        w = 12.0 * math.sqrt(lam) + 40.0
        n = np.arange(max(0, int(lam - w)), int(lam + w) + 1, dtype=float)
        logp = n * math.log(lam) - lam - special.gammaln(n + 1.0)
    else:
        n = np.zeros(1)
        logp = np.zeros(1)
    terms = np.exp(logp + special.gammaln(n + alpha) - special.gammaln(n + 1.0 - alpha))
    return float(np.sum(terms * special.gammainc(n + alpha, 1.0 / (2.0 * t))))


def _girsanov_g(alpha, T, x, rtol):
    """int_0^T E_x[X_t^(4a-2); X_t < 1] dt, i.e. the double integral
    int_0^T int_0^1 p(t, x, y) y^(4a-2) 2 y^(1-2a) dy dt."""
    p = 2.0 * alpha - 1.0
    if x == 0.0:
        # integrand is t^p times a function smooth at 0
        val, _ = integrate.quad(lambda t: 2.0 ** p * _negative_moment(alpha, max(t, 1e-300), 0.0),
                                0.0, T, weight="alg", wvar=(p, 0.0), epsabs=0.0, epsrel=rtol,
                                limit=200)
        return val

    # in u = log t the peak of width x^2 near t = 0 becomes a smooth bump;
    # the part below t_min contributes at most x^(4a-2) t_min
    def h(u):
        t = math.exp(u)
        return t * (2.0 * t) ** p * _negative_moment(alpha, t, x)

    u_lo = math.log(min(x * x, T)) - 40.0
    u_hi = math.log(T)
    pts = [u for u in (2.0 * math.log(x), 2.0 * math.log(x) - math.log(2.0 * _LAM_GAUSS))
           if u_lo < u < u_hi]
    val, _ = integrate.quad(h, u_lo, u_hi, points=pts or None, epsabs=1e-14 * T, epsrel=rtol,
                            limit=200)
    return val


def girsanov_condition_bound(alpha, c1, T, x_grid=None, rtol=1e-8):
    """Upper bound for sup_x E_x int_0^T f(X_t)^2 dt under the Bessel law,
    f = c1 (1 ^ x)^(2 alpha - 1)."""
    _check_alpha(alpha)
    if not (c1 > 0 and T > 0):
        raise ValueError("c1 and T must be positive")
    if alpha >= 0.5:
        return c1 * c1 * T
    xs = np.concatenate([[0.0], np.logspace(-3, 0.5, 36)]) if x_grid is None else np.asarray(x_grid)
    try:
        vals = np.array([_girsanov_g(alpha, T, float(x), rtol) for x in xs])
        i = int(np.argmax(vals))
        best = vals[i]
        lo = xs[max(i - 1, 0)]
        hi = xs[min(i + 1, xs.size - 1)]
        if hi > lo:
            r = optimize.minimize_scalar(lambda x: -_girsanov_g(alpha, T, x, rtol),
                                         bounds=(lo, hi), method="bounded",
                                         options={"xatol": 1e-6 * max(hi, 1e-3)})
            best = max(best, -r.fun)
    except (ArithmeticError, ValueError) as exc:
        raise RuntimeError(f"quadrature failed: {exc}") from exc
    if not math.isfinite(best):
        return math.inf
    return float(c1 * c1 * (T + best))


def rho_ode_residual(alpha, m, x_grid, h=1e-4):
    """max |1/2 rho'' + (1-2a)/(2x) rho' - m rho| / (m rho) by 5-point differences."""
    _check_alpha(alpha)
    if m == 0:
        return 0.0
    worst = 0.0
    for x in np.asarray(x_grid, dtype=float):
        f = [rho_m(alpha, m, x + k * h) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        res = 0.5 * d2 + (1.0 - 2.0 * alpha) / (2.0 * x) * d1 - m * f[2]
        worst = max(worst, abs(res) / (m * f[2]))
    return worst
