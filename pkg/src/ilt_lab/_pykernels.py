"""Pure-numpy reference implementations of the simulation kernels.

Each routine vectorises over paths and loops over time steps, so it is
correct but slow; the Cython twin in ``_ckernels.pyx`` is selected at
import when it has been built.
"""

import numpy as np
from scipy.special import erfc

# plain Gaussian step when 2a(a + xi) >= 2*FOLD_SAFE (ignored mass < exp(-37))
FOLD_SAFE = 18.5
_SQRT1_2 = 0.70710678118654752440
_INV_SQRT_2PI = 0.39894228040143267794


def _upper(y):
    return 0.5 * erfc(y * _SQRT1_2)


def folded_quantile(a, xi):
    """v >= 0 with P(|a + Z| <= v) = P(Z <= xi), elementwise, for a >= 0.

    Safeguarded Newton iteration on the folded-normal distribution
    function; bisection steps keep the iterate inside a shrinking bracket.
    """
    a = np.asarray(a, dtype=float)
    xi = np.asarray(xi, dtype=float)
    up = xi > 0.0
    target = np.where(up, _upper(xi), _upper(-xi))
    lo = np.zeros_like(a)
    hi = a + np.abs(xi) + 1.0
    v = a + xi
    bad = (v <= 0.0) | (v >= hi)
    v = np.where(bad, 0.5 * (lo + hi), v)
    out = v.copy()
    live = np.ones(a.shape, dtype=bool)
    for _ in range(100):
        if not live.any():
            break
        g = np.where(up, _upper(v - a) + _upper(v + a) - target,
                     target - (_upper(a - v) - _upper(a + v)))
        pos = g > 0.0
        lo = np.where(pos, v, lo)
        hi = np.where(pos, hi, v)
        dg = -_INV_SQRT_2PI * (np.exp(-0.5 * (v - a) ** 2) + np.exp(-0.5 * (v + a) ** 2))
        step = g / dg
        conv = live & (np.abs(step) <= 1e-14 * (1.0 + v))
        out[conv] = (v - step)[conv]
        live &= ~conv
        vn = v - step
        v = np.where((vn > lo) & (vn < hi), vn, 0.5 * (lo + hi))
    out[live] = v[live]
    return out


def reflected_step(c, sqdt, xi):
    """One reflected step with the law of |c + sqdt*xi|, monotone in c.

    The folded-normal quantile of the shared uniform P(Z <= xi) is used,
    which coincides with c + sqdt*xi once c is far from the boundary.
    """
    a = np.abs(c) / sqdt
    fast = (a + xi > 0.0) & (a * (a + xi) >= FOLD_SAFE)
    out = np.abs(c) + sqdt * xi
    slow = ~fast
    if slow.any():
        out[slow] = sqdt * folded_quantile(a[slow], xi[slow])
    return out


def euler_chunk(noise, x, sing, tab, has_tab, logx0, inv_dlog, x_floor, dt, sqdt, out):
    """Advance K coupled reflected Euler paths sharing one noise array.

    Drift of field k at state x is ``sing[k] / xc + g_k(xc)`` with
    ``xc = max(x, x_floor)`` and ``g_k`` linearly interpolated in log(x)
    from row k of ``tab`` (held constant outside the table).  The update
    is ``x <- reflected_step(x + drift*dt, sqdt, noise)``, which has the
    law of ``|x + drift*dt + sqdt*noise|`` but keeps coupled paths
    ordered.  ``x`` (K, B) is updated in place and every state is
    written to ``out`` (K, n, B).
    """
    ntab = tab.shape[1]
    use = np.asarray(has_tab, dtype=bool)
    for s in range(noise.shape[0]):
        xc = np.maximum(x, x_floor)
        drift = sing[:, None] / xc
        if use.any():
            u = (np.log(xc[use]) - logx0) * inv_dlog
            i = np.clip(np.floor(u), 0, ntab - 2).astype(np.int64)
            frac = np.clip(u - i, 0.0, 1.0)
            rows = np.nonzero(use)[0][:, None]
            t0 = tab[rows, i]
            t1 = tab[rows, i + 1]
            drift[use] = drift[use] + (t0 + frac * (t1 - t0))
        x[...] = reflected_step(x + drift * dt, sqdt, np.broadcast_to(noise[s], x.shape))
        out[:, s, :] = x


def downcross_chunk(values, armed, eps_hi, eps_lo, step0):
    """Completed downcrossings in a (n, B) block of states.

    A path becomes armed on reaching ``eps_hi`` and completes a
    downcrossing, disarming, at the first later state ``<= eps_lo``.
    ``armed`` (uint8, B) carries state across blocks.  Returns the global
    step index and path index of each completion, ordered by step.
    """
    steps, paths = [], []
    state = armed.astype(bool)
    for s in range(values.shape[0]):
        v = values[s]
        done = state & (v <= eps_lo)
        if done.any():
            idx = np.nonzero(done)[0]
            steps.append(np.full(idx.size, step0 + s, dtype=np.int64))
            paths.append(idx.astype(np.int64))
        state = np.where(state, ~done, v >= eps_hi)
    armed[:] = state
    if not steps:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(steps), np.concatenate(paths)


def bessel_exact_chunk(rng, z, df, dt, out):
    """Exact squared-Bessel transitions of dimension ``df``.

    ``z`` holds squared states and is updated in place; ``out`` (n, B)
    receives the Bessel states sqrt(z).
    """
    for s in range(out.shape[0]):
        z[:] = dt * rng.noncentral_chisquare(df, z / dt)
        out[s] = np.sqrt(z)
