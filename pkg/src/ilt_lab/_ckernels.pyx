# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for path simulation and downcrossing extraction.

Semantics mirror ``_pykernels`` exactly; see that module for the
reference description of each routine.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, fabs, floor, erfc, exp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cnp.import_array()

cdef extern from "numpy/random/distributions.h":
    double random_noncentral_chisquare(bitgen_t *bitgen_state, double df, double nonc) nogil

cdef double SQRT1_2 = 0.70710678118654752440
cdef double INV_SQRT_2PI = 0.39894228040143267794
# the plain Gaussian step is used when 2a(a + xi) >= 2*FOLD_SAFE, where the
# reflected mass it ignores is below exp(-37) relative
cdef double FOLD_SAFE = 18.5


cdef inline double _upper(double y) nogil:
    return 0.5 * erfc(y * SQRT1_2)


cdef double folded_quantile(double a, double xi) nogil:
    """v >= 0 with P(|a + Z| <= v) = P(Z <= xi), for a >= 0."""
    cdef double target, g, dg, v, vn, step, lo = 0.0, hi = a + fabs(xi) + 1.0
    cdef int it
    cdef bint upper = xi > 0.0
    target = _upper(xi) if upper else _upper(-xi)
    v = a + xi
    if v <= 0.0 or v >= hi:
        v = 0.5 * (lo + hi)
    for it in range(100):
        if upper:
            g = _upper(v - a) + _upper(v + a) - target
        else:
            g = target - (_upper(a - v) - _upper(a + v))
        if g > 0.0:
            lo = v
        else:
            hi = v
        dg = -INV_SQRT_2PI * (exp(-0.5 * (v - a) * (v - a)) + exp(-0.5 * (v + a) * (v + a)))
        step = g / dg
        if fabs(step) <= 1e-14 * (1.0 + v):
            return v - step
        vn = v - step
        if not (vn > lo and vn < hi):
            vn = 0.5 * (lo + hi)
        v = vn
    return v


cdef inline double reflected_step(double c, double sqdt, double xi) nogil:
    cdef double a = fabs(c) / sqdt
    if a + xi > 0.0 and a * (a + xi) >= FOLD_SAFE:
        return fabs(c) + sqdt * xi
    return sqdt * folded_quantile(a, xi)


def euler_chunk(const double[:, :] noise, double[:, :] x,
                const double[:] sing, const double[:, :] tab,
                const unsigned char[:] has_tab,
                double logx0, double inv_dlog, double x_floor,
                double dt, double sqdt, double[:, :, :] out):
    """Advance K coupled fields over ``noise.shape[0]`` steps."""
    cdef Py_ssize_t n = noise.shape[0]
    cdef Py_ssize_t B = noise.shape[1]
    cdef Py_ssize_t K = x.shape[0]
    cdef Py_ssize_t ntab = tab.shape[1]
    cdef Py_ssize_t s, b, k, i
    cdef double xc, drift, u, frac, xi, v
    with nogil:
        for s in range(n):
            for k in range(K):
                for b in range(B):
                    v = x[k, b]
                    xc = v if v > x_floor else x_floor
                    drift = sing[k] / xc
                    if has_tab[k]:
                        u = (log(xc) - logx0) * inv_dlog
                        if u <= 0.0:
                            drift = drift + tab[k, 0]
                        elif u >= ntab - 1:
                            drift = drift + tab[k, ntab - 1]
                        else:
                            i = <Py_ssize_t>floor(u)
                            frac = u - i
                            drift = drift + (tab[k, i] + frac * (tab[k, i + 1] - tab[k, i]))
                    v = reflected_step(v + drift * dt, sqdt, noise[s, b])
                    x[k, b] = v
                    out[k, s, b] = v


def downcross_chunk(const double[:, :] values, unsigned char[:] armed,
                    double eps_hi, double eps_lo, long step0):
    """Return (step, path) indices of completed downcrossings."""
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t B = values.shape[1]
    cdef Py_ssize_t s, b, count = 0
    cdef unsigned char[:] state = armed.copy()
    cdef double v
    for s in range(n):
        for b in range(B):
            v = values[s, b]
            if state[b]:
                if v <= eps_lo:
                    state[b] = 0
                    count += 1
            elif v >= eps_hi:
                state[b] = 1
    steps_arr = np.empty(count, dtype=np.int64)
    paths_arr = np.empty(count, dtype=np.int64)
    cdef long[:] steps = steps_arr
    cdef long[:] paths = paths_arr
    count = 0
    for s in range(n):
        for b in range(B):
            v = values[s, b]
            if armed[b]:
                if v <= eps_lo:
                    armed[b] = 0
                    steps[count] = step0 + s
                    paths[count] = b
                    count += 1
            elif v >= eps_hi:
                armed[b] = 1
    return steps_arr, paths_arr


def bessel_exact_chunk(rng, double[:] z, double df, double dt, double[:, :] out):
    """Exact squared-Bessel transitions; ``out`` receives sqrt of the state."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t B = out.shape[1]
    cdef Py_ssize_t s, b
    capsule = rng.bit_generator.capsule
    cdef bitgen_t *bg = <bitgen_t *>PyCapsule_GetPointer(capsule, "BitGenerator")
    with rng.bit_generator.lock, nogil:
        for s in range(n):
            for b in range(B):
                z[b] = dt * random_noncentral_chisquare(bg, df, z[b] / dt)
                out[s, b] = sqrt(z[b])
