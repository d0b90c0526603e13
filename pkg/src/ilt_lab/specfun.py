"""Scalar special functions: Gamma, modified Bessel I and K, and the
hitting-time Laplace transform rho_m built from them.

All functions are pure and operate on Python floats.  Bessel routines
work internally with exponentially scaled values so that ratios such as
K_{alpha-1}/K_alpha stay finite far beyond the underflow point of K.
"""

import math
from collections import namedtuple

__all__ = [
    "gamma_fn",
    "rgamma",
    "c_alpha",
    "bessel_i",
    "bessel_i_scaled",
    "bessel_k",
    "bessel_k_scaled",
    "khat",
    "rho_m",
    "rho_norm",
    "drift_ratio",
    "drift_ratio_asymptotic",
    "Asymptote",
    "bessel_transition_density",
]

# regime switch for I (series / Hankel) and K (Temme / Hankel)
SWITCH_X = 18.0
# below this argument K comes from the I-difference formula
K_SERIES_X = 2.0
# |sin(nu*pi)| threshold under which the I-difference formula is not used
SIN_GUARD = 0.05

_EPS = 1e-16
_MAXIT = 10000

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _is_nonpositive_int(x):
    return x <= 0.0 and x == math.floor(x)


def gamma_fn(x):
    """Gamma function for real ``x`` (Lanczos, reflection below 1/2).

    Raises ``ValueError`` at the poles 0, -1, -2, ...
    """
    x = float(x)
    if _is_nonpositive_int(x):
        raise ValueError(f"gamma_fn: pole at x={x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    if x > 171.6:
        raise OverflowError(f"gamma_fn: overflow at x={x}")
    z = x - 1.0
    acc = _LANCZOS[0]
    for k in range(1, 9):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    # split the power to keep t**(z+0.5) finite up to x ~ 171
    half = t ** (0.5 * (z + 0.5))
    return _SQRT_2PI * half * (half * math.exp(-t)) * acc


def rgamma(x):
    """1/Gamma(x); zero at the poles."""
    if _is_nonpositive_int(x):
        return 0.0
    if x > 171.6:
        return 0.0
    return 1.0 / gamma_fn(x)


def c_alpha(alpha):
    """Normalising constant alpha / Gamma(1 - alpha) of the stable exponent."""
    _check_alpha(alpha)
    return alpha / gamma_fn(1.0 - alpha)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"stable index must lie in (0, 1), got {alpha}")


def _check_mass(m):
    if m < 0.0:
        raise ValueError(f"mass must be >= 0, got {m}")


# ---------------------------------------------------------------- Bessel I

def _i_series(nu, x):
    """Power series for I_nu(x); unscaled."""
    if _is_nonpositive_int(nu):
        nu = -nu
    h = 0.5 * x
    q = h * h
    term = h ** nu * rgamma(nu + 1.0)
    total = term
    n = 0
    while n < _MAXIT:
        n += 1
        denom = n * (n + nu)
        if denom == 0.0:
            # nu + 1 was a non-positive integer; first terms vanish
            term = h ** (2 * n + nu) * rgamma(n + 1.0) * rgamma(n + nu + 1.0)
        else:
            term *= q / denom
        total += term
        if n > abs(nu) + 1 and abs(term) <= _EPS * abs(total):
            break
    return total


def _hankel_coeffs(nu, x, sign):
    """Sum of the Hankel asymptotic series with alternating ``sign``."""
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    k = 0
    prev = math.inf
    while k < 200:
        k += 1
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        t = sign ** k * term
        if abs(t) >= prev:
            break
        total += t
        prev = abs(t)
        if abs(t) <= _EPS * abs(total):
            break
    return total


def bessel_i_scaled(nu, x):
    """exp(-x) * I_nu(x) for x > 0."""
    x = float(x)
    if x < 0.0:
        raise ValueError("bessel_i requires x >= 0")
    if x == 0.0:
        if nu == 0.0:
            return 1.0
        if nu > 0.0 or _is_nonpositive_int(nu):
            return 0.0
        raise OverflowError(f"I_{nu}(0) is infinite")
    if x < SWITCH_X:
        return _i_series(nu, x) * math.exp(-x)
    return _hankel_coeffs(nu, x, -1.0) / math.sqrt(2.0 * math.pi * x)


def bessel_i(nu, x):
    """Modified Bessel function of the first kind I_nu(x), x > 0."""
    x = float(x)
    if x > 709.0:
        raise OverflowError(f"I_nu({x}) overflows double precision")
    if 0.0 < x < SWITCH_X:
        return _i_series(nu, x)
    return bessel_i_scaled(nu, x) * math.exp(x)


# ---------------------------------------------------------------- Bessel K

def _gamma_pair(mu):
    """Temme's auxiliary values gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)."""
    gampl = rgamma(1.0 + mu)
    gammi = rgamma(1.0 - mu)
    if abs(mu) < 0.02:
        # Taylor coefficients of 1/Gamma(1+z) at odd powers
        m2 = mu * mu
        gam1 = -(0.5772156649015329
                 - 0.0420026350340952 * m2
                 - 0.0421977345555443 * m2 * m2
                 + 0.0072189432466630 * m2 * m2 * m2)
    else:
        gam1 = (gammi - gampl) / (2.0 * mu)
    gam2 = 0.5 * (gammi + gampl)
    return gam1, gam2, gampl, gammi


def _k_temme_scaled(nu, x):
    """exp(x) * (K_nu(x), K_{nu+1}(x)) by Temme's series (x < 2) or
    Steed's continued fraction (x >= 2), then forward recurrence."""
    nl = int(nu + 0.5)
    mu = nu - nl
    mu2 = mu * mu
    xi = 1.0 / x
    xi2 = 2.0 * xi
    if x < K_SERIES_X:
        x2 = 0.5 * x
        pimu = math.pi * mu
        fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = mu * d
        fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _gamma_pair(mu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        total = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        total1 = p
        for i in range(1, _MAXIT):
            ff = (i * ff + p + q) / (i * i - mu2)
            c *= d / i
            p /= i - mu
            q /= i + mu
            dl = c * ff
            total += dl
            total1 += c * (p - i * ff)
            if abs(dl) < abs(total) * _EPS:
                break
        scale = math.exp(x)
        kmu = total * scale
        k1 = total1 * xi2 * scale
    else:
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = delh = d
        q1, q2 = 0.0, 1.0
        a1 = 0.25 - mu2
        q = c = a1
        a = -a1
        s = 1.0 + q * delh
        for i in range(2, _MAXIT):
            a -= 2 * (i - 1)
            c = -a * c / i
            qnew = (q1 - b * q2) / a
            q1, q2 = q2, qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if abs(dels / s) < _EPS:
                break
        h = a1 * h
        kmu = math.sqrt(math.pi / (2.0 * x)) / s
        k1 = kmu * (mu + x + 0.5 - h) * xi
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * xi2 * k1 + kmu
    return kmu, k1


def bessel_k_scaled(nu, x):
    """exp(x) * K_nu(x) for x > 0."""
    x = float(x)
    if not x > 0.0:
        raise ValueError("bessel_k requires x > 0")
    nu = abs(float(nu))
    if x >= SWITCH_X:
        return _hankel_coeffs(nu, x, 1.0) * math.sqrt(math.pi / (2.0 * x))
    if x <= K_SERIES_X and abs(math.sin(nu * math.pi)) >= SIN_GUARD:
        diff = _i_series(-nu, x) - _i_series(nu, x)
        return 0.5 * math.pi * diff / math.sin(nu * math.pi) * math.exp(x)
    return _k_temme_scaled(nu, x)[0]


def bessel_k(nu, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0.

    Symmetric in ``nu`` by construction.  Underflows to 0 beyond x ~ 745.
    """
    return bessel_k_scaled(nu, x) * math.exp(-float(x))


# ---------------------------------------------------------------- rho_m

def khat(alpha, x):
    """x**alpha * K_alpha(x), with the finite value 2**(alpha-1) Gamma(alpha) at 0."""
    if x < 0.0:
        raise ValueError("khat requires x >= 0")
    if x == 0.0:
        return 2.0 ** (alpha - 1.0) * gamma_fn(alpha)
    return x ** alpha * bessel_k(alpha, x)


def rho_norm(alpha):
    """Constant making rho_m(0) = 1."""
    return 1.0 / (2.0 ** (alpha - 1.0) * gamma_fn(alpha))


def rho_m(alpha, m, x):
    """E_x[exp(-m T_0)] for the reflected Bessel process of index alpha."""
    _check_alpha(alpha)
    _check_mass(m)
    if x < 0.0:
        raise ValueError("rho_m requires x >= 0")
    z = math.sqrt(2.0 * m) * x
    if z == 0.0:
        return 1.0
    return rho_norm(alpha) * z ** alpha * bessel_k_scaled(alpha, z) * math.exp(-z)


def drift_ratio(alpha, m, x):
    """rho_m'(x) / rho_m(x) = -sqrt(2m) K_{alpha-1}(z) / K_alpha(z), z = sqrt(2m) x."""
    _check_alpha(alpha)
    _check_mass(m)
    if not x > 0.0:
        raise ValueError("drift_ratio requires x > 0")
    if m == 0.0:
        return 0.0
    s = math.sqrt(2.0 * m)
    z = s * x
    return -s * bessel_k_scaled(alpha - 1.0, z) / bessel_k_scaled(alpha, z)


Asymptote = namedtuple("Asymptote", ["coefficient", "power"])


def drift_ratio_asymptotic(alpha, m, regime):
    """Leading behaviour ``coefficient * x**power`` of :func:`drift_ratio`.

    ``regime`` is ``"zero"`` (x -> 0+) or ``"infinity"``.
    """
    _check_alpha(alpha)
    _check_mass(m)
    if regime == "zero":
        coef = -(m ** alpha) * gamma_fn(1.0 - alpha) / (2.0 ** (alpha - 1.0) * gamma_fn(alpha))
        return Asymptote(coef, 2.0 * alpha - 1.0)
    if regime == "infinity":
        return Asymptote(-math.sqrt(2.0 * m), 0.0)
    raise ValueError(f"unknown regime {regime!r}")


def bessel_transition_density(alpha, t, x, y):
    """Transition density of the reflected Bessel process of index alpha
    with respect to the speed measure 2 y**(1-2 alpha) dy."""
    _check_alpha(alpha)
    if not t > 0.0:
        raise ValueError("t must be positive")
    if x < 0.0 or y < 0.0:
        raise ValueError("x, y must be >= 0")
    if x == 0.0 or y == 0.0:
        r = max(x, y)
        return (2.0 * t) ** alpha * math.exp(-r * r / (2.0 * t)) / (
            gamma_fn(1.0 - alpha) * 2.0 * t
        )
    z = x * y / t
    return (
        (x * y) ** alpha / (2.0 * t)
        * math.exp(-((x - y) ** 2) / (2.0 * t))
        * bessel_i_scaled(-alpha, z)
    )
