"""Command-line experiment runner.

    ilt-lab <experiment> --config <path> [--seed N] [--workers K] [--out DIR]

The config is a flat text file of ``key = value`` lines; ``#`` starts a
comment.  Grids accept a comma list or ``logspace(a, b, n)`` /
``linspace(a, b, n)`` (numpy semantics).  CSVs go to --out, else
$ILT_LAB_OUT, else the current directory.

Exit status: 0 all checks pass, 1 a check failed, 2 usage or config
error, 3 runtime budget exceeded.
"""

import argparse
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import diffusion as dif
from . import green as gr
from . import specfun as sf
from . import subordinator as sub
from . import trace as tr
from .csvio import read_csv, write_csv
from .streams import derive_substream

EXPERIMENTS = (
    "specfun-check", "phi", "levy", "sample", "cm-check", "dominance", "simulate",
    "compare", "laplace-fit", "excursions", "trace", "green",
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


_GRID = re.compile(r"^(logspace|linspace)\(([^)]*)\)$")


def parse_grid(text):
    text = text.strip()
    m = _GRID.match(text.replace(" ", ""))
    if m:
        a = [float(v) for v in m.group(2).split(",")]
        if len(a) != 3 or a[2] != int(a[2]) or a[2] < 1:
            raise ConfigError(f"bad grid {text!r}")
        return getattr(np, m.group(1))(a[0], a[1], int(a[2]))
    return np.array([float(v) for v in text.split(",") if v.strip()])


# key -> (kind, default); kind is real, int, grid or str
_KEYS = {
    "experiment": ("str", None),
    "alpha": ("real", None),
    "beta": ("real", None),
    "m": ("str", None),
    "c1": ("real", None),
    "T": ("real", 1.0),
    "dt": ("real", 1e-5),
    "epsilon": ("real", None),
    "n_paths": ("int", 10000),
    "lambda_grid": ("grid", "0.5, 1, 2, 5"),
    "lambda_ref": ("real", 1.0),
    "s_grid": ("grid", "0.01, 0.1, 1"),
    "r_grid": ("grid", "logspace(-3, 0, 16)"),
    "t_grid": ("grid", "logspace(-3, 3, 61)"),
    "bins": ("grid", "linspace(-1, 1, 41)"),
    "master_seed": ("int", 0),
    "workers": ("int", 1),
    "t": ("real", 1.0),
    "x0": ("real", 0.0),
    "x": ("real", 0.0),
    "d": ("int", 1),
    "h": ("real", 2e-3),
    "level": ("str", "auto"),
    "order": ("int", 6),
    "field": ("str", "bessel"),
    "sampler": ("str", "stable"),
    "lower": ("str", None),
    "upper": ("str", None),
    "tolerance": ("real", None),
    "c_cap": ("real", gr.C_CAP),
    "max_time": ("real", 400.0),
    "time_budget": ("real", None),
}

_POSITIVE = ("T", "dt", "epsilon", "n_paths", "t", "h", "lambda_ref", "c_cap", "max_time",
             "time_budget", "c1", "d", "workers", "tolerance")


@dataclass
class ExperimentConfig:
    experiment: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None


def read_config(path):
    raw = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            if k not in _KEYS:
                raise ConfigError(f"line {n}: unknown key {k!r}")
            raw[k] = v
    return raw


def build_config(raw, experiment=None, seed=None, workers=None):
    """Typed, validated config from raw strings; raises ConfigError."""
    exp = experiment or raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}")
    if raw.get("experiment") not in (None, exp):
        raise ConfigError("experiment in config disagrees with the command line")
    vals = {}
    for k, (kind, default) in _KEYS.items():
        if k == "experiment":
            continue
        v = raw.get(k, default)
        if v is None:
            vals[k] = None
            continue
        try:
            if kind == "real":
                v = float(v)
            elif kind == "int":
                fv = float(v)
                if fv != int(fv):
                    raise ValueError
                v = int(fv)
            elif kind == "grid":
                v = parse_grid(v) if isinstance(v, str) else np.asarray(v, float)
        except (ValueError, TypeError):
            raise ConfigError(f"bad value for {k}: {raw.get(k)!r}") from None
        vals[k] = v
    if seed is not None:
        vals["master_seed"] = int(seed)
    if workers is not None:
        vals["workers"] = int(workers)
    for k in _POSITIVE:
        v = vals.get(k)
        if v is not None and not v > 0:
            raise ConfigError(f"{k} must be positive")
    for k in ("lambda_grid", "s_grid", "r_grid", "t_grid"):
        g = vals[k]
        if g.size == 0 or np.any(~np.isfinite(g)) or np.any(g <= 0):
            raise ConfigError(f"{k} must be a nonempty positive grid")
    if vals["bins"].size < 2 or np.any(np.diff(vals["bins"]) <= 0):
        raise ConfigError("bins must be increasing edges")
    if not 0 <= vals["master_seed"] < 2 ** 64:
        raise ConfigError("master_seed must be a 64-bit unsigned integer")
    a = vals["alpha"]
    if a is not None and not 0.0 < a < 1.0:
        raise ConfigError("alpha must lie in (0, 1)")
    b = vals["beta"]
    if b is not None and not 0.0 < b < 1.0:
        raise ConfigError("beta must lie in (0, 1)")
    if vals["x0"] < 0:
        raise ConfigError("x0 must be >= 0")
    if not 0 <= vals["order"] <= 6:
        raise ConfigError("order must be in 0..6")
    # mass: number, or auto (needs alpha and c1)
    mv = vals["m"]
    if mv is None:
        vals["m"] = None
    elif mv == "auto":
        if a is None or vals["c1"] is None:
            raise ConfigError("m = auto needs alpha and c1")
        vals["m"] = dif.mass_from_c1(a, vals["c1"])
    else:
        try:
            vals["m"] = float(mv)
        except ValueError:
            raise ConfigError(f"bad value for m: {mv!r}") from None
        if not vals["m"] >= 0:
            raise ConfigError("m must be >= 0")
    if vals["level"] != "auto":
        try:
            vals["level"] = float(vals["level"])
        except ValueError:
            raise ConfigError(f"bad value for level: {vals['level']!r}") from None
        if not vals["level"] > 0:
            raise ConfigError("level must be positive")
    if vals["epsilon"] is None:
        vals["epsilon"] = 3.0 * math.sqrt(vals["dt"])
    return ExperimentConfig(exp, vals)


def _need(cfg, *keys):
    for k in keys:
        if cfg.values.get(k) is None:
            raise ConfigError(f"experiment {cfg.experiment} needs {k}")


def _header(cfg):
    return f"experiment={cfg.experiment} master_seed={cfg.master_seed}"


# ------------------------------------------------------------ experiments

def k_derivative_fd(nu, x):
    # five-point stencil; absolute step since K decays like exp(-x)
    h = 1e-3 * min(x, 1.0)
    k = lambda v: sf.bessel_k(nu, v)
    return (k(x - 2 * h) - 8 * k(x - h) + 8 * k(x + h) - k(x + 2 * h)) / (12 * h)


def run_specfun_check(cfg, out):
    rows = []
    x = np.logspace(-3, math.log10(50.0), 200)
    closed = np.array([math.pi * math.exp(-v) / (sf.gamma_fn(0.5) * math.sqrt(2 * v)) for v in x])
    k = np.array([sf.bessel_k(0.5, v) for v in x])
    rows.append(("k_half_closed_form", float(np.max(np.abs(k / closed - 1))), 1e-10))
    worst = 0.0
    for nu in (-0.5, 0.25, 0.5, 0.75):
        for v in x:
            kp, km, k0 = sf.bessel_k(nu + 1, v), sf.bessel_k(nu - 1, v), sf.bessel_k(nu, v)
            worst = max(worst, abs(kp - km - 2 * nu / v * k0) / kp)
    rows.append(("k_recurrence", worst, 1e-8))
    worst = 0.0
    for nu in (0.25, 0.5, 0.75):
        for v in x:
            ex = -nu / v * sf.bessel_k(nu, v) - sf.bessel_k(nu - 1, v)
            worst = max(worst, abs(k_derivative_fd(nu, v) / ex - 1))
    rows.append(("k_derivative", worst, 1e-8))
    worst = 0.0
    for nu in (-0.75, -0.25, 0.25, 0.75):
        for v in np.linspace(16.0, 20.0, 9):
            ser = sf._i_series(nu, v) * math.exp(-v)
            worst = max(worst, abs(ser / sf.bessel_i_scaled(nu, v) - 1))
    rows.append(("i_regime_overlap", worst, 1e-9))
    grid = np.linspace(0.05, 10.0, 200)
    worst = 0.0
    for a in (0.25, 0.5, 0.75):
        for mm in (0.5, 1.0, 4.0):
            worst = max(worst, dif.rho_ode_residual(a, mm, grid))
    rows.append(("rho_ode", worst, 1e-5))
    worst = 0.0
    for a in (0.25, 0.5, 0.75):
        for mm in (0.5, 1.0, 4.0):
            c, p = sf.drift_ratio_asymptotic(a, mm, "zero")
            worst = max(worst, abs(sf.drift_ratio(a, mm, 1e-6) / (c * 1e-6 ** p) - 1))
            xi = 50.0 / math.sqrt(2 * mm)
            c, _ = sf.drift_ratio_asymptotic(a, mm, "infinity")
            worst = max(worst, abs(sf.drift_ratio(a, mm, xi) / c - 1))
    rows.append(("drift_asymptotics", worst, 1e-2))
    write_csv(os.path.join(out, "specfun_check.csv"), ["check", "max_residual", "tolerance", "ok"],
              [(n, r, t, r <= t) for n, r, t in rows], _header(cfg))
    return all(r <= t for _, r, t in rows)


def run_phi(cfg, out):
    _need(cfg, "alpha", "m")
    a, m = cfg.alpha, cfg.m
    st, rel = sub.Stable(a), sub.RelativisticStable(a, m)
    ess = sub.esscher(st, m)
    rows, ok = [], True
    for lam in cfg.lambda_grid:
        p0, p1, pe = sub.phi_eval(st, lam), sub.phi_eval(rel, lam), sub.phi_eval(ess, lam)
        ok &= abs(p1 - pe) <= 1e-12 * max(abs(p1), 1e-300)
        rows.append((lam, p0, p1, pe))
    write_csv(os.path.join(out, "phi.csv"), ["lambda", "phi_stable", "phi_relativistic", "phi_esscher"],
              rows, _header(cfg))
    return bool(ok)


def run_levy(cfg, out):
    _need(cfg, "alpha", "m")
    a, m, t = cfg.alpha, cfg.m, cfg.t_grid
    rep = sub.levy_sandwich_check(a, m, t)
    rows = [(v, sub.levy_density_eval(sub.StableDensity(a), v),
             sub.levy_density_eval(sub.RelativisticDensity(a, m), v), d, b)
            for v, d, b in zip(t, rep.details["difference"], rep.details["bound"])]
    write_csv(os.path.join(out, "levy.csv"), ["t", "nu_stable", "nu_relativistic", "difference", "bound"],
              rows, _header(cfg))
    return rep.ok


def _draw(cfg, kind, rng):
    a, n = cfg.alpha, cfg.n_paths
    if kind == "stable":
        return sub.sample_stable(a, cfg.t, rng, n)
    if kind == "relativistic":
        _need(cfg, "m")
        return sub.sample_relativistic(a, cfg.m, cfg.t, rng, n)
    raise ConfigError(f"unknown sampler {kind!r}")


def run_sample(cfg, out):
    _need(cfg, "alpha")
    rng = derive_substream(cfg.master_seed, 0)
    d = _draw(cfg, cfg.sampler, rng)
    write_csv(os.path.join(out, "sample.csv"), ["index", "value"], enumerate(d),
              _header(cfg) + f" sampler={cfg.sampler} t={cfg.t!r}")
    phi = sub.Stable(cfg.alpha) if cfg.sampler == "stable" else sub.RelativisticStable(cfg.alpha, cfg.m)
    rows, ok = [], True
    for lam in cfg.lambda_grid:
        e = np.exp(-lam * d)
        mean, se = float(e.mean()), float(e.std(ddof=1) / math.sqrt(d.size))
        exact = math.exp(-cfg.t * sub.phi_eval(phi, lam))
        good = abs(mean - exact) <= 3 * se
        ok &= good
        rows.append((lam, mean, exact, se, good))
    write_csv(os.path.join(out, "sample_laplace.csv"),
              ["lambda", "laplace_mc", "laplace_exact", "stderr", "ok"], rows, _header(cfg))
    return bool(ok)


def run_cm_check(cfg, out):
    _need(cfg, "alpha", "m")
    a, m = cfg.alpha, cfg.m
    grid = np.geomspace(1e-2, 1e2, 64)
    st, rel = sub.Stable(a), sub.RelativisticStable(a, m)
    diff = lambda l: sub.phi_eval(st, l) - sub.phi_eval(rel, l)
    ddiff = lambda l: sub.phi_derivative(st, l) - sub.phi_derivative(rel, l)
    rows, ok = [], True
    # the difference is increasing, so CM applies to its derivative
    rep = sub.bernstein_check(diff, ddiff, grid, cfg.order)
    ok &= rep.ok
    rows.append(("phi_difference_bernstein", cfg.order, rep.ok, rep.worst_violation, True))
    funcs = [("phi_difference_literal", diff, False)]
    if cfg.beta is not None:
        if not cfg.beta < a:
            raise ConfigError("beta must be below alpha")
        sb = sub.Stable(cfg.beta)
        funcs.append(("phi_ratio_beta_alpha", lambda l: sub.phi_eval(sb, l) / sub.phi_eval(st, l), True))
    funcs.append(("control_lambda", lambda l: l, False))
    funcs.append(("control_lambda_squared", lambda l: l * l, False))
    for name, f, expect in funcs:
        rep = sub.complete_monotonicity_check(f, grid, cfg.order)
        ok &= rep.ok == expect
        rows.append((name, cfg.order, rep.ok, rep.worst_violation, expect))
    write_csv(os.path.join(out, "cm_check.csv"), ["function", "order", "ok", "worst_violation", "expected"],
              rows, _header(cfg))
    return bool(ok)


def _sample_file(path, t):
    hdr, rows = read_csv(path)
    if "value" not in hdr:
        raise ConfigError(f"{path}: no 'value' column")
    j = hdr.index("value")
    return sub.SubordinatorSample(t, np.array([float(r[j]) for r in rows]))


def run_dominance(cfg, out):
    if cfg.lower or cfg.upper:
        _need(cfg, "lower", "upper")
        lo, hi = _sample_file(cfg.lower, cfg.t), _sample_file(cfg.upper, cfg.t)
    else:
        _need(cfg, "alpha", "m")
        lo = sub.SubordinatorSample(cfg.t, sub.sample_relativistic(
            cfg.alpha, cfg.m, cfg.t, derive_substream(cfg.master_seed, 0), cfg.n_paths))
        hi = sub.SubordinatorSample(cfg.t, sub.sample_stable(
            cfg.alpha, cfg.t, derive_substream(cfg.master_seed, 1), cfg.n_paths))
    rep = sub.stochastic_dominance_check(lo, hi)
    write_csv(os.path.join(out, "dominance.csv"), ["max_cdf_crossing", "critical_value", "ok"],
              [(rep.max_cdf_crossing, rep.critical_value, rep.ok)], _header(cfg))
    return rep.ok


def _field(cfg, name):
    a = cfg.alpha
    if name == "bessel":
        return dif.Bessel(a)
    if name == "relativistic":
        _need(cfg, "m")
        return dif.RelativisticBessel(a, cfg.m)
    if name == "perturbed":
        _need(cfg, "c1")
        return dif.Perturbed(a, dif.power_perturbation(a, cfg.c1), cfg.c1)
    raise ConfigError(f"unknown field {name!r}")


def _level(cfg, totals, q=0.5, scale=0.5):
    """Configured level, or ``scale`` times the q-quantile of L_T."""
    if cfg.level != "auto":
        return float(cfg.level)
    return scale * float(np.quantile(totals, q))


def run_simulate(cfg, out):
    _need(cfg, "alpha")
    hdr = _header(cfg) + f" field={cfg.field} dt={cfg.dt!r} T={cfg.T!r}"
    if cfg.field == "exact":
        p = dif.simulate_bessel_exact(cfg.alpha, cfg.x0, cfg.T, cfg.dt,
                                      derive_substream(cfg.master_seed, 0), cfg.master_seed)
        tab = dif.run_exact_bessel(cfg.alpha, cfg.x0, cfg.T, cfg.dt, cfg.epsilon, cfg.n_paths,
                                   cfg.master_seed, cfg.workers)
    else:
        fld = _field(cfg, cfg.field)
        p = dif.simulate_reflected(fld, cfg.x0, cfg.T, cfg.dt,
                                   derive_substream(cfg.master_seed, 0), cfg.master_seed)
        tab = dif.run_coupled((fld,), cfg.x0, cfg.T, cfg.dt, cfg.epsilon, cfg.n_paths,
                              cfg.master_seed, cfg.workers).tables[0]
    dif.write_path_csv(p, os.path.join(out, "path.csv"), hdr)
    L = dif.local_time(p, cfg.epsilon)
    levels = np.linspace(0.0, L.total, 21)[:-1]
    dif.write_inverse_csv(dif.inverse_local_time(L, levels), os.path.join(out, "inverse.csv"), hdr)
    write_csv(os.path.join(out, "local_time.csv"), ["path", "L_T", "downcrossings"],
              zip(range(tab.n_paths), tab.local_time_totals(), tab.counts()), hdr)
    return True


def run_compare(cfg, out):
    _need(cfg, "alpha", "c1")
    a, c1 = cfg.alpha, cfg.c1
    m = cfg.m if cfg.m is not None else dif.mass_from_c1(a, c1)
    fields = (dif.RelativisticBessel(a, m), dif.Perturbed(a, dif.power_perturbation(a, c1), c1), dif.Bessel(a))
    run = dif.run_coupled(fields, cfg.x0, cfg.T, cfg.dt, cfg.epsilon, cfg.n_paths,
                          cfg.master_seed, cfg.workers)
    level = float(_level(cfg, run.tables[1].local_time_totals()))
    s = [run.sample(k, level) for k in range(3)]
    lo = sub.stochastic_dominance_check(s[0], s[1])
    hi = sub.stochastic_dominance_check(s[1], s[2])
    tol = 1e-3
    ok = (float(np.max(run.order_violation)) <= tol and float(np.max(run.mask_violation)) <= tol
          and lo.ok and hi.ok)
    write_csv(os.path.join(out, "compare.csv"),
              ["m", "level", "order_violation", "mask_violation", "crossing_lower", "crossing_upper",
               "critical_value", "ok"],
              [(m, level, float(np.max(run.order_violation)), float(np.max(run.mask_violation)),
                lo.max_cdf_crossing, hi.max_cdf_crossing, lo.critical_value, ok)],
              _header(cfg) + f" dt={cfg.dt!r} T={cfg.T!r} epsilon={cfg.epsilon!r}")
    return ok


def laplace_targets(alpha, m, lambdas, lambda_ref):
    lam = np.asarray(lambdas, dtype=float)
    if m is None or m == 0:
        return (lam / lambda_ref) ** alpha
    return ((lam + m) ** alpha - m ** alpha) / ((lambda_ref + m) ** alpha - m ** alpha)


def run_laplace_fit(cfg, out):
    _need(cfg, "alpha")
    a, m = cfg.alpha, cfg.m
    if m:
        if a != 0.5:
            raise ConfigError("drifted laplace-fit is defined for alpha = 0.5")
        tab = dif.run_coupled((dif.RelativisticBessel(a, m),), cfg.x0, cfg.T, cfg.dt, cfg.epsilon,
                              cfg.n_paths, cfg.master_seed, cfg.workers).tables[0]
    else:
        tab = dif.run_exact_bessel(a, cfg.x0, cfg.T, cfg.dt, cfg.epsilon, cfg.n_paths,
                                   cfg.master_seed, cfg.workers)
    # low level keeps censoring rare; the ratio does not depend on it
    level = float(max(_level(cfg, tab.local_time_totals(), q=0.05, scale=1.0), 0.5 * tab.gauge))
    smp = sub.SubordinatorSample(level, tab.inverse(level))
    ratio = dif.empirical_laplace_ratio(smp, cfg.lambda_grid, cfg.lambda_ref)
    target = laplace_targets(a, m, cfg.lambda_grid, cfg.lambda_ref)
    rel = np.abs(ratio / target - 1.0)
    tol = 0.05 if cfg.tolerance is None else cfg.tolerance
    censored = float(np.mean(~np.isfinite(smp.draws)))
    write_csv(os.path.join(out, "laplace_fit.csv"), ["lambda", "ratio", "target", "rel_err", "ok"],
              zip(cfg.lambda_grid, ratio, target, rel, rel <= tol),
              _header(cfg) + f" level={level!r} censored={censored!r} dt={cfg.dt!r} T={cfg.T!r}")
    return bool(np.all(rel <= tol))


def run_excursions(cfg, out):
    _need(cfg, "alpha", "c1")
    a, c1 = cfg.alpha, cfg.c1
    m = cfg.m if cfg.m is not None else dif.mass_from_c1(a, c1)
    fld = dif.Perturbed(a, dif.power_perturbation(a, c1), c1)
    tab = dif.run_coupled((fld,), cfg.x0, cfg.T, cfg.dt, cfg.epsilon, cfg.n_paths,
                          cfg.master_seed, cfg.workers).tables[0]
    tail, se = dif.excursion_tail_estimate(tab, cfg.s_grid, return_stderr=True)
    # the gauge gives exponents c_alpha lam^alpha, whose Levy measures are
    # c_alpha times the stated densities
    ca = sf.c_alpha(a)
    tail, se = tail / ca, se / ca
    rep = sub.levy_sandwich_check(a, m, cfg.s_grid, empirical_tail=tail, band=3.0 * se)
    d = rep.details
    write_csv(os.path.join(out, "excursions.csv"),
              ["s", "nu_tail", "stderr", "tail_relativistic", "tail_stable"],
              zip(cfg.s_grid, tail, se, d["relativistic_tail"], d["stable_tail"]),
              _header(cfg) + f" m={m!r} dt={cfg.dt!r} T={cfg.T!r}")
    return rep.ok


def run_trace(cfg, out):
    _need(cfg, "alpha", "m")
    a, m, d, r = cfg.alpha, cfg.m, cfg.d, np.sort(cfg.r_grid)
    rep = tr.j_bound_check(a, m, d, r)
    rel = sub.RelativisticDensity(a, m)
    rows, ok = [], rep.ok
    for v in r:
        mu_s = tr.stable_trace_density(a, d, v)
        mu_q = tr.subordinated_levy_density(sub.StableDensity(a), d, v)
        ok &= abs(mu_q / mu_s - 1.0) <= 1e-6
        j = tr.j_difference(a, m, d, v)
        ok &= j >= 0
        rows.append((v, mu_s, tr.subordinated_levy_density(rel, d, v), j,
                     rep.C_effective * v ** rep.rate))
    write_csv(os.path.join(out, "trace.csv"), ["r", "mu_stable", "mu", "j", "bound"], rows,
              _header(cfg) + f" d={d} C_effective={rep.C_effective!r} C_refined={rep.C_refined!r}"
              f" fitted_slope={rep.fitted_slope!r}")
    return bool(ok)


def run_green(cfg, out):
    _need(cfg, "alpha", "m")
    a = cfg.alpha
    est = gr.green_mc_estimate(a, cfg.m, cfg.x, cfg.bins, cfg.n_paths, cfg.master_seed,
                               h=cfg.h, workers=cfg.workers, max_time=cfg.max_time)
    rep = gr.green_ratio_report(est, 2.0 * a, rate=sf.c_alpha(a), c_cap=cfg.c_cap)
    path = os.path.join(out, "green.csv")
    write_csv(path, ["bin_center", "G_mc", "stderr", "G_stable", "ratio"],
              zip(est.centers, est.values, est.stderr, rep.reference, rep.ratios),
              _header(cfg) + f" h={cfg.h!r} mean_exit_time={est.mean_exit_time!r}")
    with open(path, "a") as fh:
        fh.write("# min_ratio,max_ratio,ok\n")
        fh.write(f"# {rep.min_ratio:.17g},{rep.max_ratio:.17g},{'true' if rep.ok else 'false'}\n")
    return rep.ok


RUNNERS = {
    "specfun-check": run_specfun_check,
    "phi": run_phi,
    "levy": run_levy,
    "sample": run_sample,
    "cm-check": run_cm_check,
    "dominance": run_dominance,
    "simulate": run_simulate,
    "compare": run_compare,
    "laplace-fit": run_laplace_fit,
    "excursions": run_excursions,
    "trace": run_trace,
    "green": run_green,
}

_BUDGET = (gr.BudgetError, sub.SamplerBudgetError)
_DOMAIN = (ConfigError, dif.ResolutionError, dif.StepSizeError, dif.OrderingError, ValueError)


def run(cfg, out):
    """Execute ``cfg``; returns an exit status."""
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    try:
        ok = RUNNERS[cfg.experiment](cfg, out)
    except _BUDGET as e:
        print(f"ilt-lab: budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except dif.InsufficientDataError as e:
        print(f"ilt-lab: check failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    except _DOMAIN as e:
        print(f"ilt-lab: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.time_budget is not None and time.perf_counter() - t0 > cfg.time_budget:
        print("ilt-lab: budget exceeded: time_budget", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None):
    p = argparse.ArgumentParser(prog="ilt-lab", description="Inverse local time experiments")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    try:
        args = p.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    out = args.out or os.environ.get("ILT_LAB_OUT") or "."
    try:
        cfg = build_config(read_config(args.config), args.experiment, args.seed, args.workers)
    except (OSError, ConfigError, ValueError) as e:
        print(f"ilt-lab: config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg, out)


if __name__ == "__main__":
    sys.exit(main())
