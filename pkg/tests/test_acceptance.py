"""Acceptance suite: one test group per criterion, each at its stated
tolerance.  Parts that are unattainable as literally stated are strict
xfails next to a passing test of what does hold; the terminal summary
prints one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from ilt_lab import cli, diffusion as dif, specfun as sf, subordinator as sub
from ilt_lab.csvio import read_csv

ALPHA_M = [(a, m) for a in (0.25, 0.5, 0.75) for m in (0.5, 1.0, 4.0)]
ELAPSED = {}


def run_cli(tmp_path, name, experiment, text, seed=0, workers=1):
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(text)
    out = tmp_path / name
    t0 = time.perf_counter()
    code = cli.main([experiment, "--config", str(cfg), "--seed", str(seed),
                     "--workers", str(workers), "--out", str(out)])
    return code, out, time.perf_counter() - t0


def header_fields(path):
    first = path.read_text().splitlines()[0].lstrip("# ")
    return dict(kv.split("=", 1) for kv in first.split())


# ---- 1: special functions

def test_c01_special_functions(record):
    t0 = time.perf_counter()
    x = np.logspace(-3, math.log10(50.0), 200)
    closed = [math.pi * math.exp(-v) / (sf.gamma_fn(0.5) * math.sqrt(2 * v)) for v in x]
    k_half = max(abs(sf.bessel_k(0.5, v) / c - 1) for v, c in zip(x, closed))
    rec = der = 0.0
    for nu in (0.25, 0.5, 0.75):
        for v in x:
            kp, km, k0 = sf.bessel_k(nu + 1, v), sf.bessel_k(nu - 1, v), sf.bessel_k(nu, v)
            rec = max(rec, abs(kp - km - 2 * nu / v * k0) / kp)
            der = max(der, abs(cli.k_derivative_fd(nu, v) / (-nu / v * k0 - km) - 1))
    dt = time.perf_counter() - t0
    ok = k_half <= 1e-10 and rec <= 1e-8 and der <= 1e-8 and dt < 1.0
    record(1, "bessel", ok, f"K1/2 {k_half:.2e}, recurrence {rec:.2e}, derivative {der:.2e}, {dt:.2f}s")
    assert ok


# ---- 2: rho_m ODE

def test_c02_rho_ode(record):
    t0 = time.perf_counter()
    grid = np.linspace(0.05, 10.0, 200)
    worst = max(dif.rho_ode_residual(a, m, grid) for a, m in ALPHA_M)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-5 and dt < 1.0
    record(2, "ode", ok, f"max residual {worst:.2e}, {dt:.2f}s")
    assert ok


# ---- 3: drift asymptotics

def _asym_dev(a, m, x, regime):
    c, p = sf.drift_ratio_asymptotic(a, m, regime)
    return sf.drift_ratio(a, m, x) / (c * x ** p)


def test_c03_infinity_regime_and_half(record):
    r_inf = [_asym_dev(a, m, 50 / math.sqrt(2 * m), "infinity") for a, m in ALPHA_M]
    half = max(abs(_asym_dev(0.5, m, x, reg) - 1) for m in (0.5, 1.0, 4.0)
               for x in (1e-6, 1e-4, 0.1, 3.0, 50.0) for reg in ("zero", "infinity"))
    ok = all(0.99 <= r <= 1.01 for r in r_inf) and half <= 1e-14
    record(3, "infinity", ok, f"ratios {min(r_inf):.4f}..{max(r_inf):.4f}; alpha=0.5 max dev {half:.1e}")
    assert ok


def test_c03_zero_regime_converges(record):
    # the correction is relative O(z^(2a)) for a < 1/2 and O(z^(2-2a)) for a > 1/2, z = sqrt(2m) x
    devs = {x: max(abs(_asym_dev(a, m, x, "zero") - 1) for a, m in ALPHA_M) for x in (1e-4, 1e-5, 1e-6)}
    ok = devs[1e-4] > devs[1e-5] > devs[1e-6] and devs[1e-6] <= 1e-2
    record(3, "zero-convergence", ok, ", ".join(f"x={x:g}: {d:.2e}" for x, d in devs.items()))
    assert ok


@pytest.mark.xfail(strict=True, reason="zero-regime correction is 1-2% at x = 1e-4 for alpha != 1/2")
def test_c03_zero_regime_literal(record):
    r = [_asym_dev(a, m, 1e-4, "zero") for a, m in ALPHA_M]
    ok = all(0.99 <= v <= 1.01 for v in r)
    record(3, "zero-literal", ok, f"ratios at x=1e-4 {min(r):.4f}..{max(r):.4f}")
    assert ok


# ---- 4: Esscher algebra

def test_c04_esscher(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        a = rng.uniform(0.05, 0.95)
        m, n = rng.uniform(0, 10, 2)
        lam = rng.uniform(0, 100)
        st = sub.Stable(a)
        # definition phi(lam + m) - phi(m), against the closed form
        direct = sub.phi_eval(st, lam + m) - sub.phi_eval(st, m)
        e1 = sub.phi_eval(sub.esscher(st, m), lam)
        e2 = sub.phi_eval(sub.RelativisticStable(a, m), lam)
        scale = sub.phi_eval(st, lam + m + n)
        inner = sub.esscher(st, m)
        comp = sub.phi_eval(sub.esscher(inner, n), lam)
        comp_direct = sub.phi_eval(inner, lam + n) - sub.phi_eval(inner, n)
        comp_sum = sub.phi_eval(sub.esscher(st, m + n), lam)
        worst = max(worst, abs(e1 - e2) / scale, abs(e1 - direct) / scale,
                    abs(comp - comp_direct) / scale, abs(comp - comp_sum) / scale)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-13 and dt < 1.0
    record(4, "esscher", ok, f"max scaled error {worst:.1e} over 1000 draws, {dt:.2f}s")
    assert ok


# ---- 5: complete monotonicity

GRID64 = np.geomspace(1e-2, 1e2, 64)


def test_c05_ratio_bernstein_and_controls(record):
    t0 = time.perf_counter()
    res = {}
    for a, b in ((0.5, 0.25), (0.75, 0.5), (0.6, 0.3)):
        sa, sb = sub.Stable(a), sub.Stable(b)
        rep = sub.complete_monotonicity_check(lambda l: sub.phi_eval(sb, l) / sub.phi_eval(sa, l), GRID64, 6)
        res[f"ratio({b},{a})"] = rep.ok
    for a in (0.25, 0.5, 0.75):
        st, rel = sub.Stable(a), sub.RelativisticStable(a, 1.0)
        rep = sub.bernstein_check(lambda l: sub.phi_eval(st, l) - sub.phi_eval(rel, l),
                                  lambda l: sub.phi_derivative(st, l) - sub.phi_derivative(rel, l),
                                  GRID64, 6)
        res[f"difference-bernstein({a})"] = rep.ok
    controls = [sub.complete_monotonicity_check(f, GRID64, 6).ok
                for f in (lambda l: l, lambda l: l * l, lambda l: math.sin(l))]
    dt = time.perf_counter() - t0
    ok = all(res.values()) and not any(controls) and dt < 1.0
    record(5, "ratio+bernstein+controls", ok,
           f"{sum(res.values())}/{len(res)} pass, controls rejected {controls.count(False)}/3, {dt:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="the exponent difference is increasing, hence not completely monotone")
def test_c05_difference_literal(record):
    reps = []
    for a in (0.25, 0.5, 0.75):
        st, rel = sub.Stable(a), sub.RelativisticStable(a, 1.0)
        reps.append(sub.complete_monotonicity_check(
            lambda l: sub.phi_eval(st, l) - sub.phi_eval(rel, l), GRID64, 6))
    ok = all(r.ok for r in reps)
    record(5, "difference-literal", ok, f"failed orders {[r.failed_order for r in reps]}")
    assert ok


# ---- 6: sampler Laplace transforms

def test_c06_sampler_laplace(tmp_path, record):
    total, fails = 0.0, []
    for a in (0.25, 0.5):
        for kind in ("stable", "relativistic"):
            text = f"alpha = {a}\nm = 1\nt = 1\nsampler = {kind}\nn_paths = 100000\nlambda_grid = 0.5, 1, 2, 5\n"
            code, out, dt = run_cli(tmp_path, f"s{a}{kind}", "sample", text, seed=6)
            total += dt
            _, rows = read_csv(out / "sample_laplace.csv")
            z = [abs(float(r[1]) - float(r[2])) / float(r[3]) for r in rows]
            if code != 0:
                fails.append(f"{kind}({a}) max z {max(z):.2f}")
    ok = not fails and total < 30
    record(6, "laplace", ok, f"{'; '.join(fails) or 'all within 3 SE'}, {total:.1f}s")
    assert ok


# ---- 7: closed-form sandwich

def test_c07_closed_form_dominance(tmp_path, record):
    total, detail, ok = 0.0, [], True
    for a in (0.25, 0.5):
        code, out, dt = run_cli(tmp_path, f"d{a}", "dominance", f"alpha = {a}\nm = 1\nn_paths = 10000\n", seed=7)
        total += dt
        _, rows = read_csv(out / "dominance.csv")
        detail.append(f"alpha={a} crossing {float(rows[0][0]):.4f}/{float(rows[0][1]):.4f}")
        ok &= code == 0
    ok &= total < 10
    record(7, "dominance", ok, f"{'; '.join(detail)}, {total:.1f}s")
    assert ok


# ---- 8: simulated sandwich

@pytest.mark.slow
def test_c08_simulated_sandwich(tmp_path, record):
    text = "alpha = 0.25\nc1 = 1\nm = auto\nT = 1\ndt = 1e-5\nn_paths = 10000\n"
    code, out, dt = run_cli(tmp_path, "cmp", "compare", text, seed=8)
    hdr, rows = read_csv(out / "compare.csv")
    r = dict(zip(hdr, rows[0]))
    ok = code == 0 and dt < 600
    record(8, "compare", ok,
           f"m={float(r['m']):.4f} order {float(r['order_violation']):.1e} mask {float(r['mask_violation']):.1e}"
           f" KS {float(r['crossing_lower']):.4f},{float(r['crossing_upper']):.4f}"
           f" < {float(r['critical_value']):.4f}, {dt:.0f}s")
    assert ok


# ---- 9: normalisation-free exponents

@pytest.mark.slow
@pytest.mark.parametrize("alpha,m", [(0.25, None), (0.5, 1.0)])
def test_c09_laplace_fit(tmp_path, record, alpha, m):
    text = (f"alpha = {alpha}\nT = 10\ndt = 1e-4\nn_paths = 10000\nlambda_grid = 0.5, 1, 2\nlambda_ref = 1\n"
            + (f"m = {m}\n" if m else ""))
    code, out, dt = run_cli(tmp_path, f"lf{alpha}", "laplace-fit", text, seed=9)
    ELAPSED[9] = ELAPSED.get(9, 0.0) + dt
    _, rows = read_csv(out / "laplace_fit.csv")
    errs = [float(r[3]) for r in rows]
    ok = code == 0 and ELAPSED[9] < 300
    name = "exact-bessel" if m is None else "drifted"
    record(9, name, ok, f"alpha={alpha} rel errors {', '.join(f'{e:.3f}' for e in errs)}, {dt:.0f}s"
           f" (cumulative {ELAPSED[9]:.0f}s)")
    assert ok


# ---- 10: trace Levy density

def test_c10_trace(tmp_path, record):
    total, detail, ok = 0.0, [], True
    for d, a in ((1, 0.25), (1, 0.5), (2, 0.5)):
        code, out, dt = run_cli(tmp_path, f"tr{d}{a}", "trace", f"alpha = {a}\nm = 1\nd = {d}\n", seed=10)
        total += dt
        h = header_fields(out / "trace.csv")
        c0, c1 = float(h["C_effective"]), float(h["C_refined"])
        detail.append(f"(d={d},a={a}) C_eff {c0:.4g} refined {c1:.4g} slope {float(h['fitted_slope']):.3f}")
        ok &= code == 0 and math.isfinite(c0) and abs(c1 / c0 - 1) <= 0.01
    ok &= total < 10
    record(10, "trace", ok, f"{'; '.join(detail)}, {total:.1f}s")
    assert ok


# ---- 11: Green comparability

def _green(tmp_path, record, alpha, m, part):
    text = f"alpha = {alpha}\nm = {m}\nn_paths = 100000\nc_cap = 3\n"
    code, out, dt = run_cli(tmp_path, f"g{alpha}{m}", "green", text, seed=11)
    ELAPSED[11] = ELAPSED.get(11, 0.0) + dt
    lines = (out / "green.csv").read_text().splitlines()
    lo, hi, _ = lines[-1].lstrip("# ").split(",")
    ok = code == 0
    record(11, part, ok, f"alpha={alpha} m={m} ratios {float(lo):.3f}..{float(hi):.3f}, {dt:.0f}s"
           f" (cumulative {ELAPSED[11]:.0f}s)")
    return ok


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [0.25, 0.4])
def test_c11_green_self_consistency(tmp_path, record, alpha):
    # m = 0 ratios must lie in [0.8, 1.25]
    text = f"alpha = {alpha}\nm = 0\nn_paths = 100000\nc_cap = 1.25\n"
    code, out, dt = run_cli(tmp_path, f"g{alpha}0", "green", text, seed=11)
    ELAPSED[11] = ELAPSED.get(11, 0.0) + dt
    lo, hi, _ = (out / "green.csv").read_text().splitlines()[-1].lstrip("# ").split(",")
    ok = code == 0
    record(11, f"m0-alpha{alpha}", ok, f"ratios {float(lo):.3f}..{float(hi):.3f}, {dt:.0f}s")
    assert ok


@pytest.mark.slow
def test_c11_green_alpha04(tmp_path, record):
    assert _green(tmp_path, record, 0.4, 1, "alpha0.4-m1")


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="mean exit time is about 4x the stable one, so no bin stays within C_cap = 3")
def test_c11_green_alpha025(tmp_path, record):
    assert _green(tmp_path, record, 0.25, 1, "alpha0.25-m1")


@pytest.mark.slow
def test_c11_runtime(record):
    ok = ELAPSED.get(11, 0.0) < 900
    record(11, "runtime", ok, f"{ELAPSED.get(11, 0.0):.0f}s")
    assert ok


# ---- 12: reproducibility

SMALL = {
    "specfun-check": "",
    "phi": "alpha = 0.3\nm = 2\n",
    "levy": "alpha = 0.3\nm = 2\n",
    "sample": "alpha = 0.3\nm = 2\nsampler = relativistic\nn_paths = 2000\n",
    "cm-check": "alpha = 0.5\nm = 1\nbeta = 0.25\n",
    "dominance": "alpha = 0.5\nm = 1\nn_paths = 2000\n",
    "simulate": "alpha = 0.25\nfield = perturbed\nc1 = 1\nT = 0.1\ndt = 1e-4\nn_paths = 600\n",
    "compare": "alpha = 0.25\nc1 = 1\nm = auto\nT = 0.2\ndt = 1e-4\nn_paths = 600\n",
    "laplace-fit": "alpha = 0.25\nT = 0.5\ndt = 1e-4\nn_paths = 1200\nlambda_grid = 0.5, 1, 2\ntolerance = 1\n",
    "excursions": "alpha = 0.5\nc1 = 1\nT = 0.5\ndt = 1e-4\nn_paths = 600\ns_grid = 0.01, 0.1\n",
    "trace": "alpha = 0.5\nm = 1\nd = 2\nr_grid = logspace(-2, 0, 5)\n",
    "green": "alpha = 0.5\nm = 0\nn_paths = 2000\nbins = linspace(-1, 1, 11)\n",
}


def test_c12_reproducibility(tmp_path, record):
    assert set(SMALL) == set(cli.EXPERIMENTS)
    bad = []
    for exp, text in SMALL.items():
        outs = []
        for k, w in enumerate((1, 1, 2)):
            code, out, _ = run_cli(tmp_path, f"{exp}{k}", exp, text, seed=12, workers=w)
            if code not in (0, 1):
                bad.append(f"{exp} exit {code}")
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if not (outs[0] and outs[0] == outs[1] == outs[2]):
            bad.append(exp)
    ok = not bad
    record(12, "byte-identical", ok, f"{len(SMALL) - len(bad)}/{len(SMALL)} experiments identical"
           f" over two runs and workers 1 vs 2" + (f"; differing: {bad}" if bad else ""))
    assert ok
