"""Acceptance gate: desk-scale reproduction of every figure-level result.

One test per criterion, each printing a PASS line (run with ``pytest -s``
to watch them stream).  Monte Carlo comparisons use fixed seeds, so the
suite is deterministic on both kernel backends.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from gbmflow.core import ModelParams, f0
from gbmflow.ensemble import (
    LdfParams,
    StationaryDensityParams,
    core_boundary,
    density_finite_time,
    ldf,
    log_moment,
    log_msd,
    moment,
    msd,
    phi,
    stationary_density_value,
)
from gbmflow.firstpassage import (
    FirstPassageSetup,
    fpt_density_free,
    fpt_laplace_free,
    mfpt_open,
    mfpt_reset,
    optimal_exit,
    optimal_reset,
    survival_free,
    survival_mortal,
    survival_open,
)
from gbmflow.firstpassage import _tables as mortal_tables
from gbmflow.mc import (
    ensemble_statistics,
    mfpt_statistics,
    population_mean_curve,
    sample_fpt_open,
    sample_fpt_reset,
    simulate_ensemble,
    simulate_fpt_open,
    stationary_sample_pool,
)
from gbmflow.numerics import QuadratureSpec, find_root_bracketed
from gbmflow.rngstreams import RngSpec

STAT_BLUE = ModelParams(mu=0.02, sigma=math.sqrt(0.01), x0=10.0, lambda_r=100.0,
                      lambda_m=0.1)
SATURATING = ModelParams(mu=0.1, sigma=math.sqrt(0.02), x0=2.0, lambda_r=100.0,
                    lambda_m=0.5)
FP_PAR = ModelParams(mu=0.05, sigma=math.sqrt(0.02), x0=2.0)
FP = FirstPassageSetup(params=FP_PAR, x_target=3.0)


def _report(name, detail=""):
    print(f"\nACCEPTANCE [{name}]: PASS {detail}")


def _stationary_cdf(p, x):
    """Exact CDF of the stationary double power law."""
    sp = StationaryDensityParams.from_params(p)
    below_mass = -sp.prefactor / sp.exponent_below
    x = np.asarray(x, dtype=float)
    ratio = x / p.x0
    below = below_mass * ratio ** (-sp.exponent_below)
    above = below_mass + sp.prefactor / (-sp.exponent_above) * (
        1.0 - ratio ** sp.exponent_above
    )
    return np.where(ratio <= 1.0, below, above)


def _stationary_quantile(p, q):
    sp = StationaryDensityParams.from_params(p)
    below_mass = -sp.prefactor / sp.exponent_below
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        lo = p.x0 * (q / below_mass) ** (-1.0 / sp.exponent_below)
        hi = p.x0 * (
            1.0 - (q - below_mass) * (-sp.exponent_above) / sp.prefactor
        ) ** (1.0 / sp.exponent_above)
    return np.where(q <= below_mass, lo, hi)


def test_stationary_state_histogram():
    """MC histogram vs closed form on [x0/30, 30 x0]; tail slope -4.217."""
    t0 = time.time()
    p = STAT_BLUE
    samples = stationary_sample_pool(
        p, t_relax=20.0 / p.lambda_m, n_snapshots=500, snapshot_gap=6.0,
        dt=0.00099, rng=RngSpec(20240201, 0),
    )
    assert samples.size > 100_000  # "1e5 particles equivalent"

    # sup relative error of bin masses on 20 equal-mass bins spanning
    # [x0/30, 30 x0] (equal-mass binning keeps every bin statistically
    # meaningful out to the ends of the window)
    lo, hi = p.x0 / 30.0, 30.0 * p.x0
    q_lo, q_hi = _stationary_cdf(p, lo), _stationary_cdf(p, hi)
    edges = _stationary_quantile(p, np.linspace(q_lo, q_hi, 21))
    edges[0], edges[-1] = lo, hi
    counts, _ = np.histogram(samples, bins=edges)
    expected = np.diff(np.linspace(q_lo, q_hi, 21)) * samples.size
    sup_rel = np.max(np.abs(counts / expected - 1.0))
    assert sup_rel < 0.05

    # log-log slope of the tail histogram on [3 x0, 30 x0]
    tail_edges = np.geomspace(3.0 * p.x0, 30.0 * p.x0, 11)
    tail_counts, _ = np.histogram(samples, bins=tail_edges)
    centers = np.sqrt(tail_edges[:-1] * tail_edges[1:])
    dens = tail_counts / (samples.size * np.diff(tail_edges))
    keep = tail_counts > 0
    slope = np.polyfit(
        np.log(centers[keep]), np.log(dens[keep]), 1, w=np.sqrt(tail_counts[keep])
    )[0]
    assert slope == pytest.approx(-4.217, abs=0.1)

    elapsed = time.time() - t0
    assert elapsed < 120.0
    _report("stationary state",
            f"(sup rel {sup_rel:.3f}, slope {slope:.3f}, {elapsed:.0f}s)")


def test_population_birth_death():
    """Gillespie mean vs Phi within 3 SE at 10 checkpoints, 3 rate pairs."""
    t0 = time.time()
    cases = [
        (100.0, 0.5, 2.0),
        (100.0, 0.1, 2.0),
        (1.0, 1.0, 6.0),
    ]
    worst = 0.0
    for i, (lam_r, lam_m, t_end) in enumerate(cases):
        p = ModelParams(mu=0.1, sigma=math.sqrt(0.02), x0=2.0,
                        lambda_r=lam_r, lambda_m=lam_m)
        ts = np.linspace(t_end / 10, t_end, 10)
        mean, se = population_mean_curve(p, ts, 100_000, RngSpec(77, i << 20))
        z = np.max(np.abs(mean - phi(p, ts)) / se)
        worst = max(worst, z)
        assert z < 3.0, f"rates ({lam_r}, {lam_m}): worst z = {z:.2f}"
    elapsed = time.time() - t0
    assert elapsed < 60.0
    _report("population counts", f"(worst z {worst:.2f}, {elapsed:.0f}s)")


def test_moment_regimes():
    """Saturation values exactly; growth rates in the other two regimes;
    MC agreement for the saturating case."""
    # exact saturation values for n = 1 and (through the MSD) n = 2
    assert moment(SATURATING, 1, 200.0) == pytest.approx(2.5, rel=1e-6)
    assert msd(SATURATING, 200.0) == pytest.approx(8.0 / 7.0, rel=1e-6)

    # exponential regime: growth rate of log mean fits beta(1) - lambda_m
    p_exp = ModelParams(mu=0.1, sigma=math.sqrt(0.02), x0=2.0,
                        lambda_r=100.0, lambda_m=0.05)
    ts = np.linspace(150.0, 300.0, 60)
    rate = np.polyfit(ts, np.log(moment(p_exp, 1, ts)), 1)[0]
    assert rate == pytest.approx(0.05, rel=0.02)

    # linear regime: slope of the mean fits x0 * lambda_m
    p_lin = ModelParams(mu=0.1, sigma=math.sqrt(0.02), x0=2.0,
                        lambda_r=100.0, lambda_m=0.1)
    ts = np.linspace(300.0, 500.0, 60)
    slope = np.polyfit(ts, moment(p_lin, 1, ts), 1)[0]
    assert slope == pytest.approx(p_lin.x0 * p_lin.lambda_m, rel=0.02)

    # MC oracle at t = 40 (mean, second moment, MSD within 3 SE)
    stats_40 = ensemble_statistics(
        SATURATING, [40.0], dt=0.00099, n_runs=40, rng=RngSpec(40404, 0)
    )
    for est, se, target in (
        (stats_40.mean[0], stats_40.mean_se[0], moment(SATURATING, 1, 40.0)),
        (stats_40.second[0], stats_40.second_se[0], moment(SATURATING, 2, 40.0)),
        (stats_40.msd[0], stats_40.msd_se[0], msd(SATURATING, 40.0)),
    ):
        assert abs(est - target) < 3.0 * se
    _report("moment regimes", f"(exp rate {rate:.4f}, lin slope {slope:.4f})")


def test_log_moments_relaxation():
    """Asymptotes log2 + 0.18 and 0.1048; MC within 3 SE at t = 20."""
    assert log_moment(SATURATING, 1, 200.0) == pytest.approx(
        math.log(2.0) + 0.09 / 0.5, rel=1e-6
    )
    assert log_msd(SATURATING, 200.0) == pytest.approx(0.1048, rel=1e-6)
    assert log_moment(SATURATING, 1, 200.0) == pytest.approx(0.87315, abs=5e-6)

    st = ensemble_statistics(
        SATURATING, [20.0], dt=0.00099, n_runs=40, rng=RngSpec(30303, 0)
    )
    assert abs(st.log_mean[0] - log_moment(SATURATING, 1, 20.0)) < \
        3.0 * st.log_mean_se[0]
    assert abs(st.log_msd[0] - log_msd(SATURATING, 20.0)) < 3.0 * st.log_msd_se[0]
    _report("log-moments")


def test_relaxation_rate_function():
    """Measured decay rate of the density matches I(y) on [0.2 y*, 2 y*];
    branch change within 10% of y*.

    The decay rate is measured from the quadrature density of log-values at
    two times (prefactor cancels) and symmetrized over +-y: the one-sided
    rates carry the drift tilt -mu_bar y / sigma^2 on top of the symmetric
    branches (the tilt is what makes the stationary tails asymmetric).
    """
    p = SATURATING
    lp = LdfParams.from_params(p)
    assert lp.y_star == pytest.approx(0.16763, abs=2e-5)
    spec = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-8, max_depth=60)
    t1, t2 = 50.0, 100.0
    ys = np.linspace(0.2 * lp.y_star, 2.0 * lp.y_star, 25)

    def log_g(t, ysigned):
        xs = p.x0 * np.exp(ysigned * t)
        order = np.argsort(xs)
        vals = density_finite_time(p, t, xs[order], spec).values
        out = np.empty_like(vals)
        out[order] = vals
        return np.log(out * xs)

    rates = {}
    for sgn in (+1, -1):
        rates[sgn] = (log_g(t1, sgn * ys) - log_g(t2, sgn * ys)) / (t2 - t1)
    measured = 0.5 * (rates[+1] + rates[-1])
    target = ldf(p, ys)
    sup_rel = np.max(np.abs(measured / target - 1.0))
    assert sup_rel < 0.05

    # branch change: curvature jumps from 0 to 1/sigma^2 at y*
    curv = np.gradient(np.gradient(measured, ys), ys)
    y_detect = ys[int(np.argmax(curv > 0.5 / p.sigma2))]
    assert abs(y_detect / lp.y_star - 1.0) < 0.10

    lo, hi = core_boundary(p, 10.0)
    assert (lo, hi) == pytest.approx(
        (p.x0 * math.exp(-10 * lp.y_star), p.x0 * math.exp(10 * lp.y_star))
    )
    _report("relaxation boundary",
            f"(sup rel {sup_rel:.3f}, y* detected at {y_detect:.4f})")


def _free_fpt_cdf(setup):
    grid = np.linspace(0.0, 3000.0, 600_001)
    pdf = np.zeros_like(grid)
    pdf[1:] = fpt_density_free(setup, grid[1:])
    cdf = np.concatenate(
        [[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))]
    )
    return lambda x: np.interp(x, grid, cdf)


def _open_fpt_cdf(setup, lam_r, lam_m):
    tab = mortal_tables(setup, lam_m)
    with np.errstate(under="ignore"):
        q_surv = (1.0 - tab.A) * np.exp(-lam_r * tab.g)
    return lambda x: np.interp(x, tab.ts, 1.0 - q_surv)


def test_fpt_density_histograms():
    """KS at the 1% level: 1e5 hit times vs closed forms, both panels."""
    t0 = time.time()
    pvals = {}
    for j, x_t in enumerate((3.0, 4.0, 5.0)):
        s = FirstPassageSetup(params=FP_PAR, x_target=x_t)
        times = sample_fpt_reset(s, 0.0, 0.02, 100_000, RngSpec(600 + j, 0))
        res = stats.kstest(times, _free_fpt_cdf(s))
        pvals[f"free x_T={x_t:g}"] = res.pvalue
        assert res.pvalue > 0.01, f"panel (a) x_T={x_t}: p={res.pvalue:.4f}"

    for j, lam_m in enumerate((0.4, 0.8, 1.2)):
        times = sample_fpt_open(
            FP, 10.0, lam_m, 0.0025, 100_000, RngSpec(700 + j, 0)
        )
        res = stats.kstest(times, _open_fpt_cdf(FP, 10.0, lam_m))
        pvals[f"open lam_m={lam_m:g}"] = res.pvalue
        assert res.pvalue > 0.01, f"panel (b) lam_m={lam_m}: p={res.pvalue:.4f}"
    elapsed = time.time() - t0
    detail = ", ".join(f"{k}: p={v:.3f}" for k, v in pvals.items())
    _report("FPT densities", f"({detail}, {elapsed:.0f}s)")


def test_mfpt_scans():
    """Quadrature vs MC within 3 SE on an 8-point exit-rate grid for
    alpha in {2, 5, 10}; interior minimum and local-min certificate."""
    t0 = time.time()
    grid = np.geomspace(0.1, 2.0, 8)
    stream = 0
    worst_z = 0.0
    for alpha in (2.0, 5.0, 10.0):
        values = []
        for lm in grid:
            ana = mfpt_open(FP, alpha * lm, lm)
            times = sample_fpt_open(
                FP, alpha * lm, lm, 0.004, 20_000, RngSpec(50_000, stream)
            )
            stream += 20_000
            est = mfpt_statistics(times)
            z = abs(est.mean - ana) / est.stderr
            worst_z = max(worst_z, z)
            assert z < 3.0, f"alpha={alpha} lambda_m={lm:.3f}: z={z:.2f}"
            values.append(ana)
        i_min = int(np.argmin(values))
        assert 0 < i_min < grid.size - 1, f"no interior minimum for {alpha}"

        scan = optimal_exit(FP, alpha, bracket=(0.1, 2.0))
        assert not scan.boundary
        for shift in (0.99, 1.01):
            lm = scan.lambda_m_star * shift
            assert mfpt_open(FP, alpha * lm, lm) >= scan.mfpt_star - 1e-12
    elapsed = time.time() - t0
    assert elapsed < 600.0
    _report("MFPT scans", f"(worst z {worst_z:.2f}, {elapsed:.0f}s)")


def test_speedup_crossing():
    """epsilon_1 > 1; the crossing sits at alpha_c = 1.8 +- 0.2."""
    t0 = time.time()
    _, reset_best = optimal_reset(FP)
    alphas = np.linspace(0.5, 4.0, 8)
    eps = np.array([
        optimal_exit(FP, a).mfpt_star / reset_best for a in alphas
    ])
    assert eps[np.searchsorted(alphas, 1.0) - 1] > 1.0
    assert optimal_exit(FP, 1.0).mfpt_star / reset_best > 1.0
    assert np.all(np.diff(eps) < 0)
    alpha_c = find_root_bracketed(
        lambda a: optimal_exit(FP, a).mfpt_star / reset_best - 1.0,
        1.0, 3.0, tol=1e-3,
    )
    assert alpha_c == pytest.approx(1.8, abs=0.2)
    _report("speed-up crossing",
            f"(alpha_c {alpha_c:.3f}, eps_1 {eps[1]:.3f}, {time.time()-t0:.0f}s)")


def test_resetting_benchmark():
    """Closed-form MFPT at r = 0.5 (frozen derived value); MC within 3 SE."""
    val = mfpt_reset(FP, 0.5)
    # derived at full precision; the coarser 15.494 appears when
    # intermediates are rounded to five digits
    assert val == pytest.approx(15.4923708, rel=1e-6)
    assert val == pytest.approx(15.494, abs=5e-3)
    lap = fpt_laplace_free(FP, 0.5)
    assert val == pytest.approx((1.0 - lap) / (0.5 * lap), rel=1e-12)

    times = sample_fpt_reset(FP, 0.5, 0.004, 100_000, RngSpec(808, 0))
    est = mfpt_statistics(times)
    assert abs(est.mean - val) < 3.0 * est.stderr
    _report("resetting benchmark",
            f"(MC {est.mean:.3f} +- {est.stderr:.3f} vs {val:.4f})")


def test_property_suite():
    """Survival shapes, normalizations, branch continuity, determinism."""
    t0 = time.time()
    # 20 random parameter sets, 200-point grids: survivals in [0,1],
    # starting at 1, nonincreasing
    rng = np.random.default_rng(314159)
    for _ in range(20):
        p = ModelParams(
            mu=rng.uniform(-0.05, 0.15),
            sigma=rng.uniform(0.1, 0.35),
            x0=rng.uniform(0.5, 5.0),
        )
        s = FirstPassageSetup(params=p, x_target=p.x0 * rng.uniform(1.3, 3.0))
        lam_m = rng.uniform(0.0, 1.5)
        lam_r = rng.uniform(0.1, 5.0)
        ts = np.linspace(0.0, 25.0, 200)
        for fn in (
            lambda t: survival_free(s, t),
            lambda t: survival_mortal(s, lam_m, t),
            lambda t: survival_open(s, lam_r, lam_m, t),
        ):
            vals = np.array([fn(t) for t in ts])
            assert np.all((vals >= 0.0) & (vals <= 1.0))
            assert vals[0] == 1.0
            assert np.all(np.diff(vals) <= 1e-9)

    # densities normalize: free GBM density, finite-time ensemble density
    xs = np.geomspace(SATURATING.x0 * 1e-4, SATURATING.x0 * 1e4, 20001)
    assert np.trapezoid(f0(SATURATING, xs, 2.0), xs) == pytest.approx(1.0, abs=1e-6)
    assert np.trapezoid(
        stationary_density_value(SATURATING, xs), xs
    ) == pytest.approx(1.0, abs=1e-4)

    # moment branch continuity across lambda_m = beta(n)
    for n in (1, 2):
        b = n * SATURATING.mu + 0.5 * n * (n - 1) * SATURATING.sigma2
        pc = ModelParams(mu=SATURATING.mu, sigma=SATURATING.sigma, x0=2.0,
                         lambda_r=100.0, lambda_m=b)
        limit = pc.x0**n * (1 + 100.0 * 10.0) / phi(pc, 10.0)
        for eps in (-1e-8, 1e-8):
            pn = ModelParams(mu=SATURATING.mu, sigma=SATURATING.sigma, x0=2.0,
                             lambda_r=100.0, lambda_m=b + eps)
            assert moment(pn, n, 10.0) == pytest.approx(limit, rel=1e-6)

    # determinism: fixed seed, varying thread counts, both backends
    base = sample_fpt_open(FP, 2.0, 0.5, 0.01, 48, RngSpec(999, 0), n_jobs=1)
    threaded = sample_fpt_open(FP, 2.0, 0.5, 0.01, 48, RngSpec(999, 0),
                               n_jobs=3)
    assert np.array_equal(base, threaded)
    from gbmflow._backend import available_backends

    if len(available_backends()) == 2:
        for backend in ("compiled", "python"):
            rerun = sample_fpt_open(FP, 2.0, 0.5, 0.01, 48, RngSpec(999, 0),
                                    backend=backend)
            assert np.array_equal(base, rerun)

    states = simulate_ensemble(SATURATING, 1.0, 0.00099, RngSpec(123, 0))
    states2 = simulate_ensemble(SATURATING, 1.0, 0.00099, RngSpec(123, 0))
    assert np.array_equal(states[0].particles, states2[0].particles)

    sample = simulate_fpt_open(FP, 5.0, 0.5, 0.01, RngSpec(1, 1))
    assert sample == simulate_fpt_open(FP, 5.0, 0.5, 0.01, RngSpec(1, 1))
    _report("property suite", f"({time.time()-t0:.0f}s)")
