"""Command-line surface: every analytic quantity and simulator, exported as
CSV/JSON artifacts from which the figures are regenerated.

Each command writes its table atomically (temp file + rename) with full
double precision, plus a run manifest ``<out>.manifest.json`` recording the
exact argv, parameters, seed, and tool version.  Re-running the recorded
argv reproduces the CSV byte-for-byte (analytic commands) or
sample-for-sample (Monte Carlo commands, same seed).

Exit codes: 0 success, 1 numerical failure, 2 invalid parameters.
"""

from __future__ import annotations

import datetime
import functools
import json
import math
import os
import sys
import tempfile

import click
import numpy as np

from . import __version__, ensemble, firstpassage as fp, mc
from .core import ModelParams
from .errors import GbmflowError, ParameterError
from .firstpassage import FirstPassageSetup
from .numerics import find_root_bracketed
from .rngstreams import RngSpec


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".gbmflow-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list[str], columns: list[np.ndarray]):
    rows = ["\n".join(
        [",".join(header)]
        + [",".join(_fmt(col[i]) for col in columns) for i in range(len(columns[0]))]
    ) + "\n"]
    _atomic_write(path, rows[0])


def manifest_path(out: str) -> str:
    base, _ = os.path.splitext(out)
    return base + ".manifest.json"


def write_manifest(out: str, command: str, payload: dict, extra_outputs=()):
    doc = {
        "command": command,
        "argv": sys.argv[1:],
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": [os.path.basename(out), *extra_outputs],
        **payload,
    }
    _atomic_write(
        manifest_path(out),
        json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
    )


def write_json(path: str, payload: dict):
    _atomic_write(
        path, json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    )


def _handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ParameterError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except GbmflowError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(1)

    return wrapper


def model_options(f):
    opts = [
        click.option("--mu", type=float, required=True, help="Drift rate."),
        click.option(
            "--sigma", type=float, required=True,
            help="Volatility (sigma itself, not sigma^2; sources quoting "
                 "sigma=sqrt(v) mean --sigma equal to sqrt(v)).",
        ),
        click.option("--x0", type=float, required=True, help="Entry value."),
        click.option("--lambda-r", type=float, default=0.0, show_default=True,
                     help="Entry rate."),
        click.option("--lambda-m", type=float, default=0.0, show_default=True,
                     help="Exit rate."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _params(mu, sigma, x0, lambda_r, lambda_m) -> ModelParams:
    return ModelParams(mu=mu, sigma=sigma, x0=x0, lambda_r=lambda_r,
                       lambda_m=lambda_m)


def _params_echo(p: ModelParams, **extra) -> dict:
    d = {"mu": p.mu, "sigma": p.sigma, "x0": p.x0, "lambda_r": p.lambda_r,
         "lambda_m": p.lambda_m, "mu_bar": p.mu_bar}
    d.update(extra)
    return d


def _grid(x_min, x_max, points, log_grid):
    if not (0 < x_min < x_max):
        raise ParameterError("need 0 < x-min < x-max")
    if points < 2:
        raise ParameterError("need at least two grid points")
    if log_grid:
        return np.geomspace(x_min, x_max, points)
    return np.linspace(x_min, x_max, points)


def _edges_for(xs: np.ndarray, log_grid: bool) -> np.ndarray:
    """Bin edges whose centers track the requested grid."""
    if log_grid:
        inner = np.sqrt(xs[:-1] * xs[1:])
        first = xs[0] ** 2 / inner[0]
        last = xs[-1] ** 2 / inner[-1]
    else:
        inner = 0.5 * (xs[:-1] + xs[1:])
        first = max(2 * xs[0] - inner[0], xs[0] / 2)
        last = 2 * xs[-1] - inner[-1]
    return np.concatenate([[first], inner, [last]])


def _auto_dt(*rates: float) -> float:
    return 0.099 / max(*rates, 1e-9)


@click.group()
@click.version_option(__version__)
def main():
    """GBM with independent entry and exit rates: analytics + Monte Carlo."""


@main.command()
@model_options
@click.option("--x-min", type=float, default=None, help="Grid start (default x0/1000).")
@click.option("--x-max", type=float, default=None, help="Grid end (default x0*1000).")
@click.option("--points", type=int, default=400, show_default=True)
@click.option("--log-grid/--linear-grid", default=True, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--mc", "mc_", is_flag=True, help="Add Monte Carlo histogram columns.")
@click.option("--paths", type=int, default=100_000, show_default=True,
              help="Target pooled sample count for --mc.")
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--t-relax", type=float, default=None,
              help="Relaxation time before sampling (default 20/lambda_m).")
@click.option("--dt", type=float, default=None, help="MC step (default auto).")
@_handle_errors
def stationary(mu, sigma, x0, lambda_r, lambda_m, x_min, x_max, points,
               log_grid, out, mc_, paths, seed, t_relax, dt):
    """Stationary density curve, optionally with an MC histogram."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    p.require_stationary()
    xs = _grid(x_min or p.x0 * 1e-3, x_max or p.x0 * 1e3, points, log_grid)
    curve = ensemble.stationary_density(p, xs)
    header = ["x", "f_analytic"]
    cols = [curve.xs, curve.values]
    payload = {"params": _params_echo(p), "grid": {"x_min": float(xs[0]),
               "x_max": float(xs[-1]), "points": points, "log": log_grid}}
    if mc_:
        dt = dt or _auto_dt(p.lambda_m, p.lambda_r, abs(p.mu), p.sigma2)
        t_relax = t_relax if t_relax is not None else 20.0 / p.lambda_m
        gap = 2.0 / p.lambda_m
        n_snap = max(2, int(math.ceil(paths * p.lambda_m / p.lambda_r)))
        samples = mc.stationary_sample_pool(
            p, t_relax, n_snap, gap, dt, RngSpec(seed, 0)
        )
        est = mc.estimate_density(samples, bin_edges=_edges_for(xs, log_grid))
        header += ["f_mc", "f_mc_se"]
        cols += [est.values, est.stderr]
        payload.update({"seed": seed, "n_samples": int(samples.size),
                        "dt": dt, "t_relax": t_relax, "snapshot_gap": gap})
    write_csv(out, header, cols)
    write_manifest(out, "stationary", payload)


@main.command()
@model_options
@click.option("--t", "t_eval", type=float, required=True, help="Evaluation time.")
@click.option("--x-min", type=float, default=None)
@click.option("--x-max", type=float, default=None)
@click.option("--points", type=int, default=200, show_default=True)
@click.option("--log-grid/--linear-grid", default=True, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--mc", "mc_", is_flag=True)
@click.option("--runs", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--dt", type=float, default=None)
@_handle_errors
def density(mu, sigma, x0, lambda_r, lambda_m, t_eval, x_min, x_max, points,
            log_grid, out, mc_, runs, seed, dt):
    """Finite-time normalized density on a value grid."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    xs = _grid(x_min or p.x0 * 1e-2, x_max or p.x0 * 1e2, points, log_grid)
    curve = ensemble.density_finite_time(p, t_eval, xs)
    header = ["x", "f_analytic"]
    cols = [curve.xs, curve.values]
    payload = {"params": _params_echo(p, t=t_eval),
               "grid": {"x_min": float(xs[0]), "x_max": float(xs[-1]),
                        "points": points, "log": log_grid}}
    if mc_:
        dt = dt or _auto_dt(p.lambda_m, p.lambda_r, abs(p.mu), p.sigma2)
        pool = []
        for i in range(runs):
            states = mc.simulate_ensemble(
                p, t_eval, dt, RngSpec(seed, i), snapshot_times=[t_eval]
            )
            pool.append(states[0].particles)
        samples = np.concatenate(pool)
        est = mc.estimate_density(samples, bin_edges=_edges_for(xs, log_grid))
        header += ["f_mc", "f_mc_se"]
        cols += [est.values, est.stderr]
        payload.update({"seed": seed, "runs": runs, "dt": dt,
                        "n_samples": int(samples.size)})
    write_csv(out, header, cols)
    write_manifest(out, "density", payload)


def _time_grid(t_max, points, log_time, t_min=0.0):
    if points < 2:
        raise ParameterError("need at least two time points")
    if log_time:
        lo = t_min if t_min > 0 else t_max * 1e-3
        return np.geomspace(lo, t_max, points)
    return np.linspace(t_min, t_max, points)


@main.command()
@model_options
@click.option("--t-max", type=float, required=True)
@click.option("--points", type=int, default=200, show_default=True)
@click.option("--log-time/--linear-time", default=False, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--mc", "mc_", is_flag=True)
@click.option("--runs", type=int, default=100, show_default=True)
@click.option("--mc-points", type=int, default=25, show_default=True,
              help="Snapshot count for the MC columns.")
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--dt", type=float, default=None)
@_handle_errors
def moments(mu, sigma, x0, lambda_r, lambda_m, t_max, points, log_time, out,
            mc_, runs, mc_points, seed, dt):
    """Mean and MSD versus time (all three regimes)."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    ts = _time_grid(t_max, points, log_time)
    header = ["t", "mean", "msd"]
    cols = [ts, ensemble.moment(p, 1, ts), ensemble.msd(p, ts)]
    payload = {"params": _params_echo(p),
               "grid": {"t_max": t_max, "points": points, "log": log_time}}
    if mc_:
        dt = dt or _auto_dt(p.lambda_m, p.lambda_r, abs(p.mu), p.sigma2)
        snap = _time_grid(t_max, mc_points, log_time)[1:] if not log_time \
            else _time_grid(t_max, mc_points, log_time)
        stats = mc.ensemble_statistics(p, snap, dt, runs, RngSpec(seed, 0))
        mean_i = np.interp(ts, stats.times, stats.mean, left=np.nan)
        mean_se = np.interp(ts, stats.times, stats.mean_se, left=np.nan)
        msd_i = np.interp(ts, stats.times, stats.msd, left=np.nan)
        msd_se = np.interp(ts, stats.times, stats.msd_se, left=np.nan)
        header += ["mean_mc", "mean_se", "msd_mc", "msd_se"]
        cols += [np.nan_to_num(mean_i), np.nan_to_num(mean_se),
                 np.nan_to_num(msd_i), np.nan_to_num(msd_se)]
        payload.update({"seed": seed, "runs": runs, "dt": dt})
    write_csv(out, header, cols)
    write_manifest(out, "moments", payload)


@main.command()
@model_options
@click.option("--t-max", type=float, required=True)
@click.option("--points", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--mc", "mc_", is_flag=True)
@click.option("--runs", type=int, default=100, show_default=True)
@click.option("--mc-points", type=int, default=25, show_default=True)
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--dt", type=float, default=None)
@_handle_errors
def logmoments(mu, sigma, x0, lambda_r, lambda_m, t_max, points, out, mc_,
               runs, mc_points, seed, dt):
    """Log-mean and log-MSD versus time, with stationary asymptotes."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    ts = _time_grid(t_max, points, False)
    header = ["t", "log_mean", "log_msd"]
    cols = [ts, ensemble.log_moment(p, 1, ts), ensemble.log_msd(p, ts)]
    payload = {"params": _params_echo(p),
               "grid": {"t_max": t_max, "points": points}}
    if p.lambda_m > 0:
        payload["asymptotes"] = {
            "log_mean": math.log(p.x0) + p.mu_bar / p.lambda_m,
            "log_msd": p.sigma2 / p.lambda_m + 2 * p.mu_bar**2 / p.lambda_m**2,
        }
    if mc_:
        dt = dt or _auto_dt(p.lambda_m, p.lambda_r, abs(p.mu), p.sigma2)
        snap = _time_grid(t_max, mc_points, False)[1:]
        stats = mc.ensemble_statistics(p, snap, dt, runs, RngSpec(seed, 0))
        header += ["log_mean_mc", "log_mean_se", "log_msd_mc", "log_msd_se"]
        cols += [
            np.nan_to_num(np.interp(ts, stats.times, stats.log_mean, left=np.nan)),
            np.nan_to_num(np.interp(ts, stats.times, stats.log_mean_se, left=np.nan)),
            np.nan_to_num(np.interp(ts, stats.times, stats.log_msd, left=np.nan)),
            np.nan_to_num(np.interp(ts, stats.times, stats.log_msd_se, left=np.nan)),
        ]
        payload.update({"seed": seed, "runs": runs, "dt": dt})
    write_csv(out, header, cols)
    write_manifest(out, "logmoments", payload)


@main.command()
@model_options
@click.option("--t-max", type=float, required=True)
@click.option("--points", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_handle_errors
def boundary(mu, sigma, x0, lambda_r, lambda_m, t_max, points, out):
    """Inner-core boundary x0*exp(+-y* t) separating relaxed from transient."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    ts = np.linspace(0.0, t_max, points)
    lows = np.empty_like(ts)
    highs = np.empty_like(ts)
    for i, t in enumerate(ts):
        lows[i], highs[i] = ensemble.core_boundary(p, t)
    write_csv(out, ["t", "x_low", "x_high"], [ts, lows, highs])
    write_manifest(out, "boundary", {
        "params": _params_echo(p, y_star=ensemble.LdfParams.from_params(p).y_star),
        "grid": {"t_max": t_max, "points": points},
    })


@main.command()
@model_options
@click.option("--x-target", type=float, required=True)
@click.option("--mode", type=click.Choice(["free", "open"]), default="free",
              show_default=True)
@click.option("--t-max", type=float, required=True)
@click.option("--points", type=int, default=200, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--mc", "mc_", is_flag=True)
@click.option("--paths", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--dt", type=float, default=None)
@_handle_errors
def fpt(mu, sigma, x0, lambda_r, lambda_m, x_target, mode, t_max, points, out,
        mc_, paths, seed, dt):
    """First-passage time density to an upward target."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    s = FirstPassageSetup(params=p, x_target=x_target)
    ts = np.linspace(t_max / points, t_max, points)
    if mode == "free":
        dens = fp.fpt_density_free(s, ts)
    else:
        if lambda_r <= 0:
            raise ParameterError("open mode needs --lambda-r > 0")
        dens = np.array(
            [fp.fpt_density_open(s, p.lambda_r, p.lambda_m, t) for t in ts]
        )
    header = ["t", "p_analytic"]
    cols = [ts, dens]
    payload = {"params": _params_echo(p, x_target=x_target, mode=mode),
               "grid": {"t_max": t_max, "points": points}}
    if mc_:
        dt = dt or _auto_dt(p.lambda_m, p.lambda_r, abs(p.mu), p.sigma2)
        if mode == "free":
            # vanishing entry rate, conditioned on the initial searcher
            times = mc.sample_fpt_reset(s, 0.0, dt, paths, RngSpec(seed, 0))
        else:
            times = mc.sample_fpt_open(
                s, p.lambda_r, p.lambda_m, dt, paths, RngSpec(seed, 0)
            )
        edges = np.linspace(0.0, t_max, 81)
        counts, _ = np.histogram(times, bins=edges)
        centers = 0.5 * (edges[:-1] + edges[1:])
        width = edges[1] - edges[0]
        dens_mc = counts / (times.size * width)
        se_mc = np.sqrt(counts) / (times.size * width)
        header += ["p_mc", "p_mc_se"]
        cols += [np.interp(ts, centers, dens_mc),
                 np.interp(ts, centers, se_mc)]
        payload.update({"seed": seed, "paths": paths, "dt": dt})
    write_csv(out, header, cols)
    write_manifest(out, "fpt", payload)


@main.command()
@model_options
@click.option("--x-target", type=float, required=True)
@click.option("--alpha", "alphas", type=float, multiple=True, required=True,
              help="Entry-to-exit ratio; repeatable.")
@click.option("--lambda-m-min", type=float, default=0.05, show_default=True)
@click.option("--lambda-m-max", type=float, default=3.0, show_default=True)
@click.option("--lambda-m-points", type=int, default=20, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--optimal-locus", is_flag=True,
              help="Also write <out base>_locus.csv with (alpha, lambda_m_star).")
@click.option("--mc", "mc_", is_flag=True)
@click.option("--paths", type=int, default=20_000, show_default=True)
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--dt", type=float, default=None)
@_handle_errors
def mfpt(mu, sigma, x0, lambda_r, lambda_m, x_target, alphas, lambda_m_min,
         lambda_m_max, lambda_m_points, out, optimal_locus, mc_, paths, seed,
         dt):
    """MFPT scans over the exit rate for each alpha, plus located optima."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    s = FirstPassageSetup(params=p, x_target=x_target)
    grid = np.geomspace(lambda_m_min, lambda_m_max, lambda_m_points)
    col_alpha, col_lm, col_mfpt, col_mc, col_se = [], [], [], [], []
    summary = {}
    stream = 0
    for a in alphas:
        for lm in grid:
            col_alpha.append(a)
            col_lm.append(lm)
            col_mfpt.append(fp.mfpt_open(s, a * lm, lm))
            if mc_:
                dt_eff = dt or _auto_dt(lm, a * lm, abs(p.mu), p.sigma2)
                times = mc.sample_fpt_open(
                    s, a * lm, lm, dt_eff, paths, RngSpec(seed, stream)
                )
                stream += paths
                est = mc.mfpt_statistics(times)
                col_mc.append(est.mean)
                col_se.append(est.stderr)
        scan = fp.optimal_exit(s, a, bracket=(lambda_m_min, lambda_m_max))
        summary[f"alpha={a:g}"] = {
            "alpha": a,
            "lambda_m_star": scan.lambda_m_star,
            "mfpt_star": scan.mfpt_star,
            "residual": scan.residual,
            "boundary": scan.boundary,
        }
    header = ["alpha", "lambda_m", "mfpt"]
    cols = [np.array(col_alpha), np.array(col_lm), np.array(col_mfpt)]
    if mc_:
        header += ["mfpt_mc", "mfpt_se"]
        cols += [np.array(col_mc), np.array(col_se)]
    write_csv(out, header, cols)
    base, _ = os.path.splitext(out)
    write_json(base + "_summary.json",
               {"params": _params_echo(p, x_target=x_target), "optima": summary})
    if optimal_locus:
        locus_alphas = np.geomspace(min(alphas), max(alphas), 15) \
            if len(alphas) > 1 else np.asarray(alphas)
        stars = [
            fp.optimal_exit(s, a, bracket=(lambda_m_min, lambda_m_max)).lambda_m_star
            for a in locus_alphas
        ]
        write_csv(base + "_locus.csv", ["alpha", "lambda_m_star"],
                  [locus_alphas, np.array(stars)])
    extra = [os.path.basename(base) + "_summary.json"]
    if optimal_locus:
        extra.append(os.path.basename(base) + "_locus.csv")
    write_manifest(out, "mfpt", {
        "params": _params_echo(p, x_target=x_target),
        "alphas": list(alphas),
        "grid": {"lambda_m_min": lambda_m_min, "lambda_m_max": lambda_m_max,
                 "points": lambda_m_points},
        "seed": seed if mc_ else None,
        "paths": paths if mc_ else None,
    }, extra_outputs=extra)


@main.command()
@model_options
@click.option("--x-target", type=float, required=True)
@click.option("--alpha-min", type=float, default=0.5, show_default=True)
@click.option("--alpha-max", type=float, default=4.0, show_default=True)
@click.option("--alpha-points", type=int, default=15, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_handle_errors
def speedup(mu, sigma, x0, lambda_r, lambda_m, x_target, alpha_min, alpha_max,
            alpha_points, out):
    """Speed-up ratio of optimized entry-exit over optimized resetting."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    s = FirstPassageSetup(params=p, x_target=x_target)
    alphas = np.geomspace(alpha_min, alpha_max, alpha_points)
    _, reset_best = fp.optimal_reset(s)
    eps = np.array([
        fp.optimal_exit(s, a).mfpt_star / reset_best for a in alphas
    ])
    write_csv(out, ["alpha", "epsilon"], [alphas, eps])
    payload = {"params": _params_echo(p, x_target=x_target),
               "reset_mfpt_star": reset_best}
    if eps.min() < 1.0 < eps.max():
        i = int(np.argmax(eps < 1.0))
        alpha_c = find_root_bracketed(
            lambda a: fp.optimal_exit(s, a).mfpt_star / reset_best - 1.0,
            float(alphas[i - 1]),
            float(alphas[i]),
            tol=1e-4,
        )
        payload["alpha_c"] = alpha_c
    base, _ = os.path.splitext(out)
    write_json(base + "_summary.json", payload)
    write_manifest(out, "speedup", payload,
                   extra_outputs=[os.path.basename(base) + "_summary.json"])


@main.command()
@model_options
@click.option("--t-max", type=float, required=True)
@click.option("--points", type=int, default=11, show_default=True)
@click.option("--runs", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_handle_errors
def population(mu, sigma, x0, lambda_r, lambda_m, t_max, points, runs, seed,
               out):
    """Mean population: closed form versus exact birth-death simulation."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    ts = np.linspace(0.0, t_max, points)
    mean, se = mc.population_mean_curve(p, ts, runs, RngSpec(seed, 0))
    write_csv(out, ["t", "phi_analytic", "phi_gillespie", "phi_se"],
              [ts, ensemble.phi(p, ts), mean, se])
    write_manifest(out, "population", {
        "params": _params_echo(p), "seed": seed, "runs": runs,
        "grid": {"t_max": t_max, "points": points},
    })


@main.command()
@model_options
@click.option("--kind", type=click.Choice(
    ["ensemble", "gillespie", "fpt-open", "fpt-reset"]), required=True)
@click.option("--x-target", type=float, default=None)
@click.option("--reset-rate", type=float, default=0.0, show_default=True)
@click.option("--t-end", type=float, default=None)
@click.option("--dt", type=float, default=None)
@click.option("--paths", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=2024, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@_handle_errors
def simulate(mu, sigma, x0, lambda_r, lambda_m, kind, x_target, reset_rate,
             t_end, dt, paths, seed, out):
    """Raw simulator output: samples straight from the stochastic oracles."""
    p = _params(mu, sigma, x0, lambda_r, lambda_m)
    payload = {"params": _params_echo(p), "kind": kind, "seed": seed,
               "paths": paths}
    if kind == "ensemble":
        if t_end is None:
            raise ParameterError("--t-end is required for ensemble")
        dt = dt or _auto_dt(p.lambda_m, p.lambda_r, abs(p.mu), p.sigma2)
        states = mc.simulate_ensemble(p, t_end, dt, RngSpec(seed, 0),
                                      snapshot_times=[t_end])
        vals = states[0].particles
        write_csv(out, ["time", "value"],
                  [np.full(vals.size, t_end), vals])
        payload.update({"t_end": t_end, "dt": dt})
    elif kind == "gillespie":
        if t_end is None:
            raise ParameterError("--t-end is required for gillespie")
        ts = np.linspace(0.0, t_end, 101)
        series = mc.gillespie_population(p, t_end, RngSpec(seed, 0), ts)
        write_csv(out, ["t", "count"], [series.ts, series.values])
        payload.update({"t_end": t_end})
    else:
        if x_target is None:
            raise ParameterError("--x-target is required for first-passage kinds")
        s = FirstPassageSetup(params=p, x_target=x_target)
        if kind == "fpt-open":
            dt = dt or _auto_dt(p.lambda_m, p.lambda_r, abs(p.mu), p.sigma2)
            rows = [
                mc.simulate_fpt_open(s, p.lambda_r, p.lambda_m, dt,
                                     RngSpec(seed, i))
                for i in range(paths)
            ]
            write_csv(out, ["hit_time", "n_entries_used", "generation"], [
                np.array([r.hit_time for r in rows]),
                np.array([r.n_entries_used for r in rows]),
                np.array([r.generation for r in rows]),
            ])
        else:
            dt = dt or _auto_dt(reset_rate, abs(p.mu), p.sigma2)
            rows = [
                mc.simulate_fpt_reset(s, reset_rate, dt, RngSpec(seed, i))
                for i in range(paths)
            ]
            write_csv(out, ["hit_time", "n_resets"], [
                np.array([r.hit_time for r in rows]),
                np.array([r.n_entries_used for r in rows]),
            ])
        payload.update({"x_target": x_target, "dt": dt,
                        "reset_rate": reset_rate})
    write_manifest(out, "simulate", payload)


if __name__ == "__main__":
    main()
