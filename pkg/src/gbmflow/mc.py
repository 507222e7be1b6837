"""Stochastic oracles: open-population ensembles, exact birth-death counts,
multi-searcher first-passage runs, and the resetting benchmark simulator.

Every run is addressed by an :class:`~gbmflow.rngstreams.RngSpec`; batch
drivers give path ``i`` the stream ``base + i``, so estimates are
bit-reproducible regardless of thread count or backend.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels
from .core import DensityCurve, ModelParams, TimeSeries
from .errors import ParameterError
from .firstpassage import FirstPassageSetup
from .rngstreams import RngSpec

DEFAULT_FPT_BUDGET = 50_000_000
_UNBOUNDED = 2**62


def _check_dt(dt: float, *rates: float):
    scale = max(rates)
    if dt <= 0:
        raise ParameterError("dt must be positive")
    if dt * scale >= 0.1:
        raise ParameterError(
            f"dt too coarse: dt*max(rates) = {dt * scale:g} must stay below 0.1"
        )


@dataclass(frozen=True)
class EnsembleState:
    """Snapshot of the open population: a time and the live values."""

    time: float
    particles: np.ndarray

    def __post_init__(self):
        particles = np.asarray(self.particles, dtype=float)
        object.__setattr__(self, "particles", particles)
        if self.time < 0:
            raise ParameterError("time must be nonnegative")
        if np.any(particles <= 0):
            raise ParameterError("particle values must be positive")

    @property
    def count(self) -> int:
        return int(self.particles.size)


@dataclass(frozen=True)
class FptSample:
    """One successful first-passage run."""

    hit_time: float
    n_entries_used: int
    generation: int

    def __post_init__(self):
        if not self.hit_time > 0:
            raise ParameterError("hit_time must be positive")


@dataclass(frozen=True)
class EstimatedDensity(DensityCurve):
    """Histogram density with per-bin standard errors."""

    stderr: np.ndarray

    def __post_init__(self):
        super().__post_init__()
        stderr = np.asarray(self.stderr, dtype=float)
        object.__setattr__(self, "stderr", stderr)
        if stderr.shape != self.xs.shape:
            raise ParameterError("stderr must match the grid length")


def simulate_ensemble(
    p: ModelParams,
    t_end: float,
    dt: float,
    rng: RngSpec,
    snapshot_times=None,
    max_particle_steps: int = _UNBOUNDED,
    backend: str | None = None,
) -> list[EnsembleState]:
    """Simulate the open population and return snapshots.

    Each particle takes exact log-space Gaussian increments, dies with
    probability 1 - exp(-lambda_m h) per step, and Poisson(lambda_r h)
    entries appear at x0.  ``dt`` must satisfy
    dt * max(lambda_m, lambda_r, |mu|, sigma^2) < 0.1.
    """
    _check_dt(dt, p.lambda_m, p.lambda_r, abs(p.mu), p.sigma2)
    if t_end < 0:
        raise ParameterError("t_end must be nonnegative")
    if snapshot_times is None:
        snapshot_times = [t_end]
    snaps = np.asarray(snapshot_times, dtype=float)
    if snaps.size == 0 or np.any(np.diff(snaps) <= 0):
        raise ParameterError("snapshot_times must be strictly increasing")
    if snaps[0] < 0 or snaps[-1] > t_end:
        raise ParameterError("snapshot_times must lie in [0, t_end]")
    kern = get_kernels(backend)
    logs = kern.ensemble_run(
        rng.generator(),
        math.log(p.x0),
        p.mu_bar,
        p.sigma,
        p.lambda_r,
        p.lambda_m,
        dt,
        snaps,
        max_particle_steps,
    )
    return [
        EnsembleState(time=float(t), particles=np.exp(y))
        for t, y in zip(snaps, logs)
    ]


def gillespie_population(
    p: ModelParams,
    t_end: float,
    rng: RngSpec,
    checkpoint_times=None,
    backend: str | None = None,
) -> TimeSeries:
    """Exact-event birth-death population counts from a single entry.

    Births at rate lambda_r, deaths at rate n*lambda_m; counts are sampled
    at the checkpoint times (default: 11 evenly spaced over [0, t_end]).
    """
    if t_end <= 0:
        raise ParameterError("t_end must be positive")
    if checkpoint_times is None:
        checkpoint_times = np.linspace(0.0, t_end, 11)
    ts = np.asarray(checkpoint_times, dtype=float)
    if ts.size == 0 or ts[0] < 0 or np.any(np.diff(ts) < 0) or ts[-1] > t_end:
        raise ParameterError("checkpoints must be nondecreasing within [0, t_end]")
    kern = get_kernels(backend)
    counts = kern.gillespie_run(rng.generator(), p.lambda_r, p.lambda_m, ts)
    return TimeSeries(ts=ts, values=np.asarray(counts, dtype=float))


def simulate_fpt_open(
    s: FirstPassageSetup,
    lambda_r: float,
    lambda_m: float,
    dt: float,
    rng: RngSpec,
    max_particle_steps: int = DEFAULT_FPT_BUDGET,
    backend: str | None = None,
) -> FptSample:
    """One first-passage run with recruitment (rate lambda_r > 0) and
    mortality (rate lambda_m); terminates almost surely."""
    if lambda_r <= 0:
        raise ParameterError("lambda_r must be positive for almost-sure termination")
    if lambda_m < 0:
        raise ParameterError("lambda_m must be nonnegative")
    p = s.params
    _check_dt(dt, lambda_m, lambda_r, abs(p.mu), p.sigma2)
    kern = get_kernels(backend)
    hit, entries, generation = kern.fpt_open_run(
        rng.generator(),
        math.log(p.x0),
        math.log(s.x_target),
        p.mu_bar,
        p.sigma,
        lambda_r,
        lambda_m,
        dt,
        max_particle_steps,
    )
    return FptSample(hit_time=hit, n_entries_used=entries, generation=generation)


def simulate_fpt_reset(
    s: FirstPassageSetup,
    r: float,
    dt: float,
    rng: RngSpec,
    max_steps: int = DEFAULT_FPT_BUDGET,
    backend: str | None = None,
) -> FptSample:
    """One first-passage run of a single searcher reset to x0 at rate ``r``."""
    if r < 0:
        raise ParameterError("r must be nonnegative")
    p = s.params
    _check_dt(dt, r, abs(p.mu), p.sigma2)
    kern = get_kernels(backend)
    hit, resets = kern.fpt_reset_run(
        rng.generator(),
        math.log(p.x0),
        math.log(s.x_target),
        p.mu_bar,
        p.sigma,
        r,
        dt,
        max_steps,
    )
    return FptSample(hit_time=hit, n_entries_used=resets, generation=0)


def estimate_density(samples, bin_edges=None, n_bins: int = 60) -> EstimatedDensity:
    """Log-binned histogram density normalized to unit trapezoid integral.

    ``bin_edges`` overrides the automatic log-spaced binning.  Per-bin
    standard errors are sqrt(count)-based and carry the same normalization.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ParameterError("samples must be nonempty")
    if np.any(samples <= 0):
        raise ParameterError("samples must be positive")
    if bin_edges is None:
        lo, hi = samples.min(), samples.max()
        if lo == hi:
            lo, hi = lo / 1.01, hi * 1.01
        n_bins = max(int(n_bins), 2)
        bin_edges = np.geomspace(lo, hi, n_bins + 1)
        bin_edges[0] *= 1.0 - 1e-12
        bin_edges[-1] *= 1.0 + 1e-12
    else:
        bin_edges = np.asarray(bin_edges, dtype=float)
        if bin_edges.size < 3 or np.any(np.diff(bin_edges) <= 0):
            raise ParameterError("bin_edges must be increasing with >= 3 edges")
    counts, _ = np.histogram(samples, bins=bin_edges)
    widths = np.diff(bin_edges)
    centers = np.sqrt(bin_edges[:-1] * bin_edges[1:])
    n = samples.size
    density = counts / (n * widths)
    stderr = np.sqrt(counts) / (n * widths)
    total = np.trapezoid(density, centers)
    if total <= 0:
        raise ParameterError("all samples fell outside the binning grid")
    return EstimatedDensity(
        xs=centers, values=density / total, stderr=stderr / total
    )


# ---------------------------------------------------------------------------
# batch drivers


def _map_streams(worker, n: int, rng: RngSpec, n_jobs: int):
    """Run ``worker(path_index)`` for n paths on streams base..base+n-1.

    Results are gathered by path index, so output is independent of how
    chunks are scheduled across threads.
    """
    results = [None] * n
    if n_jobs <= 1:
        for i in range(n):
            results[i] = worker(i)
        return results

    chunk = max(1, n // (4 * n_jobs))

    def run_range(lo, hi):
        for i in range(lo, hi):
            results[i] = worker(i)

    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        futures = [
            pool.submit(run_range, lo, min(lo + chunk, n))
            for lo in range(0, n, chunk)
        ]
        for fut in futures:
            fut.result()
    return results


@dataclass(frozen=True)
class MfptEstimate:
    """Sample mean of hit times with its standard error."""

    mean: float
    stderr: float
    n: int


def mfpt_statistics(hit_times) -> MfptEstimate:
    hit_times = np.asarray(hit_times, dtype=float)
    n = hit_times.size
    if n < 2:
        raise ParameterError("need at least two samples")
    return MfptEstimate(
        mean=float(hit_times.mean()),
        stderr=float(hit_times.std(ddof=1) / math.sqrt(n)),
        n=n,
    )


def sample_fpt_open(
    s: FirstPassageSetup,
    lambda_r: float,
    lambda_m: float,
    dt: float,
    n_paths: int,
    rng: RngSpec,
    n_jobs: int = 1,
    max_particle_steps: int = DEFAULT_FPT_BUDGET,
    backend: str | None = None,
) -> np.ndarray:
    """Hit times from ``n_paths`` independent open-system runs."""
    p = s.params
    if lambda_r <= 0:
        raise ParameterError("lambda_r must be positive")
    _check_dt(dt, lambda_m, lambda_r, abs(p.mu), p.sigma2)
    kern = get_kernels(backend)
    y0 = math.log(p.x0)
    y_t = math.log(s.x_target)

    def worker(i):
        gen = rng.shifted(i).generator()
        return kern.fpt_open_run(
            gen, y0, y_t, p.mu_bar, p.sigma, lambda_r, lambda_m, dt,
            max_particle_steps,
        )[0]

    return np.array(_map_streams(worker, n_paths, rng, n_jobs))


def sample_fpt_reset(
    s: FirstPassageSetup,
    r: float,
    dt: float,
    n_paths: int,
    rng: RngSpec,
    n_jobs: int = 1,
    max_steps: int = DEFAULT_FPT_BUDGET,
    backend: str | None = None,
) -> np.ndarray:
    """Hit times from ``n_paths`` independent resetting runs."""
    p = s.params
    _check_dt(dt, r, abs(p.mu), p.sigma2)
    kern = get_kernels(backend)
    y0 = math.log(p.x0)
    y_t = math.log(s.x_target)

    def worker(i):
        gen = rng.shifted(i).generator()
        return kern.fpt_reset_run(
            gen, y0, y_t, p.mu_bar, p.sigma, r, dt, max_steps
        )[0]

    return np.array(_map_streams(worker, n_paths, rng, n_jobs))


@dataclass(frozen=True)
class EnsembleStats:
    """Ratio-of-sums ensemble moments with jackknife standard errors.

    All arrays are indexed by snapshot time.  Moment estimators divide the
    pooled particle sums by the pooled population, matching the normalized
    ensemble density; standard errors come from leave-one-run-out jackknife.
    """

    times: np.ndarray
    population: np.ndarray
    population_se: np.ndarray
    mean: np.ndarray
    mean_se: np.ndarray
    second: np.ndarray
    second_se: np.ndarray
    msd: np.ndarray
    msd_se: np.ndarray
    log_mean: np.ndarray
    log_mean_se: np.ndarray
    log_second: np.ndarray
    log_second_se: np.ndarray
    log_msd: np.ndarray
    log_msd_se: np.ndarray
    n_runs: int


def _ratio_jackknife(num: np.ndarray, den: np.ndarray):
    """Ratio-of-sums estimate and jackknife SE for run-wise sums."""
    r = num.shape[0]
    total_n = num.sum(axis=0)
    total_d = den.sum(axis=0)
    est = total_n / total_d
    loo = (total_n - num) / (total_d - den)
    se = np.sqrt((r - 1) / r * ((loo - loo.mean(axis=0)) ** 2).sum(axis=0))
    return est, se


def ensemble_statistics(
    p: ModelParams,
    snapshot_times,
    dt: float,
    n_runs: int,
    rng: RngSpec,
    n_jobs: int = 1,
    backend: str | None = None,
) -> EnsembleStats:
    """Ensemble moments over ``n_runs`` independent populations."""
    snaps = np.asarray(snapshot_times, dtype=float)
    if n_runs < 2:
        raise ParameterError("need at least two runs for standard errors")
    kern = get_kernels(backend)
    y0 = math.log(p.x0)
    m = snaps.size

    def worker(i):
        gen = rng.shifted(i).generator()
        logs = kern.ensemble_run(
            gen, y0, p.mu_bar, p.sigma, p.lambda_r, p.lambda_m, dt, snaps,
            _UNBOUNDED,
        )
        row = np.empty((7, m))
        for j, ly in enumerate(logs):
            x = np.exp(ly)
            row[0, j] = x.size
            row[1, j] = x.sum()
            row[2, j] = (x * x).sum()
            row[3, j] = ((x - p.x0) ** 2).sum()
            row[4, j] = ly.sum()
            row[5, j] = (ly * ly).sum()
            row[6, j] = ((ly - y0) ** 2).sum()
        return row

    rows = np.stack(_map_streams(worker, n_runs, rng, n_jobs))
    counts = rows[:, 0, :]
    ones = np.ones_like(counts)
    pop, pop_se = _ratio_jackknife(counts, ones)
    mean, mean_se = _ratio_jackknife(rows[:, 1, :], counts)
    second, second_se = _ratio_jackknife(rows[:, 2, :], counts)
    msd, msd_se = _ratio_jackknife(rows[:, 3, :], counts)
    log_mean, log_mean_se = _ratio_jackknife(rows[:, 4, :], counts)
    log_second, log_second_se = _ratio_jackknife(rows[:, 5, :], counts)
    log_msd, log_msd_se = _ratio_jackknife(rows[:, 6, :], counts)
    return EnsembleStats(
        times=snaps,
        population=pop,
        population_se=pop_se,
        mean=mean,
        mean_se=mean_se,
        second=second,
        second_se=second_se,
        msd=msd,
        msd_se=msd_se,
        log_mean=log_mean,
        log_mean_se=log_mean_se,
        log_second=log_second,
        log_second_se=log_second_se,
        log_msd=log_msd,
        log_msd_se=log_msd_se,
        n_runs=n_runs,
    )


def stationary_sample_pool(
    p: ModelParams,
    t_relax: float,
    n_snapshots: int,
    snapshot_gap: float,
    dt: float,
    rng: RngSpec,
    backend: str | None = None,
) -> np.ndarray:
    """Pooled particle values from one long run sampled after relaxation.

    Snapshots are taken every ``snapshot_gap`` from ``t_relax`` on; gaps of
    order a few 1/lambda_m keep successive snapshots nearly independent.
    """
    if n_snapshots < 1:
        raise ParameterError("n_snapshots must be positive")
    times = t_relax + snapshot_gap * np.arange(n_snapshots)
    states = simulate_ensemble(
        p, float(times[-1]), dt, rng, snapshot_times=times, backend=backend
    )
    return np.concatenate([st.particles for st in states])


def population_mean_curve(
    p: ModelParams,
    checkpoint_times,
    n_runs: int,
    rng: RngSpec,
    n_jobs: int = 1,
    backend: str | None = None,
):
    """Mean and standard error of birth-death counts at the checkpoints."""
    ts = np.asarray(checkpoint_times, dtype=float)
    kern = get_kernels(backend)
    if n_runs < 2:
        raise ParameterError("need at least two runs for standard errors")

    def worker(i):
        gen = rng.shifted(i).generator()
        return np.asarray(
            kern.gillespie_run(gen, p.lambda_r, p.lambda_m, ts), dtype=float
        )

    rows = np.stack(_map_streams(worker, n_runs, rng, n_jobs))
    mean = rows.mean(axis=0)
    se = rows.std(axis=0, ddof=1) / math.sqrt(n_runs)
    return mean, se
