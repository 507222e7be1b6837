"""Pure-Python/numpy simulation kernels.

These are the reference implementations of the hot loops; `gbmflow._kernels`
is the compiled twin.  Both consume randomness from the same PCG64 stream in
exactly the same order (normals, then bridge uniforms, then death uniforms,
then entry gaps), so a fixed :class:`~gbmflow.rngstreams.RngSpec` produces
bit-identical trajectories on either backend.

GBM increments are exact in log space (no Euler drift bias); the only
discretization left is barrier detection, which the Brownian-bridge
crossing probability corrects.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SimulationBudgetError

BACKEND = "python"


def ensemble_run(gen, y0, mu_bar, sigma, lambda_r, lambda_m, dt, snapshot_times,
                 max_particle_steps):
    """March an open population and return log-value snapshots.

    Starts from a single particle at ``y0``.  Per step: exact Gaussian moves,
    then per-particle removal with probability 1 - exp(-lambda_m h), then a
    Poisson(lambda_r h) batch of entries at ``y0``.  Returns a list of
    float64 arrays, one per requested snapshot time.
    """
    y = np.array([y0], dtype=float)
    t = 0.0
    budget = 0
    out = []
    for t_snap in snapshot_times:
        while t < t_snap:
            h = min(dt, t_snap - t)
            n = y.size
            if n:
                z = gen.standard_normal(n)
                y = y + (mu_bar * h + sigma * math.sqrt(h) * z)
                if lambda_m > 0.0:
                    u = gen.random(n)
                    y = y[u >= -math.expm1(-lambda_m * h)]
            if lambda_r > 0.0:
                k = int(gen.poisson(lambda_r * h))
                if k:
                    y = np.concatenate([y, np.full(k, y0)])
            t += h
            budget += n
            if budget > max_particle_steps:
                raise SimulationBudgetError(
                    f"ensemble run exceeded {max_particle_steps} particle-steps "
                    f"at t={t:g} with {y.size} live particles"
                )
        out.append(y.copy())
    return out


def gillespie_run(gen, lambda_r, lambda_m, checkpoints):
    """Exact birth-death trajectory; counts sampled at ``checkpoints``.

    Starts from one unit.  Births at rate lambda_r, deaths at rate
    n * lambda_m, no time discretization.
    """
    m = len(checkpoints)
    out = np.empty(m, dtype=np.int64)
    n = 1
    t = 0.0
    j = 0
    while j < m:
        rate = lambda_r + n * lambda_m
        if rate <= 0.0:
            break
        t_next = t + gen.standard_exponential() / rate
        while j < m and checkpoints[j] < t_next:
            out[j] = n
            j += 1
        if j >= m:
            break
        if lambda_r > 0.0 and n * lambda_m > 0.0:
            birth = gen.random() < lambda_r / rate
        else:
            birth = n == 0 or lambda_m == 0.0
        n = n + 1 if birth else n - 1
        t = t_next
    while j < m:
        out[j] = n
        j += 1
    return out


def fpt_open_run(gen, y0, y_target, mu_bar, sigma, lambda_r, lambda_m, dt,
                 max_particle_steps):
    """One first-passage run with recruitment and mortality.

    Searchers live in log space; entries arrive at exponential(lambda_r)
    gaps and the stepper lands exactly on each entry epoch, so only barrier
    detection sees the step size.  Returns (hit_time, entries_used,
    generation of the hitting searcher).
    """
    sigma2 = sigma * sigma
    y = np.array([y0], dtype=float)
    gens = np.array([0], dtype=np.int64)
    next_gen = 1
    entries = 0
    t = 0.0
    budget = 0
    next_entry = gen.standard_exponential() / lambda_r
    while True:
        n = y.size
        if n == 0:
            t = next_entry
            y = np.array([y0])
            gens = np.array([next_gen], dtype=np.int64)
            next_gen += 1
            entries += 1
            next_entry = t + gen.standard_exponential() / lambda_r
            continue
        landing = (next_entry - t) <= dt
        h = (next_entry - t) if landing else dt
        if h > 0.0:
            z = gen.standard_normal(n)
            y_new = y + (mu_bar * h + sigma * math.sqrt(h) * z)
            u = gen.random(n)
            direct = y_new >= y_target
            with np.errstate(under="ignore"):
                p_bridge = np.exp(
                    -2.0 * (y_target - y) * (y_target - y_new) / (sigma2 * h)
                )
            hit = direct | (u < p_bridge)
            if hit.any():
                theta = np.where(
                    direct,
                    np.where(y_new > y, (y_target - y) / (y_new - y), 1.0),
                    0.5,
                )
                theta = np.where(hit, theta, np.inf)
                i = int(np.argmin(theta))
                return t + theta[i] * h, entries, int(gens[i])
            y = y_new
            if lambda_m > 0.0:
                d = gen.random(n)
                keep = d >= -math.expm1(-lambda_m * h)
                y = y[keep]
                gens = gens[keep]
            t += h
            budget += n
            if budget > max_particle_steps:
                raise SimulationBudgetError(
                    f"first-passage run exceeded {max_particle_steps} "
                    f"particle-steps at t={t:g} with {y.size} live searchers"
                )
        if landing:
            y = np.append(y, y0)
            gens = np.append(gens, next_gen)
            next_gen += 1
            entries += 1
            next_entry = t + gen.standard_exponential() / lambda_r


def fpt_reset_run(gen, y0, y_target, mu_bar, sigma, reset_rate, dt, max_steps):
    """One first-passage run of a single searcher reset to ``y0`` at rate
    ``reset_rate`` (0 disables resetting).  Returns (hit_time, n_resets)."""
    sigma2 = sigma * sigma
    y = y0
    t = 0.0
    resets = 0
    steps = 0
    next_reset = (
        t + gen.standard_exponential() / reset_rate if reset_rate > 0.0 else math.inf
    )
    while True:
        landing = (next_reset - t) <= dt
        h = (next_reset - t) if landing else dt
        if h > 0.0:
            z = gen.standard_normal()
            y_new = y + mu_bar * h + sigma * math.sqrt(h) * z
            u = gen.random()
            if y_new >= y_target:
                theta = (y_target - y) / (y_new - y) if y_new > y else 1.0
                return t + theta * h, resets
            if u < math.exp(
                -2.0 * (y_target - y) * (y_target - y_new) / (sigma2 * h)
            ):
                return t + 0.5 * h, resets
            y = y_new
            t += h
            steps += 1
            if steps > max_steps:
                raise SimulationBudgetError(
                    f"resetting run exceeded {max_steps} steps at t={t:g}"
                )
        if landing:
            y = y0
            resets += 1
            next_reset = t + gen.standard_exponential() / reset_rate
