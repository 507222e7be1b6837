# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled simulation kernels.

Mirrors ``gbmflow._kernels_py`` exactly: both draw from the same PCG64
bit stream through numpy's distribution functions in the same order, so a
given RngSpec yields the same trajectory on either backend.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport INFINITY, exp, expm1, sqrt
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_poisson,
    random_standard_exponential,
    random_standard_normal,
)

import numpy as np

from .errors import SimulationBudgetError

BACKEND = "compiled"


cdef inline bitgen_t *_bitgen(gen) except NULL:
    return <bitgen_t *> PyCapsule_GetPointer(
        gen.bit_generator.capsule, "BitGenerator"
    )


def ensemble_run(gen, double y0, double mu_bar, double sigma, double lambda_r,
                 double lambda_m, double dt, double[::1] snapshot_times,
                 long long max_particle_steps):
    """March an open population; see the python twin for the protocol."""
    cdef bitgen_t *rng = _bitgen(gen)
    cdef Py_ssize_t cap = 1024
    buf = np.empty(cap, dtype=np.float64)
    cdef double[::1] y = buf
    cdef Py_ssize_t n = 1
    cdef Py_ssize_t i, w, nsnap = snapshot_times.shape[0]
    cdef long long budget = 0, kpois, kk
    cdef double t = 0.0, t_snap, h, drift, vol, p_kill, u
    y[0] = y0
    out = []
    for isnap in range(nsnap):
        t_snap = snapshot_times[isnap]
        while t < t_snap:
            h = dt if (t_snap - t) > dt else (t_snap - t)
            if n:
                drift = mu_bar * h
                vol = sigma * sqrt(h)
                for i in range(n):
                    y[i] = y[i] + (drift + vol * random_standard_normal(rng))
                if lambda_m > 0.0:
                    p_kill = -expm1(-lambda_m * h)
                    w = 0
                    for i in range(n):
                        u = rng.next_double(rng.state)
                        if u >= p_kill:
                            y[w] = y[i]
                            w += 1
                    n = w
            if lambda_r > 0.0:
                kpois = random_poisson(rng, lambda_r * h)
                if kpois:
                    if n + kpois > cap:
                        cap = 2 * cap if 2 * cap > n + kpois + 64 else n + kpois + 64
                        newbuf = np.empty(cap, dtype=np.float64)
                        newbuf[:n] = buf[:n]
                        buf = newbuf
                        y = buf
                    for kk in range(kpois):
                        y[n + kk] = y0
                    n += kpois
            t += h
            budget += n
            if budget > max_particle_steps:
                raise SimulationBudgetError(
                    f"ensemble run exceeded {max_particle_steps} particle-steps "
                    f"at t={t:g} with {n} live particles"
                )
        out.append(np.array(buf[:n], dtype=np.float64))
    return out


def gillespie_run(gen, double lambda_r, double lambda_m, double[::1] checkpoints):
    """Exact birth-death trajectory; counts sampled at the checkpoints."""
    cdef bitgen_t *rng = _bitgen(gen)
    cdef Py_ssize_t m = checkpoints.shape[0]
    cdef Py_ssize_t j = 0
    out = np.empty(m, dtype=np.int64)
    cdef long long[::1] o = out
    cdef long long n = 1
    cdef double t = 0.0, rate, t_next
    cdef bint birth
    while j < m:
        rate = lambda_r + n * lambda_m
        if rate <= 0.0:
            break
        t_next = t + random_standard_exponential(rng) / rate
        while j < m and checkpoints[j] < t_next:
            o[j] = n
            j += 1
        if j >= m:
            break
        if lambda_r > 0.0 and n * lambda_m > 0.0:
            birth = rng.next_double(rng.state) < lambda_r / rate
        else:
            birth = (n == 0) or (lambda_m == 0.0)
        n = n + 1 if birth else n - 1
        t = t_next
    while j < m:
        o[j] = n
        j += 1
    return out


def fpt_open_run(gen, double y0, double y_target, double mu_bar, double sigma,
                 double lambda_r, double lambda_m, double dt,
                 long long max_particle_steps):
    """One first-passage run with recruitment and mortality."""
    cdef bitgen_t *rng = _bitgen(gen)
    cdef double sigma2 = sigma * sigma
    cdef Py_ssize_t cap = 64
    ybuf = np.empty(cap, dtype=np.float64)
    nbuf = np.empty(cap, dtype=np.float64)
    gbuf = np.empty(cap, dtype=np.int64)
    cdef double[::1] y = ybuf
    cdef double[::1] ynew = nbuf
    cdef long long[::1] gens = gbuf
    cdef Py_ssize_t n = 1
    cdef long long next_gen = 1, entries = 0, budget = 0
    cdef double t = 0.0, next_entry, h, drift, vol, u, theta, best_theta, p_kill
    cdef double s2h, yn
    cdef Py_ssize_t i, w, best_i
    cdef bint landing
    y[0] = y0
    gens[0] = 0
    next_entry = random_standard_exponential(rng) / lambda_r
    while True:
        if n == 0:
            t = next_entry
            y[0] = y0
            gens[0] = next_gen
            n = 1
            next_gen += 1
            entries += 1
            next_entry = t + random_standard_exponential(rng) / lambda_r
            continue
        landing = (next_entry - t) <= dt
        h = (next_entry - t) if landing else dt
        if h > 0.0:
            drift = mu_bar * h
            vol = sigma * sqrt(h)
            s2h = sigma2 * h
            for i in range(n):
                ynew[i] = y[i] + (drift + vol * random_standard_normal(rng))
            best_theta = INFINITY
            best_i = -1
            for i in range(n):
                u = rng.next_double(rng.state)
                yn = ynew[i]
                if yn >= y_target:
                    theta = (y_target - y[i]) / (yn - y[i]) if yn > y[i] else 1.0
                elif u < exp(
                    (-2.0 * (y_target - y[i])) * (y_target - yn) / s2h
                ):
                    theta = 0.5
                else:
                    continue
                if theta < best_theta:
                    best_theta = theta
                    best_i = i
            if best_i >= 0:
                return t + best_theta * h, entries, int(gens[best_i])
            if lambda_m > 0.0:
                p_kill = -expm1(-lambda_m * h)
                w = 0
                for i in range(n):
                    u = rng.next_double(rng.state)
                    if u >= p_kill:
                        y[w] = ynew[i]
                        gens[w] = gens[i]
                        w += 1
                n = w
            else:
                for i in range(n):
                    y[i] = ynew[i]
            t += h
            budget += n
            if budget > max_particle_steps:
                raise SimulationBudgetError(
                    f"first-passage run exceeded {max_particle_steps} "
                    f"particle-steps at t={t:g} with {n} live searchers"
                )
        if landing:
            if n + 1 > cap:
                cap = 2 * cap
                newy = np.empty(cap, dtype=np.float64)
                newn = np.empty(cap, dtype=np.float64)
                newg = np.empty(cap, dtype=np.int64)
                newy[:n] = ybuf[:n]
                newg[:n] = gbuf[:n]
                ybuf, nbuf, gbuf = newy, newn, newg
                y, ynew, gens = ybuf, nbuf, gbuf
            y[n] = y0
            gens[n] = next_gen
            n += 1
            next_gen += 1
            entries += 1
            next_entry = t + random_standard_exponential(rng) / lambda_r


def fpt_reset_run(gen, double y0, double y_target, double mu_bar, double sigma,
                  double reset_rate, double dt, long long max_steps):
    """One first-passage run of a single searcher with resetting."""
    cdef bitgen_t *rng = _bitgen(gen)
    cdef double sigma2 = sigma * sigma
    cdef double y = y0, t = 0.0, next_reset, h, y_new, u, theta, z
    cdef long long resets = 0, steps = 0
    cdef bint landing
    if reset_rate > 0.0:
        next_reset = t + random_standard_exponential(rng) / reset_rate
    else:
        next_reset = INFINITY
    while True:
        landing = (next_reset - t) <= dt
        h = (next_reset - t) if landing else dt
        if h > 0.0:
            z = random_standard_normal(rng)
            y_new = y + mu_bar * h + sigma * sqrt(h) * z
            u = rng.next_double(rng.state)
            if y_new >= y_target:
                theta = (y_target - y) / (y_new - y) if y_new > y else 1.0
                return t + theta * h, resets
            if u < exp(-2.0 * (y_target - y) * (y_target - y_new) / (sigma2 * h)):
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
            next_reset = t + random_standard_exponential(rng) / reset_rate
