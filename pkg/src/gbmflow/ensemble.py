"""Ensemble-level analytics for GBM with independent entries and exits.

Closed forms for the mean population, the finite-time and stationary
densities, moments in all three regimes, log-moments, and the
large-deviation description of how the stationary state spreads out from
the entry point.

The recurring time integrals are all of the form
``integral_0^t u**(k-1) exp(-c u) du``; they are evaluated through

    R_k(z) = gamma(k, z) / z**k = integral_0^1 s**(k-1) exp(-z s) ds,

which is smooth through z = 0 (R_k(0) = 1/k) and well defined for negative
z.  Writing everything in terms of R_k makes the moment formulas cross the
regime boundary lambda_m = beta(n) without cancellation and gives the exact
lambda_m -> 0 limits for free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DensityCurve, ModelParams, f0
from .core import beta as beta_exponent
from .errors import ParameterError, QuadratureError
from .numerics import DEFAULT_QUAD, QuadratureSpec, integrate_adaptive

_SERIES_CUT = 0.5
_SERIES_TERMS = 26


def _gamma_ratio(k: int, z):
    """R_k(z) = gamma(k, z)/z**k, smooth through z = 0, any real z."""
    shape = np.shape(z)
    z = np.atleast_1d(np.asarray(z, dtype=float)).ravel()
    out = np.empty_like(z)
    small = np.abs(z) < _SERIES_CUT
    if np.any(small):
        zs = z[small]
        term = np.ones_like(zs) / k
        acc = term.copy()
        for j in range(1, _SERIES_TERMS):
            term = term * (-zs) * (j + k - 1) / (j * (j + k))
            acc += term
        out[small] = acc
    if np.any(~small):
        zb = z[~small]
        with np.errstate(over="ignore"):
            e = np.exp(-zb)
            if k == 1:
                out[~small] = (1.0 - e) / zb
            elif k == 2:
                out[~small] = (1.0 - (1.0 + zb) * e) / zb**2
            elif k == 3:
                out[~small] = (2.0 - (2.0 + 2.0 * zb + zb**2) * e) / zb**3
            else:
                raise ParameterError("gamma ratio implemented for k in 1..3")
    return out.reshape(shape)


def phi(p: ModelParams, t):
    """Mean number of live units at time ``t`` (equals 1 at t = 0)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be nonnegative")
    z = p.lambda_m * t
    out = np.exp(-z) + p.lambda_r * t * _gamma_ratio(1, z)
    return out if out.ndim else float(out)


def moment(p: ModelParams, n: int, t):
    """n-th moment of the normalized ensemble density, valid at all times.

    Continuous across the regime boundary lambda_m = beta(n); the linear
    law x0**n (1 + lambda_r t) / Phi(t) emerges there automatically.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError("moment order n must be an integer >= 1")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be nonnegative")
    w = p.lambda_m - beta_exponent(p, n)
    with np.errstate(over="ignore"):
        num = np.exp(-w * t) + p.lambda_r * t * _gamma_ratio(1, w * t)
        out = p.x0**n * num / phi(p, t)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class StationaryMoment:
    """Long-time behavior of an ensemble moment.

    ``regime`` is one of ``"finite"`` (value attained), ``"linear"``
    (grows like x0**n lambda_m t at the boundary lambda_m = beta(n)), or
    ``"exponential"`` (grows at ``rate`` = beta(n) - lambda_m).
    """

    regime: str
    value: float | None = None
    rate: float | None = None

    @property
    def diverges(self) -> bool:
        return self.regime != "finite"


def stationary_moment(p: ModelParams, n: int) -> StationaryMoment:
    """Limit of ``moment(p, n, t)`` as t -> infinity (requires lambda_m > 0)."""
    p.require_stationary()
    b = beta_exponent(p, n)
    if p.lambda_m > b:
        value = p.x0**n * p.lambda_m / (p.lambda_m - b)
        return StationaryMoment(regime="finite", value=value)
    if p.lambda_m == b:
        return StationaryMoment(regime="linear")
    return StationaryMoment(regime="exponential", rate=b - p.lambda_m)


def msd(p: ModelParams, t):
    """Mean-squared displacement about the entry point x0."""
    return moment(p, 2, t) - 2.0 * p.x0 * moment(p, 1, t) + p.x0**2


def log_moment(p: ModelParams, k: int, t):
    """First (k=1) or second (k=2) moment of log x under the ensemble density."""
    if k not in (1, 2):
        raise ParameterError("log-moment order k must be 1 or 2")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be nonnegative")
    y0 = math.log(p.x0)
    mb = p.mu_bar
    z = p.lambda_m * t
    decay = np.exp(-z)
    lr = p.lambda_r
    if k == 1:
        # free log-mean y0 + mu_bar*u integrated against exp(-lambda_m u)
        num = (
            decay * (y0 + mb * t)
            + lr * t * y0 * _gamma_ratio(1, z)
            + lr * t**2 * mb * _gamma_ratio(2, z)
        )
    else:
        # free second log-moment y0^2 + (2 mu_bar y0 + sigma^2) u + mu_bar^2 u^2
        c1 = 2.0 * mb * y0 + p.sigma2
        num = (
            decay * (y0**2 + c1 * t + mb**2 * t**2)
            + lr * t * y0**2 * _gamma_ratio(1, z)
            + lr * t**2 * c1 * _gamma_ratio(2, z)
            + lr * t**3 * mb**2 * _gamma_ratio(3, z)
        )
    out = num / phi(p, t)
    return out if out.ndim else float(out)


def log_msd(p: ModelParams, t):
    """Mean-squared displacement of log x about log x0."""
    y0 = math.log(p.x0)
    return log_moment(p, 2, t) - 2.0 * y0 * log_moment(p, 1, t) + y0**2


@dataclass(frozen=True)
class StationaryDensityParams:
    """Derived constants of the stationary double power law.

    The density is ``prefactor / x`` times ``(x/x0)**exponent_above`` for
    x > x0 and ``(x0/x)**exponent_below`` for x < x0; both exponents are
    negative, producing the cusp at x0.
    """

    params: ModelParams
    exponent_above: float
    exponent_below: float
    prefactor: float

    @classmethod
    def from_params(cls, p: ModelParams) -> "StationaryDensityParams":
        p.require_stationary()
        disc = math.sqrt(p.mu_bar**2 + 2.0 * p.sigma2 * p.lambda_m)
        return cls(
            params=p,
            exponent_above=-(disc - p.mu_bar) / p.sigma2,
            exponent_below=-(disc + p.mu_bar) / p.sigma2,
            prefactor=p.lambda_m / disc,
        )


def stationary_density_value(p: ModelParams, x):
    """Stationary ensemble density evaluated at ``x`` (scalar or array)."""
    sp = StationaryDensityParams.from_params(p)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise ParameterError("x must be positive")
    ratio = x_arr / p.x0
    power = np.where(
        ratio >= 1.0,
        sp.exponent_above * np.log(ratio),
        sp.exponent_below * (-np.log(ratio)),
    )
    out = sp.prefactor / x_arr * np.exp(power)
    return out if isinstance(x, np.ndarray) else float(out)


def stationary_grid(p: ModelParams, n_points: int = 400, decades: float = 3.0):
    """Default log-spaced grid for stationary curves: x0 * 10**(+-decades)."""
    return np.geomspace(p.x0 * 10.0**-decades, p.x0 * 10.0**decades, n_points)


def stationary_density(
    p: ModelParams,
    xs: np.ndarray | None = None,
    n_points: int = 400,
    clip: float = 1e-30,
) -> DensityCurve:
    """Stationary ensemble density as a curve (requires lambda_m > 0).

    With no grid supplied, a log-spaced default is used and points where
    the density has decayed below ``clip`` are dropped.
    """
    p.require_stationary()
    if xs is None:
        xs = stationary_grid(p, n_points)
        values = stationary_density_value(p, xs)
        keep = values >= clip
        if keep.sum() >= 2:
            xs, values = xs[keep], values[keep]
    else:
        xs = np.asarray(xs, dtype=float)
        values = stationary_density_value(p, xs)
    return DensityCurve(xs=xs, values=values)


def density_finite_time(
    p: ModelParams,
    t: float,
    xs: np.ndarray,
    spec: QuadratureSpec | None = None,
) -> DensityCurve:
    """Normalized ensemble density at finite time ``t`` on the grid ``xs``.

    The renewal integral over entry ages is computed per grid point by
    adaptive quadrature after substituting u = v**2, which removes the
    1/sqrt(u) spike the integrand develops near u = 0 for x close to x0.
    The initial panel count grows with |log(x/x0)|/sigma so the short-age
    log-normal peak is always resolved before adaptivity takes over.
    """
    if t <= 0:
        raise ParameterError("t must be positive")
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise ParameterError("xs must be a strictly increasing positive grid")
    if spec is None:
        spec = QuadratureSpec(abs_tol=1e-9, rel_tol=1e-9, max_depth=60)

    norm = phi(p, t)
    tail = np.exp(-p.lambda_m * t) * f0(p, xs, t)
    if p.lambda_r == 0.0:
        return DensityCurve(xs=xs, values=tail / norm)

    sqrt_t = math.sqrt(t)
    s2 = p.sigma2
    mb = p.mu_bar
    inv_x0 = 1.0 / p.x0
    values = np.empty_like(xs)
    for i, x in enumerate(xs):
        lx = math.log(x * inv_x0)

        def integrand(v, lx=lx, x=x):
            u = v * v
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                expo = -((lx - mb * u) ** 2) / (2.0 * s2 * u) - p.lambda_m * u
                dens = np.exp(expo) / (x * np.sqrt(2.0 * math.pi * s2 * u))
            return np.where(u > 0.0, 2.0 * v * np.nan_to_num(dens), 0.0)

        panels = max(8, min(512, int(abs(lx) / p.sigma)))
        try:
            res = integrate_adaptive(integrand, 0.0, sqrt_t, spec, panels)
        except QuadratureError as exc:
            raise QuadratureError(
                f"renewal quadrature failed at x={x:g}: {exc}",
                worst_panel=exc.worst_panel,
                error_estimate=exc.error_estimate,
            ) from exc
        values[i] = (tail[i] + p.lambda_r * res.value) / norm
    return DensityCurve(xs=xs, values=np.maximum(values, 0.0))


@dataclass(frozen=True)
class LdfParams:
    """Constants of the large-deviation rate function.

    ``a = lambda_m + mu_bar**2 / (2 sigma**2)`` and ``y_star = sqrt(2 sigma**2 a)``
    is the spreading velocity of the stationary core in y = log(x/x0)/t.
    """

    a: float
    y_star: float

    @classmethod
    def from_params(cls, p: ModelParams) -> "LdfParams":
        a = p.lambda_m + p.mu_bar**2 / (2.0 * p.sigma2)
        if a <= 0:
            raise ParameterError("rate constant a must be positive")
        return cls(a=a, y_star=math.sqrt(2.0 * p.sigma2 * a))


def ldf(p: ModelParams, y):
    """Large-deviation rate I(y) of the density in y = log(x/x0)/t."""
    a = p.lambda_m + p.mu_bar**2 / (2.0 * p.sigma2)
    y_arr = np.asarray(y, dtype=float)
    y_star = math.sqrt(2.0 * p.sigma2 * a)
    inner = math.sqrt(2.0 * a / p.sigma2) * np.abs(y_arr)
    outer = a + y_arr**2 / (2.0 * p.sigma2)
    out = np.where(np.abs(y_arr) < y_star, inner, outer)
    return out if isinstance(y, np.ndarray) else float(out)


def core_boundary(p: ModelParams, t: float) -> tuple[float, float]:
    """Edges (x_low, x_high) of the region already relaxed at time ``t``."""
    if t < 0:
        raise ParameterError("t must be nonnegative")
    y_star = LdfParams.from_params(p).y_star
    return p.x0 * math.exp(-y_star * t), p.x0 * math.exp(y_star * t)
