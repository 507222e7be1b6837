"""Model parameters and the closed-form building blocks of plain GBM.

The process is dx = mu*x dt + sigma*x dB with entries of new units at value
``x0`` (rate ``lambda_r``) and removal of existing units (rate ``lambda_m``
per unit).  Everything downstream works with the effective drift
``mu_bar = mu - sigma**2/2``, the growth rate of the median.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class ModelParams:
    """The five model parameters; validated eagerly at construction."""

    mu: float
    sigma: float
    x0: float
    lambda_r: float = 0.0
    lambda_m: float = 0.0

    def __post_init__(self):
        for name in ("mu", "sigma", "x0", "lambda_r", "lambda_m"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive")
        if self.x0 <= 0:
            raise ParameterError("x0 must be positive")
        if self.lambda_r < 0:
            raise ParameterError("lambda_r must be nonnegative")
        if self.lambda_m < 0:
            raise ParameterError("lambda_m must be nonnegative")

    @property
    def mu_bar(self) -> float:
        """Effective (median) drift mu - sigma**2/2."""
        return self.mu - 0.5 * self.sigma * self.sigma

    @property
    def sigma2(self) -> float:
        return self.sigma * self.sigma

    def require_stationary(self):
        """Reject parameter sets without a stationary state."""
        if self.lambda_m <= 0:
            raise ParameterError(
                "no stationary state: lambda_m must be positive"
            )


def validate_params(p: ModelParams) -> ModelParams:
    """Re-run the constructor checks on ``p`` and return it unchanged."""
    if not isinstance(p, ModelParams):
        raise ParameterError(f"expected ModelParams, got {type(p).__name__}")
    ModelParams(p.mu, p.sigma, p.x0, p.lambda_r, p.lambda_m)
    return p


@dataclass(frozen=True)
class DensityCurve:
    """A density sampled on a strictly increasing positive grid."""

    xs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)
        if xs.ndim != 1 or xs.shape != values.shape:
            raise ParameterError("xs and values must be equal-length 1-d arrays")
        if xs.size < 2:
            raise ParameterError("a density curve needs at least two points")
        if xs[0] <= 0 or np.any(np.diff(xs) <= 0):
            raise ParameterError("xs must be positive and strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ParameterError("density values must be finite and nonnegative")

    def integral(self) -> float:
        """Trapezoid integral over the grid."""
        return float(np.trapezoid(self.values, self.xs))


@dataclass(frozen=True)
class TimeSeries:
    """Values sampled on a nondecreasing, nonnegative time grid."""

    ts: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "values", values)
        if ts.ndim != 1 or ts.shape != values.shape:
            raise ParameterError("ts and values must be equal-length 1-d arrays")
        if ts.size == 0:
            raise ParameterError("time series must be nonempty")
        if ts[0] < 0 or np.any(np.diff(ts) < 0):
            raise ParameterError("ts must be nonnegative and nondecreasing")
        if not np.all(np.isfinite(values)):
            raise ParameterError("time series values must be finite")


def f0(p: ModelParams, x, t: float):
    """Free GBM density at time ``t``: log-normal around x0 * exp(mu_bar t).

    ``x`` may be a scalar or array of positive values.
    """
    if t <= 0:
        raise ParameterError("t must be positive")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise ParameterError("x must be positive")
    s2t = p.sigma2 * t
    z = np.log(x_arr / p.x0) - p.mu_bar * t
    out = np.exp(-z * z / (2.0 * s2t)) / (x_arr * math.sqrt(2.0 * math.pi * s2t))
    return out if isinstance(x, np.ndarray) else float(out)


def beta(p: ModelParams, n: int) -> float:
    """Moment growth exponent of plain GBM: n*mu + n(n-1)*sigma**2/2."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError("moment order n must be an integer >= 1")
    return n * p.mu + 0.5 * n * (n - 1) * p.sigma2


def gbm_moment_free(p: ModelParams, n: int, t: float) -> float:
    """n-th moment of plain GBM: x0**n * exp(beta(n) * t)."""
    if t < 0:
        raise ParameterError("t must be nonnegative")
    return p.x0 ** n * math.exp(beta(p, n) * t)
