"""Shared numerical kernels: adaptive quadrature, cumulative integrals,
bracketed root-finding, and golden-section minimization.

The quadrature is a classic adaptive Gauss-Kronrod scheme built on the
nested 15-point rule: the embedded 7-point Gauss result provides a per-panel
error estimate, and the panel with the largest estimate is split until the
requested tolerance is met.  Integrands must accept numpy arrays of
abscissae.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ParameterError, QuadratureError

# 15-point Kronrod abscissae on [-1, 1] and weights, with the embedded
# 7-point Gauss weights (QUADPACK dqk15 constants).  Gauss nodes sit at the
# odd Kronrod indices.
_XK = np.array([
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691,
    -0.7415311855993945, -0.5860872354676911, -0.4058451513773972,
    -0.2077849550078985, 0.0,
    0.2077849550078985, 0.4058451513773972, 0.5860872354676911,
    0.7415311855993945, 0.8648644233597691, 0.9491079123427585,
    0.9914553711208126,
])
_WK = np.array([
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
    0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299785,
    0.0229353220105292,
])
_WG = np.array([
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189, 0.2797053914892767, 0.1294849661688697,
])
_GAUSS_IDX = np.arange(1, 15, 2)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and subdivision budget for adaptive quadrature."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 60

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ParameterError("quadrature tolerances must be positive")
        if self.max_depth < 10:
            raise ParameterError("max_depth must be at least 10")


DEFAULT_QUAD = QuadratureSpec()


class QuadratureResult(NamedTuple):
    value: float
    error: float
    n_panels: int


def _gk15(f, a, b):
    """Kronrod-15 value, embedded Gauss-7 value, on one panel."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fx = np.asarray(f(mid + half * _XK), dtype=float)
    k = half * float(fx @ _WK)
    g = half * float(fx[_GAUSS_IDX] @ _WG)
    return k, abs(k - g)


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUAD,
    initial_panels: int = 1,
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]`` to the tolerances in ``spec``.

    ``initial_panels`` seeds the subdivision with a uniform split, which is
    how callers with sharply peaked integrands guarantee the peak is seen
    before adaptivity takes over.  Raises :class:`QuadratureError` when the
    panel budget is exhausted with the tolerance unmet.
    """
    if b < a:
        raise ParameterError("integration bounds must satisfy a <= b")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0)

    initial_panels = max(1, int(initial_panels))
    edges = np.linspace(a, b, initial_panels + 1)
    # heap entries: (-err, tiebreak, lo, hi, value, err, depth)
    heap = []
    total = 0.0
    total_err = 0.0
    count = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _gk15(f, lo, hi)
        heapq.heappush(heap, (-err, count, lo, hi, val, err, 0))
        total += val
        total_err += err
        count += 1

    max_panels = 64 * initial_panels + 4096
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        neg_err, _, lo, hi, val, err, depth = heapq.heappop(heap)
        if depth >= spec.max_depth or count >= max_panels:
            raise QuadratureError(
                f"quadrature failed to converge on [{a:g}, {b:g}]: "
                f"worst panel [{lo:g}, {hi:g}] error {err:g} "
                f"(total estimate {total_err:g})",
                worst_panel=(lo, hi),
                error_estimate=total_err,
            )
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        total += v1 + v2 - val
        total_err += e1 + e2 - err
        heapq.heappush(heap, (-e1, count, lo, mid, v1, e1, depth + 1))
        count += 1
        heapq.heappush(heap, (-e2, count, mid, hi, v2, e2, depth + 1))
        count += 1

    return QuadratureResult(total, total_err, count)


def cumulative_integral(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Running trapezoid integral of samples ``values`` over ``grid``.

    Exact for piecewise-linear integrands; element ``i`` is the integral
    from ``grid[0]`` to ``grid[i]``.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.shape != values.shape:
        raise ParameterError("grid and values must be equal-length 1-d arrays")
    if grid.size and np.any(np.diff(grid) <= 0):
        raise ParameterError("grid must be strictly increasing")
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(grid), out=out[1:])
    return out


def cumulative_simpson_uniform(values: np.ndarray, h: float) -> np.ndarray:
    """Running Simpson integral of samples on a uniform grid of step ``h``.

    Fourth-order accurate; odd indices use the parabolic half-interval rule.
    Used internally where the trapezoid rule would dominate the error budget.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    out = np.zeros(n)
    if n < 2:
        return out
    if n == 2:
        out[1] = 0.5 * h * (values[0] + values[1])
        return out
    # even indices: classic paired Simpson panels (fourth-order globally)
    pairs = (h / 3.0) * (values[0:-2:2] + 4.0 * values[1:-1:2] + values[2::2])
    out[2::2] = np.cumsum(pairs)
    # odd indices: one half-interval parabolic increment off the even grid
    out[1] = (h / 12.0) * (5.0 * values[0] + 8.0 * values[1] - values[2])
    if n > 3:
        out[3::2] = out[2:-1:2] + (h / 12.0) * (
            -values[1:-2:2] + 8.0 * values[2:-1:2] + 5.0 * values[3::2]
        )
    return out


def find_root_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> float:
    """Root of ``f`` on ``[lo, hi]``, which must bracket a sign change.

    Secant steps accelerate convergence; a bisection safeguard keeps the
    bracket shrinking geometrically, so termination is guaranteed.
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if not (np.isfinite(flo) and np.isfinite(fhi)) or flo * fhi > 0:
        raise ParameterError(
            f"no sign change on bracket [{lo:g}, {hi:g}]: "
            f"f(lo)={flo:g}, f(hi)={fhi:g}"
        )
    a, b, fa, fb = lo, hi, flo, fhi
    for _ in range(max_iter):
        if (b - a) <= tol:
            break
        mid = 0.5 * (a + b)
        x = mid
        if fb != fa:
            s = b - fb * (b - a) / (fb - fa)
            # accept the secant point only if safely interior
            if a + 0.01 * (b - a) < s < b - 0.01 * (b - a):
                x = s
        fx = f(x)
        if fx == 0.0:
            return x
        if fa * fx < 0:
            b, fb = x, fx
        else:
            a, fa = x, fx
    return 0.5 * (a + b)


@dataclass(frozen=True)
class GoldenResult:
    argmin: float
    fmin: float
    boundary: bool
    iterations: int


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_golden(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> GoldenResult:
    """Golden-section minimum of ``f`` on ``[lo, hi]``.

    Assumes unimodality; a monotone ``f`` converges to an endpoint, which is
    reported via ``boundary=True`` so callers can widen their bracket.
    """
    if not lo < hi:
        raise ParameterError("bracket must satisfy lo < hi")
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while (b - a) > tol and it < max_iter:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        it += 1
    if f1 <= f2:
        xm, fm = x1, f1
    else:
        xm, fm = x2, f2
    edge = max(tol, 1e-12 * (hi - lo), np.finfo(float).eps * max(abs(lo), abs(hi)))
    boundary = (xm - lo) <= 2 * edge or (hi - xm) <= 2 * edge
    return GoldenResult(argmin=xm, fmin=fm, boundary=boundary, iterations=it)
