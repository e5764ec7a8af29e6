"""Effective-noise-variance recursion, its fixed points, and the g diagnostic.

The recursion tracks the variance of the decoupled per-symbol AWGN channel
across detector iterations:

    sigma_1^2 = N0 + beta * Var_S[S]
    sigma_t^2 = N0 + beta * psi(sigma_{t-1}^2)

Fixed points are the zero crossings of

    g(sigma^2, beta, N0) = N0 + beta * psi(sigma^2) - sigma^2.

The recursion started from sigma_1^2 descends to the zero crossing with the
largest effective noise variance; the smallest crossing is the optimal one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._scalar import bisect_root, golden_section_max, golden_section_min
from .constellation import Constellation
from .denoiser import mse, mse_batch, mse_derivative

DEFAULT_MAX_ITER = 256
DEFAULT_REL_TOL = 1e-6
GRID_POINTS = 2000

# |g| below this (scaled) counts as touching zero: a tangent double root.
_TANGENT_DIP = 1e-10
_ROOT_WIDTH_REL = 1e-12


class NumericalResolutionError(RuntimeError):
    """A search grid could not resolve a required feature."""


@dataclass(frozen=True)
class GridSpec:
    """Log-spaced search interval for sigma^2."""

    sigma_lo: float
    sigma_hi: float
    points: int = GRID_POINTS

    def values(self) -> np.ndarray:
        return np.logspace(
            np.log10(self.sigma_lo), np.log10(self.sigma_hi), self.points
        )


def default_grid(c: Constellation, beta: float, n0: float,
                 points: int = GRID_POINTS) -> GridSpec:
    lo = 1e-9 * c.variance
    hi = 10.0 * (n0 + beta * c.variance)
    return GridSpec(lo, hi, points)


@dataclass
class SETrace:
    """One run of the effective-noise recursion."""

    beta: float
    n0: float
    sigma_sq_seq: list = field(default_factory=list)
    converged: bool = False

    @property
    def final_sigma_sq(self) -> float:
        return self.sigma_sq_seq[-1]

    @property
    def iterations(self) -> int:
        return len(self.sigma_sq_seq)


@dataclass(frozen=True)
class FixedPoint:
    sigma_sq: float
    stable: bool
    marginal: bool = False  # tangent double root at threshold parameters


@dataclass
class FixedPointSet:
    """All zero crossings of g on the search interval."""

    roots: list
    se_reachable: float
    optimal: float


def se_step(c: Constellation, beta: float, n0: float, sigma_sq: float,
            order: int | None = None) -> float:
    """One recursion update: ``N0 + beta * psi(sigma_sq)``."""
    _check_params(beta, n0)
    return n0 + beta * mse(c, sigma_sq, order)


def run_se(c: Constellation, beta: float, n0: float,
           max_iter: int = DEFAULT_MAX_ITER, rel_tol: float = DEFAULT_REL_TOL,
           order: int | None = None) -> SETrace:
    """Iterate the recursion from ``sigma_1^2 = N0 + beta * Var_S[S]``.

    Stops once ``|sigma_t^2 - sigma_{t-1}^2| <= rel_tol * max(sigma_t^2,
    1e-12)`` or after ``max_iter`` updates; the full iterate sequence is
    recorded.
    """
    _check_params(beta, n0)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    s = n0 + beta * c.variance
    trace = SETrace(beta=beta, n0=n0, sigma_sq_seq=[s])
    for _ in range(max_iter):
        if s <= 0.0:
            # noiseless recursion collapsed to the origin fixed point
            trace.converged = True
            break
        s_new = n0 + beta * mse(c, s, order)
        trace.sigma_sq_seq.append(s_new)
        if abs(s_new - s) <= rel_tol * max(s_new, 1e-12):
            trace.converged = True
            s = s_new
            break
        s = s_new
    return trace


def g_function(c: Constellation, sigma_sq: float, beta: float, n0: float,
               order: int | None = None) -> float:
    """Fixed-point diagnostic ``g = N0 + beta * psi(sigma^2) - sigma^2``."""
    _check_params(beta, n0)
    return n0 + beta * mse(c, sigma_sq, order) - sigma_sq


def g_batch(c: Constellation, sigma_sqs, beta: float, n0: float,
            order: int | None = None) -> np.ndarray:
    _check_params(beta, n0)
    sig = np.asarray(sigma_sqs, dtype=np.float64)
    return n0 + beta * mse_batch(c, sig, order) - sig


def find_fixed_points(c: Constellation, beta: float, n0: float,
                      grid: GridSpec | None = None,
                      order: int | None = None) -> FixedPointSet:
    """Enumerate and classify every zero crossing of g.

    Sign changes on the log grid are refined by bisection to 1e-12
    relative width; a root is stable iff ``beta * psi'(sigma^2) < 1``
    there.  A dip of g to within 1e-10 of zero without a sign change is
    reported as a single marginal (tangent) root.  When g is already
    negative at the grid floor, the crossing lies below it where psi
    underflows, so the root ``sigma^2 = N0`` is reported analytically.

    Raises
    ------
    NumericalResolutionError
        If g > 0 at the top of the interval (grid too short).
    """
    _check_params(beta, n0)
    if grid is None:
        grid = default_grid(c, beta, n0)
    if grid.sigma_hi < n0 + beta * c.variance:
        raise ValueError(
            "grid must cover the recursion start: "
            f"sigma_hi={grid.sigma_hi} < {n0 + beta * c.variance}"
        )
    xs = grid.values()
    gs = g_batch(c, xs, beta, n0, order)
    if gs[-1] > 0:
        raise NumericalResolutionError(
            f"g still positive at sigma_hi={grid.sigma_hi}; enlarge the grid"
        )

    def g_of(s):
        return n0 + beta * mse(c, s, order) - s

    scale = max(n0, c.variance)
    roots: list[FixedPoint] = []
    if gs[0] < 0:
        # crossing below the grid floor: psi underflows there, g ~= N0 - s^2
        roots.append(FixedPoint(sigma_sq=n0 if n0 < grid.sigma_lo else 0.0,
                                stable=True))
    sign = np.sign(gs)
    for i in range(len(xs) - 1):
        if sign[i] == 0:
            roots.append(_classify(c, beta, float(xs[i]), order))
        elif sign[i] * sign[i + 1] < 0:
            r = bisect_root(g_of, float(xs[i]), float(xs[i + 1]),
                            fa=float(gs[i]), fb=float(gs[i + 1]),
                            rel_tol=_ROOT_WIDTH_REL)
            roots.append(_classify(c, beta, r, order))
    if sign[-1] == 0:
        roots.append(_classify(c, beta, float(xs[-1]), order))

    # Tangent roots: interior extrema of g grazing zero without a sign
    # change (local maxima from below, local minima from above).
    # Grid extrema can sit well above the true dip bottom (parabolic
    # behavior over one log-grid cell), so the candidate filter is loose;
    # the refined |g| test below is what accepts a tangent root.
    for i in range(1, len(xs) - 1):
        graze_max = (gs[i] < 0 and gs[i] >= gs[i - 1] and gs[i] > gs[i + 1]
                     and gs[i] > -1e-3 * scale)
        graze_min = (gs[i] > 0 and gs[i] <= gs[i - 1] and gs[i] < gs[i + 1]
                     and gs[i] < 1e-3 * scale)
        if graze_max:
            x_star, g_star = golden_section_max(
                g_of, float(xs[i - 1]), float(xs[i + 1]), rel_tol=1e-12
            )
        elif graze_min:
            x_star, g_star = golden_section_min(
                g_of, float(xs[i - 1]), float(xs[i + 1]), rel_tol=1e-12
            )
        else:
            continue
        if abs(g_star) < _TANGENT_DIP * max(1.0, scale):
            roots.append(FixedPoint(x_star, stable=False, marginal=True))

    roots.sort(key=lambda r: r.sigma_sq)
    if not roots:
        raise NumericalResolutionError(
            "no fixed point found on the search interval"
        )
    return FixedPointSet(
        roots=roots,
        se_reachable=roots[-1].sigma_sq,
        optimal=roots[0].sigma_sq,
    )


def _classify(c, beta, sigma_sq, order) -> FixedPoint:
    stable = beta * mse_derivative(c, sigma_sq, order) < 1.0
    return FixedPoint(sigma_sq=sigma_sq, stable=stable)


def _check_params(beta: float, n0: float) -> None:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n0 < 0:
        raise ValueError(f"n0 must be non-negative, got {n0}")
