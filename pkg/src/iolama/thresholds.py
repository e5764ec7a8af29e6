"""Recovery thresholds, critical noise levels, and operating-regime labels.

Two thresholds characterize the detector for a fixed alphabet:

- exact recovery threshold ``beta_max = min_s { s / psi(s) }``: below it the
  noiseless recursion has a unique fixed point at the origin and the signal
  is recovered perfectly in the large-system limit;
- minimum recovery threshold ``beta_min = 1 / max_s psi'(s)``: below it the
  fixed point is unique at every noise level, so the detector is optimal
  regardless of N0.

For ``beta > beta_min`` the noise interval ``[n0_min, n0_max]`` brackets
where multiple fixed points can appear; its endpoints are the extrema of
``s - beta * psi(s)`` over the stationary points ``beta * psi'(s) = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._scalar import bisect_root, golden_section_max, golden_section_min
from .constellation import Constellation
from .denoiser import DEFAULT_QUAD_ORDER, mse, mse_batch, mse_derivative, \
    mse_derivative_batch
from .state_evolution import NumericalResolutionError

# Scan grid for all extremizations: [1e-6, 1e4] * Var, log-spaced.
GRID_LO_FACTOR = 1e-6
GRID_HI_FACTOR = 1e4
GRID_POINTS = 2000
REFINE_REL_TOL = 1e-10
STATIONARY_TOL = 1e-6  # |beta * psi' - 1| accepted as a stationary point

ALWAYS_OPTIMAL = "always-optimal"
OPTIMAL_LOW_NOISE = "optimal-low-noise"
OPTIMAL_HIGH_NOISE = "optimal-high-noise"
POSSIBLY_SUBOPTIMAL = "possibly-suboptimal"
SUBOPTIMAL = "suboptimal"

REGIME_LABELS = (
    ALWAYS_OPTIMAL,
    OPTIMAL_LOW_NOISE,
    OPTIMAL_HIGH_NOISE,
    POSSIBLY_SUBOPTIMAL,
    SUBOPTIMAL,
)


@dataclass(frozen=True)
class ErtResult:
    beta_max: float
    argmin_sigma_sq: float


@dataclass(frozen=True)
class MrtResult:
    beta_min: float
    argmax_sigma_sq: float


@dataclass(frozen=True)
class CriticalNoise:
    n0_min: float | None
    n0_max: float | None
    stationary_sigmas: tuple


@dataclass
class ThresholdReport:
    """Bundle of all threshold quantities for one constellation."""

    constellation: str
    beta_max: float
    beta_min: float
    argmin_sigma_sq_ert: float
    argmax_sigma_sq_mrt: float
    beta: float | None = None
    n0_min: float | None = None
    n0_max: float | None = None
    stationary_sigmas: tuple = field(default_factory=tuple)
    quad_order: int = DEFAULT_QUAD_ORDER
    grid_points: int = GRID_POINTS
    grid_range_factor: tuple = (GRID_LO_FACTOR, GRID_HI_FACTOR)
    refine_rel_tol: float = REFINE_REL_TOL

    def to_dict(self) -> dict:
        return {
            "constellation": self.constellation,
            "beta_min": self.beta_min,
            "beta_max": self.beta_max,
            "argmin_sigma_sq_ert": self.argmin_sigma_sq_ert,
            "argmax_sigma_sq_mrt": self.argmax_sigma_sq_mrt,
            "beta": self.beta,
            "n0_min": self.n0_min,
            "n0_max": self.n0_max,
            "stationary_sigmas": list(self.stationary_sigmas),
            "solver": {
                "quad_order": self.quad_order,
                "grid_points": self.grid_points,
                "grid_range_factor": list(self.grid_range_factor),
                "refine_rel_tol": self.refine_rel_tol,
                "stationary_tol": STATIONARY_TOL,
            },
        }


def _order(order):
    return DEFAULT_QUAD_ORDER if order is None else int(order)


@lru_cache(maxsize=64)
def _profile(c: Constellation, order: int, points: int):
    """Shared scan grid with psi and psi' evaluated once per constellation."""
    xs = np.logspace(
        np.log10(GRID_LO_FACTOR * c.variance),
        np.log10(GRID_HI_FACTOR * c.variance),
        points,
    )
    psi = mse_batch(c, xs, order)
    dpsi = mse_derivative_batch(c, xs, order)
    return xs, psi, dpsi


def _check_nondegenerate(c: Constellation) -> None:
    if not c.variance > 0:
        raise ValueError("constellation has zero variance; thresholds undefined")


@lru_cache(maxsize=64)
def _ert(c: Constellation, order: int, points: int) -> ErtResult:
    xs, psi, _ = _profile(c, order, points)
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.where(psi > 0, xs / np.where(psi > 0, psi, 1.0), np.inf)
    i = int(np.argmin(ratio))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]
    x, val = golden_section_min(
        lambda s: s / mse(c, s, order), float(lo), float(hi),
        rel_tol=REFINE_REL_TOL,
    )
    return ErtResult(beta_max=val, argmin_sigma_sq=x)


@lru_cache(maxsize=64)
def _mrt(c: Constellation, order: int, points: int) -> MrtResult:
    xs, _, dpsi = _profile(c, order, points)
    i = int(np.argmax(dpsi))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, len(xs) - 1)]
    x, val = golden_section_max(
        lambda s: mse_derivative(c, s, order), float(lo), float(hi),
        rel_tol=REFINE_REL_TOL,
    )
    return MrtResult(beta_min=1.0 / val, argmax_sigma_sq=x)


def compute_ert(c: Constellation, order: int | None = None,
                grid_points: int = GRID_POINTS) -> ErtResult:
    """Exact recovery threshold: ``min over sigma_sq of sigma_sq / psi``.

    Coarse log-grid scan followed by golden-section refinement of the
    bracketing interval.
    """
    _check_nondegenerate(c)
    return _ert(c, _order(order), grid_points)


def compute_mrt(c: Constellation, order: int | None = None,
                grid_points: int = GRID_POINTS) -> MrtResult:
    """Minimum recovery threshold: ``1 / max over sigma_sq of psi'``."""
    _check_nondegenerate(c)
    return _mrt(c, _order(order), grid_points)


def stationary_points(c: Constellation, beta: float,
                      order: int | None = None,
                      grid_points: int = GRID_POINTS) -> tuple:
    """All solutions of ``beta * psi'(sigma_sq) = 1`` on the scan grid.

    Sign changes are bisected; a grazing local maximum (the saddle when
    beta sits at the MRT) is refined by golden section and accepted when
    ``|beta * psi' - 1|`` ends up below the stationary tolerance.  A local
    maximum that pokes above zero inside a single grid cell yields the two
    sub-cell roots on its flanks.
    """
    _check_nondegenerate(c)
    n = _order(order)
    xs, _, dpsi = _profile(c, n, grid_points)
    h = beta * dpsi - 1.0

    def t_of(s):
        return beta * mse_derivative(c, s, n) - 1.0

    found: list[float] = []
    sign = np.sign(h)
    for i in range(len(xs) - 1):
        if sign[i] == 0:
            found.append(float(xs[i]))
        elif sign[i] * sign[i + 1] < 0:
            found.append(
                bisect_root(t_of, float(xs[i]), float(xs[i + 1]),
                            fa=float(h[i]), fb=float(h[i + 1]),
                            rel_tol=1e-12)
            )
    if sign[-1] == 0:
        found.append(float(xs[-1]))

    # Grazing or sub-cell features at interior local maxima of h < 0.
    for i in range(1, len(xs) - 1):
        if h[i] < 0 and h[i] >= h[i - 1] and h[i] > h[i + 1] and h[i] > -1e-3:
            x_star, t_star = golden_section_max(
                t_of, float(xs[i - 1]), float(xs[i + 1]), rel_tol=1e-12
            )
            if abs(t_star) <= STATIONARY_TOL:
                found.append(x_star)
            elif t_star > 0:
                found.append(bisect_root(t_of, float(xs[i - 1]), x_star,
                                         rel_tol=1e-12))
                found.append(bisect_root(t_of, x_star, float(xs[i + 1]),
                                         rel_tol=1e-12))

    found.sort()
    merged: list[float] = []
    for s in found:
        if not merged or s > merged[-1] * (1 + 1e-9):
            merged.append(s)
    return tuple(merged)


def critical_noise(c: Constellation, beta: float,
                   order: int | None = None,
                   grid_points: int = GRID_POINTS) -> CriticalNoise:
    """Critical noise levels bounding the multiple-fixed-point interval.

    Evaluates ``sigma_sq - beta * psi(sigma_sq)`` at every stationary
    point of ``beta * psi'``; the minimum is ``n0_min`` (defined for
    ``beta < beta_max``), the maximum ``n0_max`` (defined for ``beta``
    above the MRT).  With no stationary point (``beta`` at or below the
    MRT) both are absent.
    """
    _check_nondegenerate(c)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    n = _order(order)
    stat = stationary_points(c, beta, n, grid_points)
    mrt = compute_mrt(c, n, grid_points)
    if not stat:
        if beta > mrt.beta_min * (1 + 1e-9):
            raise NumericalResolutionError(
                f"no stationary point found for beta={beta} > "
                f"beta_min={mrt.beta_min}; refine the grid"
            )
        return CriticalNoise(n0_min=None, n0_max=None, stationary_sigmas=())
    ert = compute_ert(c, n, grid_points)
    phi = [s - beta * mse(c, s, n) for s in stat]
    n0_max = max(phi)
    n0_min = min(phi) if beta < ert.beta_max else None
    return CriticalNoise(n0_min=n0_min, n0_max=n0_max,
                         stationary_sigmas=stat)


def classify_regime(c: Constellation, beta: float, n0: float,
                    order: int | None = None,
                    grid_points: int = GRID_POINTS) -> str:
    """Operating-regime label for a system ratio and noise level.

    The closed interval ``[n0_min, n0_max]`` is labeled conservatively as
    possibly-suboptimal.
    """
    _check_nondegenerate(c)
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n0 < 0:
        raise ValueError(f"n0 must be non-negative, got {n0}")
    n = _order(order)
    mrt = compute_mrt(c, n, grid_points)
    if beta <= mrt.beta_min:
        return ALWAYS_OPTIMAL
    crit = critical_noise(c, beta, n, grid_points)
    if crit.n0_max is None:
        return ALWAYS_OPTIMAL  # numerically indistinguishable from the MRT
    ert = compute_ert(c, n, grid_points)
    if beta < ert.beta_max:
        if n0 < crit.n0_min:
            return OPTIMAL_LOW_NOISE
        if n0 > crit.n0_max:
            return OPTIMAL_HIGH_NOISE
        return POSSIBLY_SUBOPTIMAL
    if n0 > crit.n0_max:
        return OPTIMAL_HIGH_NOISE
    return SUBOPTIMAL


def threshold_report(c: Constellation, beta: float | None = None,
                     order: int | None = None,
                     grid_points: int = GRID_POINTS) -> ThresholdReport:
    """Assemble thresholds (and, given ``beta``, critical noise) for ``c``."""
    n = _order(order)
    ert = compute_ert(c, n, grid_points)
    mrt = compute_mrt(c, n, grid_points)
    report = ThresholdReport(
        constellation=c.name,
        beta_max=ert.beta_max,
        beta_min=mrt.beta_min,
        argmin_sigma_sq_ert=ert.argmin_sigma_sq,
        argmax_sigma_sq_mrt=mrt.argmax_sigma_sq,
        quad_order=n,
        grid_points=grid_points,
    )
    if beta is not None:
        crit = critical_noise(c, beta, n, grid_points)
        report.beta = beta
        report.n0_min = crit.n0_min
        report.n0_max = crit.n0_max
        report.stationary_sigmas = crit.stationary_sigmas
    return report
