"""Posterior-mean denoiser, its variance, and the scalar MSE function.

The denoiser treats an observation ``z`` as a constellation symbol plus
complex Gaussian noise ``CN(0, tau)`` and returns the posterior mean
(``F``) and posterior variance (``G``) under the discrete prior.

The MSE function ``psi(sigma_sq)`` is the expected squared error of ``F``
applied to a random symbol observed in ``CN(0, sigma_sq)`` noise.  It is
evaluated deterministically with a tensor-product Gauss-Hermite rule
(64 nodes per real dimension by default), exploiting exact rotation /
reflection symmetries of the weighted constellation to skip equivalent
symbols.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .constellation import Constellation

DEFAULT_QUAD_ORDER = 64

# Cap on elements of the (batch, symbol, node, point) weight tensor per
# chunk; keeps peak temporaries around a few hundred MB.
_CHUNK_ELEMENTS = 4_000_000


def _order(order):
    return DEFAULT_QUAD_ORDER if order is None else int(order)


@lru_cache(maxsize=32)
def gauss_hermite_2d(order: int):
    """Flattened 2-D Gauss-Hermite nodes and weights for E over CN(0,1).

    Returns ``(z_nodes, weights)`` with ``z_nodes`` complex of length
    ``order**2`` such that ``E[f(Z)] ~= sum_n weights[n] * f(z_nodes[n])``
    for ``Z ~ CN(0, 1)``.
    """
    x, w = np.polynomial.hermite.hermgauss(order)
    z = (x[:, None] + 1j * x[None, :]).ravel()
    wt = (w[:, None] * w[None, :]).ravel() / math.pi
    z.setflags(write=False)
    wt.setflags(write=False)
    return z, wt


def posterior_moments(c: Constellation, z, tau: float):
    """Posterior mean and variance of a symbol observed in CN(0, tau) noise.

    Weights are computed as ``exp(e_a - max_a e_a)`` with
    ``e_a = log p_a - |z - a|^2 / tau`` so that tiny ``tau`` cannot
    underflow the normalization.

    Parameters
    ----------
    c : Constellation
    z : complex scalar or ndarray
        Noisy observation(s); evaluated element-wise.
    tau : float
        Effective complex-noise variance, > 0.

    Returns
    -------
    (mean, var) : ndarrays shaped like ``z`` (complex, float)
    """
    tau = float(tau)
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    z = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite observation passed to denoiser")
    pts = c.points_array
    logp = _log_priors(c)
    d = z[..., None] - pts
    e = logp - (d.real**2 + d.imag**2) / tau
    e -= e.max(axis=-1, keepdims=True)
    w = np.exp(e)
    den = w.sum(axis=-1)
    mean = (w @ pts) / den
    second = (w @ np.abs(pts) ** 2) / den
    var = np.maximum(second - np.abs(mean) ** 2, 0.0)
    return mean, var


def denoise_mean(c: Constellation, z, tau: float):
    """Posterior message mean ``F(z, tau)``; lies in the points' convex hull."""
    mean, _ = posterior_moments(c, z, tau)
    return complex(mean) if mean.ndim == 0 else mean


def denoise_var(c: Constellation, z, tau: float):
    """Posterior message variance ``G(z, tau)``, clamped at 0 for roundoff."""
    _, var = posterior_moments(c, z, tau)
    return float(var) if var.ndim == 0 else var


def _log_priors(c: Constellation) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(c.priors_array)


# ---------------------------------------------------------------------------
# Symbol-orbit reduction.
#
# A unitary map rho (a phase rotation, optionally composed with complex
# conjugation) that permutes the prior-weighted point set satisfies
# F(rho z, tau) = rho F(z, tau) and leaves CN(0,1) invariant, so symbols in
# the same orbit contribute identically to the MSE expectation.  Grouping
# them is exact, not an approximation.
# ---------------------------------------------------------------------------

def _symmetry_orbits(c: Constellation):
    """Orbit representatives and their total prior mass.

    Returns ``(rep_points, rep_mass)`` arrays; falls back to the trivial
    partition when no symmetry is found.
    """
    pts = c.points_array
    pri = c.priors_array
    k = len(pts)
    scale = max(np.max(np.abs(pts)), 1e-30)
    tol = 1e-9 * scale

    def permutation_of(mapped):
        """Index permutation if `mapped` matches the weighted point set."""
        perm = np.empty(k, dtype=int)
        for i, zm in enumerate(mapped):
            d = np.abs(pts - zm)
            j = int(np.argmin(d))
            if d[j] > tol or not math.isclose(pri[i], pri[j], rel_tol=1e-12, abs_tol=1e-300):
                return None
            perm[i] = j
        if len(set(perm.tolist())) != k:
            return None
        return perm

    # Candidate phases map the first point of some modulus class onto each
    # other member of that class; conjugation candidates likewise.
    nz = np.abs(pts) > tol
    perms = []
    if np.any(nz):
        ref = pts[nz][0]
        same_mod = np.abs(np.abs(pts) - abs(ref)) < tol
        for target in pts[same_mod]:
            rho = target / ref
            p = permutation_of(rho * pts)
            if p is not None:
                perms.append(p)
            rho_c = target / np.conj(ref)
            p = permutation_of(rho_c * np.conj(pts))
            if p is not None:
                perms.append(p)

    # Union-find over i ~ perm[i] gives the orbits of the generated group.
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for perm in perms:
        for i, j in enumerate(perm):
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

    groups = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    reps = np.array([pts[min(g)] for g in groups.values()])
    mass = np.array([pri[g].sum() for g in groups.values()])
    return reps, mass


_orbit_cache: dict = {}


def _orbits(c: Constellation):
    key = (c.points, c.priors)
    hit = _orbit_cache.get(key)
    if hit is None:
        hit = _symmetry_orbits(c)
        _orbit_cache[key] = hit
    return hit


def _product_split(c: Constellation):
    """Detect a product alphabet: points = U x V with factorized priors.

    Square QAM with uniform priors is the canonical case.  When it holds,
    the posterior factorizes over the real and imaginary parts and the 2-D
    tensor quadrature reduces algebraically to two 1-D rules of the same
    order (an identity of the quadrature, not an approximation).

    Returns ``(u, q, v, r)`` with marginal levels and priors, or None.
    """
    pts = c.points_array
    pri = c.priors_array
    u = np.unique(pts.real)
    v = np.unique(pts.imag)
    if len(u) * len(v) != len(pts):
        return None
    pmat = np.full((len(u), len(v)), -1.0)
    iu = np.searchsorted(u, pts.real)
    iv = np.searchsorted(v, pts.imag)
    pmat[iu, iv] = pri
    if np.any(pmat < 0):
        return None
    q = pmat.sum(axis=1)
    r = pmat.sum(axis=0)
    if not np.allclose(pmat, np.outer(q, r), rtol=1e-12, atol=1e-15):
        return None
    return u, q, v, r


_split_cache: dict = {}


def _split(c: Constellation):
    key = (c.points, c.priors)
    if key not in _split_cache:
        _split_cache[key] = _product_split(c)
    return _split_cache[key]


# ---------------------------------------------------------------------------
# MSE function psi and its derivative.
# ---------------------------------------------------------------------------

def mse_batch(c: Constellation, sigma_sqs, order: int | None = None,
              use_symmetry: bool = True) -> np.ndarray:
    """Vectorized ``psi`` over an array of noise variances.

    Same quadrature as :func:`mse`; chunked so peak memory stays bounded
    regardless of grid size.
    """
    n = _order(order)
    sig = np.asarray(sigma_sqs, dtype=np.float64)
    flat = np.atleast_1d(sig).ravel()
    if np.any(flat <= 0):
        raise ValueError("sigma_sq values must be positive")
    if use_symmetry:
        split = _split(c)
        if split is not None:
            u, q, v, r = split
            out = _mse_1d(u, q, flat, n) + _mse_1d(v, r, flat, n)
            return out.reshape(sig.shape) if sig.ndim else float(out[0])
        reps, mass = _orbits(c)
    else:
        reps, mass = c.points_array, c.priors_array
    pts = c.points_array
    logp = _log_priors(c)
    nodes, wts = gauss_hermite_2d(n)

    nnodes, nreps, npts = len(nodes), len(reps), len(pts)
    chunk = max(1, _CHUNK_ELEMENTS // max(nnodes * nreps * npts, 1))
    out = np.empty_like(flat)
    for lo in range(0, len(flat), chunk):
        s = flat[lo:lo + chunk]
        z = reps[None, :, None] + np.sqrt(s)[:, None, None] * nodes  # (B,R,N)
        d = z[..., None] - pts
        e = logp - (d.real**2 + d.imag**2) / s[:, None, None, None]
        del d
        e -= e.max(axis=-1, keepdims=True)
        w = np.exp(e)
        del e
        den = w.sum(axis=-1)
        fmean = (w @ pts) / den
        del w, den
        err = np.abs(fmean - reps[None, :, None]) ** 2
        out[lo:lo + chunk] = np.einsum("brn,r,n->b", err, mass, wts)
    return out.reshape(sig.shape) if sig.ndim else float(out[0])


def _mse_1d(levels: np.ndarray, priors: np.ndarray, sig: np.ndarray,
            order: int) -> np.ndarray:
    """One real dimension of a product alphabet.

    ``E[(F_1d(S + sigma*X) - S)^2]`` with ``X ~ N(0, 1/2)`` (one real part
    of CN(0,1) noise); posterior weights use ``exp(-(y-u)^2 / sigma_sq)``.
    """
    if len(levels) == 1:
        return np.zeros_like(sig)
    x, w = np.polynomial.hermite.hermgauss(order)
    wts = w / math.sqrt(math.pi)
    with np.errstate(divide="ignore"):
        logq = np.log(priors)
    nlev = len(levels)
    chunk = max(1, _CHUNK_ELEMENTS // max(order * nlev * nlev, 1))
    out = np.empty_like(sig)
    for lo in range(0, len(sig), chunk):
        s = sig[lo:lo + chunk]
        y = levels[None, :, None] + np.sqrt(s)[:, None, None] * x  # (B,L,n)
        e = logq - (y[..., None] - levels) ** 2 / s[:, None, None, None]
        e -= e.max(axis=-1, keepdims=True)
        ww = np.exp(e)
        del e
        fmean = (ww @ levels) / ww.sum(axis=-1)
        del ww
        err = (fmean - levels[None, :, None]) ** 2
        out[lo:lo + chunk] = np.einsum("bln,l,n->b", err, priors, wts)
    return out


def mse(c: Constellation, sigma_sq: float, order: int | None = None,
        use_symmetry: bool = True) -> float:
    """MSE function ``psi(sigma_sq)``: expected squared denoiser error.

    Exact prior-weighted sum over the constellation of a 2-D tensor
    Gauss-Hermite quadrature over the real and imaginary noise parts;
    deterministic for a fixed quadrature order.

    Parameters
    ----------
    c : Constellation
    sigma_sq : float
        Effective complex-noise variance, > 0.
    order : int, optional
        Nodes per real dimension (default 64).
    use_symmetry : bool
        Group symmetry-equivalent symbols (exact); disable to force the
        direct sum over every symbol.
    """
    sigma_sq = float(sigma_sq)
    if not sigma_sq > 0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    return float(mse_batch(c, np.asarray([sigma_sq]), order, use_symmetry)[0])


def mse_derivative(c: Constellation, sigma_sq: float,
                   order: int | None = None) -> float:
    """d psi / d sigma_sq by central finite difference.

    Relative step ``1e-4 * sigma_sq`` floored at 1e-10; both evaluations
    share the quadrature order.
    """
    sigma_sq = float(sigma_sq)
    if not sigma_sq > 0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    h = max(1e-4 * sigma_sq, 1e-10)
    lo = sigma_sq - h
    if lo <= 0:  # keep the stencil inside the domain for extreme inputs
        lo = sigma_sq / 2
        h = sigma_sq - lo
    vals = mse_batch(c, np.asarray([sigma_sq + h, lo]), order)
    return float((vals[0] - vals[1]) / (sigma_sq + h - lo))


def mse_derivative_batch(c: Constellation, sigma_sqs,
                         order: int | None = None) -> np.ndarray:
    """Vectorized central-difference derivative of ``psi``."""
    sig = np.asarray(sigma_sqs, dtype=np.float64)
    flat = np.atleast_1d(sig).ravel()
    h = np.maximum(1e-4 * flat, 1e-10)
    lo = flat - h
    bad = lo <= 0
    lo[bad] = flat[bad] / 2
    hi = flat + h
    vals = mse_batch(c, np.concatenate([hi, lo]), order)
    dpsi = (vals[: len(flat)] - vals[len(flat):]) / (hi - lo)
    return dpsi.reshape(sig.shape) if sig.ndim else float(dpsi[0])
