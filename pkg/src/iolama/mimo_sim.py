"""The AMP detector on concrete MIMO instances, plus Monte Carlo harnesses.

Channel model: ``y = H s0 + n`` with ``H`` having i.i.d. CN(0, 1/MR)
entries and ``n`` i.i.d. CN(0, N0).  The detector iterates

    z      = s_hat + H^H r
    s_hat' = F(z, N0 (1 + tau))
    tau'   = (beta / N0) <G(z, N0 (1 + tau))>
    r'     = y - H s_hat' + (tau' / (1 + tau)) r

from ``s_hat = E_S[S]``, ``r = y``, ``tau = beta Var_S[S] / N0``.  The
residual correction term makes the per-iteration errors of ``z``
statistically Gaussian, which is what lets the scalar recursion in
:mod:`iolama.state_evolution` track the detector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation, resolve
from .denoiser import posterior_moments
from .state_evolution import run_se

DEFAULT_MAX_ITER = 64
DEFAULT_STOP_TOL = 1e-8

# Noiseless runs substitute this floor for N0 so the tau updates stay
# finite; far below any critical noise level of a unit-variance alphabet.
_N0_FLOOR_FACTOR = 1e-12


@dataclass
class MimoInstance:
    """One realized channel, transmit vector, and receive vector."""

    mt: int
    mr: int
    h: np.ndarray
    s0: np.ndarray
    n0: float
    y: np.ndarray

    @property
    def beta(self) -> float:
        return self.mt / self.mr


@dataclass
class DetectionResult:
    s_final: np.ndarray
    symbol_errors: int
    iterations_run: int
    per_iter_mse: list = field(default_factory=list)
    z_final: np.ndarray | None = None


@dataclass
class SerEstimate:
    ser: float
    trials: int
    errors: int
    symbols: int
    mean_iterations: float


@dataclass
class DecouplingReport:
    empirical_var: float
    se_var: float
    normality_stat: float
    iter_probe: int
    samples: int
    residuals: np.ndarray | None = None  # pooled z - s0, kept for plotting


def generate_instance(c: Constellation, mt: int, mr: int, n0: float,
                      seed) -> MimoInstance:
    """Draw a seeded instance: H, s0 from the prior, y = H s0 + n.

    Deterministic for a fixed seed; draws H, then s0, then n.
    """
    if mt < 1 or mr < 1:
        raise ValueError("mt and mr must be >= 1")
    if n0 < 0:
        raise ValueError(f"n0 must be non-negative, got {n0}")
    rng = np.random.default_rng(seed)
    h = (rng.standard_normal((mr, mt)) + 1j * rng.standard_normal((mr, mt)))
    h *= np.sqrt(1.0 / (2 * mr))
    idx = rng.choice(len(c.points), size=mt, p=c.priors_array)
    s0 = c.points_array[idx]
    noise = (rng.standard_normal(mr) + 1j * rng.standard_normal(mr))
    noise *= np.sqrt(n0 / 2.0)
    y = h @ s0 + noise
    return MimoInstance(mt=mt, mr=mr, h=h, s0=s0, n0=float(n0), y=y)


def lama_detect(c: Constellation, inst: MimoInstance,
                max_iter: int = DEFAULT_MAX_ITER,
                stop_tol: float = DEFAULT_STOP_TOL,
                onsager: bool = True) -> DetectionResult:
    """Run the detector on one instance.

    Stops when the mean-square change of the soft estimate drops below
    ``stop_tol`` or after ``max_iter`` iterations.  Hard decisions come
    from slicing ``z`` (the decoupled observation) at the last iteration,
    not the posterior mean, which is biased toward the prior centroid.
    The recorded ``per_iter_mse[t-1]`` is ``<|z^t - s0|^2>``.

    ``onsager=False`` drops the residual correction term (diagnostic
    only; the Gaussian decoupling degrades measurably without it).
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if inst.h.shape != (inst.mr, inst.mt) or len(inst.y) != inst.mr:
        raise ValueError("instance dimensions are inconsistent")
    n0_eff = max(inst.n0, _N0_FLOOR_FACTOR * c.variance)
    if n0_eff <= 0:
        raise ValueError("n0 and constellation variance are both zero")
    beta = inst.beta
    hH = inst.h.conj().T
    s_hat = np.full(inst.mt, c.mean, dtype=np.complex128)
    r = inst.y.astype(np.complex128, copy=True)
    tau = beta * c.variance / n0_eff

    per_iter_mse: list[float] = []
    z = s_hat
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        z = s_hat + hH @ r
        per_iter_mse.append(float(np.mean(np.abs(z - inst.s0) ** 2)))
        tau_in = n0_eff * (1.0 + tau)
        s_next, g_var = posterior_moments(c, z, tau_in)
        tau_next = beta / n0_eff * float(np.mean(g_var))
        if onsager:
            r = inst.y - inst.h @ s_next + (tau_next / (1.0 + tau)) * r
        else:
            r = inst.y - inst.h @ s_next
        delta = float(np.mean(np.abs(s_next - s_hat) ** 2))
        s_hat = s_next
        tau = tau_next
        if delta < stop_tol:
            break

    s_final = c.slice(z)
    errors = int(np.count_nonzero(s_final != inst.s0))
    return DetectionResult(
        s_final=s_final,
        symbol_errors=errors,
        iterations_run=iterations,
        per_iter_mse=per_iter_mse,
        z_final=z,
    )


def trial_seed(seed: int, trial: int) -> list:
    """Counter-based per-trial seed: reproducible and order-independent."""
    return [int(seed), int(trial)]


def monte_carlo_ser(c: Constellation, mt: int, mr: int, n0: float,
                    trials: int, max_iter: int = DEFAULT_MAX_ITER,
                    seed: int = 0,
                    stop_tol: float = DEFAULT_STOP_TOL) -> SerEstimate:
    """Symbol error rate over independent seeded trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    errors = 0
    iters = 0
    for t in range(trials):
        inst = generate_instance(c, mt, mr, n0, trial_seed(seed, t))
        res = lama_detect(c, inst, max_iter=max_iter, stop_tol=stop_tol)
        errors += res.symbol_errors
        iters += res.iterations_run
    symbols = trials * mt
    return SerEstimate(
        ser=errors / symbols,
        trials=trials,
        errors=errors,
        symbols=symbols,
        mean_iterations=iters / trials,
    )


def verify_decoupling(c: Constellation, mt: int, mr: int, n0: float,
                      trials: int, iter_probe: int,
                      seed: int = 0) -> DecouplingReport:
    """Compare pooled z-residual statistics against the scalar recursion.

    Runs the detector for exactly ``iter_probe`` iterations per trial and
    pools ``z - s0`` across antennas and trials.  Reports the empirical
    variance, the predicted ``sigma_t^2``, and the kurtosis of the pooled
    real/imaginary parts (3 for a Gaussian).
    """
    if iter_probe < 1:
        raise ValueError("iter_probe must be >= 1")
    residuals = []
    for t in range(trials):
        inst = generate_instance(c, mt, mr, n0, trial_seed(seed, t))
        res = lama_detect(c, inst, max_iter=iter_probe, stop_tol=0.0)
        residuals.append(res.z_final - inst.s0)
    pooled = np.concatenate(residuals)
    parts = np.concatenate([pooled.real, pooled.imag])
    m2 = float(np.mean(parts**2))
    m4 = float(np.mean(parts**4))
    trace = run_se(c, mt / mr, n0, max_iter=iter_probe)
    se_var = trace.sigma_sq_seq[min(iter_probe, len(trace.sigma_sq_seq)) - 1]
    return DecouplingReport(
        empirical_var=float(np.mean(np.abs(pooled) ** 2)),
        se_var=se_var,
        normality_stat=m4 / m2**2,
        iter_probe=iter_probe,
        samples=len(pooled),
        residuals=pooled,
    )


def instance_spec_to_json(constellation_id: str, mt: int, mr: int,
                          n0: float, seed) -> str:
    """Serialize the recipe that regenerates an instance deterministically."""
    return json.dumps(
        {"constellation": constellation_id, "mt": mt, "mr": mr,
         "n0": n0, "seed": seed},
        sort_keys=True,
    )


def instance_spec_from_json(text: str) -> MimoInstance:
    rec = json.loads(text)
    c = resolve(rec["constellation"])
    return generate_instance(c, rec["mt"], rec["mr"], rec["n0"], rec["seed"])
