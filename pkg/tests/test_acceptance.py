"""Acceptance gate: one test per criterion, one printed pass/fail line each.

Criteria run at their stated tolerances; nothing is loosened here.  Two
known finite-size effects are documented in the detector's behavior (see
the noiseless-recovery and oracle tests below): near-threshold runs
diverge on a size-dependent fraction of channel realizations, so the
corresponding sub-checks fail honestly rather than being weakened.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from iolama import make_builtin, make_custom, scale
from iolama.denoiser import mse_batch
from iolama.mimo_sim import generate_instance, lama_detect, monte_carlo_ser, \
    trial_seed
from iolama.state_evolution import find_fixed_points, run_se
from iolama.thresholds import (
    ALWAYS_OPTIMAL,
    OPTIMAL_HIGH_NOISE,
    OPTIMAL_LOW_NOISE,
    POSSIBLY_SUBOPTIMAL,
    SUBOPTIMAL,
    classify_regime,
    compute_ert,
    compute_mrt,
    critical_noise,
)

SEED = 20240817

# beta_min, n0_min(beta_min), beta_max, n0_max(beta_max)
PUBLISHED_TABLE = {
    "bpsk": (2.9505, 2.999e-1, 4.1709, 2.432e-1),
    "qpsk": (1.4752, 1.499e-1, 2.0855, 1.216e-1),
    "16qam": (0.9830, 3.000e-2, 1.3629, 2.454e-2),
    "64qam": (0.8424, 7.144e-3, 1.1573, 5.868e-3),
    "8psk": (1.4576, 4.440e-2, 1.8038, 3.826e-2),
    "16psk": (1.4728, 1.143e-2, 1.8005, 9.953e-3),
}


def report(num, ok, detail):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_c1_threshold_table():
    t0 = time.time()
    failures = []
    for name, (bmin_ref, n0min_ref, bmax_ref, n0max_ref) in PUBLISHED_TABLE.items():
        c = make_builtin(name)
        bmax = compute_ert(c).beta_max
        bmin = compute_mrt(c).beta_min
        n0min = critical_noise(c, bmin).n0_min
        n0max = critical_noise(c, bmax).n0_max
        checks = [
            ("beta_min", bmin, bmin_ref, 5e-3),
            ("beta_max", bmax, bmax_ref, 5e-3),
            ("n0_min(beta_min)", n0min, n0min_ref, 1e-2),
            ("n0_max(beta_max)", n0max, n0max_ref, 1e-2),
        ]
        for label, got, ref, tol in checks:
            if abs(got - ref) / ref > tol:
                failures.append(f"{name} {label}={got:.5g} ref={ref:.5g}")
    elapsed = time.time() - t0
    ok = not failures and elapsed < 300
    report(1, ok, f"published threshold table, 6 alphabets, beta 0.5% / "
                  f"N0 1% ({elapsed:.0f}s)" + (f"; {failures}" if failures else ""))
    assert ok


def test_c2_mse_gap_and_bound():
    failures = []
    grid = np.logspace(-6, 6, 200)
    for name in PUBLISHED_TABLE:
        c = make_builtin(name)
        psi = mse_batch(c, grid)
        var = c.variance
        if not np.all(psi >= 0) or not np.all(psi < grid):
            failures.append(f"{name}: gap violated")
        if not np.all(psi <= var * grid / (var + grid) + 1e-9):
            failures.append(f"{name}: upper bound violated")
        tail = float(mse_batch(c, np.array([1e6]))[0])
        if abs(tail - var) / var > 0.01:
            failures.append(f"{name}: psi(1e6)={tail}")
    report(2, not failures, "MSE gap/bound/limit on 200-pt grid, 6 alphabets"
           + (f"; {failures}" if failures else ""))
    assert not failures


def random_alphabets(count, rng):
    out = []
    while len(out) < count:
        k = int(rng.integers(2, 7))
        pts = rng.normal(size=k) + 1j * rng.normal(size=k)
        if min(
            (abs(pts[i] - pts[j]) for i in range(k) for j in range(i + 1, k)),
            default=1.0,
        ) < 0.3:
            continue
        priors = rng.dirichlet(np.ones(k))
        c = make_custom(pts.tolist(), (priors / priors.sum()).tolist())
        if c.variance <= 0.05:
            continue
        out.append(c)
    return out


def test_c3_mrt_never_exceeds_ert():
    failures = []
    for name in PUBLISHED_TABLE:
        c = make_builtin(name)
        if compute_mrt(c).beta_min > compute_ert(c).beta_max * (1 + 1e-9):
            failures.append(name)
    rng = np.random.default_rng(SEED)
    for i, c in enumerate(random_alphabets(20, rng)):
        bmin = compute_mrt(c, order=24, grid_points=600).beta_min
        bmax = compute_ert(c, order=24, grid_points=600).beta_max
        if bmin > bmax * (1 + 1e-9):
            failures.append(f"random[{i}] bmin={bmin} bmax={bmax}")
    report(3, not failures, "MRT <= ERT for 6 builtins + 20 random alphabets"
           + (f"; {failures}" if failures else ""))
    assert not failures


def test_c4_noiseless_recovery_proxy():
    # Large-system-limit statement checked at finite size: failures at
    # beta=1.9 trigger the documented retry at MT=512 instead of an
    # immediate verdict.  Near-threshold divergence of the undamped
    # iteration affects a size-dependent fraction of realizations, so the
    # retry can still fail; that outcome is reported, not masked.
    qpsk = make_builtin("qpsk")
    legs = []
    for beta in (1.0, 1.5, 1.9):
        mt = 128
        est = monte_carlo_ser(qpsk, mt, round(mt / beta), 1e-6,
                              trials=100, seed=SEED)
        note = f"beta={beta}: {est.errors} errors @MT=128"
        if est.errors > 0:
            mt = 512
            est = monte_carlo_ser(qpsk, mt, round(mt / beta), 1e-6,
                                  trials=100, seed=SEED)
            note += f", retry {est.errors} errors @MT=512"
        legs.append((beta, est.errors, note))
    ok = all(err == 0 for _, err, _ in legs)
    report(4, ok, "noiseless exact recovery below the ERT; "
           + "; ".join(note for _, _, note in legs))
    assert ok


def test_c5_decoupling():
    qpsk = make_builtin("qpsk")
    mt, mr, n0, trials = 256, 512, 0.05, 100
    acc = None
    residuals = []
    for t in range(trials):
        inst = generate_instance(qpsk, mt, mr, n0, seed=trial_seed(SEED, t))
        res = lama_detect(qpsk, inst, max_iter=10, stop_tol=0.0)
        v = np.asarray(res.per_iter_mse)
        acc = v if acc is None else acc + v
        residuals.append(res.z_final - inst.s0)
    emp = acc / trials
    trace = run_se(qpsk, mt / mr, n0, max_iter=10, rel_tol=0.0)
    se = np.asarray(trace.sigma_sq_seq[:10])
    rel = np.abs(emp - se) / se
    pooled = np.concatenate(residuals)
    parts = np.concatenate([pooled.real, pooled.imag])
    kurt = float(np.mean(parts**4) / np.mean(parts**2) ** 2)
    ok = bool(np.all(rel < 0.10) and 2.7 < kurt < 3.3)
    report(5, ok, f"decoupling: max per-iteration deviation "
                  f"{float(rel.max()):.3f} (<0.10), kurtosis {kurt:.3f}")
    assert ok


def test_c6_ser_against_awgn_oracle():
    # Error bars are per-trial (cluster) standard errors: symbols within a
    # trial share one channel draw, so the binomial formula understates
    # the Monte Carlo error.
    qpsk = make_builtin("qpsk")
    mt = mr = 256
    trials = 391  # 391 * 256 = 100096 symbols per point
    lines = []
    ok = True
    for n0 in (0.05, 0.1, 0.2):
        per_trial = []
        for t in range(trials):
            inst = generate_instance(qpsk, mt, mr, n0, seed=trial_seed(SEED, t))
            res = lama_detect(qpsk, inst)
            per_trial.append(res.symbol_errors / mt)
        per_trial = np.asarray(per_trial)
        ser = float(per_trial.mean())
        stderr = float(per_trial.std(ddof=1)) / math.sqrt(trials)
        s_inf = run_se(qpsk, 1.0, n0, rel_tol=1e-12).final_sigma_sq
        q = 0.5 * math.erfc((1.0 / math.sqrt(s_inf)) / math.sqrt(2.0))
        oracle = 2 * q - q * q
        dev = abs(ser - oracle) / max(stderr, 1e-12)
        lines.append(f"N0={n0}: ser={ser:.5f} oracle={oracle:.5f} "
                     f"dev={dev:.2f}SE")
        ok = ok and dev <= 3.0
    report(6, ok, "SER vs decoupled-AWGN oracle; " + "; ".join(lines))
    assert ok


def test_c7_regime_and_fixed_point_consistency():
    qpsk = make_builtin("qpsk")
    bmin = compute_mrt(qpsk).beta_min
    bmax = compute_ert(qpsk).beta_max
    beta_mid = 0.5 * (bmin + bmax)
    crit = critical_noise(qpsk, beta_mid)
    failures = []

    counts = {
        0.5 * (crit.n0_min + crit.n0_max): (2, "ge"),
        0.5 * crit.n0_min: (1, "eq"),
        2.0 * crit.n0_max: (1, "eq"),
    }
    for n0, (want, mode) in counts.items():
        got = len(find_fixed_points(qpsk, beta_mid, n0).roots)
        if (mode == "ge" and got < want) or (mode == "eq" and got != want):
            failures.append(f"count@N0={n0:.4g}: {got}")

    beta_lo = 0.8 * bmin
    beta_hi = 1.2 * bmax
    crit_hi = critical_noise(qpsk, beta_hi)
    grid = [
        (beta_lo, 0.01, ALWAYS_OPTIMAL),
        (beta_lo, 0.15, ALWAYS_OPTIMAL),
        (beta_lo, 1.0, ALWAYS_OPTIMAL),
        (beta_mid, 0.5 * crit.n0_min, OPTIMAL_LOW_NOISE),
        (beta_mid, 0.5 * (crit.n0_min + crit.n0_max), POSSIBLY_SUBOPTIMAL),
        (beta_mid, 2.0 * crit.n0_max, OPTIMAL_HIGH_NOISE),
        (beta_hi, 0.25 * crit_hi.n0_max, SUBOPTIMAL),
        (beta_hi, 0.75 * crit_hi.n0_max, SUBOPTIMAL),
        (beta_hi, 2.0 * crit_hi.n0_max, OPTIMAL_HIGH_NOISE),
    ]
    for beta, n0, want in grid:
        got = classify_regime(qpsk, beta, n0)
        if got != want:
            failures.append(f"regime({beta:.3f},{n0:.4g})={got}!={want}")

    report(7, not failures, "fixed-point counts + 3x3 regime grid"
           + (f"; {failures}" if failures else ""))
    assert not failures


def test_c8_scaling_invariance():
    qpsk = make_builtin("qpsk")
    doubled = scale(qpsk, 2.0)
    failures = []
    bmax_1 = compute_ert(qpsk).beta_max
    bmax_2 = compute_ert(doubled).beta_max
    if abs(bmax_2 - bmax_1) / bmax_1 > 1e-6:
        failures.append(f"beta_max {bmax_1} vs {bmax_2}")
    bmin_1 = compute_mrt(qpsk).beta_min
    bmin_2 = compute_mrt(doubled).beta_min
    if abs(bmin_2 - bmin_1) / bmin_1 > 1e-6:
        failures.append(f"beta_min {bmin_1} vs {bmin_2}")
    beta = 1.78
    base = critical_noise(qpsk, beta)
    quad = critical_noise(doubled, beta)
    for label, a, b in (("n0_min", base.n0_min, quad.n0_min),
                        ("n0_max", base.n0_max, quad.n0_max)):
        if abs(b - 4.0 * a) / (4.0 * a) > 1e-4:
            failures.append(f"{label} {a} -> {b}")
    report(8, not failures, "thresholds scale-invariant, critical noise x4"
           + (f"; {failures}" if failures else ""))
    assert not failures


CLI_COMMANDS = [
    ("thresholds", ["thresholds", "qpsk"]),
    ("gcurve", ["gcurve", "--constellation", "qpsk", "--beta", "1.78",
                "--n0", "0.11", "--points", "60"]),
    ("se-trace", ["se-trace", "--constellation", "qpsk", "--beta", "0.8",
                  "--n0", "0.1"]),
    ("fixed-points", ["fixed-points", "--constellation", "qpsk",
                      "--beta", "1.78", "--n0", "0.11", "--format", "json"]),
    ("simulate", ["simulate", "--constellation", "qpsk", "--mt", "32",
                  "--mr", "32", "--n0", "0.1", "--trials", "10",
                  "--seed", "3"]),
    ("regime", ["regime", "--constellation", "qpsk", "--beta", "1.0",
                "--n0", "0.2"]),
    ("decouple", ["decouple", "--constellation", "qpsk", "--mt", "32",
                  "--mr", "64", "--n0", "0.05", "--trials", "10",
                  "--iter-probe", "2", "--seed", "1", "--format", "json"]),
]


def run_command(args, outdir):
    out = outdir / "out.dat"
    proc = subprocess.run(
        [sys.executable, "-m", "iolama.cli", *args, "--out", str(out)],
        capture_output=True, cwd=outdir,
    )
    assert proc.returncode == 0, proc.stderr.decode()
    blobs = [out.read_bytes()]
    roots = outdir / "out.dat.roots.csv"
    if roots.exists():
        blobs.append(roots.read_bytes())
    return blobs


def test_c9_cli_determinism(tmp_path):
    failures = []
    for name, args in CLI_COMMANDS:
        d1 = tmp_path / f"{name}-1"
        d2 = tmp_path / f"{name}-2"
        d1.mkdir()
        d2.mkdir()
        if run_command(args, d1) != run_command(args, d2):
            failures.append(name)
    report(9, not failures, "7 CLI commands byte-identical across reruns"
           + (f"; {failures}" if failures else ""))
    assert not failures
