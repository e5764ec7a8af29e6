"""Monte Carlo oracle for the MSE function; regenerates frozen test values.

Run manually (not collected by pytest):

    python tests/mc_oracle.py

Prints a table of ``(alphabet, sigma_sq) -> (estimate, stderr)`` computed
from 10^7 seeded samples of (S, Z) with an independently coded posterior
mean, for pasting into tests/_mc_reference.py.  The estimator shares no
integration code with the library (the library quadrature is the thing
under test).
"""

import numpy as np

SAMPLES = 10_000_000
CHUNK = 250_000
SEED = 20240817

ALPHABETS = ("bpsk", "qpsk", "16qam", "64qam", "8psk", "16psk")
SIGMA_SQS = (0.1, 1.0, 10.0)


def posterior_mean(z, pts, sigma_sq):
    # independent implementation: plain softmax over -|z-a|^2/sigma^2
    e = -(np.abs(z[:, None] - pts[None, :]) ** 2) / sigma_sq
    e -= e.max(axis=1, keepdims=True)
    w = np.exp(e)
    return (w @ pts) / w.sum(axis=1)


def mc_psi(pts, priors, sigma_sq, rng):
    total = 0.0
    total_sq = 0.0
    n = 0
    while n < SAMPLES:
        m = min(CHUNK, SAMPLES - n)
        s = pts[rng.choice(len(pts), size=m, p=priors)]
        zn = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2)
        z = s + np.sqrt(sigma_sq) * zn
        err = np.abs(posterior_mean(z, pts, sigma_sq) - s) ** 2
        total += err.sum()
        total_sq += (err**2).sum()
        n += m
    mean = total / n
    var = total_sq / n - mean**2
    return mean, np.sqrt(var / n)


def main():
    import iolama

    print("# generated by tests/mc_oracle.py --")
    print(f"# samples={SAMPLES} seed={SEED}")
    print("MC_PSI = {")
    for ci, name in enumerate(ALPHABETS):
        c = iolama.make_builtin(name)
        pts = c.points_array
        priors = c.priors_array
        for s2 in SIGMA_SQS:
            rng = np.random.default_rng([SEED, ci, int(s2 * 10)])
            est, se = mc_psi(pts, priors, s2, rng)
            print(f'    ("{name}", {s2}): ({est!r}, {se!r}),')
    print("}")


if __name__ == "__main__":
    main()
