"""Figure rendering for the CLI report paths.

Each function writes one matplotlib figure to a file next to the delimited
output.  Styling is kept deterministic (fixed size, dpi, no timestamps).
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_FIGSIZE = (6.4, 4.2)
_DPI = 150


def _new_axes(xlabel, ylabel, title):
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_g_curves(path, curves, roots_by_n0, name, beta):
    """g(sigma^2) curves per noise level with fixed points marked.

    Stable fixed points are drawn as open circles, unstable ones as
    crossed circles.
    """
    fig, ax = _new_axes(r"$\sigma^2$", r"$g(\sigma^2)$",
                        f"{name}, beta={beta:g}")
    for (n0, xs, gs) in curves:
        ax.semilogx(xs, gs, label=f"N0={n0:g}")
    ax.axhline(0.0, color="k", lw=0.8)
    for n0, roots in roots_by_n0.items():
        for r in roots:
            if r.sigma_sq <= 0:
                continue
            marker = "o" if r.stable else "X"
            face = "none" if r.stable else None
            ax.plot([r.sigma_sq], [0.0], marker=marker, ms=9,
                    mfc=face, mec="k", color="k", ls="none")
    ax.legend()
    _save(fig, path)


def save_se_trace(path, trace, name):
    fig, ax = _new_axes("iteration t", r"$\sigma_t^2$",
                        f"{name}, beta={trace.beta:g}, N0={trace.n0:g}")
    ts = range(1, len(trace.sigma_sq_seq) + 1)
    positive = [max(s, 1e-300) for s in trace.sigma_sq_seq]
    ax.semilogy(list(ts), positive, marker="o", ms=4)
    _save(fig, path)


def save_ser_sweep(path, rows, name, beta):
    """rows: list of dicts with n0 and ser."""
    fig, ax = _new_axes(r"$N_0$", "symbol error rate", f"{name}, beta={beta:g}")
    n0s = [r["n0"] for r in rows]
    sers = [max(r["ser"], 0.5 / max(r["symbols"], 1)) for r in rows]
    ax.loglog(n0s, sers, marker="o")
    _save(fig, path)


def save_decoupling(path, report, residuals, name):
    """Histogram of pooled residual parts with the predicted Gaussian."""
    import numpy as np

    fig, ax = _new_axes("residual (real/imag parts)", "density",
                        f"{name}: iteration {report.iter_probe}")
    parts = np.concatenate([residuals.real, residuals.imag])
    ax.hist(parts, bins=80, density=True, alpha=0.6, label="pooled residuals")
    sd = math.sqrt(report.se_var / 2.0)
    xs = np.linspace(parts.min(), parts.max(), 400)
    pdf = np.exp(-(xs**2) / (2 * sd * sd)) / (sd * math.sqrt(2 * math.pi))
    ax.plot(xs, pdf, "k-", lw=1.5,
            label=f"N(0, {report.se_var:.3g}/2) prediction")
    ax.legend()
    _save(fig, path)
