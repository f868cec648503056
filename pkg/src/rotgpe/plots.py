"""Figure rendering for reports (file output only, Agg backend)."""

from __future__ import annotations

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def convergence_figure(report, path) -> None:
    """Log-log error vs epsilon with the fitted power law overlaid."""
    eps = np.asarray(report.epsilons)
    err = np.asarray(report.errors)
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    ax.loglog(eps, err, "o-", label="measured")
    fit = np.exp(report.intercept) * eps**report.fitted_order
    ax.loglog(eps, fit, "--",
              label=f"fit: slope {report.fitted_order:.3f}")
    ref_order = 2.0 if report.corrected_data else 1.0
    ref = err[0] * (eps / eps[0]) ** ref_order
    ax.loglog(eps, ref, ":", color="gray", label=f"slope {ref_order:g} reference")
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel(r"max filtered $L^2$ error")
    ax.set_title("corrected data" if report.corrected_data else "plain data")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def diagnostics_figure(records, path) -> None:
    """Time traces of mass, energy, z-energy pairing, and band masses."""
    t = [r.t for r in records]
    fig, axes = plt.subplots(2, 2, figsize=(8.5, 6.0))
    ax = axes[0, 0]
    m0 = records[0].mass
    ax.plot(t, [r.mass - m0 for r in records])
    ax.set_title("mass drift")
    ax = axes[0, 1]
    e = [r.energy for r in records]
    if np.all(np.isfinite(e)):
        ax.plot(t, [x - e[0] for x in e])
    ax.set_title("energy drift")
    ax = axes[1, 0]
    h = [r.hz_expectation for r in records]
    if np.all(np.isfinite(h)):
        ax.plot(t, [x - h[0] for x in h])
    ax.set_title("z-oscillator pairing drift")
    ax = axes[1, 1]
    pops = np.array([r.band_populations[:6] for r in records])
    for n in range(pops.shape[1]):
        ax.semilogy(t, np.maximum(pops[:, n], 1e-20), label=f"band {n}")
    ax.set_title("band masses")
    ax.legend(fontsize=7)
    for a in axes.flat:
        a.set_xlabel("t")
        a.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
