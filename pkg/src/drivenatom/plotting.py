"""Quick-look figures rendered next to the CSV outputs.

These are working plots for eyeballing a run, not publication figures; the
CSV files remain the canonical output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_DPI = 150


def plot_rate_trace(trace, path) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    ax1.plot(trace.times, trace.gamma, label=r"$\gamma(t)$")
    ax1.axhline(trace.gamma_markov, ls="--", lw=0.8, color="gray",
                label=r"$\gamma_\mathrm{markov}$")
    ax1.axhline(0.0, lw=0.5, color="black")
    ax1.set_ylabel("decay rate")
    ax1.legend(loc="best", fontsize=8)
    ax2.plot(trace.times, trace.lamb, label=r"$\lambda(t)$", color="C1")
    ax2.plot(trace.times, trace.xi_spread, label="sideband spread", color="C2", lw=0.8)
    ax2.axhline(trace.lamb_markov, ls="--", lw=0.8, color="gray")
    ax2.set_xlabel("t")
    ax2.set_ylabel("shift / spread")
    ax2.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_trajectory(record, path) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5),
                                   height_ratios=[2, 1])
    for i, label in enumerate(("x", "y", "z")):
        ax1.plot(record.times, record.bloch[:, i], label=f"$r_{label}$")
    ax1.plot(record.times, (record.bloch**2).sum(axis=1)**0.5,
             color="black", lw=0.8, ls=":", label="$|r|$")
    ax1.set_ylabel("Bloch components (atomic basis)")
    ax1.legend(loc="best", fontsize=8, ncol=4)
    ax2.plot(record.times, record.gamma, label=r"$\gamma(t)$")
    ax2.plot(record.times, record.lamb, label=r"$\lambda(t)$")
    ax2.axhline(0.0, lw=0.5, color="black")
    ax2.set_xlabel("t")
    ax2.set_ylabel("rates")
    ax2.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_ensemble(record, path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, label in enumerate(("x", "y", "z")):
        mean = record.mean_bloch[:, i]
        se = record.se_bloch[:, i]
        line, = ax.plot(record.times, mean, label=f"$\\langle r_{label}\\rangle$")
        ax.fill_between(record.times, mean - 3 * se, mean + 3 * se,
                        alpha=0.25, color=line.get_color(), lw=0)
    ax.set_xlabel("t")
    ax.set_ylabel("ensemble mean (3 s.e. bands)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
