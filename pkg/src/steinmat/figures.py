"""Matplotlib rendering for the experiment reports.

Figures are written next to the delimited output; nothing here is needed by
the numerical core.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_COLORS = {
    "mksde_v": "tab:blue",
    "mksde_u": "tab:cyan",
    "mle_numeric": "tab:red",
    "mle_small_f": "tab:orange",
}


def plot_estimator_errors(rows, f0_label, path):
    """Median Frobenius error vs n, one line per estimator."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    rows = [r for r in rows if r["F0_label"] == f0_label]
    estimators = sorted({r["estimator"] for r in rows})
    for est in estimators:
        ns = sorted({r["n"] for r in rows if r["estimator"] == est})
        med = [
            np.median([r["frob_error"] for r in rows
                       if r["estimator"] == est and r["n"] == n])
            for n in ns
        ]
        ax.plot(ns, med, marker="o", label=est, color=_COLORS.get(est))
    ax.set_xlabel("n")
    ax.set_ylabel("median Frobenius error")
    ax.set_title(f"F0 = {f0_label}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_gof_pvalues(rows, path):
    """Median p-value vs n, one panel per statistic kind."""
    kinds = sorted({r["kind"] for r in rows})
    fig, axes = plt.subplots(1, len(kinds), figsize=(4.6 * len(kinds), 3.4),
                             squeeze=False)
    for ax, kind in zip(axes[0], kinds):
        sub = [r for r in rows if r["kind"] == kind]
        for label in sorted({r["F_label"] for r in sub}):
            ns = sorted({r["n"] for r in sub if r["F_label"] == label})
            med = [
                np.median([r["p_value"] for r in sub
                           if r["F_label"] == label and r["n"] == n])
                for n in ns
            ]
            ax.plot(ns, med, marker="o", label=f"F = {label}")
        ax.axhline(0.05, color="gray", lw=0.8, ls="--")
        ax.set_xlabel("n")
        ax.set_ylabel("median p-value")
        ax.set_title(f"{kind}-statistic")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_ksd_decay(rows, path):
    """V_n against n on log-log axes (one line per replicate median)."""
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ns = sorted({r["n"] for r in rows})
    med = [np.median([r["v_stat"] for r in rows if r["n"] == n]) for n in ns]
    ax.plot(ns, med, marker="o")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("median V_n")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
