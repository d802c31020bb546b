"""Matplotlib figure rendering for the CLI report paths.

Every figure is written to a file next to the CSV/JSON it illustrates; there
is no interactive display. The analysis routines themselves stay plot-free.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def training_curves(records, path, title="training"):
    """Best / mean (+/- std) population fitness per generation."""
    gens = [r.generation for r in records]
    best = np.array([r.best for r in records])
    mean = np.array([r.mean for r in records])
    std = np.array([r.std for r in records])
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(gens, best, label="best", color="tab:blue")
    ax.plot(gens, mean, label="mean", color="tab:orange")
    ax.fill_between(gens, mean - std, mean + std, color="tab:orange", alpha=0.2)
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def pca_trajectory(scores, path, title="weight-space trajectory"):
    """PC1-PC2 path with start ('x') and end ('*') markers; PC3 panel if present."""
    q = scores.shape[1]
    ncols = 2 if q >= 3 else 1
    fig, axes = plt.subplots(1, ncols, figsize=(6 * ncols, 5))
    axes = np.atleast_1d(axes)
    ax = axes[0]
    ax.plot(scores[:, 0], scores[:, 1], lw=0.8, color="tab:blue")
    ax.plot(scores[0, 0], scores[0, 1], "x", color="black", ms=10, label="start")
    ax.plot(scores[-1, 0], scores[-1, 1], "*", color="tab:red", ms=12, label="end")
    ax.set_xlabel("PC1")
    ax.set_ylabel("PC2")
    ax.set_title(title)
    ax.legend()
    if q >= 3:
        ax2 = axes[1]
        ax2.plot(scores[:, 2], lw=0.8, color="tab:green")
        ax2.set_xlabel("step")
        ax2.set_ylabel("PC3")
        ax2.set_title("PC3 over time")
    _save(fig, path)


def variance_ratio_bar(ratios, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    idx = np.arange(1, len(ratios) + 1)
    ax.bar(idx, ratios, color="tab:purple")
    ax.set_xlabel("component")
    ax.set_ylabel("explained variance ratio")
    ax.set_xticks(idx)
    _save(fig, path)


def spread_comparison(spreads, path, title="per-condition PC spread"):
    """Bar chart of {label: spread} pairs."""
    labels = list(spreads)
    values = [spreads[k] for k in labels]
    fig, ax = plt.subplots(figsize=(1.2 * len(labels) + 2, 3.5))
    ax.bar(labels, values, color="tab:cyan")
    ax.set_ylabel("score std")
    ax.set_title(title)
    _save(fig, path)


def compare_matrix(rows, path):
    """Grouped bars of mean fitness per policy x condition.

    rows: iterables of (policy, condition, seed, fitness); non-finite
    fitnesses are ignored for the means.
    """
    policies = sorted({r[0] for r in rows})
    conditions = sorted({r[1] for r in rows})
    means = np.full((len(policies), len(conditions)), np.nan)
    for i, pol in enumerate(policies):
        for j, cond in enumerate(conditions):
            vals = [r[3] for r in rows if r[0] == pol and r[1] == cond and np.isfinite(r[3])]
            if vals:
                means[i, j] = float(np.mean(vals))
    width = 0.8 / max(len(policies), 1)
    fig, ax = plt.subplots(figsize=(1.6 * len(conditions) + 2, 4))
    x = np.arange(len(conditions))
    for i, pol in enumerate(policies):
        ax.bar(x + i * width, means[i], width, label=pol)
    ax.set_xticks(x + width * (len(policies) - 1) / 2)
    ax.set_xticklabels(conditions, rotation=30, ha="right")
    ax.set_ylabel("mean fitness")
    ax.legend()
    _save(fig, path)
