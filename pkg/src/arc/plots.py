"""Figure rendering for the CLI report paths.

Every CLI command that writes a delimited result also renders a small
matplotlib figure next to it (same basename, .png). Only file output is
supported; no interactive backends.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .games import all_profile_coords

_LABEL_LIMIT = 36


def _profile_labels(counts):
    coords = all_profile_coords(counts)
    return [",".join(str(c) for c in row) for row in coords]


def plot_distribution(probabilities, strategy_counts, path, title=None,
                      stderr=None):
    """Mass per joint profile; coordinate tick labels for small games."""
    probs = np.asarray(probabilities, dtype=float)
    n = len(probs)
    fig, ax = plt.subplots(figsize=(8, 4))
    if n <= _LABEL_LIMIT:
        ax.bar(np.arange(n), probs,
               yerr=stderr if stderr is not None else None,
               capsize=3, color="tab:blue")
        ax.set_xticks(np.arange(n))
        ax.set_xticklabels(_profile_labels(strategy_counts), rotation=45,
                           ha="right", fontsize=8)
    else:
        ax.plot(np.arange(n), probs, lw=0.8, color="tab:blue")
        if stderr is not None:
            ax.fill_between(np.arange(n), probs - stderr, probs + stderr,
                            alpha=0.3, color="tab:blue")
        ax.set_xlabel("profile index")
    ax.set_ylabel("mass")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(params, series, path, xlabel="parameter", title=None):
    """Mass-on-profile-set curves over a parameter grid (one line per set)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, values in series.items():
        ax.plot(params, values, marker="o", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("mass on profile set")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_bench(sizes, seconds, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(sizes, seconds, marker="o")
    ax.set_xlabel("joint profiles")
    ax.set_ylabel("seconds per build + solve")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
