"""Figure rendering for the CLI report paths.

Every plot lands next to its CSV so a report directory is self-contained.
PNG metadata is stripped so reruns with identical inputs produce
identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = dict(dpi=120, metadata={"Software": None})


def save_train_curves(report, path):
    """Loss and holdout-gain trajectories of one training run."""
    epochs = np.arange(1, report.epochs_run + 1)
    fig, (ax_loss, ax_gain) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax_loss.semilogy(epochs, report.epoch_loss, color="tab:red")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("training loss")
    ax_loss.grid(True, alpha=0.3)
    ax_gain.plot(epochs, report.holdout_gain, color="tab:blue")
    ax_gain.set_xlabel("epoch")
    ax_gain.set_ylabel("holdout mean best gain")
    ax_gain.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_beam_pattern(angles, gains, path, title=None):
    """Angular gain of one beam, in dB relative to nothing (absolute)."""
    angles = np.asarray(angles)
    gains = np.asarray(gains)
    fig, ax = plt.subplots(figsize=(6.5, 3.6))
    floor = max(np.max(gains), 1e-12) * 1e-6
    ax.plot(np.rad2deg(angles), 10.0 * np.log10(np.maximum(gains, floor)),
            color="tab:blue", lw=1.2)
    ax.set_xlabel("angle (deg)")
    ax.set_ylabel("gain (dB)")
    ax.set_xlim(-90, 90)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_comparison(report, path):
    """Bound fraction and rates per codebook across the comparison rows."""
    labeled = [(f"{r.name}" + (f" N={r.num_beams}" if r.num_beams else "")
                + (f" b={r.bits}" if r.bits is not None else ""), r)
               for r in report.rows]
    names = [n for n, _ in labeled]
    x = np.arange(len(names))
    fig, (ax_frac, ax_rate) = plt.subplots(1, 2, figsize=(10, 3.8))
    ax_frac.bar(x, [100.0 * r.fraction_of_bound for _, r in labeled], color="tab:blue")
    ax_frac.set_xticks(x)
    ax_frac.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax_frac.set_ylabel("% of combining bound")
    ax_frac.axhline(100.0, color="k", lw=0.8, ls="--")
    ax_frac.grid(True, axis="y", alpha=0.3)
    for i, s in enumerate(report.snr_db):
        ax_rate.plot(x, [r.rates[i] for _, r in labeled], marker="o",
                     label=f"{s:g} dB")
    ax_rate.set_xticks(x)
    ax_rate.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax_rate.set_ylabel("rate (bits/s/Hz)")
    ax_rate.legend(title="SNR", fontsize=8)
    ax_rate.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
