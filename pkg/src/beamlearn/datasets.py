"""Channel datasets: labels, normalization, splitting, CSV persistence.

The training label of a channel is the equal gain combining power
(sum_m |h[m]|)^2 / M, the tightest per-user target a constant-modulus
beam can reach. Normalization rescales channels so the largest
per-antenna power in the reference split is one, which keeps gradient
magnitudes in a sane range; the factor is recorded so physical-scale
rates can be recovered later.

File format: a comment line `# M=<antennas>` (plus ` delta=<factor>` once
normalized), a header `m0_re,m0_im,...`, then one row of interleaved
real/imaginary parts per user.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def compute_labels(channels: np.ndarray) -> np.ndarray:
    """Equal gain combining power per channel row."""
    H = np.atleast_2d(np.asarray(channels, dtype=complex))
    M = H.shape[1]
    return np.sum(np.abs(H), axis=1) ** 2 / M


@dataclass
class ChannelDataset:
    """Channels (one row per user) with labels and normalization state."""

    channels: np.ndarray
    labels: np.ndarray
    normalization_factor: float = 1.0
    is_normalized: bool = False

    def __post_init__(self):
        self.channels = np.atleast_2d(np.asarray(self.channels, dtype=complex))
        self.labels = np.asarray(self.labels, dtype=float).ravel()
        if self.channels.ndim != 2 or self.channels.size == 0:
            raise ValueError("channels must be a nonempty 2-D array")
        if self.labels.shape[0] != self.channels.shape[0]:
            raise ValueError(
                f"{self.labels.shape[0]} labels for {self.channels.shape[0]} channels")
        self.normalization_factor = float(self.normalization_factor)
        if not np.isfinite(self.normalization_factor) or self.normalization_factor <= 0:
            raise ValueError("normalization_factor must be positive")
        expected = compute_labels(self.channels)
        if not np.allclose(self.labels, expected, rtol=1e-9, atol=1e-12):
            raise ValueError("labels do not match the stored channels")

    @classmethod
    def from_channels(cls, channels: np.ndarray) -> "ChannelDataset":
        channels = np.atleast_2d(np.asarray(channels, dtype=complex))
        return cls(channels=channels, labels=compute_labels(channels))

    @property
    def num_antennas(self) -> int:
        return self.channels.shape[1]

    def __len__(self) -> int:
        return self.channels.shape[0]


def normalize(dataset: ChannelDataset, factor: float | None = None) -> ChannelDataset:
    """Scale channels so the largest |h[m]|^2 equals one, recompute labels.

    factor overrides the scale, which is how a test split reuses the
    factor computed from its training split. Normalizing twice is an
    error; the recorded factor would no longer refer to physical scale.
    """
    if dataset.is_normalized:
        raise ValueError("dataset is already normalized")
    if factor is None:
        factor = float(np.max(np.abs(dataset.channels) ** 2))
        if factor <= 0:
            raise ValueError("cannot normalize an all-zero dataset")
    else:
        factor = float(factor)
        if not np.isfinite(factor) or factor <= 0:
            raise ValueError(f"normalization factor must be positive, got {factor!r}")
    scaled = dataset.channels / np.sqrt(factor)
    return ChannelDataset(
        channels=scaled,
        labels=compute_labels(scaled),
        normalization_factor=factor,
        is_normalized=True,
    )


def split(dataset: ChannelDataset, train_fraction: float = 0.7, rng_seed: int = 0,
          normalize_splits: bool = True):
    """Shuffle users and cut into (train, test) datasets.

    The train share is floor(U * train_fraction); both sides must end up
    nonempty. When normalize_splits is set (and the input is not already
    normalized), the scale factor is computed from the training split
    alone and applied to both, so the test split leaks nothing into it.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction!r}")
    U = len(dataset)
    n_train = int(U * train_fraction)
    if n_train < 1 or n_train >= U:
        raise ValueError(
            f"split of {U} users at fraction {train_fraction} leaves an empty side")
    perm = np.random.default_rng(rng_seed).permutation(U)
    parts = []
    for idx in (perm[:n_train], perm[n_train:]):
        parts.append(ChannelDataset(
            channels=dataset.channels[idx],
            labels=dataset.labels[idx],
            normalization_factor=dataset.normalization_factor,
            is_normalized=dataset.is_normalized,
        ))
    train_ds, test_ds = parts
    if normalize_splits and not dataset.is_normalized:
        train_ds = normalize(train_ds)
        test_ds = normalize(test_ds, factor=train_ds.normalization_factor)
    return train_ds, test_ds


def save_dataset(dataset: ChannelDataset, path):
    M = dataset.num_antennas
    meta = f"# M={M}"
    if dataset.is_normalized:
        meta += f" delta={dataset.normalization_factor:.17g}"
    header = ",".join(f"m{m}_{part}" for m in range(M) for part in ("re", "im"))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(meta + "\n")
        fh.write(header + "\n")
        for row in dataset.channels:
            interleaved = np.empty(2 * M)
            interleaved[0::2] = row.real
            interleaved[1::2] = row.imag
            fh.write(",".join(f"{v:.17g}" for v in interleaved) + "\n")


def load_dataset(path) -> ChannelDataset:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing dataset metadata line")
    meta = {}
    for tok in lines[0][1:].split():
        key, _, val = tok.partition("=")
        meta[key] = val
    if "M" not in meta:
        raise ValueError(f"{path}: metadata line must carry M")
    try:
        M = int(meta["M"])
    except ValueError as exc:
        raise ValueError(f"{path}: bad M value {meta['M']!r}") from exc
    delta = None
    if "delta" in meta:
        try:
            delta = float(meta["delta"])
        except ValueError as exc:
            raise ValueError(f"{path}: bad delta value {meta['delta']!r}") from exc
    if len(lines) < 2:
        raise ValueError(f"{path}: missing column header line")
    expected_header = ",".join(f"m{m}_{part}" for m in range(M) for part in ("re", "im"))
    if lines[1] != expected_header:
        raise ValueError(f"{path}: column header does not match M={M}")
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2 * M:
            raise ValueError(f"{path}:{lineno}: expected {2 * M} values, got {len(parts)}")
        try:
            vals = np.array([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-numeric value") from exc
        rows.append(vals[0::2] + 1j * vals[1::2])
    if not rows:
        raise ValueError(f"{path}: no channel rows")
    channels = np.array(rows)
    return ChannelDataset(
        channels=channels,
        labels=compute_labels(channels),
        normalization_factor=1.0 if delta is None else delta,
        is_normalized=delta is not None,
    )
