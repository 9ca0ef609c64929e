"""Receive combining: apply beamforming weights to channels, keep the best beam.

For a channel h and weight matrix W (one beam per column), the combiner
output is z = W^H h, the per-beam power is q_n = |z_n|^2, and the
selected gain is the max over beams. Ties go to the lowest beam index,
which is what argmax does; deterministic tie-breaking keeps training
reproducible.

Every function here accepts either a complex weight matrix or a
PhaseCodebook (converted via to_complex). Means use np.mean, whose
pairwise summation is deterministic for a fixed input order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ArrayConfig, array_response
from .codebooks import PhaseCodebook, to_complex


def as_weights(codebook_or_weights) -> np.ndarray:
    """Complex weight matrix of shape (M, N) from either representation."""
    if isinstance(codebook_or_weights, PhaseCodebook):
        return to_complex(codebook_or_weights)
    W = np.asarray(codebook_or_weights, dtype=complex)
    if W.ndim == 1:
        W = W[:, None]
    if W.ndim != 2 or W.size == 0:
        raise ValueError(f"weights must be a nonempty M x N matrix, got shape {W.shape}")
    return W


@dataclass
class BeamResponse:
    """Result of pointing a codebook at one channel.

    z is the combined signal per beam, q its element-wise squared
    magnitude, best_index the winning beam (lowest index on ties).
    """

    z: np.ndarray
    q: np.ndarray
    best_index: int
    best_gain: float


def forward(weights, channel: np.ndarray) -> BeamResponse:
    """Evaluate every beam against one channel and select the strongest."""
    W = as_weights(weights)
    h = np.asarray(channel, dtype=complex).ravel()
    if h.size != W.shape[0]:
        raise ValueError(f"channel has {h.size} entries, weights expect {W.shape[0]}")
    z = W.conj().T @ h
    q = np.abs(z) ** 2
    best = int(np.argmax(q))
    return BeamResponse(z=z, q=q, best_index=best, best_gain=float(q[best]))


def beam_gains(weights, channels: np.ndarray) -> np.ndarray:
    """Per-beam gains |W^H h|^2 for a batch of channels, shape (U, N)."""
    W = as_weights(weights)
    H = np.atleast_2d(np.asarray(channels, dtype=complex))
    if H.size == 0:
        raise ValueError("no channels given")
    if H.shape[1] != W.shape[0]:
        raise ValueError(f"channels have {H.shape[1]} entries, weights expect {W.shape[0]}")
    return np.abs(H @ W.conj()) ** 2


def population_gain(weights, channels: np.ndarray) -> float:
    """Mean over users of the best-beam gain."""
    q = beam_gains(weights, channels)
    return float(np.mean(np.max(q, axis=1)))


def best_beam_stats(weights, channels: np.ndarray):
    """Best gain and winning beam index per user. Returns (gains, indices)."""
    q = beam_gains(weights, channels)
    idx = np.argmax(q, axis=1)
    return q[np.arange(q.shape[0]), idx], idx


def beam_pattern(beam, array: ArrayConfig, angles=None, resolution_deg: float = 1.0):
    """Angular response |w^H a(angle)|^2 of one beam over the visible region.

    Parameters
    ----------
    beam : ndarray or PhaseCodebook
        A single beam: length-M complex vector (or a one-column codebook).
    array : ArrayConfig
        Geometry used to build the probe steering vectors; must match the
        array the beam was designed for.
    angles : ndarray, optional
        Probe angles in radians within [-pi/2, pi/2]. Defaults to a grid
        from -90 to +90 degrees inclusive with resolution_deg spacing.
    resolution_deg : float
        Grid step used when angles is None.

    Returns
    -------
    (angles, gains) : pair of ndarrays, angles in radians.
    """
    w = as_weights(beam)
    if w.shape[1] != 1:
        raise ValueError(f"beam_pattern takes a single beam, got {w.shape[1]} columns")
    w = w[:, 0]
    if w.size != array.num_antennas:
        raise ValueError(f"beam has {w.size} entries, array has {array.num_antennas}")
    if angles is None:
        if resolution_deg <= 0:
            raise ValueError("resolution_deg must be positive")
        n_steps = int(round(180.0 / resolution_deg))
        angles = np.deg2rad(np.linspace(-90.0, 90.0, n_steps + 1))
    else:
        angles = np.asarray(angles, dtype=float).ravel()
    A = array_response(array, angles)  # (G, M), validates the angle range
    gains = np.abs(A @ w.conj()) ** 2
    return angles, gains


def write_pattern_csv(path, angles: np.ndarray, gains: np.ndarray):
    """Two-column CSV: angle_rad,gain."""
    angles = np.asarray(angles, dtype=float).ravel()
    gains = np.asarray(gains, dtype=float).ravel()
    if angles.shape != gains.shape:
        raise ValueError("angles and gains must have the same length")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("angle_rad,gain\n")
        for a, g in zip(angles, gains):
            fh.write(f"{a:.17g},{g:.17g}\n")


def count_pattern_lobes(gains: np.ndarray, rel_threshold: float = 0.5) -> int:
    """Number of distinct lobes whose peak reaches rel_threshold of the max.

    A lobe is a maximal run of samples at or above the threshold; runs
    separated by any dip below it count separately.
    """
    g = np.asarray(gains, dtype=float).ravel()
    if g.size == 0:
        raise ValueError("empty pattern")
    above = g >= rel_threshold * np.max(g)
    rises = np.flatnonzero(above[1:] & ~above[:-1]).size
    return rises + int(above[0])
