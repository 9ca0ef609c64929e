"""Phase-shifter codebooks.

A codebook is an M x N matrix of phases, one column per beam. The
corresponding beamforming weights are exp(1j * phase) / sqrt(M), so every
entry has magnitude 1/sqrt(M) by construction; training operates on the
phases and can never violate the constant-modulus constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi
MAX_QUANT_BITS = 16


@dataclass
class PhaseCodebook:
    """Phases of shape (num_antennas, num_beams), plus quantizer bits if any.

    quantized_bits is None for a continuous-phase codebook and records the
    resolution after quantize() has been applied.
    """

    phases: np.ndarray
    quantized_bits: int | None = None

    def __post_init__(self):
        self.phases = np.asarray(self.phases, dtype=float)
        if self.phases.ndim != 2 or self.phases.size == 0:
            raise ValueError(f"phases must be a nonempty 2-D array, got shape {self.phases.shape}")
        if not np.all(np.isfinite(self.phases)):
            raise ValueError("phases must be finite")
        if self.quantized_bits is not None:
            b = int(self.quantized_bits)
            if not 1 <= b <= MAX_QUANT_BITS:
                raise ValueError(f"quantized_bits must be in [1, {MAX_QUANT_BITS}], got {b}")
            self.quantized_bits = b

    @property
    def num_antennas(self) -> int:
        return self.phases.shape[0]

    @property
    def num_beams(self) -> int:
        return self.phases.shape[1]


def to_complex(codebook: PhaseCodebook) -> np.ndarray:
    """Complex weight matrix W with W[m, n] = exp(1j * phases[m, n]) / sqrt(M)."""
    M = codebook.num_antennas
    return np.exp(1j * codebook.phases) / np.sqrt(M)


def _wrap_phase(phases: np.ndarray) -> np.ndarray:
    """Wrap into the canonical interval [0, 2 pi)."""
    wrapped = np.mod(phases, TWO_PI)
    # mod can return 2 pi exactly for tiny negative inputs
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


def quantize(codebook: PhaseCodebook, num_bits: int) -> PhaseCodebook:
    """Snap each phase to the nearest of 2**num_bits uniform levels.

    Levels are {2 pi k / 2**num_bits, k = 0 .. 2**num_bits - 1} and
    nearness is circular distance, so a phase just below 2 pi snaps to 0.
    Exact midpoints go to the smaller level index. Applying quantize twice
    with the same num_bits is a no-op on the phases.

    Returns a new codebook with quantized_bits set; the input is unchanged.
    """
    b = int(num_bits)
    if not 1 <= b <= MAX_QUANT_BITS:
        raise ValueError(f"num_bits must be in [1, {MAX_QUANT_BITS}], got {num_bits!r}")
    levels = 1 << b
    step = TWO_PI / levels
    t = _wrap_phase(codebook.phases)
    k_lo = np.floor(t / step).astype(np.int64)
    k_lo = np.clip(k_lo, 0, levels - 1)
    k_hi = (k_lo + 1) % levels

    def circ_dist(k):
        d = np.mod(t - k * step + np.pi, TWO_PI) - np.pi
        return np.abs(d)

    d_lo = circ_dist(k_lo)
    d_hi = circ_dist(k_hi)
    # strict comparisons first so exact ties fall through to the smaller index
    k = np.where(d_lo < d_hi, k_lo, np.where(d_hi < d_lo, k_hi, np.minimum(k_lo, k_hi)))
    return PhaseCodebook(phases=k * step, quantized_bits=b)


def dft_codebook(num_antennas: int, num_beams: int, spacing: float = 0.5) -> PhaseCodebook:
    """Classical beamsteering codebook on a uniform grid in sine space.

    Beam n points at sin(aoa) = -1 + 2 n / num_beams, so the beams tile
    [-1, 1) evenly; with num_beams == num_antennas and half-wavelength
    spacing the columns are the orthogonal DFT vectors. Phases are
    2 pi * spacing * m * sin(aoa), matched to the steering vector so each
    beam has its response peak at its design angle.
    """
    if num_antennas < 1 or num_beams < 1:
        raise ValueError("num_antennas and num_beams must be positive")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    m = np.arange(num_antennas)[:, None]
    s = -1.0 + 2.0 * np.arange(num_beams)[None, :] / num_beams
    return PhaseCodebook(phases=TWO_PI * spacing * m * s)


def dft_beam_angles(num_beams: int) -> np.ndarray:
    """Design angles (radians) of dft_codebook beams: arcsin of the sine grid."""
    s = -1.0 + 2.0 * np.arange(num_beams) / num_beams
    return np.arcsin(s)


def egc_beam(channel: np.ndarray) -> np.ndarray:
    """Per-user equal gain combining beam: unit-modulus phases matched to h.

    f[m] = exp(1j * angle(h[m])) / sqrt(M). Zero channel entries get phase
    zero. The resulting |f^H h|^2 equals (sum_m |h[m]|)^2 / M, which is the
    best any single constant-modulus beam can do for that user.
    """
    h = np.asarray(channel).ravel()
    if h.size == 0:
        raise ValueError("channel must be nonempty")
    return np.exp(1j * np.angle(h)) / np.sqrt(h.size)


def init_codebook(num_antennas: int, num_beams: int, strategy: str = "uniform",
                  rng=None, spacing: float = 0.5) -> PhaseCodebook:
    """Starting point for training.

    "uniform" draws every phase independently from [0, 2 pi); the columns
    are then quasi-omnidirectional, so early in training each beam wins
    the max for some users and receives gradient. "dft" starts from the
    beamsteering grid instead.
    """
    if strategy == "uniform":
        if rng is None:
            raise ValueError("uniform init needs an rng (Generator or int seed)")
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        return PhaseCodebook(phases=gen.uniform(0.0, TWO_PI, size=(num_antennas, num_beams)))
    if strategy == "dft":
        return dft_codebook(num_antennas, num_beams, spacing)
    raise ValueError(f"unknown init strategy {strategy!r}")


def save_codebook(codebook: PhaseCodebook, path):
    """Write phases as CSV, one row per antenna, wrapped into [0, 2 pi).

    A leading comment line records the dimensions and, if the codebook was
    quantized, the bit width.
    """
    header = f"# M={codebook.num_antennas} N={codebook.num_beams}"
    if codebook.quantized_bits is not None:
        header += f" bits={codebook.quantized_bits}"
    wrapped = _wrap_phase(codebook.phases)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in wrapped:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_codebook(path) -> PhaseCodebook:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing codebook header line")
    meta = {}
    for tok in lines[0][1:].split():
        if "=" not in tok:
            raise ValueError(f"{path}: bad header token {tok!r}")
        key, _, val = tok.partition("=")
        try:
            meta[key] = int(val)
        except ValueError as exc:
            raise ValueError(f"{path}: bad header value {tok!r}") from exc
    if "M" not in meta or "N" not in meta:
        raise ValueError(f"{path}: header must carry M and N")
    M, N = meta["M"], meta["N"]
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != N:
            raise ValueError(f"{path}:{lineno}: expected {N} phases, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-numeric phase") from exc
    if len(rows) != M:
        raise ValueError(f"{path}: header says M={M} but found {len(rows)} rows")
    return PhaseCodebook(phases=np.array(rows), quantized_bits=meta.get("bits"))
