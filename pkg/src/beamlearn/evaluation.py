"""Codebook evaluation: gain against the equal gain combining bound, rates,
and side-by-side comparison of learned and beamsteering codebooks.

Gains inside a normalized dataset live on the normalized scale; rates
multiply the normalization factor back in, so SNR always refers to
physical channel energy. Reported rates are per-user Shannon rates
log2(1 + snr * gain) averaged over users, not a rate at the mean SNR.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebooks import PhaseCodebook, dft_codebook, quantize
from .datasets import ChannelDataset, compute_labels, split
from .forward import best_beam_stats
from .training import TrainConfig, train


def egc_upper_bound(channels: np.ndarray) -> float:
    """Mean over users of the per-user equal gain combining power.

    No codebook of any size can beat this on the same channels: every
    constant-modulus beam satisfies |w^H h|^2 <= (sum_m |h_m|)^2 / M per
    user, with equality for the user's own matched-phase beam.
    """
    labels = compute_labels(channels)
    if labels.size == 0:
        raise ValueError("no channels given")
    return float(np.mean(labels))


def _rate_from_gains(gains: np.ndarray, snr_db: float, normalization: float) -> float:
    snr_lin = 10.0 ** (float(snr_db) / 10.0)
    return float(np.mean(np.log2(1.0 + snr_lin * normalization * np.asarray(gains))))


def achievable_rate(weights, channels: np.ndarray, snr_db: float,
                    normalization: float = 1.0) -> float:
    """Mean over users of log2(1 + snr_linear * best_gain).

    normalization rescales gains back to physical units when the channels
    were normalized; pass the dataset's normalization_factor.
    """
    gains, _ = best_beam_stats(weights, channels)
    return _rate_from_gains(gains, snr_db, normalization)


@dataclass
class EvalConfig:
    snr_db: list = field(default_factory=lambda: [0.0, 5.0])
    codebook_sizes: list = field(default_factory=lambda: [16])
    quantizer_bits: list = field(default_factory=list)
    train_fraction: float = 0.7

    def __post_init__(self):
        self.snr_db = [float(s) for s in self.snr_db]
        self.codebook_sizes = [int(n) for n in self.codebook_sizes]
        self.quantizer_bits = [int(b) for b in self.quantizer_bits]
        if not self.snr_db:
            raise ValueError("snr_db must be nonempty")
        if not self.codebook_sizes or any(n < 1 for n in self.codebook_sizes):
            raise ValueError("codebook_sizes must be a nonempty list of positive sizes")
        if any(not 1 <= b <= 16 for b in self.quantizer_bits):
            raise ValueError("quantizer_bits must lie in [1, 16]")
        if not 0.0 < float(self.train_fraction) < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        self.train_fraction = float(self.train_fraction)


@dataclass
class ComparisonRow:
    """One evaluated codebook: identity, mean gain, bound fraction, rates.

    mean_gain is on the physical channel scale; fraction_of_bound is the
    scale-free ratio to the equal gain combining bound. rates[i] pairs
    with the report's snr_db[i]. num_beams and bits are None where they
    do not apply (the per-user bound row and continuous codebooks).
    """

    name: str
    num_beams: int | None
    bits: int | None
    mean_gain: float
    fraction_of_bound: float
    rates: list


@dataclass
class ComparisonReport:
    rows: list
    snr_db: list
    egc_bound: float
    normalization_factor: float

    def __post_init__(self):
        slack = 1e-9 * max(self.egc_bound, 1.0)
        for row in self.rows:
            if row.mean_gain > self.egc_bound + slack:
                raise ValueError(
                    f"row {row.name!r} mean gain {row.mean_gain} exceeds the "
                    f"equal gain combining bound {self.egc_bound}")

    def to_csv(self, path):
        rate_cols = ",".join(f"rate_snr{_fmt_snr(s)}db" for s in self.snr_db)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# egc_bound={self.egc_bound:.17g} "
                     f"delta={self.normalization_factor:.17g}\n")
            fh.write(f"name,num_beams,bits,mean_gain,fraction_of_bound,{rate_cols}\n")
            for row in self.rows:
                beams = "" if row.num_beams is None else str(row.num_beams)
                bits = "" if row.bits is None else str(row.bits)
                rates = ",".join(f"{r:.17g}" for r in row.rates)
                fh.write(f"{row.name},{beams},{bits},"
                         f"{row.mean_gain:.17g},{row.fraction_of_bound:.17g},{rates}\n")

    def table(self) -> str:
        """Fixed-width text table for terminal output."""
        headers = ["codebook", "beams", "bits", "mean gain", "% of bound"]
        headers += [f"rate@{s:g}dB" for s in self.snr_db]
        body = []
        for row in self.rows:
            cells = [row.name,
                     "-" if row.num_beams is None else str(row.num_beams),
                     "-" if row.bits is None else str(row.bits),
                     f"{row.mean_gain:.4g}",
                     f"{100.0 * row.fraction_of_bound:.2f}"]
            cells += [f"{r:.4f}" for r in row.rates]
            body.append(cells)
        widths = [max(len(h), *(len(r[i]) for r in body)) for i, h in enumerate(headers)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)),
                 "  ".join("-" * w for w in widths)]
        for cells in body:
            lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
        return "\n".join(lines)


def _fmt_snr(s: float) -> str:
    return f"{s:g}".replace("-", "m").replace(".", "p")


def evaluate_codebook(codebook, dataset: ChannelDataset, snr_db,
                      name: str = "codebook") -> ComparisonRow:
    """Measure one codebook on one dataset (no training involved)."""
    gains, _ = best_beam_stats(codebook, dataset.channels)
    bound = egc_upper_bound(dataset.channels)
    delta = dataset.normalization_factor
    bits = codebook.quantized_bits if isinstance(codebook, PhaseCodebook) else None
    num_beams = (codebook.num_beams if isinstance(codebook, PhaseCodebook)
                 else np.asarray(codebook).shape[1])
    return ComparisonRow(
        name=name,
        num_beams=num_beams,
        bits=bits,
        mean_gain=float(np.mean(gains)) * delta,
        fraction_of_bound=float(np.mean(gains)) / bound,
        rates=[_rate_from_gains(gains, s, delta) for s in snr_db],
    )


def egc_row(dataset: ChannelDataset, snr_db) -> ComparisonRow:
    """Bound row: per-user equal gain combining, the unquantized optimum."""
    labels = compute_labels(dataset.channels)
    delta = dataset.normalization_factor
    bound = float(np.mean(labels))
    return ComparisonRow(
        name="egc",
        num_beams=None,
        bits=None,
        mean_gain=bound * delta,
        fraction_of_bound=1.0,
        rates=[_rate_from_gains(labels, s, delta) for s in snr_db],
    )


def compare(dataset: ChannelDataset, eval_cfg: EvalConfig, train_cfg: TrainConfig,
            spacing: float = 0.5) -> ComparisonReport:
    """Train per requested size and rank against the beamsteering baseline.

    The dataset is split once (seeded by train_cfg.rng_seed); codebooks
    train on the training side and every row is measured on the held-out
    side. Quantized rows snap the learned phases after training. The
    final row is the per-user equal gain combining bound.
    """
    train_ds, test_ds = split(dataset, eval_cfg.train_fraction, train_cfg.rng_seed)
    rows = []
    for n in eval_cfg.codebook_sizes:
        report = train(train_ds, n, train_cfg, holdout=test_ds)
        rows.append(evaluate_codebook(report.codebook, test_ds, eval_cfg.snr_db,
                                      name="learned"))
        for b in eval_cfg.quantizer_bits:
            rows.append(evaluate_codebook(quantize(report.codebook, b), test_ds,
                                          eval_cfg.snr_db, name="learned"))
        dft = dft_codebook(dataset.num_antennas, n, spacing)
        rows.append(evaluate_codebook(dft, test_ds, eval_cfg.snr_db, name="dft"))
    rows.append(egc_row(test_ds, eval_cfg.snr_db))
    bound = egc_upper_bound(test_ds.channels) * test_ds.normalization_factor
    return ComparisonReport(rows=rows, snr_db=eval_cfg.snr_db, egc_bound=bound,
                            normalization_factor=test_ds.normalization_factor)
