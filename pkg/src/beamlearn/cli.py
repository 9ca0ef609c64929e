"""Command-line front end.

Subcommands: generate, train, eval, compare, pattern. Exit codes: 0 when
all requested artifact files were written, 1 on runtime failure, 2 on
usage errors (argparse's convention). Every source of randomness is an
explicit seed, either in a config file or a flag; flags override files.

Report-producing subcommands also render a PNG next to each CSV they
write; pass --no-figures to skip that.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .channels import ArrayConfig, ScenarioConfig, generate_population
from .codebooks import load_codebook, quantize, save_codebook, to_complex
from .datasets import ChannelDataset, load_dataset, normalize, save_dataset, split
from .evaluation import (ComparisonReport, EvalConfig, compare, egc_row,
                         evaluate_codebook)
from .forward import beam_pattern, write_pattern_csv
from .training import TrainConfig, train


def _parse_num_list(raw: str, conv):
    vals = [conv(tok) for tok in raw.split(",") if tok.strip() != ""]
    if not vals:
        raise ValueError(f"empty list {raw!r}")
    return vals


def _load_train_config(args) -> TrainConfig:
    cfg = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    if getattr(args, "seed", None) is not None:
        cfg.rng_seed = int(args.seed)
    if getattr(args, "epochs", None) is not None:
        cfg.num_epochs = int(args.epochs)
    if getattr(args, "restarts", None) is not None:
        cfg.num_restarts = int(args.restarts)
    return TrainConfig(**vars(cfg))  # revalidate after overrides


def _figure_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".png")


def cmd_generate(args) -> int:
    scenario = ScenarioConfig.from_file(args.scenario)
    if args.seed is not None:
        scenario.rng_seed = int(args.seed)
    channels = generate_population(scenario)
    dataset = ChannelDataset.from_channels(channels)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} channels with {dataset.num_antennas} antennas to {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = load_dataset(args.data)
    cfg = _load_train_config(args)
    if len(dataset) > 1:
        train_ds, holdout = split(dataset, args.train_fraction, cfg.rng_seed)
    else:
        # nothing to hold out; fit and report on the only sample
        train_ds = dataset if dataset.is_normalized else normalize(dataset)
        holdout = train_ds
        print("dataset has a single sample; holdout metrics use the training sample")
    report = train(train_ds, args.beams, cfg, holdout=holdout)
    codebook = report.codebook
    if args.bits is not None:
        codebook = quantize(codebook, args.bits)
    save_codebook(codebook, args.out_codebook)
    report.to_csv(args.report)
    if not args.no_figures:
        from .figures import save_train_curves
        save_train_curves(report, _figure_path(args.report))
    row = evaluate_codebook(codebook, holdout, snr_db=[], name="trained")
    print(f"final holdout mean gain: {row.mean_gain:.6g} "
          f"({100.0 * row.fraction_of_bound:.2f}% of the combining bound)")
    return 0


def cmd_eval(args) -> int:
    dataset = load_dataset(args.data)
    codebook = load_codebook(args.codebook)
    if dataset.num_antennas != codebook.num_antennas:
        raise ValueError(f"dataset has {dataset.num_antennas} antennas, "
                         f"codebook has {codebook.num_antennas}")
    if not dataset.is_normalized:
        dataset = normalize(dataset)
    snr_db = _parse_num_list(args.snr_db, float)
    rows = [evaluate_codebook(codebook, dataset, snr_db, name="codebook")]
    if args.bits is not None:
        rows.append(evaluate_codebook(quantize(codebook, args.bits), dataset, snr_db,
                                      name="codebook"))
    rows.append(egc_row(dataset, snr_db))
    report = ComparisonReport(
        rows=rows, snr_db=snr_db,
        egc_bound=rows[-1].mean_gain,
        normalization_factor=dataset.normalization_factor)
    print(report.table())
    return 0


def cmd_compare(args) -> int:
    dataset = load_dataset(args.data)
    eval_cfg = EvalConfig(
        snr_db=_parse_num_list(args.snr_db, float),
        codebook_sizes=_parse_num_list(args.beams, int),
        quantizer_bits=_parse_num_list(args.bits, int) if args.bits else [],
        train_fraction=args.train_fraction,
    )
    train_cfg = _load_train_config(args)
    report = compare(dataset, eval_cfg, train_cfg)
    report.to_csv(args.out)
    if not args.no_figures:
        from .figures import save_comparison
        save_comparison(report, _figure_path(args.out))
    print(report.table())
    return 0


def cmd_pattern(args) -> int:
    codebook = load_codebook(args.codebook)
    if not 0 <= args.beam < codebook.num_beams:
        raise ValueError(f"--beam {args.beam} out of range, codebook has "
                         f"{codebook.num_beams} beams")
    array = ArrayConfig(num_antennas=codebook.num_antennas, spacing=args.spacing)
    w = to_complex(codebook)[:, args.beam]
    angles, gains = beam_pattern(w, array, resolution_deg=args.resolution_deg)
    write_pattern_csv(args.out, angles, gains)
    if not args.no_figures:
        from .figures import save_beam_pattern
        save_beam_pattern(angles, gains, _figure_path(args.out),
                          title=f"beam {args.beam} of {Path(args.codebook).name}")
    print(f"wrote {angles.size} grid points to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamlearn",
        description="Learn and evaluate constant-modulus beam codebooks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a channel dataset from a scenario file")
    p.add_argument("--scenario", required=True, help="key=value scenario config")
    p.add_argument("--out", required=True, help="output dataset CSV")
    p.add_argument("--seed", type=int, default=None, help="override the scenario rng_seed")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("train", help="train a codebook on a dataset")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--beams", required=True, type=int, help="codebook size")
    p.add_argument("--config", default=None, help="key=value training config")
    p.add_argument("--out-codebook", required=True, help="output codebook CSV")
    p.add_argument("--report", required=True, help="output per-epoch report CSV")
    p.add_argument("--seed", type=int, default=None, help="override rng_seed")
    p.add_argument("--epochs", type=int, default=None, help="override num_epochs")
    p.add_argument("--restarts", type=int, default=None, help="override num_restarts")
    p.add_argument("--bits", type=int, default=None,
                   help="quantize the trained phases to this many bits")
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="measure a stored codebook on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--snr-db", required=True, help="comma-separated SNRs in dB")
    p.add_argument("--bits", type=int, default=None,
                   help="also evaluate a quantized copy")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("compare", help="learned vs beamsteering vs combining bound")
    p.add_argument("--data", required=True)
    p.add_argument("--beams", required=True, help="comma-separated codebook sizes")
    p.add_argument("--snr-db", required=True, help="comma-separated SNRs in dB")
    p.add_argument("--bits", default=None, help="comma-separated quantizer bit widths")
    p.add_argument("--config", default=None, help="key=value training config")
    p.add_argument("--seed", type=int, default=None, help="override rng_seed")
    p.add_argument("--epochs", type=int, default=None, help="override num_epochs")
    p.add_argument("--restarts", type=int, default=None, help="override num_restarts")
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--out", required=True, help="output comparison CSV")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("pattern", help="export one beam's angular gain")
    p.add_argument("--codebook", required=True)
    p.add_argument("--beam", required=True, type=int, help="beam (column) index")
    p.add_argument("--out", required=True, help="output pattern CSV")
    p.add_argument("--spacing", type=float, default=0.5,
                   help="element spacing in wavelengths")
    p.add_argument("--resolution-deg", type=float, default=1.0)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(handler=cmd_pattern)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
