"""Learning constant-modulus beam codebooks from channel populations.

The pipeline: synthesize geometric multipath channels for a user
population, label each user with its equal gain combining power, train a
phase-only codebook so the best-beam gain tracks those labels, then
compare against classical beamsteering grids and the combining bound.
"""

from .channels import (ArrayConfig, PathComponent, ScenarioConfig, array_response,
                       channel_from_paths, generate_population, synthesize_channel)
from .codebooks import (PhaseCodebook, dft_beam_angles, dft_codebook, egc_beam,
                        init_codebook, load_codebook, quantize, save_codebook,
                        to_complex)
from .datasets import (ChannelDataset, compute_labels, load_dataset, normalize,
                       save_dataset, split)
from .evaluation import (ComparisonReport, ComparisonRow, EvalConfig,
                         achievable_rate, compare, egc_upper_bound,
                         evaluate_codebook)
from .forward import (BeamResponse, beam_gains, beam_pattern, best_beam_stats,
                      count_pattern_lobes, forward, population_gain,
                      write_pattern_csv)
from .training import (Adam, PlainSgd, TrainConfig, TrainReport, loss_gradient,
                       make_optimizer, mse_loss, train)

__version__ = "0.1.0"

__all__ = [
    "Adam", "ArrayConfig", "BeamResponse", "ChannelDataset", "ComparisonReport",
    "ComparisonRow", "EvalConfig", "PathComponent", "PhaseCodebook", "PlainSgd",
    "ScenarioConfig", "TrainConfig", "TrainReport", "achievable_rate",
    "array_response", "beam_gains", "beam_pattern", "best_beam_stats",
    "channel_from_paths", "compare", "compute_labels", "count_pattern_lobes",
    "dft_beam_angles", "dft_codebook", "egc_beam", "egc_upper_bound",
    "evaluate_codebook", "forward", "generate_population", "init_codebook",
    "load_codebook", "load_dataset", "loss_gradient", "make_optimizer",
    "mse_loss", "normalize", "population_gain", "quantize", "save_codebook",
    "save_dataset", "split", "synthesize_channel", "to_complex", "train",
    "write_pattern_csv",
]
