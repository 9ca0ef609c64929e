"""Gradient training of codebook phases against equal gain combining labels.

The model is the selection pipeline itself: z = W^H h, per-beam powers
|z_n|^2, max over beams. The loss is the mean squared gap between the
selected gain and the per-user label. Because only the winning beam's
power reaches the loss, the gradient of every other column is exactly
zero for that sample; beams improve only on the users they currently win.
That makes initialization matter (a beam that never wins never moves), so
the trainer supports multiple random restarts and keeps the one with the
highest training-set gain, the same guard k-means uses against bad seeds.

Gradient of one sample with winning beam n* and label p, derived by
differentiating |z_{n*}|^2 with respect to each phase:

    d/d theta_{m,n*} (g - p)^2
        = 2 (g - p) * (2 / sqrt(M)) * Im( conj(z_{n*}) e^{-1j theta_{m,n*}} h_m )

and zero for all other columns. Batches average this over samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codebooks import PhaseCodebook, init_codebook
from .datasets import ChannelDataset
from .kvconfig import read_kv_file


@dataclass
class TrainConfig:
    batch_size: int = 128
    num_epochs: int = 100
    learning_rate: float = 0.01
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    rng_seed: int = 0
    shuffle: bool = True
    init: str = "uniform"
    num_restarts: int = 1
    early_stop: bool = False
    early_stop_window: int = 10
    early_stop_tol: float = 1e-6

    def __post_init__(self):
        if int(self.batch_size) < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size!r}")
        if int(self.num_epochs) < 1:
            raise ValueError(f"num_epochs must be positive, got {self.num_epochs!r}")
        if not float(self.learning_rate) > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not 0.0 <= float(self.beta1) < 1.0 or not 0.0 <= float(self.beta2) < 1.0:
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not float(self.epsilon) > 0:
            raise ValueError("epsilon must be positive")
        if self.init not in ("uniform", "dft"):
            raise ValueError(f"unknown init strategy {self.init!r}")
        if int(self.num_restarts) < 1:
            raise ValueError(f"num_restarts must be positive, got {self.num_restarts!r}")
        if int(self.early_stop_window) < 1:
            raise ValueError("early_stop_window must be positive")
        if not float(self.early_stop_tol) >= 0:
            raise ValueError("early_stop_tol must be nonnegative")
        self.batch_size = int(self.batch_size)
        self.num_epochs = int(self.num_epochs)
        self.learning_rate = float(self.learning_rate)
        self.beta1 = float(self.beta1)
        self.beta2 = float(self.beta2)
        self.epsilon = float(self.epsilon)
        self.rng_seed = int(self.rng_seed)
        self.shuffle = bool(self.shuffle)
        self.num_restarts = int(self.num_restarts)
        self.early_stop = bool(self.early_stop)
        self.early_stop_window = int(self.early_stop_window)
        self.early_stop_tol = float(self.early_stop_tol)

    @classmethod
    def from_file(cls, path) -> "TrainConfig":
        kv = read_kv_file(path)
        kwargs = {}
        converters = {
            "batch_size": int, "num_epochs": int, "learning_rate": float,
            "optimizer": str, "beta1": float, "beta2": float, "epsilon": float,
            "rng_seed": int, "shuffle": _parse_bool, "init": str,
            "num_restarts": int, "early_stop": _parse_bool,
            "early_stop_window": int, "early_stop_tol": float,
        }
        for key, raw in kv.items():
            if key not in converters:
                raise ValueError(f"unknown training key {key!r} in {path}")
            try:
                kwargs[key] = converters[key](raw)
            except ValueError as exc:
                raise ValueError(f"bad value for {key!r} in {path}: {raw!r}") from exc
        return cls(**kwargs)


def _parse_bool(raw: str) -> bool:
    low = str(raw).strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


@dataclass
class TrainReport:
    """Loss and holdout-gain trajectories plus the trained codebook."""

    epoch_loss: list
    holdout_gain: list
    codebook: PhaseCodebook
    epochs_run: int

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,loss,holdout_gain\n")
            for e, (loss, gain) in enumerate(zip(self.epoch_loss, self.holdout_gain), start=1):
                fh.write(f"{e},{loss:.17g},{gain:.17g}\n")


def mse_loss(gains: np.ndarray, labels: np.ndarray) -> float:
    gains = np.asarray(gains, dtype=float).ravel()
    labels = np.asarray(labels, dtype=float).ravel()
    if gains.size == 0 or gains.shape != labels.shape:
        raise ValueError("gains and labels must be nonempty and the same length")
    return float(np.mean((gains - labels) ** 2))


def _forward_batch(phases: np.ndarray, channels: np.ndarray):
    """Selected gains plus the intermediates the gradient needs."""
    M = phases.shape[0]
    W = np.exp(1j * phases) / np.sqrt(M)
    Z = channels @ W.conj()  # (B, N), row b is (W^H h_b)^T
    Q = np.abs(Z) ** 2
    best = np.argmax(Q, axis=1)
    rows = np.arange(channels.shape[0])
    return Q[rows, best], best, Z[rows, best]


def _grad_from_forward(theta, channels, labels, g, best, z_best):
    M = theta.shape[0]
    B = channels.shape[0]
    coef = 2.0 * (g - labels) * (2.0 / np.sqrt(M)) / B  # (B,)
    # (M, B): Im( conj(z_b) e^{-1j theta[:, n_b]} h_b ) for each sample b
    V = np.imag(np.conj(z_best)[None, :] * np.exp(-1j * theta[:, best]) * channels.T)
    grad = np.zeros_like(theta)
    np.add.at(grad.T, best, (coef[:, None] * V.T))
    return grad


def loss_gradient(codebook: PhaseCodebook, channels: np.ndarray,
                  labels: np.ndarray) -> np.ndarray:
    """Gradient of the batch MSE with respect to every phase.

    Shape matches codebook.phases. Columns that win no sample in the
    batch get an exactly zero gradient.
    """
    H = np.atleast_2d(np.asarray(channels, dtype=complex))
    p = np.asarray(labels, dtype=float).ravel()
    if H.shape[0] != p.shape[0]:
        raise ValueError(f"{H.shape[0]} channels but {p.shape[0]} labels")
    if H.shape[1] != codebook.num_antennas:
        raise ValueError(
            f"channels have {H.shape[1]} entries, codebook expects {codebook.num_antennas}")
    theta = codebook.phases
    g, best, z_best = _forward_batch(theta, H)
    return _grad_from_forward(theta, H, p, g, best, z_best)


class PlainSgd:
    """theta <- theta - lr * grad, no state."""

    def __init__(self, learning_rate: float):
        self.learning_rate = float(learning_rate)

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return theta - self.learning_rate * grad


class Adam:
    """Adam with bias correction; moment buffers are allocated lazily."""

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999,
                 epsilon: float = 1e-8):
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)
        self.m = None
        self.v = None
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(theta)
            self.v = np.zeros_like(theta)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad ** 2
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return theta - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


def make_optimizer(cfg: TrainConfig):
    if cfg.optimizer == "adam":
        return Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    return PlainSgd(cfg.learning_rate)


def _mean_best_gain(theta: np.ndarray, channels: np.ndarray) -> float:
    M = theta.shape[0]
    q = np.abs(channels @ (np.exp(1j * theta) / np.sqrt(M)).conj()) ** 2
    return float(np.mean(np.max(q, axis=1)))


def _run_single(channels, labels, holdout_channels, num_beams, cfg, seed_seq):
    rng = np.random.default_rng(seed_seq)
    M = channels.shape[1]
    U = channels.shape[0]
    codebook = init_codebook(M, num_beams, strategy=cfg.init, rng=rng)
    theta = codebook.phases.copy()
    optimizer = make_optimizer(cfg)
    epoch_loss = []
    holdout_gain = []
    for _epoch in range(cfg.num_epochs):
        order = rng.permutation(U) if cfg.shuffle else np.arange(U)
        sq_sum = 0.0
        for start in range(0, U, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            Hb, pb = channels[idx], labels[idx]
            g, best, z_best = _forward_batch(theta, Hb)
            grad = _grad_from_forward(theta, Hb, pb, g, best, z_best)
            theta = optimizer.step(theta, grad)
            sq_sum += float(np.sum((g - pb) ** 2))
        epoch_loss.append(sq_sum / U)
        holdout_gain.append(_mean_best_gain(theta, holdout_channels))
        if cfg.early_stop and len(epoch_loss) > cfg.early_stop_window:
            prev = epoch_loss[-1 - cfg.early_stop_window]
            if abs(epoch_loss[-1] - prev) <= cfg.early_stop_tol * max(abs(prev), 1e-300):
                break
    report = TrainReport(epoch_loss=epoch_loss, holdout_gain=holdout_gain,
                         codebook=PhaseCodebook(phases=theta), epochs_run=len(epoch_loss))
    return report, _mean_best_gain(theta, channels)


def train(dataset: ChannelDataset, num_beams: int, cfg: TrainConfig,
          holdout: ChannelDataset | None = None) -> TrainReport:
    """Train a codebook of num_beams columns on the dataset.

    The holdout dataset, when given, only feeds the per-epoch gain
    trajectory; it never influences the updates. Without one, the
    trajectory is measured on the training set itself.

    With num_restarts > 1 the run is repeated from independent random
    initializations (derived deterministically from rng_seed) and the
    restart with the highest final training-set gain is returned.
    """
    if int(num_beams) < 1:
        raise ValueError(f"num_beams must be positive, got {num_beams!r}")
    channels = dataset.channels
    labels = dataset.labels
    holdout_channels = holdout.channels if holdout is not None else channels
    if holdout is not None and holdout.num_antennas != dataset.num_antennas:
        raise ValueError("holdout antenna count differs from training set")
    seed_seqs = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.num_restarts)
    best_report, best_gain = None, -np.inf
    for seq in seed_seqs:
        report, train_gain = _run_single(
            channels, labels, holdout_channels, int(num_beams), cfg, seq)
        if train_gain > best_gain:
            best_report, best_gain = report, train_gain
    return best_report
