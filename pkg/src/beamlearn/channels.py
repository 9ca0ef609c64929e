"""Geometric multipath channel synthesis for uniform linear arrays.

A narrowband channel is a sum of plane-wave path contributions. Each path
has a complex gain and an angle of arrival measured from array broadside,
restricted to [-pi/2, pi/2] so every angle maps to a unique steering
vector. Antenna spacing is expressed in carrier wavelengths.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kvconfig import read_kv_file, write_kv_file

HALF_PI = np.pi / 2.0


@dataclass
class ArrayConfig:
    """Uniform linear array geometry.

    Attributes
    ----------
    num_antennas : int
        Number of elements, indexed m = 0 .. num_antennas - 1.
    spacing : float
        Inter-element spacing in wavelengths. Half-wavelength by default.
    """

    num_antennas: int
    spacing: float = 0.5

    def __post_init__(self):
        if not isinstance(self.num_antennas, (int, np.integer)) or self.num_antennas < 1:
            raise ValueError(f"num_antennas must be a positive integer, got {self.num_antennas!r}")
        self.num_antennas = int(self.num_antennas)
        self.spacing = float(self.spacing)
        if not np.isfinite(self.spacing) or self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")


@dataclass
class PathComponent:
    """One propagation path: complex gain plus angle of arrival (radians)."""

    gain: complex
    aoa: float

    def __post_init__(self):
        self.gain = complex(self.gain)
        self.aoa = float(self.aoa)
        if not (np.isfinite(self.gain.real) and np.isfinite(self.gain.imag)):
            raise ValueError("path gain must be finite")
        if not (-HALF_PI <= self.aoa <= HALF_PI):
            raise ValueError(f"aoa {self.aoa} outside [-pi/2, pi/2]")


def array_response(array: ArrayConfig, aoa) -> np.ndarray:
    """Steering vector(s) of the array for the given angle(s) of arrival.

    Element m responds with exp(1j * 2 pi * spacing * m * sin(aoa)); the
    vector is unnormalized so a unit-gain path contributes unit magnitude
    per antenna.

    Parameters
    ----------
    array : ArrayConfig
    aoa : float or ndarray
        Angle(s) of arrival in radians, each within [-pi/2, pi/2].

    Returns
    -------
    ndarray, complex
        Shape (num_antennas,) for a scalar angle, else aoa.shape + (num_antennas,).
    """
    aoa_arr = np.asarray(aoa, dtype=float)
    if np.any(aoa_arr < -HALF_PI) or np.any(aoa_arr > HALF_PI):
        raise ValueError("angle of arrival outside [-pi/2, pi/2]")
    m = np.arange(array.num_antennas)
    phase = 2.0 * np.pi * array.spacing * np.multiply.outer(np.sin(aoa_arr), m)
    return np.exp(1j * phase)


def channel_from_paths(array: ArrayConfig, paths) -> np.ndarray:
    """Superpose path contributions into one channel vector of shape (M,)."""
    h = np.zeros(array.num_antennas, dtype=complex)
    for p in paths:
        h += p.gain * array_response(array, p.aoa)
    return h


@dataclass
class ScenarioConfig:
    """Statistical description of a user population.

    Angles of arrival are drawn per user either uniformly over
    [aoa_low, aoa_high] or from a fixed list (one entry per path,
    optionally jittered by +-aoa_jitter to model angular clusters).
    Path gains are either circularly-symmetric complex Gaussian with the
    given per-path variance or taken from a fixed list.
    """

    array: ArrayConfig
    num_paths: int = 1
    num_users: int = 1000
    rng_seed: int = 0
    aoa_mode: str = "uniform"
    aoa_low: float = -HALF_PI
    aoa_high: float = HALF_PI
    aoa_angles: list = field(default_factory=list)
    aoa_jitter: float = 0.0
    gain_mode: str = "gaussian"
    gain_variance: float = 1.0
    gain_values: list = field(default_factory=list)

    def __post_init__(self):
        if not isinstance(self.num_paths, (int, np.integer)) or self.num_paths < 1:
            raise ValueError(f"num_paths must be a positive integer, got {self.num_paths!r}")
        if not isinstance(self.num_users, (int, np.integer)) or self.num_users < 1:
            raise ValueError(f"num_users must be a positive integer, got {self.num_users!r}")
        self.num_paths = int(self.num_paths)
        self.num_users = int(self.num_users)
        self.rng_seed = int(self.rng_seed)
        if self.aoa_mode not in ("uniform", "fixed"):
            raise ValueError(f"unknown aoa_mode {self.aoa_mode!r}")
        if self.gain_mode not in ("gaussian", "fixed"):
            raise ValueError(f"unknown gain_mode {self.gain_mode!r}")
        if self.aoa_mode == "uniform":
            lo, hi = float(self.aoa_low), float(self.aoa_high)
            if not (-HALF_PI <= lo < hi <= HALF_PI):
                raise ValueError(f"need -pi/2 <= aoa_low < aoa_high <= pi/2, got [{lo}, {hi}]")
            self.aoa_low, self.aoa_high = lo, hi
        else:
            angles = [float(a) for a in self.aoa_angles]
            if len(angles) != self.num_paths:
                raise ValueError(
                    f"aoa_angles has {len(angles)} entries but num_paths = {self.num_paths}")
            j = float(self.aoa_jitter)
            if j < 0:
                raise ValueError("aoa_jitter must be nonnegative")
            for a in angles:
                if not (-HALF_PI <= a - j and a + j <= HALF_PI):
                    raise ValueError(f"fixed aoa {a} +- jitter {j} leaves [-pi/2, pi/2]")
            self.aoa_angles = angles
            self.aoa_jitter = j
        if self.gain_mode == "gaussian":
            self.gain_variance = float(self.gain_variance)
            if not np.isfinite(self.gain_variance) or self.gain_variance <= 0:
                raise ValueError(f"gain_variance must be positive, got {self.gain_variance!r}")
        else:
            vals = [complex(v) for v in self.gain_values]
            if len(vals) != self.num_paths:
                raise ValueError(
                    f"gain_values has {len(vals)} entries but num_paths = {self.num_paths}")
            self.gain_values = vals

    # -- config file I/O ---------------------------------------------------
    # Key=value text format; angles are given in degrees for readability.

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        kv = read_kv_file(path)

        def pop(key, default=None):
            return kv.pop(key, default)

        try:
            array = ArrayConfig(
                num_antennas=int(pop("num_antennas")),
                spacing=float(pop("spacing", 0.5)),
            )
            kwargs = dict(
                array=array,
                num_paths=int(pop("num_paths", 1)),
                num_users=int(pop("num_users", 1000)),
                rng_seed=int(pop("rng_seed", 0)),
                aoa_mode=pop("aoa_mode", "uniform"),
                gain_mode=pop("gain_mode", "gaussian"),
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad scenario file {path}: {exc}") from exc
        if "aoa_low_deg" in kv:
            kwargs["aoa_low"] = np.deg2rad(float(pop("aoa_low_deg")))
        if "aoa_high_deg" in kv:
            kwargs["aoa_high"] = np.deg2rad(float(pop("aoa_high_deg")))
        if "aoa_angles_deg" in kv:
            kwargs["aoa_angles"] = [
                np.deg2rad(float(tok)) for tok in str(pop("aoa_angles_deg")).split(",") if tok.strip() != ""
            ]
        if "aoa_jitter_deg" in kv:
            kwargs["aoa_jitter"] = np.deg2rad(float(pop("aoa_jitter_deg")))
        if "gain_variance" in kv:
            kwargs["gain_variance"] = float(pop("gain_variance"))
        if "gain_values" in kv:
            kwargs["gain_values"] = [
                complex(tok) for tok in str(pop("gain_values")).split(",") if tok.strip() != ""
            ]
        if kv:
            raise ValueError(f"unknown scenario keys in {path}: {sorted(kv)}")
        return cls(**kwargs)

    def to_file(self, path):
        kv = {
            "num_antennas": self.array.num_antennas,
            "spacing": repr(self.array.spacing),
            "num_paths": self.num_paths,
            "num_users": self.num_users,
            "rng_seed": self.rng_seed,
            "aoa_mode": self.aoa_mode,
            "gain_mode": self.gain_mode,
        }
        if self.aoa_mode == "uniform":
            kv["aoa_low_deg"] = repr(float(np.rad2deg(self.aoa_low)))
            kv["aoa_high_deg"] = repr(float(np.rad2deg(self.aoa_high)))
        else:
            kv["aoa_angles_deg"] = ",".join(
                repr(float(np.rad2deg(a))) for a in self.aoa_angles)
            kv["aoa_jitter_deg"] = repr(float(np.rad2deg(self.aoa_jitter)))
        if self.gain_mode == "gaussian":
            kv["gain_variance"] = repr(self.gain_variance)
        else:
            kv["gain_values"] = ",".join(repr(complex(v)) for v in self.gain_values)
        write_kv_file(path, kv)


def synthesize_channel(cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw one user channel from the scenario distribution.

    Angles are drawn before gains so a scenario's random stream is
    consumed in a fixed order regardless of mode combinations.
    """
    L = cfg.num_paths
    if cfg.aoa_mode == "uniform":
        aoas = rng.uniform(cfg.aoa_low, cfg.aoa_high, size=L)
    else:
        aoas = np.asarray(cfg.aoa_angles, dtype=float)
        if cfg.aoa_jitter > 0:
            aoas = aoas + rng.uniform(-cfg.aoa_jitter, cfg.aoa_jitter, size=L)
    if cfg.gain_mode == "gaussian":
        scale = np.sqrt(cfg.gain_variance / 2.0)
        gains = scale * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
    else:
        gains = np.asarray(cfg.gain_values, dtype=complex)
    steering = array_response(cfg.array, aoas)  # (L, M)
    return gains @ steering


def generate_population(cfg: ScenarioConfig) -> np.ndarray:
    """Generate cfg.num_users channels, one row per user, shape (U, M)."""
    rng = np.random.default_rng(cfg.rng_seed)
    out = np.empty((cfg.num_users, cfg.array.num_antennas), dtype=complex)
    for u in range(cfg.num_users):
        out[u] = synthesize_channel(cfg, rng)
    return out
