"""Wireless powered network: harvested energy, bit budgets and valuations.

Each device harvests ``E = eta * P * h * tau`` joules from the access point,
can send ``floor(E / e_b)`` bits, shrinks its encoder output dimension to the
largest one that fits, and values the energy at the weighted semantic score
it then achieves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .perf_model import DEFAULT_CURVE, PayloadModel, PerfCurve, feasible_dimension, lookup

CHANNELS = ("exp", "const", "uniform")


@dataclass(frozen=True)
class NetworkConfig:
    devices: int = 5
    eta: float = 0.5
    power_w: float = 1.0
    slot_s: float = 0.01
    energy_per_bit_j: float = 5e-7
    w_sim: float = 0.5
    w_bleu: float = 0.5
    channel: str = "exp"
    payload: PayloadModel = field(default_factory=PayloadModel)
    curve: PerfCurve = DEFAULT_CURVE

    def errors(self) -> list[str]:
        """Every constraint violation, as ``field: message`` strings."""
        errs = []
        if not isinstance(self.devices, int) or self.devices < 1:
            errs.append("devices: must be an integer >= 1")
        if not 0 < self.eta <= 1:
            errs.append("eta: must lie in (0, 1]")
        for name in ("power_w", "slot_s", "energy_per_bit_j"):
            if not getattr(self, name) > 0:
                errs.append(f"{name}: must be > 0")
        if self.w_sim < 0 or self.w_bleu < 0:
            errs.append("w_sim/w_bleu: weights must be >= 0")
        elif not math.isclose(self.w_sim + self.w_bleu, 1.0, abs_tol=1e-12):
            errs.append("w_sim/w_bleu: weights must sum to 1")
        if self.channel not in CHANNELS:
            errs.append(f"channel: must be one of {', '.join(CHANNELS)}")
        return errs

    def validate(self) -> "NetworkConfig":
        errs = self.errors()
        if errs:
            raise ValueError("; ".join(errs))
        return self


@dataclass(frozen=True)
class DeviceState:
    id: int
    channel_gain: float
    harvested_energy: float
    bit_budget: int
    dimension: Optional[int]  # None: cannot transmit
    similarity: float
    bleu: float
    valuation: float
    bid: float


def sample_channels(config: NetworkConfig, rng: np.random.Generator, size=None) -> np.ndarray:
    """Power gains for ``config.devices`` devices (mean 1 for every law)."""
    shape = (config.devices,) if size is None else (size, config.devices)
    if config.channel == "exp":
        h = rng.exponential(1.0, shape)
        # exponential draws can be exactly 0.0 in principle
        return np.maximum(h, np.finfo(float).tiny)
    if config.channel == "const":
        return np.ones(shape)
    if config.channel == "uniform":
        return rng.uniform(np.finfo(float).tiny, 2.0, shape)
    raise ValueError(f"unknown channel law {config.channel!r}")


def harvested_energy(config: NetworkConfig, h: float) -> float:
    if not h > 0:
        raise ValueError(f"channel gain must be positive, got {h}")
    return config.eta * config.power_w * h * config.slot_s


def bit_budget(config: NetworkConfig, energy: float) -> int:
    return math.floor(energy / config.energy_per_bit_j)


def valuation_of(config: NetworkConfig, dimension: Optional[int]) -> tuple[float, float, float]:
    """``(similarity, bleu, valuation)`` at a feasible dimension."""
    if dimension is None:
        return 0.0, 0.0, 0.0
    s, b = lookup(config.curve, dimension)
    return s, b, config.w_sim * s + config.w_bleu * b


def device_state(config: NetworkConfig, h: float, device_id: int = 0) -> DeviceState:
    energy = harvested_energy(config, h)
    budget = bit_budget(config, energy)
    d = feasible_dimension(config.payload, budget)
    s, b, v = valuation_of(config, d)
    return DeviceState(device_id, float(h), energy, budget, d, s, b, v, v)


def valuation_levels(config: NetworkConfig) -> np.ndarray:
    """Valuation indexed by dimension; index 0 is the no-transmission level."""
    levels = [0.0] + [valuation_of(config, d)[2] for d in range(1, config.payload.max_dimension + 1)]
    return np.array(levels)


def sample_valuation_profile(config: NetworkConfig, rng: np.random.Generator) -> np.ndarray:
    """One valuation per device, via channel draw -> device state."""
    gains = sample_channels(config, rng)
    return np.array([device_state(config, float(h), i).valuation for i, h in enumerate(gains)])


def sample_valuation_profiles(config: NetworkConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorised ``sample_valuation_profile``: array of shape (size, devices).

    Uses the same arithmetic per device as :func:`device_state`.
    """
    gains = sample_channels(config, rng, size)
    energy = config.eta * config.power_w * gains * config.slot_s
    budget = np.floor(energy / config.energy_per_bit_j)
    per_dim = config.payload.words * config.payload.bits_per_feature
    d = np.minimum(np.floor_divide(budget, per_dim), config.payload.max_dimension).astype(int)
    return valuation_levels(config)[d]


def value_sampler(config: NetworkConfig):
    """Adapter for the auction trainer: ``f(rng, size) -> (size, devices)``."""
    config.validate()

    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        return sample_valuation_profiles(config, rng, size)

    sample.num_bidders = config.devices
    return sample


def profile_rng(seed: int, batch_index: int) -> np.random.Generator:
    """Independent stream per batch, so parallel batch sampling is schedule-free."""
    return np.random.default_rng([seed, batch_index])
