"""Synthetic propagation between the handset, the tag and the receiver.

The tag's reflective state shows up as a small multiplicative amplitude
change on the whole pilot symbol; everything else the receiver sees is
nuisance: circular complex noise per subcarrier, rare symbol-wide magnitude
spikes (front-end artifacts), and a slow random-walk gain drift. All
randomness flows through one caller-supplied generator so a run is fully
determined by its seed.

Preset parameter values are simulator calibration choices: the filter chain
colors white per-period noise badly enough that the indoor presets carry
their disturbance through spikes (removed by the amplitude validity gate)
rather than noise, keeping the tag-off stream event-free at the default
detection threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .srs import SrsSymbol
from .tag import OokState


@dataclass(frozen=True)
class ChannelConfig:
    base_gain: float = 0.3
    modulation_depth: float = 0.05
    noise_sigma: float = 0.0
    spike_probability: float = 0.0
    spike_gain: float = 3.0
    drift_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.base_gain <= 0:
            raise ValueError(f"base_gain must be positive, got {self.base_gain}")
        if self.modulation_depth < 0:
            raise ValueError("modulation_depth must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0 <= self.spike_probability <= 1:
            raise ValueError("spike_probability must lie in [0, 1]")
        if self.spike_gain <= 1:
            raise ValueError("spike_gain must exceed 1")
        if self.drift_rate < 0:
            raise ValueError("drift_rate must be >= 0")


@dataclass
class ChannelState:
    """Mutable per-run state: the drifting gain. Single-owner, stepped once per period."""

    config: ChannelConfig
    gain: float

    @classmethod
    def create(cls, config: ChannelConfig) -> "ChannelState":
        return cls(config=config, gain=config.base_gain)


def propagate(
    srs: SrsSymbol, state: OokState, channel: ChannelState, rng: np.random.Generator
) -> SrsSymbol:
    """Received pilot for one period.

    ``rx_n = g * (1 + depth * b) * tx_n + noise_n`` with ``b = 1`` while the
    tag backscatters, noise circular complex Gaussian with standard deviation
    ``noise_sigma`` per subcarrier. With probability ``spike_probability`` the
    whole symbol (noise included) is additionally scaled by ``spike_gain``.

    Draws a fixed amount of randomness regardless of parameter values, so two
    configs differing only in deterministic knobs see identical noise
    realizations under the same generator state.
    """
    cfg = channel.config
    n = srs.values.size
    z = rng.standard_normal((2, n))
    noise = (z[0] + 1j * z[1]) * (cfg.noise_sigma / math.sqrt(2.0))
    b = 1.0 if state is OokState.BACKSCATTER else 0.0
    received = channel.gain * (1.0 + cfg.modulation_depth * b) * srs.values + noise
    if rng.random() < cfg.spike_probability:
        received = received * cfg.spike_gain
    return SrsSymbol(values=received, period_index=srs.period_index)


def step(channel: ChannelState, rng: np.random.Generator) -> None:
    """Advance the gain random walk by one period: ``g *= exp(rate * w)``."""
    w = rng.standard_normal()
    channel.gain *= math.exp(channel.config.drift_rate * w)


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    config: ChannelConfig


def effective_modulation_to_noise(config: ChannelConfig) -> float:
    """Modulation depth relative to all disturbance sources combined.

    Spikes count by their excess gain weighted by rate; infinite for a fully
    clean channel. Used only to order presets, not as a physical quantity.
    """
    disturbance = (
        config.noise_sigma
        + config.spike_probability * (config.spike_gain - 1.0)
        + config.drift_rate
    )
    if disturbance == 0:
        return math.inf
    return config.modulation_depth / disturbance


PRESETS: dict[str, ScenarioPreset] = {
    "noiseless": ScenarioPreset(
        "noiseless",
        ChannelConfig(base_gain=0.3, modulation_depth=0.05),
    ),
    "indoor_short": ScenarioPreset(
        "indoor_short",
        ChannelConfig(base_gain=0.3, modulation_depth=0.05, spike_probability=0.005),
    ),
    "indoor_long": ScenarioPreset(
        "indoor_long",
        ChannelConfig(base_gain=0.3, modulation_depth=0.02, spike_probability=0.01),
    ),
    "outdoor": ScenarioPreset(
        "outdoor",
        ChannelConfig(
            base_gain=0.3,
            modulation_depth=0.01,
            noise_sigma=0.12,
            spike_probability=0.02,
        ),
    ),
}


def get_preset(name: str) -> ScenarioPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown scenario {name!r}; choose from {sorted(PRESETS)}"
        ) from None
