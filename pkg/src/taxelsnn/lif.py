"""Discrete-time leaky integrate-and-fire dynamics and the spike surrogate.

One step of the simplified membrane recurrence:

    u_new = beta * (u_reset if fired_last_step else u_prev) + input_current
    fire  = u_new >= u_threshold

i.e. the hard reset is folded into the next step's decay term: whenever the
neuron fired, the decay restarts from the reset potential. Each step is a
pure function of (state, input), so batched samples can run in parallel.

Spikes are non-differentiable, so training substitutes a rectangular
window for d(spike)/du: constant 1/a inside the open interval
(u_threshold - a/2, u_threshold + a/2), zero outside. ``relaxed_spike`` is
the piecewise-linear ramp whose exact derivative is that window almost
everywhere; it exists so the backward pass can be validated against finite
differences on a fully differentiable stand-in network.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LifConfig:
    beta: float = 0.2
    u_threshold: float = 0.5
    u_reset: float = 0.0
    surrogate_width: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must be in [0, 1), got {self.beta}")
        if not self.u_reset < self.u_threshold:
            raise ValueError("u_reset must be below u_threshold")
        if not self.surrogate_width > 0:
            raise ValueError("surrogate_width must be positive")


@dataclass(frozen=True)
class LifState:
    """Membrane potentials and the previous step's binary outputs."""

    membrane: np.ndarray
    spikes: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "LifState":
        return cls(np.zeros(shape), np.zeros(shape))


def membrane_update(u_prev: np.ndarray, fired_prev: np.ndarray,
                    current: np.ndarray, cfg: LifConfig):
    """Core recurrence shared by lif_step and the network forward pass.

    Returns (u_new, fired_new). The reset branch selects u_reset exactly
    (no compensated arithmetic), so traces are bit-reproducible against a
    scalar reference simulation.
    """
    decayed_from = np.where(fired_prev > 0, cfg.u_reset, u_prev)
    u_new = cfg.beta * decayed_from + current
    fired = (u_new >= cfg.u_threshold).astype(np.float64)
    return u_new, fired


def lif_step(state: LifState, input_current: np.ndarray, cfg: LifConfig) -> LifState:
    """Advance one timestep; rejects non-finite input currents."""
    current = np.asarray(input_current, dtype=np.float64)
    if current.shape != state.membrane.shape:
        raise ValueError(f"input shape {current.shape} != state shape {state.membrane.shape}")
    if not np.all(np.isfinite(current)):
        raise ValueError("input current contains non-finite values")
    u, fired = membrane_update(state.membrane, state.spikes, current, cfg)
    return LifState(u, fired)


def surrogate_grad(u: np.ndarray, cfg: LifConfig) -> np.ndarray:
    """Rectangular stand-in for d(spike)/du, with strict window edges."""
    u = np.asarray(u, dtype=np.float64)
    half = cfg.surrogate_width / 2.0
    inside = np.abs(u - cfg.u_threshold) < half
    return inside / cfg.surrogate_width


def relaxed_spike(u: np.ndarray, cfg: LifConfig) -> np.ndarray:
    """Ramp from 0 to 1 across the surrogate window, centered on threshold."""
    u = np.asarray(u, dtype=np.float64)
    ramp = (u - cfg.u_threshold) / cfg.surrogate_width + 0.5
    return np.clip(ramp, 0.0, 1.0)
