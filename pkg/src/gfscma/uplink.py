"""Ground-truth uplink synthesis: who transmits, and what the receiver sees.

A scenario draws the active UEs (each one a pilot pick, which implies its
codebook group), their block-fading channels and their payload bits. The
received pilot window superposes the per-subcarrier faded pilots; each
received data symbol superposes the faded codewords.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, TdlProfile, add_awgn, sample_realization
from .codebooks import Codebook, FactorGraph, encode
from .pilots import PilotPool

__all__ = ["ActiveUe", "Scenario", "ReceivedFrame", "draw_scenario",
           "synth_pilot_rx", "synth_data_rx"]


@dataclass(frozen=True)
class ActiveUe:
    """One active UE: chosen pilot (and implied codebook) plus its channel and bits."""

    pilot: int                     # 0-based index into the pool
    group: int                     # 1-based codebook group
    channel: ChannelRealization
    bits: np.ndarray
    symbol_indices: np.ndarray     # codeword index per data symbol
    codewords: np.ndarray          # (n_symbols, T)


@dataclass(frozen=True)
class Scenario:
    """The ground truth for one frame."""

    K_total: int
    active: tuple[ActiveUe, ...]

    @property
    def active_pilots(self) -> np.ndarray:
        return np.array([ue.pilot for ue in self.active], dtype=int)


@dataclass(frozen=True)
class ReceivedFrame:
    """What the receiver observes for one frame."""

    y_pilot: np.ndarray   # (Q,)
    y_data: np.ndarray    # (n_symbols, T)
    sigma2: float


def draw_scenario(pool: PilotPool, graph: FactorGraph, codebooks: list[Codebook],
                  profile: TdlProfile, n_active: int, payload_symbols: int,
                  rng: np.random.Generator, allow_pilot_collisions: bool = False) -> Scenario:
    """Draw active UEs, their channels and payloads.

    Pilots are drawn without replacement by default; the collision switch
    exists for stress tests only.
    """
    if n_active > pool.K and not allow_pilot_collisions:
        raise ValueError(f"cannot draw {n_active} distinct pilots from a pool of {pool.K}")
    picks = rng.choice(pool.K, size=n_active, replace=allow_pilot_collisions)
    ues = []
    for pilot in np.sort(picks):
        group = int(pool.group_of[pilot])
        cb = codebooks[group - 1]
        ch = sample_realization(profile, pool.Q, graph.T, rng)
        bits = rng.integers(0, 2, size=payload_symbols * cb.bits_per_symbol)
        stream, words = encode(bits, cb)
        ues.append(ActiveUe(pilot=int(pilot), group=group, channel=ch, bits=bits,
                            symbol_indices=stream.symbols, codewords=words))
    return Scenario(K_total=pool.K, active=tuple(ues))


def synth_pilot_rx(scenario: Scenario, pool: PilotPool, sigma2: float,
                   rng: np.random.Generator) -> np.ndarray:
    """y_pilot = sum_p diag(H_pilot,p) s_p + n over the Q pilot tones.

    Synthesis uses the accurate per-subcarrier model; the flat approximation
    exists only inside the activity detector.
    """
    y = np.zeros(pool.Q, dtype=complex)
    for ue in scenario.active:
        if not 0 <= ue.pilot < pool.K:
            raise ValueError(f"pilot index {ue.pilot} outside pool of size {pool.K}")
        y += ue.channel.H_pilot * pool.sequences[ue.pilot]
    return add_awgn(y, sigma2, rng)


def synth_data_rx(scenario: Scenario, graph: FactorGraph, sigma2: float,
                  rng: np.random.Generator, n_symbols: int | None = None) -> np.ndarray:
    """Per data symbol: y = sum_p diag(H_data,p) x_p + n over the T resources.

    Inactive UEs contribute nothing (all-zero codewords). Shorter payloads are
    zero-padded up to the frame length.
    """
    if n_symbols is None:
        n_symbols = max((ue.codewords.shape[0] for ue in scenario.active), default=0)
    y = np.zeros((n_symbols, graph.T), dtype=complex)
    for ue in scenario.active:
        words = ue.codewords
        gains = ue.channel.H_data[None, :]
        n = min(words.shape[0], n_symbols)
        y[:n] += words[:n] * gains
    return add_awgn(y, sigma2, rng)
