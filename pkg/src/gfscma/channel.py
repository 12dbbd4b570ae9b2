"""Frequency-selective block-fading channel.

Each UE sees one tapped-delay-line realization per frame (Rayleigh taps,
constant over the pilot window and all data symbols of the frame). EPA and
EVA delay/power tables follow the 3GPP multipath profiles; custom profiles
load from JSON. Tap powers are normalized so E[sum |tap|^2] = 1, keeping the
SNR bookkeeping sigma2 = 10^(-snr_db/10) meaningful for unit-energy
codewords.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "SUBCARRIER_SPACING_HZ",
    "TdlProfile",
    "ChannelRealization",
    "get_profile",
    "load_custom_profile",
    "sample_realization",
    "freq_response",
    "add_awgn",
    "pilot_tone_freqs",
    "data_tone_freqs",
]

SUBCARRIER_SPACING_HZ = 15e3

# 3GPP EPA / EVA tapped-delay-line tables (delay ns, mean power dB).
_EPA = ([0.0, 30.0, 70.0, 90.0, 110.0, 190.0, 410.0],
        [0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8])
_EVA = ([0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0],
        [0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9])
_FLAT = ([0.0], [0.0])


@dataclass(frozen=True)
class TdlProfile:
    """Tapped-delay-line profile with unit total mean power."""

    name: str
    delays_ns: np.ndarray
    powers_lin: np.ndarray  # normalized to sum 1

    def __post_init__(self):
        d = np.asarray(self.delays_ns, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("profile needs at least one tap")
        if np.any(np.diff(d) <= 0) and d.size > 1:
            raise ValueError("tap delays must be strictly increasing")
        p = np.asarray(self.powers_lin, dtype=float)
        if p.shape != d.shape:
            raise ValueError("delays and powers must have equal length")
        object.__setattr__(self, "delays_ns", d)
        object.__setattr__(self, "powers_lin", p / p.sum())

    @property
    def delays_s(self) -> np.ndarray:
        return self.delays_ns * 1e-9

    @property
    def n_taps(self) -> int:
        return self.delays_ns.size


def _from_db(delays, powers_db, name) -> TdlProfile:
    return TdlProfile(name=name, delays_ns=np.asarray(delays, float),
                      powers_lin=10.0 ** (np.asarray(powers_db, float) / 10.0))


def get_profile(name: str) -> TdlProfile:
    """Built-in profile by name: epa, eva or flat."""
    key = name.lower()
    if key == "epa":
        return _from_db(*_EPA, "EPA")
    if key == "eva":
        return _from_db(*_EVA, "EVA")
    if key == "flat":
        return _from_db(*_FLAT, "FLAT")
    raise ValueError(f"unknown channel profile {name!r} (expected epa/eva/flat)")


def load_custom_profile(path: str | Path) -> TdlProfile:
    """Load a profile from JSON {"name", "delays_ns", "powers_db"}."""
    with open(path) as fh:
        raw = json.load(fh)
    try:
        return _from_db(raw["delays_ns"], raw["powers_db"], raw.get("name", "CUSTOM"))
    except KeyError as exc:
        raise ValueError(f"custom profile {path} missing field {exc}") from exc


def pilot_tone_freqs(Q: int) -> np.ndarray:
    """Pilot subcarrier frequencies (Hz, relative to the band start)."""
    return np.arange(Q) * SUBCARRIER_SPACING_HZ


def data_tone_freqs(Q: int, T: int) -> np.ndarray:
    """Data resources sit on T contiguous tones adjacent to the pilot band."""
    return (Q + np.arange(T)) * SUBCARRIER_SPACING_HZ


def freq_response(taps: np.ndarray, delays_s: np.ndarray, tone_freqs: np.ndarray) -> np.ndarray:
    """H[f] = sum_l tap_l * exp(-j*2*pi*f*tau_l) at the given tone frequencies."""
    taps = np.asarray(taps)
    delays_s = np.asarray(delays_s, dtype=float)
    if taps.shape != delays_s.shape:
        raise ValueError("taps and delays must have equal length")
    return np.exp(-2j * np.pi * np.outer(tone_freqs, delays_s)) @ taps


@dataclass(frozen=True)
class ChannelRealization:
    """One UE's block-fading draw: taps plus per-tone responses."""

    taps: np.ndarray
    H_pilot: np.ndarray
    H_data: np.ndarray


def sample_realization(profile: TdlProfile, Q: int, T: int,
                       rng: np.random.Generator) -> ChannelRealization:
    """Draw Rayleigh taps (tap_l ~ CN(0, P_l)) and derive tone responses."""
    p = profile.powers_lin
    taps = (rng.standard_normal(p.size) + 1j * rng.standard_normal(p.size)) * np.sqrt(p / 2.0)
    return ChannelRealization(
        taps=taps,
        H_pilot=freq_response(taps, profile.delays_s, pilot_tone_freqs(Q)),
        H_data=freq_response(taps, profile.delays_s, data_tone_freqs(Q, T)),
    )


def add_awgn(x: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """y = x + n with n i.i.d. CN(0, sigma2) per component."""
    if sigma2 < 0:
        raise ValueError(f"noise variance must be >= 0, got {sigma2}")
    if sigma2 == 0:
        return np.array(x, copy=True)
    n = (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)) * np.sqrt(sigma2 / 2.0)
    return x + n
