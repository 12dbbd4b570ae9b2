"""Joint channel estimation over the pilot window for the potential UEs.

The observation stacks P per-subcarrier gain vectors: y = A h + n with
A = [diag(s_1) ... diag(s_P)] of size Q x PQ. The system is underdetermined
for P > 1, so the MMSE path regularizes with a frequency-correlation prior
derived from an assumed power-delay profile. The LS path is the minimum-norm
least-squares solution, kept for oracle and diagnostic use.

All solves go through the Q x Q Gram form G = sum_p diag(s_p) R diag(s_p)^H
+ sigma2 I, so cost does not grow with P beyond assembling G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import TdlProfile, data_tone_freqs, pilot_tone_freqs

__all__ = ["FreqPrior", "ChannelGainEstimate", "build_freq_prior",
           "estimate_channels", "extrapolate_data_gains"]


@dataclass(frozen=True)
class FreqPrior:
    """Hermitian PSD frequency-correlation matrix with unit diagonal."""

    R_h: np.ndarray
    profile_name: str = ""


def _correlation(profile: TdlProfile, f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """E[H(f1) H(f2)^*] = sum_l P_l exp(-j*2*pi*(f1-f2)*tau_l)."""
    df = f1[:, None] - f2[None, :]
    phases = np.exp(-2j * np.pi * df[:, :, None] * profile.delays_s[None, None, :])
    return phases @ profile.powers_lin


def build_freq_prior(profile: TdlProfile, tone_freqs: np.ndarray) -> FreqPrior:
    """Correlation of the channel across the given tones under the profile."""
    R = _correlation(profile, tone_freqs, tone_freqs)
    return FreqPrior(R_h=R, profile_name=profile.name)


@dataclass(frozen=True)
class ChannelGainEstimate:
    """Per-potential-UE estimated gain vectors over the pilot tones."""

    pilots: np.ndarray        # candidate pilot indices, aligned with rows of gains
    gains: np.ndarray         # (P, Q) complex
    method: str               # "mmse" or "ls"


def _gram(seqs: np.ndarray, R: np.ndarray, sigma2: float) -> np.ndarray:
    Q = seqs.shape[1]
    G = sigma2 * np.eye(Q, dtype=complex)
    for s in seqs:
        G += (s[:, None] * R) * s.conj()[None, :]
    return G


def estimate_channels(y_pilot: np.ndarray, pilot_seqs: np.ndarray, sigma2: float,
                      prior: FreqPrior | None = None, method: str = "mmse",
                      pilot_indices: np.ndarray | None = None) -> ChannelGainEstimate:
    """Estimate each candidate's per-subcarrier gain vector from y_pilot.

    MMSE: h_p = R diag(s_p)^H G^-1 y with G = sum_q diag(s_q) R diag(s_q)^H
    + sigma2 I. LS: minimum-norm solution h_p = diag(s_p)^H (sum_q diag(|s_q|^2)
    + 0)^-1 y, which for unit-modulus pilots is the matched filter scaled by
    1/P. Raises a LinAlgError when G is singular (possible only at sigma2 = 0
    with a rank-deficient prior).
    """
    pilot_seqs = np.atleast_2d(np.asarray(pilot_seqs))
    P, Q = pilot_seqs.shape
    if P < 1:
        raise ValueError("need at least one candidate pilot")
    if y_pilot.shape != (Q,):
        raise ValueError(f"y_pilot shape {y_pilot.shape} does not match Q={Q}")
    if pilot_indices is None:
        pilot_indices = np.arange(P)

    if method == "ls":
        scale = (np.abs(pilot_seqs) ** 2).sum(axis=0)
        gains = pilot_seqs.conj() * (y_pilot / scale)[None, :]
        return ChannelGainEstimate(pilots=np.asarray(pilot_indices), gains=gains, method="ls")

    if method != "mmse":
        raise ValueError(f"unknown estimation method {method!r} (expected mmse or ls)")
    if prior is None:
        raise ValueError("MMSE estimation needs a frequency prior")
    G = _gram(pilot_seqs, prior.R_h, sigma2)
    try:
        np.linalg.cholesky(G)  # positive-definiteness gate
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"MMSE system singular (sigma2={sigma2}, prior={prior.profile_name!r})") from exc
    z = np.linalg.solve(G, y_pilot)
    gains = (prior.R_h @ (pilot_seqs.conj().T * z[:, None])).T
    return ChannelGainEstimate(pilots=np.asarray(pilot_indices), gains=gains, method="mmse")


def extrapolate_data_gains(y_pilot: np.ndarray, pilot_seqs: np.ndarray, sigma2: float,
                           profile: TdlProfile, Q: int, T: int) -> np.ndarray:
    """Wiener extrapolation of each candidate's gains onto the T data tones.

    Uses the cross-correlation between data and pilot tones under the profile:
    g_p = R_dp diag(s_p)^H G^-1 y. Shares the Gram solve with the MMSE
    estimator.
    """
    pilot_seqs = np.atleast_2d(np.asarray(pilot_seqs))
    fp = pilot_tone_freqs(Q)
    fd = data_tone_freqs(Q, T)
    R_pp = _correlation(profile, fp, fp)
    R_dp = _correlation(profile, fd, fp)
    G = _gram(pilot_seqs, R_pp, sigma2)
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"data-gain system singular (sigma2={sigma2})") from exc
    z = np.linalg.solve(G, y_pilot)
    return (R_dp @ (pilot_seqs.conj().T * z[:, None])).T
