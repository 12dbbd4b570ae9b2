"""Second-step refinement of the potential UE list.

Each candidate that survives first-step detection gets a scalar statistic
from its estimated per-subcarrier gain vector: the 1- or 2-norm. Truly
active UEs keep most of their channel energy through estimation, while
candidates that only picked up noise and pilot leakage land near zero, so an
SNR-dependent threshold separates them.

The threshold curve is calibrated offline: run known-status trials per SNR
point, pool the statistics of active UEs, and set the threshold at their
q-quantile. That caps the refinement's added misses at about q while
rejecting as many false candidates as possible. The curve is forced
non-increasing in SNR by isotonic regression and is consumed at run time via
linear interpolation in dB, clamped at the grid ends.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import isotonic_regression

from .chanest import ChannelGainEstimate, build_freq_prior, estimate_channels
from .channel import get_profile, load_custom_profile, pilot_tone_freqs
from .codebooks import build_factor_graph, default_codebooks, load_codebook_file
from .config import SimConfig
from .detection import FocussParams, detect_activity
from .pilots import build_pilot_pool, pilot_matrix
from .uplink import draw_scenario, synth_pilot_rx

__all__ = ["ThresholdCurve", "RefinedList", "CalibrationError", "f_value",
           "raud_filter", "calibrate_threshold", "CALIBRATION_SALT"]

# seed-stream salt separating calibration draws from evaluation draws
CALIBRATION_SALT = 0xCA11B

NORM_KINDS = ("l1", "l2")


class CalibrationError(RuntimeError):
    """Calibration could not produce a usable threshold curve."""


def f_value(h_p: np.ndarray, norm_kind: str = "l2") -> float:
    """Norm of an estimated gain vector: sum|h| (l1) or sqrt(sum|h|^2) (l2)."""
    if norm_kind not in NORM_KINDS:
        raise ValueError(f"norm_kind must be l1 or l2, got {norm_kind!r}")
    mag = np.abs(np.asarray(h_p))
    return float(mag.sum()) if norm_kind == "l1" else float(np.sqrt((mag**2).sum()))


@dataclass(frozen=True)
class ThresholdCurve:
    """Calibrated threshold per SNR grid point, non-increasing in SNR."""

    snr_db: np.ndarray
    tau: np.ndarray
    norm_kind: str
    quantile_q: float
    trials: int
    seed: int

    def __post_init__(self):
        snr = np.asarray(self.snr_db, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        if snr.ndim != 1 or snr.size == 0 or snr.shape != tau.shape:
            raise ValueError("snr_db and tau must be equal-length 1-D arrays")
        if np.any(np.diff(snr) <= 0):
            raise ValueError("snr_db grid must be strictly increasing")
        if np.any(tau < 0):
            raise ValueError("thresholds must be >= 0")
        object.__setattr__(self, "snr_db", snr)
        object.__setattr__(self, "tau", tau)

    def threshold_at(self, snr_db: float) -> float:
        """Linear interpolation on the dB grid, clamped outside it."""
        return float(np.interp(snr_db, self.snr_db, self.tau))

    def to_json(self, path: str | Path) -> None:
        payload = {
            "norm": self.norm_kind,
            "q": self.quantile_q,
            "snr_db": [float(v) for v in self.snr_db],
            "tau": [float(v) for v in self.tau],
            "trials": self.trials,
            "seed": self.seed,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path: str | Path) -> "ThresholdCurve":
        with open(path) as fh:
            raw = json.load(fh)
        try:
            return cls(snr_db=np.asarray(raw["snr_db"], float),
                       tau=np.asarray(raw["tau"], float),
                       norm_kind=raw["norm"], quantile_q=float(raw["q"]),
                       trials=int(raw["trials"]), seed=int(raw["seed"]))
        except KeyError as exc:
            raise ValueError(f"threshold curve {path} missing field {exc}") from exc


@dataclass(frozen=True)
class RefinedList:
    """Survivors of the refinement step; a subset of the candidate list."""

    active_pilots: np.ndarray     # kept pilot labels, ascending
    gains: np.ndarray             # (R, Q) kept gain vectors
    f_values: np.ndarray          # statistic per input candidate (aligned to input)
    threshold: float


def raud_filter(estimates: ChannelGainEstimate, curve: ThresholdCurve,
                snr_db: float) -> RefinedList:
    """Keep candidates whose statistic reaches the interpolated threshold.

    The comparison is inclusive (>=); retained gain vectors pass through
    unchanged, the rest are dropped. An empty candidate list yields an empty
    result.
    """
    tau = curve.threshold_at(snr_db)
    if estimates.gains.shape[0] == 0:
        return RefinedList(active_pilots=np.array([], dtype=int),
                           gains=estimates.gains, f_values=np.array([]), threshold=tau)
    fv = np.array([f_value(g, curve.norm_kind) for g in estimates.gains])
    keep = fv >= tau
    return RefinedList(active_pilots=np.asarray(estimates.pilots)[keep],
                       gains=estimates.gains[keep], f_values=fv, threshold=tau)


def _resolve_profile(channel: str):
    if channel.startswith("custom:"):
        return load_custom_profile(channel.split(":", 1)[1])
    return get_profile(channel)


def calibrate_threshold(config: SimConfig, snr_grid=None, trials_per_point: int | None = None,
                        quantile_q: float = 0.005, norm_kind: str = "l2",
                        seed: int | None = None,
                        calibration_aud_threshold: float | None = None) -> ThresholdCurve:
    """Known-status calibration of the threshold curve.

    Per SNR point, runs detection (at a deliberately lowered first-step
    threshold so inactive UEs reach the estimator) and channel estimation on
    drawn scenarios, pools the statistics by true status, and takes the
    q-quantile of the active distribution. The raw quantiles are isotonically
    regressed to be non-increasing in SNR. Raises CalibrationError when some
    SNR point contributes no active or no inactive samples.
    """
    if norm_kind not in NORM_KINDS:
        raise ValueError(f"norm_kind must be l1 or l2, got {norm_kind!r}")
    if not 0 < quantile_q < 1:
        raise ValueError(f"quantile must be in (0, 1), got {quantile_q}")
    snr_grid = np.asarray(config.snr_db if snr_grid is None else snr_grid, dtype=float)
    trials = config.trials if trials_per_point is None else int(trials_per_point)
    if trials < 500:
        raise ValueError(f"calibration needs >= 500 trials per point, got {trials}")
    seed = config.seed if seed is None else seed
    lam_cal = calibration_aud_threshold
    if lam_cal is None:
        lam_cal = config.aud_threshold / 10.0

    pool = build_pilot_pool(config.J, config.L, config.rb_count)
    graph = build_factor_graph(4, config.J, 2)
    if config.codebook_file:
        books = load_codebook_file(config.codebook_file, graph)
    else:
        _, books = default_codebooks(graph)
    profile = _resolve_profile(config.channel)
    prior_profile = profile if config.ce_prior == "genie" else get_profile(config.ce_prior)
    prior = build_freq_prior(prior_profile, pilot_tone_freqs(pool.Q))
    S_unit = pilot_matrix(pool)
    focuss_params = FocussParams(p=config.focuss_p, max_iter=config.focuss_iters)

    raw_tau = np.zeros(snr_grid.size)
    for pi, snr in enumerate(snr_grid):
        sigma2 = 10.0 ** (-snr / 10.0)
        active_f, inactive_f = [], []
        for t in range(trials):
            rng = np.random.default_rng((seed, CALIBRATION_SALT, pi, t))
            scenario = draw_scenario(pool, graph, books, profile, config.n_active,
                                     payload_symbols=1, rng=rng,
                                     allow_pilot_collisions=config.allow_pilot_collisions)
            y = synth_pilot_rx(scenario, pool, sigma2, rng)
            est = detect_activity(S_unit, y, sigma2, lam_cal, focuss_params)
            cand = est.potential_list
            if cand.size == 0:
                continue
            ce = estimate_channels(y, pool.sequences[cand], sigma2, prior,
                                   method=config.ce_method, pilot_indices=cand)
            truly_active = np.isin(cand, scenario.active_pilots)
            for g, act in zip(ce.gains, truly_active):
                (active_f if act else inactive_f).append(f_value(g, norm_kind))
        if not active_f or not inactive_f:
            missing = "active" if not active_f else "inactive"
            raise CalibrationError(
                f"no {missing} samples at SNR {snr:g} dB; lower the calibration "
                f"threshold or add trials")
        raw_tau[pi] = np.quantile(np.asarray(active_f), quantile_q)

    tau = isotonic_regression(raw_tau, increasing=False).x
    tau = np.maximum(tau, 0.0)
    return ThresholdCurve(snr_db=snr_grid, tau=tau, norm_kind=norm_kind,
                          quantile_q=quantile_q, trials=trials, seed=seed)
