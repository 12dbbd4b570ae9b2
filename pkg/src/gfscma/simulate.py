"""Monte Carlo driver: receiver chains, sweeps, and the paper-style experiments.

Chains
    one-step-mpa   detection -> estimation -> MPA on the whole potential list
    one-step-jmpa  detection -> estimation -> JMPA (zero-codeword activity test)
    two-step       detection -> estimation -> norm-threshold refinement -> MPA

Reproducibility: trial t of sweep point p uses the stream seeded by
(master_seed, salt, p, t), so results are independent of worker count and
execution order, chains and channels with equal seeds see identical draws,
and adding trials never changes earlier ones.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chanest import build_freq_prior, estimate_channels, extrapolate_data_gains
from .channel import get_profile, load_custom_profile, pilot_tone_freqs
from .codebooks import build_factor_graph, default_codebooks, load_codebook_file
from .config import SimConfig
from .decoder import DecoderInput, Survivor, jmpa_decode, mpa_decode
from .detection import FocussParams, detect_activity
from .metrics import PointSummary, TrialMetrics, compute_metrics
from .pilots import build_pilot_pool, pilot_matrix
from .refine import ThresholdCurve, raud_filter
from .uplink import draw_scenario, synth_data_rx, synth_pilot_rx

__all__ = ["SimSetup", "TrialResult", "build_setup", "run_trial", "run_point",
           "run_sweep", "experiment_false_alarm_injection", "experiment_histograms",
           "histogram_overlap", "write_sweep_csv", "SWEEP_SALT", "INJECT_SALT", "HIST_SALT"]

SWEEP_SALT = 0x5EED
INJECT_SALT = 0x1F0
HIST_SALT = 0x415


@dataclass(frozen=True)
class SimSetup:
    """Immutable per-run assets shared by every trial."""

    config: SimConfig
    pool: object
    graph: object
    codebooks: list
    profile: object
    prior: object
    S_unit: np.ndarray
    focuss: FocussParams
    curve: ThresholdCurve | None = None


@dataclass(frozen=True)
class TrialResult:
    """One frame's detection sets plus its pooled counts."""

    true_active: tuple[int, ...]
    detected_aud: tuple[int, ...]
    detected_final: tuple[int, ...]
    metrics: TrialMetrics


def build_setup(config: SimConfig, curve: ThresholdCurve | None = None) -> SimSetup:
    pool = build_pilot_pool(config.J, config.L, config.rb_count)
    graph = build_factor_graph(4, config.J, 2)
    if config.codebook_file:
        books = load_codebook_file(config.codebook_file, graph)
    else:
        _, books = default_codebooks(graph)
    if config.channel.startswith("custom:"):
        profile = load_custom_profile(config.channel.split(":", 1)[1])
    else:
        profile = get_profile(config.channel)
    prior_profile = profile if config.ce_prior == "genie" else get_profile(config.ce_prior)
    prior = build_freq_prior(prior_profile, pilot_tone_freqs(pool.Q))
    if curve is None and config.curve_file:
        curve = ThresholdCurve.from_json(config.curve_file)
    return SimSetup(config=config, pool=pool, graph=graph, codebooks=books,
                    profile=profile, prior=prior, S_unit=pilot_matrix(pool),
                    focuss=FocussParams(p=config.focuss_p, max_iter=config.focuss_iters),
                    curve=curve)


def _data_gains(setup: SimSetup, scenario, y_pilot, detected, sigma2):
    """Per-detected-UE gain vectors at the data tones, per the data-gain policy."""
    cfg = setup.config
    true_by_pilot = {ue.pilot: ue for ue in scenario.active}
    gains = {}
    need_extrapolation = [k for k in detected
                          if cfg.data_gain == "extrapolate" or k not in true_by_pilot]
    if need_extrapolation:
        prior_profile = setup.profile if cfg.ce_prior == "genie" else get_profile(cfg.ce_prior)
        ext = extrapolate_data_gains(y_pilot, setup.pool.sequences[need_extrapolation],
                                     sigma2, prior_profile, setup.pool.Q, setup.graph.T)
        gains.update(dict(zip(need_extrapolation, ext)))
    if cfg.data_gain == "genie":
        for k in detected:
            if k in true_by_pilot:
                gains[k] = true_by_pilot[k].channel.H_data
    return gains


def _survivors(setup: SimSetup, detected, gain_map) -> tuple[Survivor, ...]:
    pool, books = setup.pool, setup.codebooks
    return tuple(Survivor(label=int(k), codebook=books[pool.group_of[k] - 1],
                          gains=np.asarray(gain_map[k]))
                 for k in detected)


def _count_trial(setup: SimSetup, scenario, detected_set, decode_result) -> TrialMetrics:
    cfg = setup.config
    bit_errors = bits_total = 0
    for ue in scenario.active:
        n_bits = ue.bits.size
        if ue.pilot in decode_result.bits:
            bits_total += n_bits
            bit_errors += int(np.count_nonzero(decode_result.bits[ue.pilot] != ue.bits))
        elif cfg.ber_missed_full_error:
            bits_total += n_bits
            bit_errors += n_bits
    true_set = set(int(p) for p in scenario.active_pilots)
    missed = len(true_set - detected_set)
    false = len(detected_set - true_set)
    return TrialMetrics(n_active=cfg.n_active, n_inactive=cfg.K_total - cfg.n_active,
                        missed=missed, false_alarms=false,
                        bit_errors=bit_errors, bits_total=bits_total,
                        complexity_ops=decode_result.complexity_ops)


def run_trial(setup: SimSetup, snr_db: float, rng: np.random.Generator) -> TrialResult:
    """One frame through the configured chain."""
    cfg = setup.config
    sigma2 = 10.0 ** (-snr_db / 10.0)
    scenario = draw_scenario(setup.pool, setup.graph, setup.codebooks, setup.profile,
                             cfg.n_active, cfg.payload_symbols, rng,
                             allow_pilot_collisions=cfg.allow_pilot_collisions)
    y_pilot = synth_pilot_rx(scenario, setup.pool, sigma2, rng)
    y_data = synth_data_rx(scenario, setup.graph, sigma2, rng,
                           n_symbols=cfg.payload_symbols)

    est = detect_activity(setup.S_unit, y_pilot, sigma2, cfg.aud_threshold, setup.focuss)
    potential = est.potential_list

    if cfg.chain == "two-step":
        if setup.curve is None:
            raise ValueError("two-step chain needs a calibrated threshold curve "
                             "(set curve_file or pass a curve)")
        if potential.size:
            ce = estimate_channels(y_pilot, setup.pool.sequences[potential], sigma2,
                                   setup.prior, method=cfg.ce_method,
                                   pilot_indices=potential)
            refined = raud_filter(ce, setup.curve, snr_db)
            detected = [int(k) for k in refined.active_pilots]
        else:
            detected = []
        gain_map = _data_gains(setup, scenario, y_pilot, detected, sigma2)
        result = mpa_decode(DecoderInput(y_data=y_data,
                                         survivors=_survivors(setup, detected, gain_map),
                                         sigma2=sigma2, n_iter=cfg.mpa_iters))
        final = set(detected)
    elif cfg.chain == "one-step-jmpa":
        detected = [int(k) for k in potential]
        gain_map = _data_gains(setup, scenario, y_pilot, detected, sigma2)
        result = jmpa_decode(DecoderInput(y_data=y_data,
                                          survivors=_survivors(setup, detected, gain_map),
                                          sigma2=sigma2, n_iter=cfg.mpa_iters,
                                          mode="jmpa", jmpa_theta=cfg.jmpa_theta))
        final = {k for k, active in result.jmpa_active.items() if active}
    else:  # one-step-mpa
        detected = [int(k) for k in potential]
        gain_map = _data_gains(setup, scenario, y_pilot, detected, sigma2)
        result = mpa_decode(DecoderInput(y_data=y_data,
                                         survivors=_survivors(setup, detected, gain_map),
                                         sigma2=sigma2, n_iter=cfg.mpa_iters))
        final = set(detected)

    return TrialResult(true_active=tuple(int(p) for p in scenario.active_pilots),
                       detected_aud=tuple(int(k) for k in potential),
                       detected_final=tuple(sorted(final)),
                       metrics=_count_trial(setup, scenario, final, result))


def _trial_rng(seed: int, salt: int, point_idx: int, trial: int) -> np.random.Generator:
    return np.random.default_rng((seed, salt, point_idx, trial))


def _point_worker(args):
    cfg, curve, snr_db, point_idx, trials, salt = args
    setup = build_setup(cfg, curve)
    return [run_trial(setup, snr_db, _trial_rng(cfg.seed, salt, point_idx, t)).metrics
            for t in trials]


def run_point(setup: SimSetup, snr_db: float, point_idx: int,
              salt: int = SWEEP_SALT) -> list[TrialMetrics]:
    """All trials of one sweep point, optionally fanned out over processes."""
    cfg = setup.config
    trials = list(range(cfg.trials))
    if cfg.workers <= 1:
        return [run_trial(setup, snr_db, _trial_rng(cfg.seed, salt, point_idx, t)).metrics
                for t in trials]
    chunks = np.array_split(trials, cfg.workers)
    jobs = [(cfg, setup.curve, snr_db, point_idx, [int(t) for t in chunk], salt)
            for chunk in chunks if len(chunk)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        parts = list(pool.map(_point_worker, jobs))
    return [m for part in parts for m in part]


def run_sweep(config: SimConfig, curve: ThresholdCurve | None = None
              ) -> list[tuple[float, PointSummary]]:
    """Summaries per SNR point for the configured chain and channel."""
    setup = build_setup(config, curve)
    out = []
    for pi, snr in enumerate(config.snr_db):
        out.append((float(snr), compute_metrics(run_point(setup, float(snr), pi))))
    return out


def write_sweep_csv(path: str | Path, chain: str, channel: str,
                    rows: list[tuple[float, PointSummary]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["chain", "channel", "snr_db", "trials", "p_md", "p_md_ci",
                    "p_fa", "p_fa_ci", "ber", "ber_ci", "mean_complexity_ops"])
        for snr, s in rows:
            w.writerow([chain, channel, f"{snr:.10g}", s.trials,
                        f"{s.p_md:.10g}", f"{s.p_md_ci:.10g}",
                        f"{s.p_fa:.10g}", f"{s.p_fa_ci:.10g}",
                        f"{s.ber:.10g}", f"{s.ber_ci:.10g}",
                        f"{s.mean_complexity_ops:.10g}"])


def experiment_false_alarm_injection(config: SimConfig, n_injected: list[int],
                                     snr_db: float | None = None
                                     ) -> list[tuple[int, PointSummary]]:
    """BER vs forced false alarms under genie detection of the true actives.

    The scenario and noise of trial t are shared across injection counts, so
    n = 0 reproduces the genie baseline exactly and larger n adds exactly the
    injected interferers.
    """
    setup = build_setup(config)
    cfg = setup.config
    snr = float(config.snr_db[0] if snr_db is None else snr_db)
    sigma2 = 10.0 ** (-snr / 10.0)
    max_inactive = cfg.K_total - cfg.n_active
    for n in n_injected:
        if not 0 <= n <= max_inactive:
            raise ValueError(f"cannot inject {n} of {max_inactive} inactive UEs")

    out = []
    for n in sorted(n_injected):
        metrics = []
        for t in range(cfg.trials):
            rng = _trial_rng(cfg.seed, INJECT_SALT, 0, t)
            scenario = draw_scenario(setup.pool, setup.graph, setup.codebooks,
                                     setup.profile, cfg.n_active, cfg.payload_symbols,
                                     rng, allow_pilot_collisions=cfg.allow_pilot_collisions)
            y_pilot = synth_pilot_rx(scenario, setup.pool, sigma2, rng)
            y_data = synth_data_rx(scenario, setup.graph, sigma2, rng,
                                   n_symbols=cfg.payload_symbols)
            true_set = [int(p) for p in scenario.active_pilots]
            inactive = np.setdiff1d(np.arange(cfg.K_total), true_set)
            inj_rng = _trial_rng(cfg.seed, INJECT_SALT + 1, n, t)
            injected = inj_rng.choice(inactive, size=n, replace=False) if n else []
            detected = sorted(true_set + [int(k) for k in injected])
            gain_map = _data_gains(setup, scenario, y_pilot, detected, sigma2)
            result = mpa_decode(DecoderInput(y_data=y_data,
                                             survivors=_survivors(setup, detected, gain_map),
                                             sigma2=sigma2, n_iter=cfg.mpa_iters))
            metrics.append(_count_trial(setup, scenario, set(detected), result))
        out.append((n, compute_metrics(metrics)))
    return out


def histogram_overlap(values_a: np.ndarray, values_b: np.ndarray,
                      bins: int = 64) -> tuple[float, np.ndarray, np.ndarray]:
    """Overlap coefficient of two samples: bin on [0, 1] after joint max-normalization,
    normalize each histogram to unit mass, sum the bin-wise minima."""
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    peak = max(a.max(initial=0.0), b.max(initial=0.0))
    if peak <= 0:
        peak = 1.0
    ha, _ = np.histogram(a / peak, bins=bins, range=(0.0, 1.0))
    hb, _ = np.histogram(b / peak, bins=bins, range=(0.0, 1.0))
    pa = ha / max(ha.sum(), 1)
    pb = hb / max(hb.sum(), 1)
    return float(np.minimum(pa, pb).sum()), pa, pb


def experiment_histograms(config: SimConfig, snr_db: float | None = None,
                          bins: int = 64) -> dict:
    """Status-separated characteristic-value distributions for both receivers.

    The one-step receiver is characterized by the detector's |h_k|^2 over all
    pilots; the two-step receiver by the refinement statistic of the
    detector's candidates. Returns per-receiver histograms plus overlap
    coefficients.
    """
    from .refine import f_value  # local import keeps module deps one-way

    setup = build_setup(config)
    cfg = setup.config
    snr = float(config.snr_db[0] if snr_db is None else snr_db)
    sigma2 = 10.0 ** (-snr / 10.0)
    char_act, char_inact, f_act, f_inact = [], [], [], []
    for t in range(cfg.trials):
        rng = _trial_rng(cfg.seed, HIST_SALT, 0, t)
        scenario = draw_scenario(setup.pool, setup.graph, setup.codebooks, setup.profile,
                                 cfg.n_active, 1, rng,
                                 allow_pilot_collisions=cfg.allow_pilot_collisions)
        y_pilot = synth_pilot_rx(scenario, setup.pool, sigma2, rng)
        est = detect_activity(setup.S_unit, y_pilot, sigma2, cfg.aud_threshold, setup.focuss)
        active_mask = np.zeros(cfg.K_total, dtype=bool)
        active_mask[scenario.active_pilots] = True
        char_act.extend(est.char_values[active_mask])
        char_inact.extend(est.char_values[~active_mask])
        cand = est.potential_list
        if cand.size:
            ce = estimate_channels(y_pilot, setup.pool.sequences[cand], sigma2,
                                   setup.prior, method=cfg.ce_method, pilot_indices=cand)
            for k, g in zip(cand, ce.gains):
                fv = f_value(g, "l2")
                (f_act if active_mask[k] else f_inact).append(fv)
    ov1, p1a, p1i = histogram_overlap(np.array(char_act), np.array(char_inact), bins)
    ov2, p2a, p2i = histogram_overlap(np.array(f_act), np.array(f_inact), bins)
    return {
        "snr_db": snr,
        "one_step": {"overlap": ov1, "active": p1a, "inactive": p1i},
        "two_step": {"overlap": ov2, "active": p2a, "inactive": p2i},
        "bins": bins,
    }
