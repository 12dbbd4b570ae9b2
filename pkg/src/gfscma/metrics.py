"""Per-trial counting and pooled detection/error statistics.

Miss detection is the fraction of truly active UEs declared inactive; false
alarm is the fraction of truly inactive UEs declared active. Both are pooled
over trials (sum of counts over sum of denominators), BER is pooled over
bits, and each rate carries a 95% Wilson confidence half-width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TrialMetrics", "PointSummary", "compute_metrics", "wilson_interval"]

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class TrialMetrics:
    """Counts from one frame."""

    n_active: int
    n_inactive: int
    missed: int
    false_alarms: int
    bit_errors: int
    bits_total: int
    complexity_ops: int

    def __post_init__(self):
        if not 0 <= self.missed <= self.n_active:
            raise ValueError(f"missed={self.missed} outside 0..n_active={self.n_active}")
        if not 0 <= self.false_alarms <= self.n_inactive:
            raise ValueError(
                f"false_alarms={self.false_alarms} outside 0..n_inactive={self.n_inactive}")
        if self.bit_errors > self.bits_total:
            raise ValueError("bit_errors exceeds bits_total")


@dataclass(frozen=True)
class PointSummary:
    """Pooled statistics of one sweep point."""

    trials: int
    p_md: float
    p_md_ci: float
    p_fa: float
    p_fa_ci: float
    ber: float
    ber_ci: float
    mean_complexity_ops: float


def wilson_interval(successes: int, total: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial rate; (0, 0)..(0, 1) style bounds."""
    if total <= 0:
        return (0.0, 1.0)
    p = successes / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / total + z * z / (4 * total * total))
    return (max(0.0, center - half), min(1.0, center + half))


def _rate_with_ci(successes: int, total: int) -> tuple[float, float]:
    if total <= 0:
        return 0.0, 0.0
    lo, hi = wilson_interval(successes, total)
    return successes / total, (hi - lo) / 2.0


def compute_metrics(trials: list[TrialMetrics]) -> PointSummary:
    """Pool counts over trials into rates with 95% Wilson half-widths."""
    if not trials:
        raise ValueError("no trials to aggregate")
    missed = sum(t.missed for t in trials)
    n_act = sum(t.n_active for t in trials)
    false = sum(t.false_alarms for t in trials)
    n_inact = sum(t.n_inactive for t in trials)
    errs = sum(t.bit_errors for t in trials)
    bits = sum(t.bits_total for t in trials)
    p_md, p_md_ci = _rate_with_ci(missed, n_act)
    p_fa, p_fa_ci = _rate_with_ci(false, n_inact)
    ber, ber_ci = _rate_with_ci(errs, bits)
    return PointSummary(
        trials=len(trials),
        p_md=p_md, p_md_ci=p_md_ci,
        p_fa=p_fa, p_fa_ci=p_fa_ci,
        ber=ber, ber_ci=ber_ci,
        mean_complexity_ops=float(np.mean([t.complexity_ops for t in trials])),
    )
