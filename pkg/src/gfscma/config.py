"""Simulation configuration: defaults, JSON config files, CLI overrides.

The default instance matches the reference system: 18 potential UEs (6
codebook groups x 3 cyclic shifts), 6 active per frame, 6-RB pilots, EPA/EVA
channels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

__all__ = ["SimConfig", "CHAINS", "parse_snr_spec", "load_config", "apply_overrides"]

CHAINS = ("one-step-mpa", "one-step-jmpa", "two-step")


@dataclass(frozen=True)
class SimConfig:
    """All knobs of one simulation run; JSON config files mirror these fields."""

    K_total: int = 18
    n_active: int = 6
    J: int = 6
    L: int = 3
    rb_count: int = 6
    channel: str = "epa"                 # epa | eva | flat | custom:<file>
    snr_db: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)
    trials: int = 2000
    chain: str = "one-step-mpa"
    aud_threshold: float = 0.01
    focuss_iters: int = 30
    focuss_p: float = 1.0
    ce_method: str = "mmse"              # mmse | ls
    ce_prior: str = "genie"              # genie | epa | eva | flat
    data_gain: str = "extrapolate"       # genie | extrapolate
    mpa_iters: int = 6
    jmpa_theta: float = 0.5
    payload_symbols: int = 1000
    codebook_file: str | None = None     # None = bundled default
    curve_file: str | None = None        # threshold curve for the two-step chain
    seed: int = 12345
    workers: int = 1
    ber_missed_full_error: bool = True   # count a missed UE's bits as all errored
    allow_pilot_collisions: bool = False

    def __post_init__(self):
        if self.K_total != self.J * self.L:
            raise ValueError(f"K_total={self.K_total} must equal J*L={self.J * self.L}")
        if not 0 < self.n_active <= self.K_total:
            raise ValueError(f"n_active={self.n_active} must be in 1..K_total={self.K_total}")
        if self.chain not in CHAINS:
            raise ValueError(f"unknown chain {self.chain!r}, expected one of {CHAINS}")
        if self.ce_method not in ("mmse", "ls"):
            raise ValueError(f"ce_method must be mmse or ls, got {self.ce_method!r}")
        if self.ce_prior not in ("genie", "epa", "eva", "flat"):
            raise ValueError(f"ce_prior must be genie/epa/eva/flat, got {self.ce_prior!r}")
        if self.data_gain not in ("genie", "extrapolate"):
            raise ValueError(f"data_gain must be genie or extrapolate, got {self.data_gain!r}")
        if self.trials < 1 or self.payload_symbols < 1:
            raise ValueError("trials and payload_symbols must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def parse_snr_spec(spec: str) -> tuple[float, ...]:
    """Parse "a:step:b" (inclusive) or a comma list / single value in dB."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"SNR range must be a:step:b, got {spec!r}")
        a, step, b = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("SNR step must be > 0")
        out = []
        v = a
        while v <= b + 1e-9:
            out.append(round(v, 9))
            v += step
        return tuple(out)
    return tuple(float(p) for p in spec.split(","))


def load_config(path: str | Path | None) -> SimConfig:
    """SimConfig from a JSON file (missing fields keep their defaults)."""
    if path is None:
        return SimConfig()
    with open(path) as fh:
        raw = json.load(fh)
    return apply_overrides(SimConfig(), raw)


def apply_overrides(cfg: SimConfig, overrides: dict) -> SimConfig:
    """Replace fields from a dict, ignoring None values; unknown keys raise."""
    known = {f.name for f in fields(SimConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    clean = {}
    for key, val in overrides.items():
        if val is None:
            continue
        if key == "snr_db":
            val = parse_snr_spec(val) if isinstance(val, str) else tuple(float(v) for v in val)
        clean[key] = val
    return replace(cfg, **clean)
