"""Command-line interface.

Subcommands
    run          sweep one or more chains/channels, writing one CSV per pair
    calibrate    offline threshold-curve calibration, writing a curve JSON
    inject-fa    BER vs forced false alarms at one SNR (genie detection)
    histograms   status-separated characteristic-value histograms + overlaps
    dump-pilots  normalized pilot matrix as CSV

Flags override the JSON config file, which overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from .config import CHAINS, SimConfig, apply_overrides, load_config, parse_snr_spec
from .pilots import build_pilot_pool, pilot_matrix_csv
from .refine import calibrate_threshold
from .simulate import (experiment_false_alarm_injection, experiment_histograms,
                       run_sweep, write_sweep_csv)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--snr", type=str, default=None, help="a:step:b (dB, inclusive) or comma list")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--channel", type=str, default=None,
                   help="comma list of epa/eva/flat/custom:<file>")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory or file")
    p.add_argument("--aud-threshold", type=float, default=None)
    p.add_argument("--focuss-iters", type=int, default=None)
    p.add_argument("--ce-method", choices=("mmse", "ls"), default=None)
    p.add_argument("--ce-prior", choices=("genie", "epa", "eva", "flat"), default=None)
    p.add_argument("--data-gain", choices=("genie", "extrapolate"), default=None)
    p.add_argument("--mpa-iters", type=int, default=None)
    p.add_argument("--jmpa-theta", type=float, default=None)
    p.add_argument("--payload-symbols", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)


def _config_from(args, channel: str | None = None) -> SimConfig:
    cfg = load_config(args.config)
    overrides = {
        "seed": args.seed,
        "snr_db": args.snr,
        "trials": args.trials,
        "aud_threshold": args.aud_threshold,
        "focuss_iters": args.focuss_iters,
        "ce_method": args.ce_method,
        "ce_prior": args.ce_prior,
        "data_gain": args.data_gain,
        "mpa_iters": args.mpa_iters,
        "jmpa_theta": args.jmpa_theta,
        "payload_symbols": args.payload_symbols,
        "workers": args.workers,
    }
    cfg = apply_overrides(cfg, overrides)
    if channel is not None:
        cfg = replace(cfg, channel=channel)
    return cfg


def _channels(args, cfg: SimConfig) -> list[str]:
    if args.channel is None:
        return [cfg.channel]
    return [c.strip() for c in args.channel.split(",") if c.strip()]


def _channel_tag(channel: str) -> str:
    return channel.replace("custom:", "custom_").replace("/", "_").replace(".", "_")


def _cmd_run(args) -> int:
    chains = [c.strip() for c in args.chain.split(",") if c.strip()]
    for chain in chains:
        if chain not in CHAINS:
            raise SystemExit(f"unknown chain {chain!r}, expected one of {CHAINS}")
    curve_map = {}
    for spec in args.curve or []:
        if "=" in spec:
            key, path = spec.split("=", 1)
            curve_map[key] = path
        else:
            curve_map["*"] = spec
    args.out.mkdir(parents=True, exist_ok=True)
    base = _config_from(args)
    for channel in _channels(args, base):
        for chain in chains:
            cfg = replace(_config_from(args, channel), chain=chain)
            if chain == "two-step":
                curve_file = curve_map.get(channel, curve_map.get("*"))
                if curve_file is None:
                    raise SystemExit(f"two-step chain over {channel} needs --curve "
                                     "(or key=path per channel)")
                cfg = replace(cfg, curve_file=str(curve_file))
            rows = run_sweep(cfg)
            path = args.out / f"sweep_{chain}_{_channel_tag(channel)}.csv"
            write_sweep_csv(path, chain, channel, rows)
            print(f"wrote {path}")
    return 0


def _cmd_calibrate(args) -> int:
    cfg = _config_from(args)
    channels = _channels(args, cfg)
    if len(channels) != 1:
        raise SystemExit("calibrate one channel at a time")
    cfg = replace(cfg, channel=channels[0])
    curve = calibrate_threshold(cfg, quantile_q=args.q, norm_kind=args.norm)
    out = args.out
    if out.is_dir():
        out = out / f"curve_{_channel_tag(cfg.channel)}_{args.norm}.json"
    curve.to_json(out)
    print(f"wrote {out}")
    return 0


def _cmd_inject(args) -> int:
    cfg = _config_from(args)
    channels = _channels(args, cfg)
    if len(channels) != 1:
        raise SystemExit("inject-fa runs one channel at a time")
    cfg = replace(cfg, channel=channels[0])
    n_list = [int(v) for v in args.inject.split(",")]
    snr = cfg.snr_db[0]
    table = experiment_false_alarm_injection(cfg, n_list, snr_db=snr)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"inject_fa_{_channel_tag(cfg.channel)}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "snr_db", "n_injected", "trials", "ber", "ber_ci",
                    "mean_complexity_ops"])
        for n, s in table:
            w.writerow([cfg.channel, f"{snr:.10g}", n, s.trials,
                        f"{s.ber:.10g}", f"{s.ber_ci:.10g}",
                        f"{s.mean_complexity_ops:.10g}"])
    print(f"wrote {path}")
    return 0


def _cmd_histograms(args) -> int:
    cfg = _config_from(args)
    args.out.mkdir(parents=True, exist_ok=True)
    overlap_rows = []
    for channel in _channels(args, cfg):
        ccfg = replace(cfg, channel=channel)
        res = experiment_histograms(ccfg, snr_db=ccfg.snr_db[0])
        for receiver in ("one_step", "two_step"):
            data = res[receiver]
            path = args.out / f"hist_{receiver}_{_channel_tag(channel)}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["bin_lo", "bin_hi", "active", "inactive"])
                edges = [i / res["bins"] for i in range(res["bins"] + 1)]
                for i in range(res["bins"]):
                    w.writerow([f"{edges[i]:.10g}", f"{edges[i + 1]:.10g}",
                                f"{data['active'][i]:.10g}", f"{data['inactive'][i]:.10g}"])
            overlap_rows.append((receiver, channel, res["snr_db"], data["overlap"]))
            print(f"wrote {path}")
    path = args.out / "hist_overlaps.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["receiver", "channel", "snr_db", "overlap"])
        for rec, ch, snr, ov in overlap_rows:
            w.writerow([rec, ch, f"{snr:.10g}", f"{ov:.10g}"])
    print(f"wrote {path}")
    return 0


def _cmd_dump_pilots(args) -> int:
    cfg = _config_from(args)
    out = args.out
    if out.is_dir():
        out = out / "pilot_matrix.csv"
    pool = build_pilot_pool(cfg.J, cfg.L, cfg.rb_count)
    out.write_text(pilot_matrix_csv(pool))
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gfscma",
                                 description="Uplink grant-free SCMA link-level simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a detection/decoding sweep")
    _common_flags(p)
    p.add_argument("--chain", type=str, default="one-step-mpa",
                   help="comma list of " + "/".join(CHAINS))
    p.add_argument("--curve", action="append", default=None,
                   help="threshold curve JSON; repeatable as channel=path")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("calibrate", help="calibrate the refinement threshold curve")
    _common_flags(p)
    p.add_argument("--norm", choices=("l1", "l2"), default="l2")
    p.add_argument("--q", type=float, default=0.005, help="active-statistic quantile")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("inject-fa", help="BER vs forced false alarms (genie detection)")
    _common_flags(p)
    p.add_argument("--inject", type=str, default="0,1,2,3", help="comma list of counts")
    p.set_defaults(func=_cmd_inject)

    p = sub.add_parser("histograms", help="characteristic-value histograms and overlaps")
    _common_flags(p)
    p.set_defaults(func=_cmd_histograms)

    p = sub.add_parser("dump-pilots", help="write the normalized pilot matrix as CSV")
    _common_flags(p)
    p.set_defaults(func=_cmd_dump_pilots)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
