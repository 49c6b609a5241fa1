"""Command-line entry point: validate, figure, golden, sweep, analytics.

Every artifact this writes is reproducible byte-for-byte from the config and
seed list; the config hash and seeds are embedded in CSV headers and the run
manifest.  Exit codes: 0 success, 1 validation failure, 2 runtime error,
3 golden-scenario mismatch.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytics
from .config import (
    ConfigError,
    ExperimentConfig,
    default_config,
    load_config,
    save_config,
)
from .model import ChannelModel
from .protocols import ProtocolKind, run_ocaim_round_detailed
from .scenarios import (
    GOLDEN_CODE_ASSIGNMENTS,
    GOLDEN_INTERFERENCE_LISTS,
    GOLDEN_INTERFERENCE_SETS,
    GOLDEN_SILS_WBAN2,
    GOLDEN_THETA_DB,
    three_wban_example,
)
from .sim import ProtocolKind, run_simulation, summarize, sweep
from .svgplot import line_plot

SCHEMA_VERSION = 1
FIGURES = ("sinr_time", "sinr_theta", "power_time", "beacon_prob", "fdr")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_GOLDEN = 3


def _fmt_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "|".join(str(v) for v in value)
    return str(value)


def write_csv(path: Path, rows: list[dict], cfg: ExperimentConfig, seeds) -> None:
    """Versioned CSV with the config hash and seed list in comment headers."""
    if not rows:
        columns = []
    else:
        columns = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write(f"# seeds={','.join(str(s) for s in seeds)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["schema_version"] + columns)
        for row in rows:
            writer.writerow([SCHEMA_VERSION] + [_fmt_cell(row[c]) for c in columns])


def write_manifest(out_dir: Path, cfg: ExperimentConfig, seeds, extra: dict) -> None:
    manifest = {
        "config_hash": cfg.config_hash(),
        "seeds": [int(s) for s in seeds],
        "config": cfg.to_dict(),
    }
    manifest.update(extra)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _run_one(args):
    cfg, protocol, seed = args
    return run_simulation(cfg, protocol, seed).totals()


def run_grid(cfg_list, workers: int) -> list[dict]:
    """Run (config, protocol, seed) jobs, order-stable regardless of workers."""
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, cfg_list))
    return [_run_one(job) for job in cfg_list]


# -- commands -----------------------------------------------------------------


def cmd_validate(cfg_path: str | None) -> int:
    try:
        cfg = load_config(cfg_path) if cfg_path else default_config()
        cfg.validate()
    except ConfigError as err:
        print("config INVALID:")
        for problem in err.problems:
            print(f"  - {problem}")
        return EXIT_VALIDATION
    print(f"config OK (hash {cfg.config_hash()})")
    for section in ("scenario", "timing", "protocol"):
        print(f"  {section}: {getattr(cfg, section)}")
    return EXIT_OK


def cmd_golden(out_dir: Path, cfg: ExperimentConfig, network=None) -> int:
    """Replay the committed three-network example and diff every derived set."""
    if network is None:
        network = three_wban_example()
    detail = run_ocaim_round_detailed(network, ChannelModel(), GOLDEN_THETA_DB)

    failures: list[str] = []

    def check(name, got, want):
        if got == want:
            print(f"  match {name}: {sorted(got) if got else '{}'}")
        else:
            failures.append(f"{name}: got {sorted(got)}, want {sorted(want)}")

    for wid, want in GOLDEN_INTERFERENCE_LISTS.items():
        check(f"I_{wid}", detail.lists[wid].members, want)
    for wid, want in GOLDEN_INTERFERENCE_SETS.items():
        check(f"IS_{wid}", detail.sets[wid].members, want)
    for key, want in GOLDEN_SILS_WBAN2.items():
        check(f"SIL_{key}", detail.sils[key].members, want)
    assigned = detail.assigned_sensors()
    for wid, want in GOLDEN_CODE_ASSIGNMENTS.items():
        check(f"Code_{wid}", assigned[wid], want)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(
        out_dir,
        cfg,
        seeds=[],
        extra={
            "golden": {
                "pass": not failures,
                "failures": failures,
                "code_assignments": {
                    str(w): sorted(map(list, s)) for w, s in assigned.items()
                },
                "cowhc": detail.cowhc.to_manifest(),
            }
        },
    )
    if failures:
        print("golden scenario MISMATCH:")
        for f in failures:
            print(f"  - {f}")
        return EXIT_GOLDEN
    print("golden scenario: all sets reproduced")
    return EXIT_OK


def cmd_analytics(out_dir: Path, cfg: ExperimentConfig) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    params = analytics.AnalyticParams(
        n_wbans=cfg.scenario.n_wbans,
        k_sensors=cfg.scenario.k_sensors,
        bi=cfg.timing.bi,
        ts=cfg.timing.ts,
        t_fr=cfg.timing.t_fr,
        t_b=cfg.timing.t_b,
        sifs=cfg.timing.sifs,
        nfrs=cfg.timing.nfrs,
        p_frames=cfg.timing.p_frames,
    )
    n_values = list(range(1, 11))
    rows = analytics.beacon_curve(params, n_values)
    frame_rows = analytics.frame_success_vs_n(params, n_values)
    for row, frame in zip(rows, frame_rows):
        row["pr_frsucc_upper"] = frame["pr_frsucc"]
    write_csv(out_dir / "analytics.csv", rows, cfg, seeds=[])
    line_plot(
        [
            {
                "label": "beacon success (fixed point)",
                "x": n_values,
                "y": [r["pr_bsucc_fixedpoint"] for r in rows],
            },
            {
                "label": "beacon success (open loop)",
                "x": n_values,
                "y": [r["pr_bsucc_openloop"] for r in rows],
            },
        ],
        out_dir / "analytics.svg",
        title="Closed-form beacon success",
        xlabel="coexisting networks",
        ylabel="probability",
    )
    write_manifest(out_dir, cfg, seeds=[], extra={"command": "analytics"})
    print(f"analytics curves written to {out_dir}")
    return EXIT_OK


def _figure_beacon_prob(cfg: ExperimentConfig, seeds, workers: int):
    n_values = list(range(2, 11))
    sim_cfg = replace(cfg, run=replace(cfg.run, resample_offsets=True))
    jobs = []
    for n in n_values:
        c = replace(sim_cfg, scenario=replace(sim_cfg.scenario, n_wbans=n))
        for seed in seeds:
            jobs.append((c, ProtocolKind.OS, int(seed)))
    totals = run_grid(jobs, workers)
    rows = []
    idx = 0
    params = analytics.AnalyticParams(
        k_sensors=cfg.scenario.k_sensors,
        bi=cfg.timing.bi,
        ts=cfg.timing.ts,
        t_fr=cfg.timing.t_fr,
        t_b=cfg.timing.t_b,
        sifs=cfg.timing.sifs,
        nfrs=cfg.timing.nfrs,
        p_frames=cfg.timing.p_frames,
    )
    for n in n_values:
        chunk = totals[idx : idx + len(seeds)]
        idx += len(seeds)
        sent = sum(t["beacons_sent"] for t in chunk)
        collided = sum(t["beacons_collided"] for t in chunk)
        measured = (sent - collided) / sent if sent else 1.0
        res = analytics.evaluate(params.with_n(n))
        rows.append(
            {
                "n_wbans": n,
                "pr_bsucc_simulated": measured,
                "pr_bsucc_theoretical": res.pr_bsucc,
                "pr_bsucc_openloop": res.pr_bsucc_openloop,
                "beacons": sent,
                "validity_flags": res.validity_flags,
            }
        )
    series = [
        {
            "label": "simulated",
            "x": n_values,
            "y": [r["pr_bsucc_simulated"] for r in rows],
        },
        {
            "label": "theoretical (fixed point)",
            "x": n_values,
            "y": [r["pr_bsucc_theoretical"] for r in rows],
        },
    ]
    return rows, series, "networks", "beacon success probability"


def _figure_sweep(cfg, seeds, figure: str):
    if figure == "sinr_time":
        protocols = ["ocaim", "os"]
        rows = sweep("time", None, protocols, seeds, cfg)
        key, ylabel = "mean_sinr_db", "mean SINR (dB)"
        xlabel = "time (s)"
    elif figure == "power_time":
        protocols = ["ocaim", "sms", "os"]
        rows = sweep("time", None, protocols, seeds, cfg)
        key, ylabel = "energy_mws_mean", "energy per round (mW s)"
        xlabel = "time (s)"
    elif figure == "sinr_theta":
        protocols = ["ocaim", "sms", "os"]
        thetas = [5.0, 10.0, 15.0, 20.0, 25.0]
        rows = sweep("theta", thetas, protocols, seeds, cfg)
        key, ylabel = "mean_sinr_db_mean", "mean SINR (dB)"
        xlabel = "interference threshold (dB)"
    elif figure == "fdr":
        protocols = ["ocaim", "sms", "os"]
        n_values = [int(v) for v in cfg.run.sweep_values] or [2, 4, 6, 8]
        rows = sweep("n_wbans", n_values, protocols, seeds, cfg)
        key, ylabel = "fdr_mean", "frame delivery ratio"
        xlabel = "networks"
    else:
        raise ValueError(f"unknown figure {figure!r}")
    series = []
    for protocol in protocols:
        sel = [r for r in rows if r["protocol"] == protocol]
        series.append(
            {
                "label": protocol,
                "x": [r["value"] for r in sel],
                "y": [r[key] for r in sel],
            }
        )
    return rows, series, xlabel, ylabel


def cmd_figure(figure: str, cfg: ExperimentConfig, out_dir: Path, seeds, workers: int) -> int:
    if figure not in FIGURES:
        print(f"unknown figure {figure!r}; valid: {', '.join(FIGURES)}")
        return EXIT_VALIDATION
    out_dir.mkdir(parents=True, exist_ok=True)
    if figure == "beacon_prob":
        rows, series, xlabel, ylabel = _figure_beacon_prob(cfg, seeds, workers)
    else:
        rows, series, xlabel, ylabel = _figure_sweep(cfg, seeds, figure)
    write_csv(out_dir / f"{figure}.csv", rows, cfg, seeds)
    line_plot(
        series,
        out_dir / f"{figure}.svg",
        title=figure.replace("_", " "),
        xlabel=xlabel,
        ylabel=ylabel,
    )
    write_manifest(out_dir, cfg, seeds, extra={"command": f"figure {figure}"})
    print(f"figure {figure}: CSV + SVG written to {out_dir}")
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path, seeds, protocols) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    axis = cfg.run.sweep_axis
    values = cfg.run.sweep_values if axis != "time" else None
    rows = sweep(axis, values, protocols, seeds, cfg)
    write_csv(out_dir / "sweep.csv", rows, cfg, seeds)
    write_manifest(out_dir, cfg, seeds, extra={"command": f"sweep {axis}"})
    print(f"sweep over {axis}: {len(rows)} rows written to {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config path (defaults built in)")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--seeds", help="comma-separated seed list (overrides config)")
    common.add_argument("--workers", type=int, default=1, help="parallel workers")
    common.add_argument(
        "--protocols",
        default="ocaim,sms,os",
        help="comma-separated protocols for sweep",
    )
    parser = argparse.ArgumentParser(
        prog="wbansim",
        description="Coexistence simulator and analytics for TDMA body-area networks",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", help="validate the config and exit", parents=[common])
    fig = sub.add_parser(
        "figure", help="reproduce one results figure", parents=[common]
    )
    fig.add_argument("name", help=f"one of: {', '.join(FIGURES)}")
    sub.add_parser(
        "golden", help="replay the worked three-network example", parents=[common]
    )
    sub.add_parser("sweep", help="run the configured parameter sweep", parents=[common])
    sub.add_parser("analytics", help="emit closed-form curves only", parents=[common])
    sub.add_parser("init-config", help="write the default config", parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        cfg.validate()
    except ConfigError as err:
        if args.command == "validate":
            print("config INVALID:")
            for problem in err.problems:
                print(f"  - {problem}")
            return EXIT_VALIDATION
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_VALIDATION

    out_dir = Path(args.out or cfg.out_dir)
    seeds = (
        [int(s) for s in args.seeds.split(",")] if args.seeds else cfg.run.seeds
    )

    try:
        if args.command == "validate":
            return cmd_validate(args.config)
        if args.command == "init-config":
            out_dir.mkdir(parents=True, exist_ok=True)
            save_config(cfg, out_dir / "config.json")
            print(f"default config written to {out_dir / 'config.json'}")
            return EXIT_OK
        if args.command == "golden":
            return cmd_golden(out_dir, cfg)
        if args.command == "analytics":
            return cmd_analytics(out_dir, cfg)
        if args.command == "figure":
            return cmd_figure(args.name, cfg, out_dir, seeds, args.workers)
        if args.command == "sweep":
            protocols = [p.strip() for p in args.protocols.split(",") if p.strip()]
            return cmd_sweep(cfg, out_dir, seeds, protocols)
        raise ValueError(f"unhandled command {args.command}")
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
