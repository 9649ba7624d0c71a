"""Command-line entry point: ``leopd --compare --seeds 1..20 --out results``."""

from __future__ import annotations

import argparse
import logging
import sys

from .batch import BatchError, parse_seeds, run_batch
from .config import ConfigError, default_config, default_config_text, load_config

log = logging.getLogger("leopd")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="leopd",
        description="Downlink PDCP packet-duplication simulator for a two-satellite LEO scenario.",
    )
    p.add_argument("--config", metavar="PATH", help="YAML scenario file (default: shipped table1_default)")
    p.add_argument("--pd-mode", choices=["off", "blind", "harq_timer"], help="duplication policy override")
    p.add_argument("--dup-timer-ms", type=float, help="duplication time after a primary-leg NACK")
    p.add_argument("--seeds", default=None, help="seed list, e.g. 1..80 or 1,4,9 (default: 1..rng_runs)")
    p.add_argument("--out", metavar="DIR", default="results", help="output directory for CSV files and figures")
    p.add_argument("--compare", action="store_true", help="run off, blind and harq_timer on the same seeds")
    p.add_argument("--trace", action="store_true", help="write per-run event logs under OUT/traces")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--no-plots", action="store_true", help="skip PNG figures")
    p.add_argument("--print-config", action="store_true", help="print the shipped default config and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.print_config:
        sys.stdout.write(default_config_text())
        return 0
    try:
        cfg = load_config(args.config) if args.config else default_config()
        pdcp = {}
        if args.pd_mode:
            pdcp["pd_mode"] = args.pd_mode
        if args.dup_timer_ms is not None:
            pdcp["dup_timer_ms"] = args.dup_timer_ms
        if pdcp:
            cfg = cfg.replace(pdcp=pdcp)
        seeds = parse_seeds(args.seeds) if args.seeds else list(range(1, cfg.simulation.rng_runs + 1))
    except (ConfigError, ValueError) as exc:
        print(f"leopd: config error: {exc}", file=sys.stderr)
        return 2

    log.info("running %d seed(s), compare=%s", len(seeds), args.compare)
    try:
        reports = run_batch(
            cfg,
            seeds,
            compare=args.compare,
            workers=args.workers,
            out_dir=args.out,
            trace=args.trace,
            plots=not args.no_plots,
        )
    except (BatchError, OSError) as exc:
        print(f"leopd: {exc}", file=sys.stderr)
        return 1

    print("pd_mode,mean_success_pct,p5_success_pct,pdcp_duplicates")
    for rep in reports:
        print(f"{rep.pd_mode},{rep.mean_success:.4f},{rep.p5_success:.4f},{rep.mean_duplicates:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
