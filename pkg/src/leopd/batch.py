"""Multi-seed batch execution and reporting."""

from __future__ import annotations

import re
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ScenarioConfig
from .scenario import run_once
from .stats import ModeReport, RunSummary, aggregate_by_mode, emit_csv


class BatchError(RuntimeError):
    pass


def parse_seeds(spec: str) -> list[int]:
    """``"1..20"`` (inclusive), ``"3,5,9"`` or a single integer."""
    seeds: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", part)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            if b < a:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(a, b + 1))
        elif re.fullmatch(r"-?\d+", part):
            seeds.append(int(part))
        else:
            raise ValueError(f"bad seed spec {part!r}")
    if not seeds:
        raise ValueError("no seeds given")
    return seeds


def _one(cfg: ScenarioConfig, seed: int, trace_path: str | None) -> RunSummary:
    try:
        if trace_path is None:
            return run_once(cfg, seed)
        with open(trace_path, "w") as fh:
            return run_once(cfg, seed, fh)
    except Exception as exc:  # re-raised with the seed attached
        raise BatchError(f"run failed for pd_mode={cfg.pdcp.pd_mode} seed={seed}: {exc!r}") from exc


def run_batch(
    config: ScenarioConfig,
    seeds: Sequence[int],
    *,
    compare: bool = False,
    workers: int = 1,
    out_dir: str | Path | None = None,
    trace: bool = False,
    plots: bool = False,
) -> list[ModeReport]:
    """One independent run per (mode, seed); returns one report per mode.

    With ``compare`` all three duplication modes run on the same seed list.
    Output order never depends on ``workers``.
    """
    if not seeds:
        raise BatchError("seed list is empty")
    modes = ["off", "blind", "harq_timer"] if compare else [config.pdcp.pd_mode]
    trace_dir = None
    if trace:
        if out_dir is None:
            raise BatchError("--trace needs an output directory")
        trace_dir = Path(out_dir) / "traces"
        trace_dir.mkdir(parents=True, exist_ok=True)

    jobs = []
    for mode in modes:
        cfg = config.replace(pdcp={"pd_mode": mode})
        for seed in seeds:
            tp = str(trace_dir / f"{mode}_seed{seed}.log") if trace_dir else None
            jobs.append((cfg, seed, tp))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_one, *job) for job in jobs]
            runs = [f.result() for f in futures]
    else:
        runs = [_one(*job) for job in jobs]

    reports = aggregate_by_mode(runs)
    if out_dir is not None:
        emit_csv(reports, out_dir)
        if plots:
            from .plots import render_report

            render_report(reports, out_dir)
    return reports
