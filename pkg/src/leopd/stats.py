"""Per-UE reliability counters, cross-run aggregation and CSV output."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

MODE_ORDER = ("off", "blind", "harq_timer")


@dataclass
class UeCounters:
    ue: int = 0
    sent: int = 0
    delivered: int = 0
    duplicates_created: int = 0
    duplicates_discarded: int = 0
    late_discarded: int = 0
    lost: int = 0
    mn_nacks: int = 0
    sn_bound: bool = False


def success_rate(c: UeCounters) -> float:
    """Percentage of post-warmup packets delivered at least once."""
    if c.sent <= 0:
        raise ValueError(f"UE {c.ue}: success rate undefined with no packets sent")
    return 100.0 * c.delivered / c.sent


@dataclass
class RunSummary:
    run_seed: int
    pd_mode: str
    ues: list[UeCounters] = field(default_factory=list)
    trace_digest: str = ""

    @property
    def success_rates(self) -> list[float]:
        return [success_rate(c) for c in self.ues if c.sent > 0]

    @property
    def mean_success(self) -> float:
        rates = self.success_rates
        return math.fsum(rates) / len(rates) if rates else math.nan

    @property
    def total_duplicates(self) -> int:
        return sum(c.duplicates_created for c in self.ues)


@dataclass
class ModeReport:
    pd_mode: str
    runs: list[RunSummary]
    samples: list[float]  # pooled per-UE success rates, sorted
    mean_success: float
    p5_success: float
    mean_duplicates: float

    def cdf(self) -> list[tuple[float, float]]:
        return empirical_cdf(self.samples)


def percentile_nearest_rank(samples: Sequence[float], pct: float) -> float:
    """Smallest sample with at least ``pct`` percent of the data at or below it."""
    if not samples:
        return math.nan
    xs = sorted(samples)
    rank = max(1, math.ceil(pct / 100.0 * len(xs)))
    return xs[rank - 1]


def empirical_cdf(samples: Sequence[float]) -> list[tuple[float, float]]:
    xs = sorted(samples)
    n = len(xs)
    out: list[tuple[float, float]] = []
    for i, x in enumerate(xs):
        if i + 1 < n and xs[i + 1] == x:
            continue
        out.append((x, (i + 1) / n))
    return out


def aggregate(runs: Sequence[RunSummary]) -> ModeReport:
    """Pool per-UE success rates for the CDF; average scalars over runs."""
    if not runs:
        raise ValueError("aggregate needs at least one run")
    modes = {r.pd_mode for r in runs}
    if len(modes) != 1:
        raise ValueError(f"aggregate expects one pd_mode, got {sorted(modes)}")
    pooled = sorted(x for r in runs for x in r.success_rates)
    run_means = [r.mean_success for r in runs if not math.isnan(r.mean_success)]
    return ModeReport(
        pd_mode=runs[0].pd_mode,
        runs=list(runs),
        samples=pooled,
        mean_success=math.fsum(run_means) / len(run_means) if run_means else math.nan,
        p5_success=percentile_nearest_rank(pooled, 5.0),
        mean_duplicates=math.fsum(r.total_duplicates for r in runs) / len(runs),
    )


def aggregate_by_mode(runs: Iterable[RunSummary]) -> list[ModeReport]:
    grouped: dict[str, list[RunSummary]] = {}
    for r in runs:
        grouped.setdefault(r.pd_mode, []).append(r)
    order = [m for m in MODE_ORDER if m in grouped] + sorted(set(grouped) - set(MODE_ORDER))
    return [aggregate(sorted(grouped[m], key=lambda r: r.run_seed)) for m in order]


def _f(x: float) -> str:
    return f"{x:.4f}"


def emit_csv(reports: Sequence[ModeReport], out_dir: str | Path) -> list[Path]:
    """Write summary.csv, cdf_success.csv and per_run.csv into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / "summary.csv", out / "cdf_success.csv", out / "per_run.csv"]
        with open(paths[0], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pd_mode", "mean_success_pct", "p5_success_pct", "pdcp_duplicates"])
            for rep in reports:
                w.writerow([rep.pd_mode, _f(rep.mean_success), _f(rep.p5_success), _f(rep.mean_duplicates)])
        with open(paths[1], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pd_mode", "value", "cum_prob"])
            for rep in reports:
                for value, p in rep.cdf():
                    w.writerow([rep.pd_mode, _f(value), _f(p)])
        with open(paths[2], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pd_mode", "run_seed", "ue", "sent", "delivered", "lost", "success_pct",
                        "duplicates_created", "duplicates_discarded"])
            for rep in reports:
                for run in rep.runs:
                    for c in run.ues:
                        rate = _f(success_rate(c)) if c.sent > 0 else ""
                        w.writerow([rep.pd_mode, run.run_seed, c.ue, c.sent, c.delivered, c.lost, rate,
                                    c.duplicates_created, c.duplicates_discarded])
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc.strerror or exc}") from exc
    return paths
