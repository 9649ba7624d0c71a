"""Path loss and received power for the satellite user link.

Total loss is the basic loss (free space + shadow fading + clutter) plus
gas and scintillation terms; received power is EIRP + Rx gain - loss.
LOS state, shadow fading and clutter come from elevation-indexed tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .geometry import LosAnchor

SPEED_OF_LIGHT = 299_792_458.0
BOLTZMANN_DBM_PER_HZ_K = 10 * math.log10(1.380649e-23) + 30


class ChannelTableError(ValueError):
    """Missing scenario/elevation row or malformed table file."""


@dataclass(frozen=True)
class ChannelRow:
    p_los: float
    sigma_sf_los: float
    sigma_sf_nlos: float
    cl_db: float


class ChannelTable:
    def __init__(self, rows: dict[tuple[str, int], ChannelRow]):
        self.rows = rows

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ChannelTable":
        if path is None:
            text = resources.files("leopd").joinpath("data").joinpath("channel_tables.csv").read_text()
        else:
            try:
                text = Path(path).read_text()
            except OSError as exc:
                raise ChannelTableError(f"cannot read channel table {path}: {exc}") from exc
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        rows = {}
        for rec in csv.DictReader(lines, skipinitialspace=True):
            try:
                key = (rec["scenario"].strip(), int(rec["elevation_deg"]))
                rows[key] = ChannelRow(
                    float(rec["p_los"]), float(rec["sigma_sf_los"]), float(rec["sigma_sf_nlos"]), float(rec["cl_db"])
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ChannelTableError(f"bad channel table record {rec}: {exc}") from exc
        return cls(rows)

    def row(self, scenario: str, elevation: float) -> ChannelRow:
        decile = int(math.floor(elevation / 10.0 + 0.5)) * 10
        try:
            return self.rows[(scenario, decile)]
        except KeyError:
            raise ChannelTableError(f"no channel table row for scenario={scenario!r}, elevation={decile} deg") from None


@dataclass(frozen=True)
class PathLossBreakdown:
    pl_total: float
    pl_basic: float
    pl_gas: float
    pl_scint: float
    fspl: float
    sf: float
    cl: float


@dataclass
class LinkState:
    los: bool
    sf_db: float
    cl_db: float
    elevation: float  # deg
    slant: float  # m
    carrier: float  # Hz
    anchor: LosAnchor | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.los and self.cl_db != 0.0:
            raise ValueError("LOS link cannot carry clutter loss")


@dataclass(frozen=True)
class LinkBudgetParams:
    eirp: float  # dBm toward the user
    g_rx: float = 0.0  # dBi
    noise_figure: float = 7.0  # dB
    bandwidth: float = 10e6  # Hz
    ambient_temperature: float = 290.0  # K

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")

    def noise_dbm(self) -> float:
        return (
            BOLTZMANN_DBM_PER_HZ_K
            + 10 * math.log10(self.ambient_temperature)
            + 10 * math.log10(self.bandwidth)
            + self.noise_figure
        )


def fspl(d: float, f_c: float) -> float:
    if d <= 0 or f_c <= 0:
        raise ValueError(f"fspl needs positive distance and frequency, got d={d}, f_c={f_c}")
    return 20 * math.log10(4 * math.pi * d * f_c / SPEED_OF_LIGHT)


def basic_path_loss(link: LinkState) -> float:
    return fspl(link.slant, link.carrier) + link.sf_db + link.cl_db


def total_path_loss(pl_b: float, pl_g: float, pl_s: float) -> float:
    return pl_b + pl_g + pl_s


def breakdown(link: LinkState, pl_gas: float = 0.0, pl_scint: float = 0.0) -> PathLossBreakdown:
    free = fspl(link.slant, link.carrier)
    pl_b = free + link.sf_db + link.cl_db
    return PathLossBreakdown(total_path_loss(pl_b, pl_gas, pl_scint), pl_b, pl_gas, pl_scint, free, link.sf_db, link.cl_db)


def received_power(params: LinkBudgetParams, pl: float) -> float:
    return params.eirp + params.g_rx - pl


def los_probability(table: ChannelTable, scenario: str, elevation: float) -> float:
    return table.row(scenario, elevation).p_los


def sample_los(elevation: float, table: ChannelTable, rng: np.random.Generator, scenario: str = "rural") -> bool:
    if not 0 < elevation <= 90:
        raise ValueError(f"elevation {elevation} outside (0, 90]")
    return bool(rng.random() < table.row(scenario, elevation).p_los)


def sample_shadow_fading(sigma_sf: float, rng: np.random.Generator) -> float:
    if sigma_sf < 0:
        raise ValueError("sigma_sf must be non-negative")
    if sigma_sf == 0:
        return 0.0
    return float(rng.normal(0.0, sigma_sf))


def draw_link_condition(
    elevation: float,
    table: ChannelTable,
    scenario: str,
    los_rng: np.random.Generator,
    sf_rng: np.random.Generator,
) -> tuple[bool, float, float]:
    """Fresh (los, sf_db, cl_db) for a link at ``elevation``."""
    row = table.row(scenario, elevation)
    los = sample_los(elevation, table, los_rng, scenario)
    sf = sample_shadow_fading(row.sigma_sf_los if los else row.sigma_sf_nlos, sf_rng)
    return los, sf, 0.0 if los else row.cl_db
