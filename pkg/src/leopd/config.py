"""Scenario configuration: typed sections, YAML loading with strict key checking."""

from __future__ import annotations

import dataclasses
import types
import typing
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .pdcp import PdMode, ReorderMode, reorder_window_bounds


class ConfigError(ValueError):
    pass


@dataclass
class SimulationSection:
    simulation_time_s: float = 10.0
    warmup_s: float = 0.5
    drain_s: float = 2.0
    rng_runs: int = 80


@dataclass
class SatelliteSection:
    payload: str = "transparent"
    orbit_altitude_m: float = 600_000.0
    ground_speed_mps: float = 7560.0
    heading_deg: float = 270.0
    start_positions: list[list[float]] = field(default_factory=lambda: [[62.38, 20.0], [61.38, 20.0]])
    beam_target: list[float] = field(default_factory=lambda: [62.25, 25.74])
    # ground gateway of both transparent payloads; feeder leg adds to the gNB-UE delay
    gateway: list[float] = field(default_factory=lambda: [62.25, 25.74])
    beam_deployment: str = "quasi_earth_fixed"
    # Set 1 S-band LEO-600 (external: TR 38.821 Table 6.1.1.1-1)
    eirp_density_dbw_per_mhz: float = 34.0


@dataclass
class UeSection:
    count: int = 10
    placement_radius_m: float = 30_000.0
    mobility: str = "doppler"
    speed_kmh: float = 3.0
    antenna: str = "omnidirectional"
    g_rx_dbi: float = 0.0
    noise_figure_db: float = 7.0
    temperature_k: float = 290.0


@dataclass
class ChannelSection:
    scenario: str = "rural"
    table: str | None = None
    carrier_hz: float = 2.0e9
    condition: str = "dynamic"
    los_cube_side_m: float = 3500.0
    mobility_tick_ms: float = 100.0
    pl_gas_db: float = 0.0
    pl_scint_db: float = 0.0


@dataclass
class RadioSection:
    bandwidth_hz: float = 10.0e6
    frf: int = 3
    slot_ms: float = 1.0
    rbs_per_slot: int = 52
    rbs_per_tb: int = 2
    rsrp_reference_resources: int = 624
    bler_midpoint_db: float = 1.0
    bler_slope_per_db: float = 1.0
    harq_max_retx: int = 1
    harq_processing_slots: int = 4
    scheduler: str = "round_robin"


@dataclass
class WraparoundSection:
    rings: int = 2
    ues_per_beam: int = 1
    # off-axis discrimination of the satellite antenna toward the center beam, per ring
    ring_discrimination_db: list[float] = field(default_factory=lambda: [15.0, 25.0])


@dataclass
class TrafficSection:
    cbr_packet_bytes: int = 32
    cbr_interval_ms: float = 20.0
    cbr_phase: str = "zero"


@dataclass
class McSection:
    sn_offset_db: float = 10.0
    xn_delay_ms: float = 2.0
    measurement_period_ms: float = 200.0


@dataclass
class PdcpSection:
    pd_mode: str = "harq_timer"
    dup_timer_ms: float = 50.0
    reorder_mode: str = "out_of_order"
    t_reordering_ms: float = 0.0


@dataclass
class ScenarioConfig:
    simulation: SimulationSection = field(default_factory=SimulationSection)
    satellites: SatelliteSection = field(default_factory=SatelliteSection)
    ue: UeSection = field(default_factory=UeSection)
    channel: ChannelSection = field(default_factory=ChannelSection)
    radio: RadioSection = field(default_factory=RadioSection)
    wraparound: WraparoundSection = field(default_factory=WraparoundSection)
    traffic: TrafficSection = field(default_factory=TrafficSection)
    mc: McSection = field(default_factory=McSection)
    pdcp: PdcpSection = field(default_factory=PdcpSection)

    def validate(self) -> "ScenarioConfig":
        s = self.simulation
        _require(s.simulation_time_s > 0, "simulation.simulation_time_s", "must be > 0")
        _require(0 <= s.warmup_s < s.simulation_time_s, "simulation.warmup_s", "must be in [0, simulation_time_s)")
        _require(s.drain_s >= 0, "simulation.drain_s", "must be >= 0")
        _require(s.rng_runs > 0, "simulation.rng_runs", "must be > 0")

        sat = self.satellites
        _require(sat.payload == "transparent", "satellites.payload", "only 'transparent' is supported")
        _require(sat.orbit_altitude_m > 0, "satellites.orbit_altitude_m", "must be > 0")
        _require(sat.ground_speed_mps > 0, "satellites.ground_speed_mps", "must be > 0")
        _require(len(sat.start_positions) == 2, "satellites.start_positions", "exactly two satellites expected")
        for key, pts in (("satellites.start_positions", sat.start_positions),
                         ("satellites.beam_target", [sat.beam_target]),
                         ("satellites.gateway", [sat.gateway])):
            for p in pts:
                _require(len(p) == 2 and -90 <= p[0] <= 90 and -180 <= p[1] < 180, key, f"bad lat/lon {p}")

        u = self.ue
        _require(u.count > 0, "ue.count", "must be > 0")
        _require(u.placement_radius_m >= 0, "ue.placement_radius_m", "must be >= 0")
        _require(u.antenna == "omnidirectional", "ue.antenna", "only 'omnidirectional' is supported")

        c = self.channel
        _require(c.carrier_hz > 0, "channel.carrier_hz", "must be > 0")
        _require(c.los_cube_side_m > 0, "channel.los_cube_side_m", "must be > 0")
        _require(c.mobility_tick_ms > 0, "channel.mobility_tick_ms", "must be > 0")
        _require(c.condition in ("dynamic", "los", "nlos"), "channel.condition", "dynamic | los | nlos")

        r = self.radio
        _require(r.bandwidth_hz > 0, "radio.bandwidth_hz", "must be > 0")
        _require(r.frf in (1, 3), "radio.frf", f"must be 1 or 3, got {r.frf}")
        _require(r.slot_ms > 0, "radio.slot_ms", "must be > 0")
        _require(r.rbs_per_slot > 0 and r.rbs_per_tb > 0, "radio.rbs_per_tb", "resource counts must be > 0")
        _require(r.rbs_per_tb <= r.rbs_per_slot, "radio.rbs_per_tb", "exceeds rbs_per_slot")
        _require(r.bler_slope_per_db > 0, "radio.bler_slope_per_db", "must be > 0")
        _require(r.harq_max_retx == 1, "radio.harq_max_retx", "one retransmission is modelled")
        _require(r.harq_processing_slots >= 0, "radio.harq_processing_slots", "must be >= 0")
        _require(r.scheduler == "round_robin", "radio.scheduler", "only 'round_robin' is supported")

        w = self.wraparound
        _require(w.rings >= 0, "wraparound.rings", "must be >= 0")
        _require(len(w.ring_discrimination_db) >= w.rings, "wraparound.ring_discrimination_db", "one value per ring")

        t = self.traffic
        _require(t.cbr_packet_bytes > 0, "traffic.cbr_packet_bytes", "must be > 0")
        _require(t.cbr_interval_ms > 0, "traffic.cbr_interval_ms", "must be > 0")
        _require(t.cbr_phase in ("zero", "random"), "traffic.cbr_phase", "zero | random")

        m = self.mc
        _require(m.xn_delay_ms >= 0, "mc.xn_delay_ms", "must be >= 0")
        _require(m.measurement_period_ms > 0, "mc.measurement_period_ms", "must be > 0")

        p = self.pdcp
        try:
            PdMode(p.pd_mode)
        except ValueError:
            raise ConfigError(f"pdcp.pd_mode: must be off | blind | harq_timer, got {p.pd_mode!r}") from None
        _require(p.dup_timer_ms > 0, "pdcp.dup_timer_ms", "must be > 0")
        try:
            window_mode = reorder_window_bounds(p.t_reordering_ms / 1000.0)
        except ValueError as exc:
            raise ConfigError(f"pdcp.t_reordering_ms: {exc}") from None
        try:
            ReorderMode(p.reorder_mode)
        except ValueError:
            raise ConfigError(f"pdcp.reorder_mode: must be out_of_order | in_order, got {p.reorder_mode!r}") from None
        _require(window_mode.value == p.reorder_mode, "pdcp.reorder_mode",
                 "t_reordering_ms = 0 selects out_of_order; in_order needs t_reordering_ms > 0")
        return self

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)

    def replace(self, **sections: dict[str, Any]) -> "ScenarioConfig":
        """Copy with per-section overrides, e.g. ``replace(pdcp={"pd_mode": "blind"})``."""
        data = self.to_dict()
        for name, values in sections.items():
            if name not in data:
                raise ConfigError(f"unknown section {name!r}")
            data[name].update(values)
        return from_dict(data)


def _require(cond: bool, key: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def _coerce(value: Any, hint: Any, key: str) -> Any:
    origin = typing.get_origin(hint)
    if origin is typing.Union or origin is types.UnionType:
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if value is None:
            return None
        return _coerce(value, args[0], key)
    if origin is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key}: expected a list, got {value!r}")
        (inner,) = typing.get_args(hint)
        return [_coerce(v, inner, f"{key}[{i}]") for i, v in enumerate(value)]
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    return value


def _build(cls: type, data: Any, prefix: str) -> Any:
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix or 'config'}: expected a mapping")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{prefix}{unknown[0]}: unknown key")
    kwargs = {}
    for name, value in data.items():
        hint = hints[name]
        key = f"{prefix}{name}"
        if dataclasses.is_dataclass(hint):
            kwargs[name] = _build(hint, value if value is not None else {}, key + ".")
        else:
            kwargs[name] = _coerce(value, hint, key)
    return cls(**kwargs)


def from_dict(data: dict[str, Any] | None) -> ScenarioConfig:
    return _build(ScenarioConfig, data or {}, "").validate()


def load_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror or exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{p}: YAML parse error: {exc}") from None
    return from_dict(data)


def default_config_text() -> str:
    return resources.files("leopd").joinpath("data").joinpath("table1_default.yaml").read_text()


def default_config() -> ScenarioConfig:
    return from_dict(yaml.safe_load(default_config_text()))
