"""One seeded simulation run of the two-satellite multi-connectivity scenario.

Each satellite carries one center beam (a cell served by a ground gNB
through the transparent payload) plus wraparound rings of interfering
beams. Measured UEs attach to the strongest center beam, add the other
one as secondary node on an A3 event, and receive CBR traffic whose PDCP
SDUs are duplicated according to the configured policy.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from . import channel as ch
from .config import ScenarioConfig
from .engine import Event, EventKind, Simulator, rng_stream, to_ns
from .geometry import (
    GeoPosition,
    LosAnchor,
    SatelliteState,
    drop_ues_in_disc,
    elevation_angle,
    los_resample_due,
    propagate,
    slant_range,
    to_ecef,
)
from .mc import McBinding, XnLink, cell_select, evaluate_a3, xn_forward
from .pdcp import (
    DuplicationPolicy,
    DuplicationState,
    Path,
    PdcpSdu,
    PdMode,
    ReorderBuffer,
    ReorderMode,
    TimerAction,
    on_primary_nack,
    tx_submit,
)
from .phymac import (
    BlerCurve,
    HarqProcess,
    RoundRobinScheduler,
    TransportBlock,
    co_channel,
    hex_rings,
    on_feedback,
    rsrp,
    sinr,
    transmit,
)
from .stats import RunSummary, UeCounters
from .traffic import CbrFlow, FullBufferSource, cbr_tick



@dataclass
class WraparoundBeam:
    ring: int
    color: int
    discrimination_db: float
    source: FullBufferSource
    scheduler: RoundRobinScheduler

    def active(self, slot_resources: int) -> bool:
        return bool(self.scheduler.allocate({self.source.ue: self.source.backlog()}, slot_resources))


@dataclass
class Cell:
    cid: int
    sat: int
    params: ch.LinkBudgetParams
    scheduler: RoundRobinScheduler
    interferers: list[WraparoundBeam]
    queues: dict[int, deque] = field(default_factory=dict)
    slot_event: Event | None = None
    last_slot: int = -1


@dataclass
class UeContext:
    uid: int
    pos: GeoPosition
    binding: McBinding | None = None
    dup: DuplicationState = field(default_factory=DuplicationState)
    dup_expiry: Event | None = None
    rx: ReorderBuffer = field(default_factory=ReorderBuffer)
    reorder_event: Event | None = None
    flow: CbrFlow | None = None
    counters: UeCounters = field(default_factory=UeCounters)
    delivered_sns: set = field(default_factory=set)


class ScenarioRun:
    def __init__(self, cfg: ScenarioConfig, seed: int, trace: TextIO | None = None):
        self.cfg = cfg
        self.seed = seed
        self.sim = Simulator(trace)
        self.t_end = to_ns(cfg.simulation.simulation_time_s)
        self.warmup = to_ns(cfg.simulation.warmup_s)
        self.slot = to_ns(cfg.radio.slot_ms / 1000.0)
        self.policy = DuplicationPolicy(PdMode(cfg.pdcp.pd_mode), to_ns(cfg.pdcp.dup_timer_ms / 1000.0))
        self.xn = XnLink(to_ns(cfg.mc.xn_delay_ms / 1000.0))
        self.curve = BlerCurve(cfg.radio.bler_midpoint_db, cfg.radio.bler_slope_per_db)
        self.table = ch.ChannelTable.load(cfg.channel.table)
        self.scenario = cfg.channel.scenario
        self._tb_ids = itertools.count(1)
        self._stopped = False

        sat_cfg = cfg.satellites
        h = sat_cfg.orbit_altitude_m
        self.sats = [
            SatelliteState(GeoPosition(lat, lon, h), sat_cfg.ground_speed_mps, sat_cfg.heading_deg)
            for lat, lon in sat_cfg.start_positions
        ]
        self.sat_pos = [s.start for s in self.sats]
        self.sat_xyz = [to_ecef(p) for p in self.sat_pos]
        self.gateway = GeoPosition(sat_cfg.gateway[0], sat_cfg.gateway[1], 0.0)
        target = GeoPosition(sat_cfg.beam_target[0], sat_cfg.beam_target[1], 0.0)

        eirp_dbm = sat_cfg.eirp_density_dbw_per_mhz + 10 * math.log10(cfg.radio.bandwidth_hz / 1e6) + 30.0
        params = ch.LinkBudgetParams(
            eirp=eirp_dbm,
            g_rx=cfg.ue.g_rx_dbi,
            noise_figure=cfg.ue.noise_figure_db,
            bandwidth=cfg.radio.bandwidth_hz,
            ambient_temperature=cfg.ue.temperature_k,
        )
        self.noise_dbm = params.noise_dbm()

        self.cells: list[Cell] = []
        for s in range(len(self.sats)):
            beams = co_channel(hex_rings(cfg.wraparound.rings, cfg.radio.frf), color=0)
            interferers = []
            for k, b in enumerate(beams):
                src = FullBufferSource(ue=k, tb_bytes=cfg.traffic.cbr_packet_bytes)
                rr = RoundRobinScheduler(cfg.radio.rbs_per_tb)
                for _ in range(cfg.wraparound.ues_per_beam):
                    rr.register(src.ue)
                interferers.append(
                    WraparoundBeam(b.ring, b.color, cfg.wraparound.ring_discrimination_db[b.ring - 1], src, rr)
                )
            self.cells.append(Cell(s, s, params, RoundRobinScheduler(cfg.radio.rbs_per_tb), interferers))

        placement = rng_stream(seed, "ue-placement")
        positions = drop_ues_in_disc(target, cfg.ue.placement_radius_m, cfg.ue.count, placement)
        phase_rng = rng_stream(seed, "cbr-phase")
        interval = to_ns(cfg.traffic.cbr_interval_ms / 1000.0)
        reorder_mode = ReorderMode(cfg.pdcp.reorder_mode)
        self.ues: list[UeContext] = []
        for u, pos in enumerate(positions):
            phase = 0 if cfg.traffic.cbr_phase == "zero" else int(phase_rng.integers(0, interval))
            ctx = UeContext(
                uid=u,
                pos=pos,
                rx=ReorderBuffer(reorder_mode, cfg.pdcp.t_reordering_ms / 1000.0),
                flow=CbrFlow(u, cfg.traffic.cbr_packet_bytes, interval, next_emit=phase),
                counters=UeCounters(ue=u),
            )
            self.ues.append(ctx)

        # per-link channel state and random streams
        self.links: dict[tuple[int, int], ch.LinkState] = {}
        self._los_rng: dict[tuple[int, int], np.random.Generator] = {}
        self._sf_rng: dict[tuple[int, int], np.random.Generator] = {}
        self._harq_rng: dict[tuple[int, int], np.random.Generator] = {}
        for ue in self.ues:
            for s in range(len(self.sats)):
                key = (ue.uid, s)
                self._los_rng[key] = rng_stream(seed, f"los/ue{ue.uid}/sat{s}")
                self._sf_rng[key] = rng_stream(seed, f"sf/ue{ue.uid}/sat{s}")
                self._harq_rng[key] = rng_stream(seed, f"harq/ue{ue.uid}/cell{s}")
                elev = elevation_angle(self.sat_pos[s], ue.pos)
                d = slant_range(self.sat_pos[s], ue.pos)
                link = ch.LinkState(True, 0.0, 0.0, elev, d, cfg.channel.carrier_hz,
                                    LosAnchor(self.sat_xyz[s].copy(), cfg.channel.los_cube_side_m))
                self._redraw(key, link)
                self.links[key] = link

        # attach every UE to its strongest center beam
        for ue in self.ues:
            cands = [(c.cid, self.rsrp(ue.uid, c)) for c in self.cells]
            mn = cell_select(ue.uid, cands)
            ue.binding = McBinding(ue.uid, mn)
            for c in self.cells:
                c.scheduler.register(ue.uid)
                c.queues[ue.uid] = deque()

        on = self.sim.on
        on(EventKind.MEASUREMENT, self._on_measurement)
        on(EventKind.MOBILITY_TICK, self._on_mobility)
        on(EventKind.CHANNEL_UPDATE, self._on_channel_update)
        on(EventKind.TRAFFIC_TICK, self._on_traffic)
        on(EventKind.XN_ARRIVAL, self._on_xn_arrival)
        on(EventKind.SLOT, self._on_slot)
        on(EventKind.HARQ_FEEDBACK, self._on_feedback)
        on(EventKind.PACKET_ARRIVAL, self._on_packet_arrival)
        on(EventKind.DUP_TIMER_EXPIRY, self._on_dup_expiry)
        on(EventKind.REORDER_TIMER_EXPIRY, self._on_reorder_expiry)

    # --- channel -------------------------------------------------------------

    def _redraw(self, key: tuple[int, int], link: ch.LinkState) -> None:
        cond = self.cfg.channel.condition
        row = self.table.row(self.scenario, link.elevation)
        if cond == "dynamic":
            los, sf, cl = ch.draw_link_condition(
                link.elevation, self.table, self.scenario, self._los_rng[key], self._sf_rng[key]
            )
        else:
            los = cond == "los"
            sf = ch.sample_shadow_fading(row.sigma_sf_los if los else row.sigma_sf_nlos, self._sf_rng[key])
            cl = 0.0 if los else row.cl_db
        link.los, link.sf_db, link.cl_db = los, sf, cl

    def path_loss(self, ue: int, sat: int) -> float:
        link = self.links[(ue, sat)]
        return ch.total_path_loss(ch.basic_path_loss(link), self.cfg.channel.pl_gas_db, self.cfg.channel.pl_scint_db)

    def rsrp(self, ue: int, cell: Cell) -> float:
        return rsrp(
            self.links[(ue, cell.sat)],
            cell.params,
            self.cfg.channel.pl_gas_db,
            self.cfg.channel.pl_scint_db,
            self.cfg.radio.rsrp_reference_resources,
        )

    def link_sinr(self, ue: int, cell: Cell) -> float:
        c_dbm = ch.received_power(cell.params, self.path_loss(ue, cell.sat))
        # interferers share the satellite and therefore the UE's propagation path
        interference = [c_dbm - b.discrimination_db for b in cell.interferers if b.active(self.cfg.radio.rbs_per_slot)]
        return sinr(c_dbm, interference, self.noise_dbm)

    def one_way_delay(self, ue: int, sat: int) -> int:
        d = slant_range(self.sat_pos[sat], self.gateway) + self.links[(ue, sat)].slant
        return to_ns(d / ch.SPEED_OF_LIGHT)

    # --- periodic sources ----------------------------------------------------------

    def _on_mobility(self, ev: Event) -> None:
        t = self.sim.now / 1e9
        for s, sat in enumerate(self.sats):
            self.sat_pos[s] = propagate(sat, t)
            self.sat_xyz[s] = to_ecef(self.sat_pos[s])
            due = []
            for ue in self.ues:
                link = self.links[(ue.uid, s)]
                link.elevation = elevation_angle(self.sat_pos[s], ue.pos)
                link.slant = slant_range(self.sat_pos[s], ue.pos)
                if los_resample_due(link.anchor, self.sat_xyz[s]):
                    due.append(ue.uid)
            if due:
                self.sim.after(0, EventKind.CHANNEL_UPDATE, f"sat{s}", (s, due))
        nxt = self.sim.now + to_ns(self.cfg.channel.mobility_tick_ms / 1000.0)
        if nxt <= self.t_end:
            self.sim.at(nxt, EventKind.MOBILITY_TICK, "sats")

    def _on_channel_update(self, ev: Event) -> None:
        s, due = ev.payload
        for uid in due:
            link = self.links[(uid, s)]
            self._redraw((uid, s), link)
            link.anchor.anchor = self.sat_xyz[s].copy()

    def _on_measurement(self, ev: Event) -> None:
        for ue in self.ues:
            b = ue.binding
            if b.sn is not None:
                continue
            serving = self.rsrp(ue.uid, self.cells[b.mn])
            for c in self.cells:
                if c.cid != b.mn and evaluate_a3(serving, self.rsrp(ue.uid, c), self.cfg.mc.sn_offset_db):
                    b.bind_sn(c.cid, self.sim.now)
                    ue.counters.sn_bound = True
                    break
        nxt = self.sim.now + to_ns(self.cfg.mc.measurement_period_ms / 1000.0)
        if nxt < self.t_end:
            self.sim.at(nxt, EventKind.MEASUREMENT, "ues")

    # --- downlink data path ---------------------------------------------------------

    def _counted(self, sdu: PdcpSdu) -> bool:
        return self.warmup <= sdu.created_at < self.t_end

    def _on_traffic(self, ev: Event) -> None:
        ue = self.ues[ev.payload]
        sdu = cbr_tick(ue.flow, self.sim.now)
        counted = self._counted(sdu)
        if counted:
            ue.counters.sent += 1
        b = ue.binding
        before = ue.dup.duplicates_created
        legs = tx_submit(sdu, self.policy, ue.dup, self.sim.now, sn_established=b.sn is not None)
        if counted:
            ue.counters.duplicates_created += ue.dup.duplicates_created - before
        for leg in legs:
            if leg.path is Path.MN:
                self._enqueue(self.cells[b.mn], ue.uid, leg)
            else:
                t_arr, copy = xn_forward(leg, self.xn, self.sim.now)
                self.sim.at(t_arr, EventKind.XN_ARRIVAL, f"cell{b.sn}", (b.sn, ue.uid, copy))
        if ue.flow.next_emit < self.t_end:
            self.sim.at(ue.flow.next_emit, EventKind.TRAFFIC_TICK, f"ue{ue.uid}", ue.uid)

    def _on_xn_arrival(self, ev: Event) -> None:
        cid, uid, sdu = ev.payload
        self._enqueue(self.cells[cid], uid, sdu)

    def _enqueue(self, cell: Cell, uid: int, item: PdcpSdu | TransportBlock, front: bool = False) -> None:
        if isinstance(item, PdcpSdu):
            item = TransportBlock(next(self._tb_ids), [item], item.size, (cell.cid, uid, 0), attempt=1)
        q = cell.queues[uid]
        q.appendleft(item) if front else q.append(item)
        self._ensure_slot(cell)

    def _ensure_slot(self, cell: Cell) -> None:
        if cell.slot_event is not None:
            return
        t = -(-self.sim.now // self.slot) * self.slot
        if t <= cell.last_slot:
            t = cell.last_slot + self.slot
        cell.slot_event = self.sim.at(t, EventKind.SLOT, f"cell{cell.cid}", cell.cid)

    def _on_slot(self, ev: Event) -> None:
        cell = self.cells[ev.payload]
        cell.slot_event = None
        cell.last_slot = self.sim.now
        backlog = {uid: len(q) for uid, q in cell.queues.items() if q}
        grants = cell.scheduler.allocate(backlog, self.cfg.radio.rbs_per_slot)
        tx_done = self.sim.now + self.slot
        for uid in grants:
            tb = cell.queues[uid].popleft()
            key = (uid, cell.sat)
            decoded = transmit(tb, self.link_sinr(uid, cell), self.curve, self._harq_rng[key])
            delay = self.one_way_delay(uid, cell.sat)
            if decoded:
                self.sim.at(tx_done + delay, EventKind.PACKET_ARRIVAL, f"ue{uid}", (uid, tb.carried_sdus))
            proc_delay = self.cfg.radio.harq_processing_slots * self.slot
            feedback_due = tx_done + 2 * delay + proc_delay
            primary = tb.carried_sdus[0].path is Path.MN
            proc = HarqProcess(tb, feedback_due, decoded, primary)
            self.sim.at(feedback_due, EventKind.HARQ_FEEDBACK, f"cell{cell.cid}", (cell.cid, proc))
        if any(cell.queues[u] for u in cell.queues):
            self._ensure_slot(cell)

    def _on_feedback(self, ev: Event) -> None:
        cid, proc = ev.payload
        tb = proc.tb
        uid = tb.link[1]
        ue = self.ues[uid]
        actions = on_feedback(proc, self.cfg.radio.harq_max_retx)
        if actions.notify_duplication:
            if self._counted(tb.carried_sdus[0]):
                ue.counters.mn_nacks += 1
            on_primary_nack(ue.dup, self.sim.now, self.policy)
            if self.policy.mode is PdMode.HARQ_TIMER:
                self.sim.cancel(ue.dup_expiry)
                ue.dup_expiry = self.sim.at(ue.dup.active_until, EventKind.DUP_TIMER_EXPIRY, f"ue{uid}", uid)
        if actions.retransmit:
            retx = TransportBlock(next(self._tb_ids), tb.carried_sdus, tb.size, tb.link, attempt=tb.attempt + 1)
            self._enqueue(self.cells[cid], uid, retx, front=True)

    def _on_dup_expiry(self, ev: Event) -> None:
        self.ues[ev.payload].dup_expiry = None

    # --- receiver ------------------------------------------------------------

    def _on_packet_arrival(self, ev: Event) -> None:
        uid, sdus = ev.payload
        ue = self.ues[uid]
        for sdu in sdus:
            res = ue.rx.ingest(sdu)
            if res.dropped is not None and self._counted(sdu):
                if sdu.sn in ue.delivered_sns:
                    ue.counters.duplicates_discarded += 1
                else:
                    ue.counters.late_discarded += 1
            self._deliver(ue, res.delivered)
            self._reorder_timer(ue, res.timer)

    def _on_reorder_expiry(self, ev: Event) -> None:
        ue = self.ues[ev.payload]
        ue.reorder_event = None
        res = ue.rx.expire()
        self._deliver(ue, res.delivered)
        self._reorder_timer(ue, res.timer)

    def _reorder_timer(self, ue: UeContext, action: TimerAction) -> None:
        if action is TimerAction.NONE:
            return
        self.sim.cancel(ue.reorder_event)
        ue.reorder_event = None
        if action in (TimerAction.START, TimerAction.RESTART) and math.isfinite(ue.rx.t_reordering):
            ue.reorder_event = self.sim.after(
                to_ns(ue.rx.t_reordering), EventKind.REORDER_TIMER_EXPIRY, f"ue{ue.uid}", ue.uid
            )

    def _deliver(self, ue: UeContext, sdus: list[PdcpSdu]) -> None:
        for sdu in sdus:
            if sdu.sn in ue.delivered_sns:
                raise AssertionError(f"UE {ue.uid}: SN {sdu.sn} delivered twice")
            ue.delivered_sns.add(sdu.sn)
            if self._counted(sdu):
                ue.counters.delivered += 1

    # --- driver ----------------------------------------------------------------

    def run(self) -> RunSummary:
        return self.run_until(self.t_end)

    def run_until(self, t_end: int) -> RunSummary:
        """Simulate [0, t_end], stop sources, then drain in-flight events."""
        self.t_end = t_end
        if t_end > 0:
            self.sim.at(0, EventKind.MEASUREMENT, "ues")
            self.sim.at(0, EventKind.MOBILITY_TICK, "sats")
            for ue in self.ues:
                if ue.flow.next_emit < t_end:
                    self.sim.at(ue.flow.next_emit, EventKind.TRAFFIC_TICK, f"ue{ue.uid}", ue.uid)
        self.sim.run_until(t_end)
        drain = to_ns(self.cfg.simulation.drain_s)
        t_reo = self.cfg.pdcp.t_reordering_ms / 1000.0
        if math.isfinite(t_reo):
            drain = max(drain, to_ns(2 * t_reo + 1.0))
        self.sim.run_until(t_end + drain)
        for ue in self.ues:
            c = ue.counters
            c.lost = c.sent - c.delivered
        return RunSummary(self.seed, self.policy.mode.value, [u.counters for u in self.ues], self.sim.trace_digest())


def run_once(cfg: ScenarioConfig, seed: int, trace: TextIO | None = None) -> RunSummary:
    return ScenarioRun(cfg, seed, trace).run()
