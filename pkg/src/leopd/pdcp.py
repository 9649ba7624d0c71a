"""PDCP duplication control (transmit side) and duplicate discard / reordering (receive side).

All times are integer nanoseconds of simulation time.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

from .engine import to_ns


class PdMode(str, enum.Enum):
    OFF = "off"
    BLIND = "blind"
    HARQ_TIMER = "harq_timer"


class Path(str, enum.Enum):
    MN = "MN"
    SN = "SN"


class ReorderMode(str, enum.Enum):
    OUT_OF_ORDER = "out_of_order"
    IN_ORDER = "in_order"


@dataclass(frozen=True)
class DuplicationPolicy:
    mode: PdMode = PdMode.HARQ_TIMER
    dup_duration: int = to_ns(0.050)  # ns, harq_timer only

    def __post_init__(self):
        object.__setattr__(self, "mode", PdMode(self.mode))
        if self.mode is PdMode.HARQ_TIMER and self.dup_duration <= 0:
            raise ValueError("dup_duration must be positive in harq_timer mode")


@dataclass
class DuplicationState:
    """Per-UE duplication timer. Active at ``now`` iff ``now < active_until``."""

    active_until: int | None = None
    duplicates_created: int = 0

    def active(self, now: int) -> bool:
        return self.active_until is not None and now < self.active_until


@dataclass(frozen=True)
class PdcpSdu:
    sn: int
    flow: int
    size: int
    created_at: int  # ns
    path: Path = Path.MN

    def copy_for(self, path: Path) -> "PdcpSdu":
        return dataclasses.replace(self, path=path)


def tx_submit(
    sdu: PdcpSdu,
    policy: DuplicationPolicy,
    state: DuplicationState,
    now: int,
    sn_established: bool = True,
) -> list[PdcpSdu]:
    """Legs for one SDU arriving at the MN's PDCP: the MN copy, plus an SN copy when duplicating."""
    legs = [sdu.copy_for(Path.MN)]
    if not sn_established:
        return legs
    if policy.mode is PdMode.BLIND or (policy.mode is PdMode.HARQ_TIMER and state.active(now)):
        legs.append(sdu.copy_for(Path.SN))
        state.duplicates_created += 1
    return legs


def on_primary_nack(state: DuplicationState, now: int, policy: DuplicationPolicy) -> DuplicationState:
    """(Re)start the duplication timer; any earlier deadline is overwritten."""
    if policy.mode is PdMode.HARQ_TIMER:
        state.active_until = now + policy.dup_duration
    return state


def reorder_window_bounds(t: float) -> ReorderMode:
    """Validate a t-Reordering value in seconds; 0 selects out-of-order delivery."""
    if t is None or math.isnan(t) or t < 0:
        raise ValueError(f"t_reordering {t} s must be >= 0")
    if t == 0:
        return ReorderMode.OUT_OF_ORDER
    if math.isinf(t) or t <= 3.0:
        return ReorderMode.IN_ORDER
    raise ValueError(f"t_reordering {t} s outside (0, 3] and not infinite")


class TimerAction(enum.Enum):
    NONE = "none"
    START = "start"
    STOP = "stop"
    RESTART = "restart"


@dataclass
class RxResult:
    delivered: list[PdcpSdu] = field(default_factory=list)
    timer: TimerAction = TimerAction.NONE
    dropped: PdcpSdu | None = None


@dataclass
class ReorderBuffer:
    """Receive-side PDCP entity for one flow.

    Out-of-order mode delivers every first copy at once. In-order mode
    delivers the consecutive run from ``next_expected``; a gap starts the
    reordering timer with ``timer_trigger_sn`` set to the SN that opened
    the gap. Expiry flushes everything below the trigger plus the
    consecutive run from it; SNs below the new floor are then discarded.
    """

    mode: ReorderMode = ReorderMode.OUT_OF_ORDER
    t_reordering: float = 0.0  # s
    next_expected: int = 0
    held: dict[int, PdcpSdu] = field(default_factory=dict)
    timer_trigger_sn: int | None = None
    delivered_high: int = -1
    received: set[int] = field(default_factory=set)
    delivered_count: int = 0
    duplicates_discarded: int = 0
    late_discarded: int = 0

    def __post_init__(self):
        self.mode = ReorderMode(self.mode)

    @property
    def timer_running(self) -> bool:
        return self.timer_trigger_sn is not None

    def _deliver(self, sdu: PdcpSdu, out: list[PdcpSdu]) -> None:
        out.append(sdu)
        self.delivered_count += 1
        self.delivered_high = max(self.delivered_high, sdu.sn)

    def _deliver_run(self, out: list[PdcpSdu]) -> None:
        while self.next_expected in self.held:
            self._deliver(self.held.pop(self.next_expected), out)
            self.next_expected += 1

    def ingest(self, sdu: PdcpSdu) -> RxResult:
        sn = sdu.sn
        if sn in self.received:
            self.duplicates_discarded += 1
            return RxResult(dropped=sdu)
        if self.mode is ReorderMode.OUT_OF_ORDER:
            self.received.add(sn)
            res = RxResult()
            self._deliver(sdu, res.delivered)
            return res
        if sn < self.next_expected:
            self.late_discarded += 1
            return RxResult(dropped=sdu)

        self.received.add(sn)
        self.held[sn] = sdu
        res = RxResult()
        self._deliver_run(res.delivered)
        if self.timer_running:
            if self.next_expected > self.timer_trigger_sn:
                if self.held:
                    self.timer_trigger_sn = min(self.held)
                    res.timer = TimerAction.RESTART
                else:
                    self.timer_trigger_sn = None
                    res.timer = TimerAction.STOP
        elif self.held:
            self.timer_trigger_sn = sn if sn in self.held else min(self.held)
            res.timer = TimerAction.START
        return res

    def expire(self) -> RxResult:
        res = RxResult()
        if not self.timer_running:
            return res
        trigger = self.timer_trigger_sn
        for sn in sorted(s for s in self.held if s < trigger):
            self._deliver(self.held.pop(sn), res.delivered)
        self.next_expected = max(self.next_expected, trigger)
        self._deliver_run(res.delivered)
        if self.held:
            self.timer_trigger_sn = min(self.held)
            res.timer = TimerAction.RESTART
        else:
            self.timer_trigger_sn = None
            res.timer = TimerAction.STOP
        return res


def rx_ingest(buffer: ReorderBuffer, sdu: PdcpSdu, now: int | None = None) -> RxResult:
    return buffer.ingest(sdu)


def on_reorder_expiry(buffer: ReorderBuffer, now: int | None = None) -> RxResult:
    return buffer.expire()
