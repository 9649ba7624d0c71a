"""Link abstraction, round-robin scheduling and HARQ with a retransmission cap."""

from __future__ import annotations

import enum
import math
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .channel import LinkBudgetParams, LinkState, basic_path_loss, received_power, total_path_loss


def db_to_lin(x: float) -> float:
    return 10.0 ** (x / 10.0)


def lin_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def power_sum_dbm(powers_dbm: Iterable[float]) -> float:
    """Sum of powers given in dBm; -inf for an empty set."""
    total = sum(db_to_lin(p) for p in powers_dbm)
    return lin_to_db(total) if total > 0 else -math.inf


def sinr(c_dbm: float, interference_dbm: Iterable[float] | float, noise_dbm: float) -> float:
    """C / (I + N) in dB. ``interference_dbm`` is one aggregate level or a set of interferer levels."""
    if isinstance(interference_dbm, (int, float)):
        i_lin = 0.0 if interference_dbm == -math.inf else db_to_lin(interference_dbm)
    else:
        i_lin = sum(db_to_lin(p) for p in interference_dbm)
    return c_dbm - lin_to_db(i_lin + db_to_lin(noise_dbm))


@dataclass(frozen=True)
class BlerCurve:
    """Logistic BLER(SINR) for one MODCOD: 0.5 at ``midpoint_sinr``."""

    midpoint_sinr: float = 0.0  # dB
    slope: float = 1.0  # 1/dB

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError("BLER slope must be positive")


def bler(sinr_db: float, curve: BlerCurve) -> float:
    x = curve.slope * (sinr_db - curve.midpoint_sinr)
    if x >= 0:
        e = math.exp(-x)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(x))


def rsrp(
    link: LinkState,
    params: LinkBudgetParams,
    pl_gas: float = 0.0,
    pl_scint: float = 0.0,
    reference_resources: int = 624,
) -> float:
    """Received power spread over ``reference_resources`` subcarriers, dBm.

    The per-resource offset is identical for every cell, so RSRP differences
    equal received-power differences.
    """
    pl = total_path_loss(basic_path_loss(link), pl_gas, pl_scint)
    return received_power(params, pl) - lin_to_db(reference_resources)


# --- wraparound layout -------------------------------------------------------

_HEX_DIRS = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]


@dataclass(frozen=True)
class BeamSlot:
    ring: int
    q: int
    r: int
    color: int  # sub-band index


def hex_rings(rings: int, frf: int) -> list[BeamSlot]:
    """Beams in rings 1..``rings`` around a center beam at axial (0, 0).

    With FRF 3 the colouring (q - r) mod 3 gives every beam a sub-band
    different from all six neighbours. FRF 1 puts every beam on sub-band 0.
    """
    if frf not in (1, 3):
        raise ValueError(f"unsupported FRF {frf}")
    out = []
    for k in range(1, rings + 1):
        q, r = -k, k  # start at direction 4 scaled by k
        for dq, dr in _HEX_DIRS:
            for _ in range(k):
                color = (q - r) % 3 if frf == 3 else 0
                out.append(BeamSlot(k, q, r, color))
                q, r = q + dq, r + dr
    return out


def co_channel(beams: Iterable[BeamSlot], color: int = 0) -> list[BeamSlot]:
    return [b for b in beams if b.color == color]


# --- scheduling ----------------------------------------------------------------


class RoundRobinScheduler:
    """Cyclic grant order over registered queues; empty queues are skipped.

    Each grant is one transport block costing ``resources_per_tb`` units.
    The rotation pointer persists across slots, so a queue served last in
    one slot is not first in the next.
    """

    def __init__(self, resources_per_tb: int = 1):
        if resources_per_tb <= 0:
            raise ValueError("resources_per_tb must be positive")
        self.order: list[Hashable] = []
        self._next = 0
        self.resources_per_tb = resources_per_tb

    def register(self, key: Hashable) -> None:
        if key not in self.order:
            self.order.append(key)

    def allocate(self, backlog: Mapping[Hashable, int], slot_resources: int) -> list[Hashable]:
        remaining = dict(backlog)
        grants: list[Hashable] = []
        budget = slot_resources // self.resources_per_tb
        n = len(self.order)
        idle = 0
        while budget > 0 and n and idle < n:
            key = self.order[self._next]
            self._next = (self._next + 1) % n
            if remaining.get(key, 0) > 0:
                grants.append(key)
                remaining[key] -= 1
                budget -= 1
                idle = 0
            else:
                idle += 1
        return grants


def schedule_round_robin(active_queues: list[int], slot_resources: int, start: int = 0) -> tuple[list[int], int]:
    """Functional form: queue lengths in fixed order -> (granted queue indices, next start index)."""
    rr = RoundRobinScheduler()
    rr.order = list(range(len(active_queues)))
    rr._next = start % len(active_queues) if active_queues else 0
    grants = rr.allocate(dict(enumerate(active_queues)), slot_resources)
    return grants, rr._next


# --- HARQ ------------------------------------------------------------------------


class HarqOutcome(enum.Enum):
    PENDING = "pending"
    ACKED = "acked"
    FAILED = "failed"


@dataclass
class TransportBlock:
    tb_id: int
    carried_sdus: list
    size: int
    link: tuple  # (cell, ue, beam)
    attempt: int = 1

    def __post_init__(self):
        if not 1 <= self.attempt <= 2:
            raise ValueError(f"attempt {self.attempt} outside [1, 2]")


@dataclass
class HarqProcess:
    tb: TransportBlock
    feedback_due: int  # ns
    decoded: bool
    primary: bool
    outcome: HarqOutcome = HarqOutcome.PENDING

    def resolve(self, outcome: HarqOutcome) -> None:
        if self.outcome is not HarqOutcome.PENDING:
            raise RuntimeError(f"HARQ process for TB {self.tb.tb_id} resolved twice")
        self.outcome = outcome


def transmit(tb: TransportBlock, link_sinr: float, curve: BlerCurve, rng: np.random.Generator) -> bool:
    """One transmission attempt; True when decoded. Attempts are independent (no soft combining)."""
    p_fail = bler(link_sinr, curve)
    return not (rng.random() < p_fail)


@dataclass(frozen=True)
class FeedbackActions:
    retransmit: bool = False
    failed: bool = False
    notify_duplication: bool = False


def on_feedback(process: HarqProcess, max_retx: int = 1) -> FeedbackActions:
    """Resolve a HARQ process once its ACK/NACK reaches the gNB."""
    if process.decoded:
        process.resolve(HarqOutcome.ACKED)
        return FeedbackActions()
    notify = process.primary
    if process.tb.attempt <= max_retx:
        process.resolve(HarqOutcome.FAILED)
        return FeedbackActions(retransmit=True, notify_duplication=notify)
    process.resolve(HarqOutcome.FAILED)
    return FeedbackActions(failed=True, notify_duplication=notify)

