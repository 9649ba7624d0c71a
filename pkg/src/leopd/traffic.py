"""Application sources: CBR flows for measured UEs, full-buffer sources for interferers."""

from __future__ import annotations

from dataclasses import dataclass

from .pdcp import PdcpSdu


@dataclass
class CbrFlow:
    ue: int
    packet_size: int = 32  # bytes
    interval: int = 20_000_000  # ns
    next_emit: int = 0  # ns
    next_sn: int = 0

    def __post_init__(self):
        if self.interval <= 0 or self.packet_size <= 0:
            raise ValueError("CBR interval and packet size must be positive")


def cbr_tick(flow: CbrFlow, now: int) -> PdcpSdu:
    if now != flow.next_emit:
        raise ValueError(f"CBR tick at {now} ns, expected {flow.next_emit} ns")
    sdu = PdcpSdu(sn=flow.next_sn, flow=flow.ue, size=flow.packet_size, created_at=now)
    flow.next_sn += 1
    flow.next_emit += flow.interval
    return sdu


def cbr_emission_count(t_start: int, t_end: int, phase: int, interval: int) -> int:
    """Emissions at phase + k*interval falling in [t_start, t_end)."""
    def upto(t):  # emissions strictly before t
        return 0 if t <= phase else -(-(t - phase) // interval)
    return upto(t_end) - upto(t_start)


@dataclass
class FullBufferSource:
    ue: int
    tb_bytes: int = 32

    def backlog(self) -> int:
        return 1  # never empty

    def poll(self, grants: int) -> list[int]:
        """Payload sizes for the granted transport blocks, always full."""
        return [self.tb_bytes] * grants
