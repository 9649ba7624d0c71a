"""Cell selection, A3-triggered secondary-node addition and the Xn forwarding link."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .pdcp import PdcpSdu


class McConfigError(ValueError):
    pass


@dataclass
class McBinding:
    ue: int
    mn: int
    sn: int | None = None
    established_at: int | None = None  # ns, time the SN was bound

    def bind_sn(self, sn: int, now: int) -> None:
        if sn == self.mn:
            raise McConfigError(f"UE {self.ue}: SN cannot equal MN ({sn})")
        if self.sn is not None:
            raise McConfigError(f"UE {self.ue}: SN already bound to {self.sn}")
        self.sn = sn
        self.established_at = now


@dataclass(frozen=True)
class XnLink:
    delay: int = 2_000_000  # ns
    endpoints: tuple[int, int] = (0, 1)

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("Xn delay must be non-negative")


def cell_select(ue: int, cells: Sequence[tuple[int, float]]) -> int:
    """Strongest cell by RSRP; ties go to the lowest cell id."""
    if not cells:
        raise McConfigError(f"UE {ue}: no candidate cells")
    return min(cells, key=lambda c: (-c[1], c[0]))[0]


def evaluate_a3(serving_rsrp: float, neighbor_rsrp: float, offset: float) -> bool:
    return neighbor_rsrp + offset >= serving_rsrp


def xn_forward(sdu: PdcpSdu, link: XnLink, now: int) -> tuple[int, PdcpSdu]:
    """Arrival time of the SDU copy in the SN transmit queue."""
    return now + link.delay, sdu
