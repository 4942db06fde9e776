"""Per-run metrics and their CSV serialization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .simulator import Simulation
from .topology import NodeId

CSV_COLUMNS = (
    "scheme",
    "seed",
    "flows",
    "offered_kbps",
    "throughput_kbps",
    "encoded_frac",
    "pdr",
    "mean_delay_s",
    "total_tx",
    "encodes",
    "decode_failures",
)


@dataclass(frozen=True)
class MetricsReport:
    scheme: str
    seed: int
    flows: int
    duration: float
    generated: int
    delivered: int
    offered_kbps: float
    throughput_kbps: float
    encoded_fraction: float
    delivery_ratio: float
    mean_delay_s: Optional[float]  # absent when nothing was delivered
    total_tx: int
    encoded_tx: int
    encode_count: int
    decode_failures: int
    per_node_encodes: dict[NodeId, int]
    holder_bytes_total: int

    def csv_row(self) -> str:
        delay = "" if self.mean_delay_s is None else repr(self.mean_delay_s)
        cells = (
            self.scheme,
            str(self.seed),
            str(self.flows),
            repr(self.offered_kbps),
            repr(self.throughput_kbps),
            repr(self.encoded_fraction),
            repr(self.delivery_ratio),
            delay,
            str(self.total_tx),
            str(self.encode_count),
            str(self.decode_failures),
        )
        return ",".join(cells)


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def finalize(sim: Simulation) -> MetricsReport:
    """Reduce a finished run to its report."""
    scn = sim.scenario
    duration = scn.duration
    offered_bits = sum(len(p.payload) * 8 for p in sim.generated.values())
    delivered_bits = 0
    delay_sum = 0.0
    for uid, (at, pkt) in sim.delivered.items():
        delivered_bits += len(pkt.payload) * 8
        delay_sum += at - pkt.created_at
    n_delivered = len(sim.delivered)
    n_generated = len(sim.generated)
    total_tx = sim.total_tx
    return MetricsReport(
        scheme=str(scn.scheme),
        seed=scn.seed,
        flows=len(scn.flows),
        duration=duration,
        generated=n_generated,
        delivered=n_delivered,
        offered_kbps=offered_bits / duration / 1000.0,
        throughput_kbps=delivered_bits / duration / 1000.0,
        encoded_fraction=(sim.tx_encoded / total_tx) if total_tx else 0.0,
        delivery_ratio=(n_delivered / n_generated) if n_generated else 1.0,
        mean_delay_s=(delay_sum / n_delivered) if n_delivered else None,
        total_tx=total_tx,
        encoded_tx=sim.tx_encoded,
        encode_count=sim.encode_count,
        decode_failures=sim.decode_failures,
        per_node_encodes=dict(sorted(sim.per_node_encodes.items())),
        holder_bytes_total=sim.holder_bytes_total,
    )
