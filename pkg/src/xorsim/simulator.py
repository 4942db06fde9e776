"""Deterministic discrete-event simulation of the store-and-forward radio net.

Events sit in a single heap keyed by (time, ordinal); the ordinal is a global
schedule-order counter, so same-time events always replay identically. The
channel is idealized: every transmission reaches the sender's whole
neighborhood intact, with no interference, after one serialization delay.
A node's radio is half-duplex: it transmits one packet at a time and works
through its backlog whenever the radio goes idle.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .coding import Scheme
from .node import Node, Transmission
from .packet import (
    EncodedPacket,
    NativePacket,
    PacketUid,
    Role,
    holder_overhead_bytes,
)
from .topology import NodeId, NoRouteError, Topology, shortest_path

DEFAULT_PACKET_SIZE = 512  # bytes
DEFAULT_CHANNEL_RATE = 2_000_000.0  # bit/s
DEFAULT_DURATION = 120.0  # seconds


class ScenarioInvalidError(Exception):
    """The scenario violates a structural constraint; nothing was simulated."""


@dataclass(frozen=True)
class FlowSpec:
    """One constant-bit-rate flow: packet k leaves the source at start + k/rate."""

    flow: int
    src: NodeId
    dst: NodeId
    rate: float  # packets per second
    packet_size: int = DEFAULT_PACKET_SIZE
    start: float = 0.0
    stop: Optional[float] = None  # defaults to scenario duration


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    flows: tuple[FlowSpec, ...]
    scheme: Scheme
    duration: float = DEFAULT_DURATION
    channel_rate: float = DEFAULT_CHANNEL_RATE
    seed: int = 0
    count_header_overhead: bool = False
    drain_grace: float = 0.0
    capture_trace: bool = True


class EventKind(Enum):
    PACKET_GEN = "gen"
    TX_END = "tx_end"
    NODE_WAKE = "wake"


class TraceLog:
    """Append-only run log; one CSV-ish line per simulation event."""

    def __init__(self) -> None:
        self.lines: list[str] = []

    def add(self, time: float, node: NodeId, event: str, uid, detail: str = "") -> None:
        self.lines.append(f"{time!r},{node},{event},{uid},{detail}")

    def sha256(self) -> str:
        digest = hashlib.sha256()
        for line in self.lines:
            digest.update(line.encode())
            digest.update(b"\n")
        return digest.hexdigest()

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("time,node,event,packet_uid,detail\n")
            for line in self.lines:
                fh.write(line + "\n")

    def __iter__(self):
        return iter(self.lines)

    def __len__(self) -> int:
        return len(self.lines)


def payload_bytes(seed: int, uid: PacketUid, size: int) -> bytes:
    """Deterministic pseudo-random payload for packet uid under a run seed."""
    return random.Random(f"payload:{seed}:{uid.flow}:{uid.seq}").randbytes(size)


class Simulation:
    """One run. Build it, call run(), then read counters or finalize metrics."""

    def __init__(self, scenario: Scenario):
        validate_scenario(scenario)
        self.scenario = scenario
        topo = scenario.topology
        self.routes: dict[int, tuple[NodeId, ...]] = {
            f.flow: shortest_path(topo, f.src, f.dst) for f in scenario.flows
        }
        self.nodes: list[Node] = [
            Node(id=i, neighbors=topo.neighbors(i), scheme=scenario.scheme)
            for i in range(topo.n)
        ]
        self.trace_log = TraceLog()
        self._heap: list = []
        self._ordinal = 0
        self.now = 0.0
        self.active_transmissions: list[Transmission] = []

        self.generated: dict[PacketUid, NativePacket] = {}
        self.delivered: dict[PacketUid, tuple[float, NativePacket]] = {}
        self.delivery_order: dict[int, list[int]] = {f.flow: [] for f in scenario.flows}
        self.double_deliveries = 0
        self.tx_native = 0
        self.tx_encoded = 0
        self.encode_count = 0
        self.per_node_encodes: dict[NodeId, int] = {}
        self.decode_failures = 0
        self.holder_bytes_total = 0

        # optional test probes
        self.pair_probe = None
        self.encode_probe = None

        for flow in scenario.flows:
            self._schedule_generation(flow)

    # -- event plumbing ----------------------------------------------------

    def _schedule(self, time: float, kind: EventKind, data) -> None:
        heapq.heappush(self._heap, (time, self._ordinal, kind.value, data))
        self._ordinal += 1

    def _schedule_generation(self, flow: FlowSpec) -> None:
        stop = self.scenario.duration if flow.stop is None else min(flow.stop, self.scenario.duration)
        k = 0
        while True:
            t = flow.start + k / flow.rate
            if t >= stop:
                break
            self._schedule(t, EventKind.PACKET_GEN, (flow, k))
            k += 1

    def run(self) -> "Simulation":
        end = self.scenario.duration + self.scenario.drain_grace
        heap = self._heap
        while heap and heap[0][0] <= end:
            time, _, kind, data = heapq.heappop(heap)
            self.now = time
            if kind == EventKind.NODE_WAKE.value:
                self._on_wake(data, time)
            elif kind == EventKind.TX_END.value:
                self._on_tx_end(data, time)
            else:
                self._on_gen(data, time)
        return self

    def _on_gen(self, data, now: float) -> None:
        flow, seq = data
        uid = PacketUid(flow.flow, seq)
        packet = NativePacket(
            uid=uid,
            src=flow.src,
            dst=flow.dst,
            route=self.routes[flow.flow],
            hop_index=0,
            holders=frozenset(),
            payload=payload_bytes(self.scenario.seed, uid, flow.packet_size),
            created_at=now,
        )
        self.generated[uid] = packet
        self.trace(now, flow.src, "gen", packet)
        self.nodes[flow.src].accept(packet, Role.ADDRESSED)
        self._schedule(now, EventKind.NODE_WAKE, flow.src)

    def _on_tx_end(self, tx: Transmission, now: float) -> None:
        sender = self.nodes[tx.sender]
        sender.transmitting = False
        self.active_transmissions.remove(tx)
        self.trace(now, tx.sender, "tx_end", tx.packet)
        # overhearing is pure listening: it lands in the buffer the moment
        # the transmission ends, never competing with the radio's work
        for receiver in sorted(tx.overhearers):
            self.nodes[receiver].on_receive(tx.packet, Role.OVERHEARD, now, self)
        for receiver in sorted(tx.addressed):
            self.nodes[receiver].accept(tx.packet, Role.ADDRESSED)
            self._schedule(now, EventKind.NODE_WAKE, receiver)
        self._schedule(now, EventKind.NODE_WAKE, tx.sender)

    def _on_wake(self, node_id: NodeId, now: float) -> None:
        node = self.nodes[node_id]
        if node.transmitting:
            return
        node.pair_probe = self.pair_probe
        node.process_input(now, self)
        tx = node.on_send(now, self)
        if tx is None:
            return
        tx = replace(tx, duration=self.tx_duration(tx.packet))
        node.transmitting = True
        self.active_transmissions.append(tx)
        if isinstance(tx.packet, EncodedPacket):
            self.tx_encoded += 1
        else:
            self.tx_native += 1
        if self.scenario.scheme is Scheme.EXCODE:
            self.holder_bytes_total += holder_overhead_bytes(tx.packet)
        self.trace(now, node_id, "tx_start", tx.packet, "to=" + "|".join(map(str, sorted(tx.addressed))))
        self._schedule(tx.end_time, EventKind.TX_END, tx)

    def tx_duration(self, packet) -> float:
        """Serialization time; holder bytes ride for free unless counted in."""
        size = len(packet.payload)
        if self.scenario.count_header_overhead and self.scenario.scheme is Scheme.EXCODE:
            size += holder_overhead_bytes(packet)
        return 8.0 * size / self.scenario.channel_rate

    # -- hooks called by nodes ---------------------------------------------

    def trace(self, now: float, node: NodeId, event: str, uid, detail: str = "") -> None:
        if self.scenario.capture_trace:
            self.trace_log.add(now, node, event, uid, detail)

    def deliver(self, node: NodeId, packet: NativePacket, now: float) -> None:
        if packet.uid in self.delivered:
            self.double_deliveries += 1
            return
        self.delivered[packet.uid] = (now, packet)
        self.delivery_order[packet.uid.flow].append(packet.uid.seq)

    def native_buffered(self, node: NodeId, packet: NativePacket) -> None:
        if self.scenario.scheme is not Scheme.COPE:
            return
        for nb in self.nodes[node].neighbors:
            self.nodes[nb].reports[node].add(packet.uid)

    def encoded_pair(self, node: NodeId, p: NativePacket, q: NativePacket, now: float) -> None:
        self.encode_count += 1
        self.per_node_encodes[node] = self.per_node_encodes.get(node, 0) + 1
        if self.encode_probe is not None:
            self.encode_probe(self, node, p, q)

    def decode_failed(self, node: NodeId, encoded: EncodedPacket, missing: PacketUid, now: float) -> None:
        self.decode_failures += 1

    @property
    def total_tx(self) -> int:
        return self.tx_native + self.tx_encoded


def validate_scenario(scenario: Scenario) -> None:
    topo = scenario.topology
    if scenario.duration <= 0:
        raise ScenarioInvalidError("duration must be positive")
    if scenario.channel_rate <= 0:
        raise ScenarioInvalidError("channel rate must be positive")
    if scenario.drain_grace < 0:
        raise ScenarioInvalidError("drain grace must be >= 0")
    seen_ids = set()
    for f in scenario.flows:
        tag = f"flow {f.flow}"
        if f.flow in seen_ids:
            raise ScenarioInvalidError(f"{tag}: duplicate flow id")
        seen_ids.add(f.flow)
        if not (0 <= f.src < topo.n) or not (0 <= f.dst < topo.n):
            raise ScenarioInvalidError(f"{tag}: endpoint out of range")
        if f.src == f.dst:
            raise ScenarioInvalidError(f"{tag}: source equals destination")
        if f.rate <= 0:
            raise ScenarioInvalidError(f"{tag}: rate must be positive")
        if f.packet_size < 1:
            raise ScenarioInvalidError(f"{tag}: packet size must be >= 1 byte")
        if f.start < 0:
            raise ScenarioInvalidError(f"{tag}: start must be >= 0")
        if f.stop is not None and f.stop < f.start:
            raise ScenarioInvalidError(f"{tag}: stop precedes start")
        try:
            shortest_path(topo, f.src, f.dst)
        except NoRouteError:
            raise ScenarioInvalidError(f"{tag}: no route from {f.src} to {f.dst}") from None


def run(scenario: Scenario) -> Simulation:
    """Simulate one scenario to completion."""
    return Simulation(scenario).run()


# -- post-run invariant audits ----------------------------------------------


def audit_conservation(sim: Simulation) -> list[str]:
    """Every generated packet must be in exactly one place: delivered, queued
    at its current custodian, or inside an in-flight transmission."""
    places: dict[PacketUid, list[str]] = {}

    def put(uid: PacketUid, where: str) -> None:
        places.setdefault(uid, []).append(where)

    def put_packet(pkt, where: str, custodian: Optional[NodeId]) -> None:
        if isinstance(pkt, NativePacket):
            put(pkt.uid, where)
        else:
            for h in pkt.active_headers():
                if custodian is None or h.custodian == custodian:
                    put(h.uid, where)

    for node in sim.nodes:
        for pkt, role in node.input_queue:
            if role is Role.ADDRESSED:
                put_packet(pkt, f"input:{node.id}", node.id)
        for pkt in node.output_queue:
            put_packet(pkt, f"output:{node.id}", None)
    for tx in sim.active_transmissions:
        put_packet(tx.packet, f"air:{tx.sender}", None)
    for uid in sim.delivered:
        put(uid, "delivered")

    violations = []
    for uid in sim.generated:
        spots = places.get(uid, [])
        if len(spots) != 1:
            violations.append(f"{uid}: found in {spots or 'nowhere'}")
    for uid in places:
        if uid not in sim.generated:
            violations.append(f"{uid}: never generated")
    if sim.double_deliveries:
        violations.append(f"{sim.double_deliveries} duplicate deliveries")
    return violations


def fifo_violations(sim: Simulation) -> list[str]:
    """Per flow, delivered sequence numbers must be strictly increasing."""
    bad = []
    for flow, seqs in sim.delivery_order.items():
        for a, b in zip(seqs, seqs[1:]):
            if b <= a:
                bad.append(f"flow {flow}: seq {b} delivered after {a}")
    return bad
