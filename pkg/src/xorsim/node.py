"""Per-node protocol state: queues, packet buffer, receive/send behavior.

Received packets are handled one at a time, each through the same branch
ladder:

1. a uid already handled in the same role (addressed/overheard) is dropped;
2. overheard packets are stored in the buffer and go no further;
3. packets destined here are delivered, decoding first when encoded;
4. anything else is relay traffic: under a coding scheme the node scans the
   rest of the input queue for a codable partner and, if one exists, XORs the
   pair into a single output-queue entry; otherwise the packet is queued for
   forwarding as-is.

Addressed arrivals wait in a FIFO input queue until the node's radio is
idle; that waiting room is where crossing flows meet and become codable.
Overheard arrivals carry no forwarding obligation and are absorbed at
reception time. The output queue drains one packet per transmission.
Natives get their holder set extended just before each send; encoded packets
advance each still-active constituent along its own frozen route.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Optional, Protocol

from .coding import ReceptionReports, Scheme, find_partner
from .packet import (
    ConstituentHeader,
    EncodedPacket,
    NativePacket,
    Packet,
    PacketUid,
    Role,
    annotate_holders,
    packet_key,
    xor_decode,
    xor_encode,
)
from .topology import NodeId


class SimHooks(Protocol):
    """Callbacks a node uses to report observable transitions."""

    def trace(self, now: float, node: NodeId, event: str, uid, detail: str = "") -> None: ...

    def deliver(self, node: NodeId, packet: NativePacket, now: float) -> None: ...

    def native_buffered(self, node: NodeId, packet: NativePacket) -> None: ...

    def encoded_pair(self, node: NodeId, p: NativePacket, q: NativePacket, now: float) -> None: ...

    def decode_failed(self, node: NodeId, encoded: EncodedPacket, missing: PacketUid, now: float) -> None: ...


@dataclass
class NodeStats:
    transmissions: int = 0
    encodes: int = 0
    decodes: int = 0
    decode_failures: int = 0
    duplicates: int = 0
    overheard: int = 0
    delivered: int = 0


@dataclass
class Transmission:
    """One broadcast: every neighbor of the sender receives it."""

    sender: NodeId
    packet: Packet
    started_at: float
    duration: float
    addressed: frozenset[NodeId]
    overhearers: frozenset[NodeId]

    @property
    def end_time(self) -> float:
        return self.started_at + self.duration


@dataclass
class Node:
    id: NodeId
    neighbors: frozenset[NodeId]
    scheme: Scheme
    input_queue: deque = field(default_factory=deque)  # (packet, role) pairs
    output_queue: deque = field(default_factory=deque)
    buffer: dict = field(default_factory=dict)  # key -> packet, natives and encoded
    seen_addressed: set = field(default_factory=set)
    seen_overheard: set = field(default_factory=set)
    reports: ReceptionReports = field(default_factory=dict)  # neighbor -> native uids
    transmitting: bool = False
    stats: NodeStats = field(default_factory=NodeStats)
    pair_probe = None

    def __post_init__(self) -> None:
        self.reports = {nb: set() for nb in self.neighbors}

    @property
    def seen(self) -> set:
        return self.seen_addressed | self.seen_overheard

    def accept(self, packet: Packet, role: Role) -> None:
        """Queue one delivered packet for processing."""
        self.input_queue.append((packet, role))

    def process_input(self, now: float, sim: SimHooks) -> None:
        """Drain the input queue in arrival order."""
        while self.input_queue:
            packet, role = self.input_queue.popleft()
            self.on_receive(packet, role, now, sim)

    def on_receive(self, packet: Packet, role: Role, now: float, sim: SimHooks) -> None:
        key = packet_key(packet)
        seen = self.seen_overheard if role is Role.OVERHEARD else self.seen_addressed
        if key in seen:
            self.stats.duplicates += 1
            sim.trace(now, self.id, "dup_discard", packet, role.value)
            return
        seen.add(key)

        if role is Role.OVERHEARD:
            self._store_overheard(packet, now, sim)
            return

        if isinstance(packet, NativePacket):
            if packet.dst == self.id:
                self._buffer_native(packet, sim)
                self.stats.delivered += 1
                sim.deliver(self.id, packet, now)
                sim.trace(now, self.id, "deliver", packet)
                return
            self._relay_native(packet, now, sim)
            return

        self._handle_addressed_encoded(packet, now, sim)

    def _relay_native(self, packet: NativePacket, now: float, sim: SimHooks) -> None:
        idx = find_partner(
            packet,
            self.input_queue,
            self.scheme,
            self_id=self.id,
            neighbors=self.neighbors,
            reports=self.reports,
            probe=self.pair_probe,
        )
        if idx is not None:
            partner, _ = self.input_queue[idx]
            del self.input_queue[idx]
            self.seen_addressed.add(partner.uid)
            self._buffer_native(packet, sim)
            self._buffer_native(partner, sim)
            encoded = xor_encode(packet, partner, now)
            self.buffer[encoded.key] = encoded
            self.seen_addressed.add(encoded.key)
            self.output_queue.append(encoded)
            self.stats.encodes += 1
            sim.encoded_pair(self.id, packet, partner, now)
            sim.trace(now, self.id, "encode", encoded, f"{packet.uid}+{partner.uid}")
            return
        self._buffer_native(packet, sim)
        self.output_queue.append(packet)
        sim.trace(now, self.id, "enqueue", packet)

    def _handle_addressed_encoded(self, packet: EncodedPacket, now: float, sim: SimHooks) -> None:
        self.buffer[packet.key] = packet
        remaining = packet
        for header in packet.constituents:
            if not header.active or header.custodian != self.id:
                continue
            if header.dst == self.id:
                remaining = self._deactivate(remaining, header.uid)
                counterpart = packet.counterpart(header)
                known = self.buffer.get(counterpart.uid)
                if isinstance(known, NativePacket):
                    native = xor_decode(packet, known)
                    self.seen_addressed.add(native.uid)
                    self._buffer_native(native, sim)
                    self.stats.decodes += 1
                    self.stats.delivered += 1
                    sim.deliver(self.id, native, now)
                    sim.trace(now, self.id, "decode_deliver", native, f"from {packet}")
                else:
                    self.stats.decode_failures += 1
                    sim.decode_failed(self.id, packet, counterpart.uid, now)
                    sim.trace(now, self.id, "decode_fail", packet, f"missing {counterpart.uid}")
        if any(h.active and h.custodian == self.id for h in remaining.constituents):
            self.forward_encoded(remaining, now, sim)

    def forward_encoded(self, packet: EncodedPacket, now: float, sim: SimHooks) -> None:
        """Queue an encoded packet onward, keeping only the branches routed
        through this node. Never re-encodes and never splits the payload."""
        for header in packet.constituents:
            if header.active and header.custodian != self.id:
                packet = self._deactivate(packet, header.uid)
        self.output_queue.append(packet)
        sim.trace(now, self.id, "forward_encoded", packet)

    def _store_overheard(self, packet: Packet, now: float, sim: SimHooks) -> None:
        self.stats.overheard += 1
        if isinstance(packet, NativePacket):
            self._buffer_native(packet, sim)
            sim.trace(now, self.id, "overhear", packet)
            return
        self.buffer[packet.key] = packet
        sim.trace(now, self.id, "overhear", packet)
        # holding one original lets the node pull out the other right away
        known = None
        unknown: Optional[ConstituentHeader] = None
        a, b = packet.constituents
        if a.uid in self.buffer and b.uid not in self.buffer:
            known, unknown = self.buffer[a.uid], b
        elif b.uid in self.buffer and a.uid not in self.buffer:
            known, unknown = self.buffer[b.uid], a
        if known is not None and isinstance(known, NativePacket):
            native = xor_decode(packet, known)
            self.seen_overheard.add(native.uid)
            self._buffer_native(native, sim)
            sim.trace(now, self.id, "early_decode", native, f"from {packet}")

    def on_send(self, now: float, sim: SimHooks) -> Optional[Transmission]:
        """Pop the output-queue head and turn it into a broadcast."""
        if not self.output_queue:
            return None
        packet = self.output_queue.popleft()
        if isinstance(packet, NativePacket):
            packet = annotate_holders(packet, self.id, self.neighbors)
            packet = replace(packet, hop_index=packet.hop_index + 1)
            addressed = frozenset({packet.route[packet.hop_index]})
        else:
            advanced = tuple(
                replace(h, hop_index=h.hop_index + 1) if h.active else h
                for h in packet.constituents
            )
            packet = replace(packet, constituents=advanced)
            addressed = frozenset(h.custodian for h in packet.active_headers())
        self.stats.transmissions += 1
        return Transmission(
            sender=self.id,
            packet=packet,
            started_at=now,
            duration=0.0,  # set by the channel model
            addressed=addressed,
            overhearers=self.neighbors - addressed,
        )

    def publish_reception_report(self) -> frozenset[PacketUid]:
        """Snapshot of the native uids this node holds."""
        return frozenset(k for k, v in self.buffer.items() if isinstance(v, NativePacket))

    def _buffer_native(self, packet: NativePacket, sim: SimHooks) -> None:
        if packet.uid in self.buffer:
            return
        self.buffer[packet.uid] = packet
        sim.native_buffered(self.id, packet)

    @staticmethod
    def _deactivate(packet: EncodedPacket, uid: PacketUid) -> EncodedPacket:
        headers = tuple(
            replace(h, active=False) if h.uid == uid else h for h in packet.constituents
        )
        return replace(packet, constituents=headers)
