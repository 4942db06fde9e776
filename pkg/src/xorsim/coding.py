"""Coding-opportunity predicates and the partner scan.

Two discovery schemes are modeled. The holder-set scheme codes two relay
packets whenever each packet's final destination already holds a copy of the
other packet, as witnessed by the holder sets the packets carry. The
report-based baseline is an idealized two-hop scheme: it codes only when each
destination is a direct neighbor of the relay and the neighbor's (instantly
synchronized) reception report lists the other packet. Every report-based
opportunity is also a holder-set opportunity, because a neighbor that holds
a packet was necessarily adjacent to one of its previous senders and is
therefore in its holder set.
"""

from __future__ import annotations

import enum
from typing import Callable, Optional, Sequence

from .packet import NativePacket, PacketUid, Role
from .topology import NodeId

ReceptionReports = dict[NodeId, set[PacketUid]]
PairProbe = Callable[[NodeId, NativePacket, NativePacket, bool, bool], None]


class Scheme(enum.Enum):
    NON_CODING = "none"
    COPE = "cope"
    EXCODE = "excode"

    def __str__(self) -> str:
        return self.value


def excode_can_code(p: NativePacket, q: NativePacket) -> bool:
    """Holder-set rule: each destination must appear in the other's holders."""
    if p.uid.flow == q.uid.flow:
        return False
    return p.dst in q.holders and q.dst in p.holders


def cope_can_code(
    p: NativePacket,
    q: NativePacket,
    reports: ReceptionReports,
    neighbors: frozenset[NodeId],
) -> bool:
    """Two-hop report rule: both destinations are direct neighbors that
    reported holding the counterpart packet."""
    if p.uid.flow == q.uid.flow:
        return False
    if p.dst not in neighbors or q.dst not in neighbors:
        return False
    return q.uid in reports.get(p.dst, ()) and p.uid in reports.get(q.dst, ())


def find_partner(
    p: NativePacket,
    queue: Sequence,
    scheme: Scheme,
    *,
    self_id: NodeId,
    neighbors: frozenset[NodeId],
    reports: ReceptionReports,
    probe: Optional[PairProbe] = None,
) -> Optional[int]:
    """Index of the first queued packet codable with p, front to back.

    Queue entries are (packet, role) pairs of a node's input queue. Only
    natives awaiting relay at this node are eligible: overheard copies and
    packets destined here are skipped, as is anything already encoded.
    Returns None under the non-coding scheme or when nothing matches.
    """
    if scheme is Scheme.NON_CODING:
        return None
    for idx, (cand, role) in enumerate(queue):
        if role is not Role.ADDRESSED or not isinstance(cand, NativePacket):
            continue
        if cand.dst == self_id:
            continue
        if scheme is Scheme.EXCODE:
            ok = excode_can_code(p, cand)
        else:
            ok = cope_can_code(p, cand, reports, neighbors)
        if probe is not None and cand.uid.flow != p.uid.flow:
            probe(
                self_id,
                p,
                cand,
                cope_can_code(p, cand, reports, neighbors),
                excode_can_code(p, cand),
            )
        if ok:
            return idx
    return None
