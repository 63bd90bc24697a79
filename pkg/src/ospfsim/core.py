"""Domain types shared by both protocol models.

Node identifiers are small positive integers; 0 is reserved to mean
"no node".  All types here are immutable values, safe to copy, hash and
share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Optional, Union

NodeId = int
TimeStamp = int
DdSqn = int

NO_NODE: NodeId = 0


class NeighborState(IntEnum):
    """Adjacency progress with a neighbour, strictly ordered."""

    INIT = 1
    TWO_WAY = 2
    EX_START = 3
    EXCHANGE = 4
    LOADING = 5
    FULL = 6

    def label(self) -> str:
        return _NS_LABELS[self]


_NS_LABELS = {
    NeighborState.INIT: "Init",
    NeighborState.TWO_WAY: "2-Way",
    NeighborState.EX_START: "ExStart",
    NeighborState.EXCHANGE: "Exchange",
    NeighborState.LOADING: "Loading",
    NeighborState.FULL: "Full",
}


@dataclass(frozen=True, order=True)
class LsaHeader:
    """Identity and freshness key of a link state advertisement."""

    origin: NodeId
    stamp: TimeStamp


def header_leq(h1: LsaHeader, h2: LsaHeader) -> bool:
    """Partial order on headers: comparable only for equal origins."""
    return h1.origin == h2.origin and h1.stamp <= h2.stamp


def header_lt(h1: LsaHeader, h2: LsaHeader) -> bool:
    return header_leq(h1, h2) and h1 != h2


@dataclass(frozen=True)
class Lsa:
    """One router's advertised outgoing links, keyed by (origin, stamp)."""

    origin: NodeId
    stamp: TimeStamp
    links: frozenset[NodeId]

    def __post_init__(self):
        if self.origin in self.links:
            raise ValueError(f"node {self.origin} cannot list itself as a link")


def hdr(lsa: Lsa) -> LsaHeader:
    return LsaHeader(lsa.origin, lsa.stamp)


@dataclass(frozen=True)
class Lsdb:
    """A set of advertisements with at most one entry per originator.

    Entries are kept sorted by origin so equal databases compare and
    hash equal.  The constructor rejects inputs with two distinct
    entries for the same origin.
    """

    entries: tuple[Lsa, ...] = ()

    def __post_init__(self):
        by_origin = {}
        for lsa in self.entries:
            prev = by_origin.get(lsa.origin)
            if prev is not None and prev != lsa:
                raise ValueError(f"duplicate entries for origin {lsa.origin}")
            by_origin[lsa.origin] = lsa
        ordered = tuple(by_origin[o] for o in sorted(by_origin))
        object.__setattr__(self, "entries", ordered)

    @classmethod
    def of(cls, lsas: Iterable[Lsa]) -> "Lsdb":
        return cls(tuple(lsas))

    def get(self, origin: NodeId) -> Optional[Lsa]:
        for lsa in self.entries:
            if lsa.origin == origin:
                return lsa
        return None

    def headers(self) -> frozenset[LsaHeader]:
        return frozenset(hdr(lsa) for lsa in self.entries)

    def origins(self) -> frozenset[NodeId]:
        return frozenset(lsa.origin for lsa in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)


EMPTY_LSDB = Lsdb()


@dataclass(frozen=True)
class SimpleNeighbor:
    nip: NodeId
    inact_deadline: TimeStamp


@dataclass(frozen=True)
class DetailedNeighbor:
    """Per-neighbour record: adjacency state, exchange sequencing and
    the three retransmission bookkeeping pairs (list + deadline)."""

    nip: NodeId
    ns: NeighborState
    inact_deadline: TimeStamp = 0
    ddsqn: DdSqn = 0
    dd_deadline: TimeStamp = 0
    req_list: frozenset[LsaHeader] = frozenset()
    req_deadline: TimeStamp = 0
    rxmt_list: Lsdb = EMPTY_LSDB
    rxmt_deadline: TimeStamp = 0

    def __post_init__(self):
        if self.ns < NeighborState.EX_START and (self.req_list or self.rxmt_list):
            raise ValueError(
                f"neighbour {self.nip}: request/retransmission lists must be "
                f"empty below ExStart"
            )


# --- control messages ---------------------------------------------------


@dataclass(frozen=True)
class Hello:
    ips: frozenset[NodeId]
    sip: NodeId


@dataclass(frozen=True)
class DbdSimple:
    hdrs: frozenset[LsaHeader]
    sip: NodeId


@dataclass(frozen=True)
class DbdDetailed:
    hdrs: frozenset[LsaHeader]
    sqn: DdSqn
    ibit: bool
    sip: NodeId


@dataclass(frozen=True)
class ReqSimple:
    hdrs: frozenset[LsaHeader]
    sip: NodeId


@dataclass(frozen=True)
class ReqDetailed:
    hdr: LsaHeader
    sip: NodeId


@dataclass(frozen=True)
class Upd:
    lsas: Lsdb
    sip: NodeId


@dataclass(frozen=True)
class Ack:
    hdrs: frozenset[LsaHeader]
    sip: NodeId


Message = Union[Hello, DbdSimple, DbdDetailed, ReqSimple, ReqDetailed, Upd, Ack]


def message_kind(msg: Message) -> str:
    """Wire-level family of a message: hello, dbd, req, upd or ack."""
    if isinstance(msg, Hello):
        return "hello"
    if isinstance(msg, (DbdSimple, DbdDetailed)):
        return "dbd"
    if isinstance(msg, (ReqSimple, ReqDetailed)):
        return "req"
    if isinstance(msg, Upd):
        return "upd"
    if isinstance(msg, Ack):
        return "ack"
    raise TypeError(f"not a protocol message: {msg!r}")


@dataclass(frozen=True)
class SendInstruction:
    """A message paired with its sending method.

    ``dests`` is None for a broadcast and an explicit destination set
    for a groupcast.  Hello messages are always broadcast, everything
    else is always groupcast.
    """

    payload: Message
    dests: Optional[frozenset[NodeId]] = None

    def __post_init__(self):
        if isinstance(self.payload, Hello):
            if self.dests is not None:
                raise ValueError("hello messages must be broadcast")
        elif self.dests is None:
            raise ValueError("non-hello messages must be groupcast")

    @property
    def is_broadcast(self) -> bool:
        return self.dests is None


def broadcast(msg: Message) -> SendInstruction:
    return SendInstruction(msg)


def groupcast(msg: Message, dests: Iterable[NodeId]) -> SendInstruction:
    return SendInstruction(msg, frozenset(dests))


@dataclass(frozen=True)
class ProtocolConfig:
    """Timer constants shared by the protocol state machines (in ticks)."""

    hellointvl: int = 10
    rtdeadintvl: int = 50
    rxmtintvl: int = 24
    refreshintvl: int = 1000
