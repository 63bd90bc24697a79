"""LSA creation, database installation and freshness comparisons.

Two freshness regimes coexist: the protocol state machines compare
unbounded timestamps through the header order, while the explorer uses
bounded wrap-around ages compared by :func:`newer_age`.
"""

from __future__ import annotations

from typing import Iterable, Optional

from .core import (
    DetailedNeighbor,
    Lsa,
    LsaHeader,
    Lsdb,
    NeighborState,
    NodeId,
    SimpleNeighbor,
    TimeStamp,
    hdr,
    header_leq,
    header_lt,
)


def new_lsa_simple(ip: NodeId, t: TimeStamp, nbrs: Iterable[SimpleNeighbor]) -> Lsa:
    """Advertisement listing every known neighbour."""
    return Lsa(ip, t, frozenset(n.nip for n in nbrs))


def new_lsa_detailed(ip: NodeId, t: TimeStamp, nbrs: Iterable[DetailedNeighbor]) -> Lsa:
    """Advertisement listing neighbours with confirmed bidirectional links."""
    return Lsa(
        ip, t, frozenset(n.nip for n in nbrs if n.ns >= NeighborState.TWO_WAY)
    )


def install(lsdb: Lsdb, lsas: Lsdb) -> Lsdb:
    """Merge ``lsas`` into ``lsdb``, keeping the freshest entry per origin.

    An existing entry survives unless strictly dominated by an incoming
    one; an incoming entry is added unless dominated-or-equalled by an
    existing one, so on a stamp tie the stored entry wins.
    """
    kept = [
        a for a in lsdb if not any(header_lt(hdr(a), hdr(b)) for b in lsas)
    ]
    added = [
        b for b in lsas if not any(header_leq(hdr(b), hdr(a)) for a in lsdb)
    ]
    return Lsdb.of(kept + added)


def lsa_exist(lsdb: Lsdb, h: LsaHeader) -> bool:
    """True when the database already holds information at least as fresh as ``h``."""
    return any(header_leq(h, hdr(lsa)) for lsa in lsdb)


def get_lsa(lsdb: Lsdb, h: LsaHeader) -> Optional[Lsa]:
    """The entry with ``h``'s originator, regardless of stamp."""
    return lsdb.get(h.origin)


def newer_age(age1: int, age2: int, age_bound: int) -> bool:
    """True when ``age1`` is newer than ``age2`` under wrap-around ages.

    Age 0 means "no advertisement".  Equal non-zero ages count as newer;
    callers rely on the resulting install being a no-op in content.
    """
    if age1 == 0:
        return False
    if age2 == 0:
        return True
    if (age2 > age1 and 2 * (age2 - age1) < age_bound) or (
        age1 > age2 and 2 * (age1 - age2) > age_bound
    ):
        return False
    return True


def next_age(age: int, age_bound: int) -> int:
    """Advance a generation counter, wrapping from age_bound back to 1."""
    return 1 if age == age_bound else age + 1
