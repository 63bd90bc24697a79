"""Network topologies and the line-oriented topology file format.

File format, one directive per line ('#' starts a comment):

    nodes N
    edge i j
    adj i j          optional; listing any pair restricts adjacency
                     formation to exactly the listed pairs
    boot i t         optional per-node boot tick
    key value        config overrides (hellointvl, rtdeadintvl,
                     rxmtintvl, refreshintvl, time_sending, loss_prob,
                     seed, max_ticks)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import NodeId


class TopologyError(ValueError):
    """Malformed topology file; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Topology:
    """Undirected connectivity over nodes 1..n; links are bidirectional."""

    n: int
    edges: frozenset[tuple[NodeId, NodeId]]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a topology needs at least one node")
        norm = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (1 <= a <= self.n and 1 <= b <= self.n):
                raise ValueError(f"edge ({a},{b}) outside nodes 1..{self.n}")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))

    def nodes(self) -> range:
        return range(1, self.n + 1)

    def connected(self, a: NodeId, b: NodeId) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def neighbors(self, ip: NodeId) -> frozenset[NodeId]:
        out = set()
        for a, b in self.edges:
            if a == ip:
                out.add(b)
            elif b == ip:
                out.add(a)
        return frozenset(out)

    def component_of(self, ip: NodeId) -> frozenset[NodeId]:
        seen = {ip}
        frontier = [ip]
        while frontier:
            cur = frontier.pop()
            for nxt in self.neighbors(cur):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return frozenset(seen)

    def diameter(self) -> int:
        """Longest shortest path over all connected pairs."""
        best = 0
        for src in self.nodes():
            dist = {src: 0}
            frontier = [src]
            while frontier:
                nxt_frontier = []
                for cur in frontier:
                    for nxt in self.neighbors(cur):
                        if nxt not in dist:
                            dist[nxt] = dist[cur] + 1
                            nxt_frontier.append(nxt)
                frontier = nxt_frontier
            best = max(best, max(dist.values()))
        return best


def line(n: int) -> Topology:
    return Topology(n, frozenset((i, i + 1) for i in range(1, n)))


def ring(n: int) -> Topology:
    edges = {(i, i + 1) for i in range(1, n)} | {(1, n)}
    return Topology(n, frozenset(edges))


def star(n: int) -> Topology:
    """Node 1 is the hub, nodes 2..n are spokes."""
    return Topology(n, frozenset((1, i) for i in range(2, n + 1)))


_INT_KEYS = (
    "hellointvl",
    "rtdeadintvl",
    "rxmtintvl",
    "refreshintvl",
    "time_sending",
    "seed",
    "max_ticks",
)
VALID_KEYS = _INT_KEYS + ("loss_prob", "boot")


@dataclass
class TopologyFile:
    topology: Topology
    adj_pairs: Optional[frozenset[tuple[NodeId, NodeId]]] = None
    boot_offsets: dict[NodeId, int] = field(default_factory=dict)
    overrides: dict[str, float] = field(default_factory=dict)


def parse_topology(text: str) -> TopologyFile:
    n: Optional[int] = None
    edges: list[tuple[int, int]] = []
    adj_pairs: list[tuple[int, int]] = []
    boots: dict[int, int] = {}
    overrides: dict[str, float] = {}

    def want_node(lineno: int, token: str) -> int:
        try:
            v = int(token)
        except ValueError:
            raise TopologyError(lineno, f"expected a node id, got {token!r}")
        if n is None:
            raise TopologyError(lineno, "'nodes N' must come first")
        if not (1 <= v <= n):
            raise TopologyError(lineno, f"node {v} outside 1..{n}")
        return v

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        key = parts[0]
        if key == "nodes":
            if len(parts) != 2:
                raise TopologyError(lineno, "usage: nodes N")
            try:
                n = int(parts[1])
            except ValueError:
                raise TopologyError(lineno, f"bad node count {parts[1]!r}")
            if n < 1:
                raise TopologyError(lineno, "node count must be positive")
        elif key == "edge":
            if len(parts) != 3:
                raise TopologyError(lineno, "usage: edge i j")
            a, b = want_node(lineno, parts[1]), want_node(lineno, parts[2])
            if a == b:
                raise TopologyError(lineno, f"self-loop on node {a}")
            edges.append((a, b))
        elif key == "adj":
            if len(parts) != 3:
                raise TopologyError(lineno, "usage: adj i j")
            adj_pairs.append((want_node(lineno, parts[1]), want_node(lineno, parts[2])))
        elif key == "boot":
            if len(parts) != 3:
                raise TopologyError(lineno, "usage: boot i t")
            node = want_node(lineno, parts[1])
            try:
                t = int(parts[2])
            except ValueError:
                raise TopologyError(lineno, f"bad boot tick {parts[2]!r}")
            if t < 0:
                raise TopologyError(lineno, "boot tick must be non-negative")
            boots[node] = t
        elif key in _INT_KEYS:
            if len(parts) != 2:
                raise TopologyError(lineno, f"usage: {key} value")
            try:
                overrides[key] = int(parts[1])
            except ValueError:
                raise TopologyError(lineno, f"bad value {parts[1]!r} for {key}")
        elif key == "loss_prob":
            if len(parts) != 2:
                raise TopologyError(lineno, "usage: loss_prob value")
            try:
                overrides[key] = float(parts[1])
            except ValueError:
                raise TopologyError(lineno, f"bad value {parts[1]!r} for loss_prob")
        else:
            raise TopologyError(
                lineno,
                f"unknown key {key!r}; valid keys: nodes, edge, "
                + ", ".join(VALID_KEYS),
            )

    if n is None:
        raise TopologyError(0, "missing 'nodes N' directive")
    topo = Topology(n, frozenset(edges))
    adj = (
        frozenset((min(a, b), max(a, b)) for a, b in adj_pairs)
        if adj_pairs
        else None
    )
    return TopologyFile(topo, adj, boots, overrides)


def load_topology(path: str) -> TopologyFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_topology(fh.read())
