"""
Mesh Topology
Static network model: node placement, radio interfaces, channel inventory,
link existence and the interference predicate used by every algorithm.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

logger = logging.getLogger(__name__)

DEFAULT_RANGE = 250.0
DEFAULT_AREA = (1200.0, 1200.0)
INTERFERENCE_MODELS = ('trca', 'receiver')

##command


@dataclass(frozen=True, eq=False)
class Topology:
    """
    Immutable placement of N nodes with K interfaces each and C orthogonal channels.

    Nodes are identified by their row index in ``positions`` (dense range [0, N)).
    Distances and adjacency are computed once at construction; every query below
    is a pure function of them.
    """

    positions: np.ndarray
    interfaces: int = 4
    channels: int = 4
    reception_range: float = DEFAULT_RANGE
    area: Tuple[float, float] = DEFAULT_AREA
    interference_model: str = 'trca'
    _dist: np.ndarray = field(init=False, repr=False)
    _adj: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        if self.channels <= 1:
            raise ValueError(f"channel count must exceed 1 (got C={self.channels})")
        if self.interfaces < 1:
            raise ValueError(f"interfaces per node must be at least 1 (got K={self.interfaces})")
        if self.channels < self.interfaces:
            raise ValueError(f"C >= K required (got C={self.channels}, K={self.interfaces})")
        if self.reception_range <= 0:
            raise ValueError(f"reception range must be positive (got {self.reception_range})")
        if self.interference_model not in INTERFERENCE_MODELS:
            raise ValueError(f"unknown interference model {self.interference_model!r}")
        ax, ay = self.area
        if len(pos) and (pos.min() < 0 or pos[:, 0].max() > ax or pos[:, 1].max() > ay):
            raise ValueError(f"node positions must lie inside the {ax}x{ay} area")

        dist = cdist(pos, pos) if len(pos) else np.zeros((0, 0))
        adj = dist <= self.reception_range
        np.fill_diagonal(adj, False)
        pos.setflags(write=False)
        dist.setflags(write=False)
        adj.setflags(write=False)
        object.__setattr__(self, 'positions', pos)
        object.__setattr__(self, '_dist', dist)
        object.__setattr__(self, '_adj', adj)

    @property
    def node_count(self) -> int:
        return len(self.positions)

    def _check(self, node: int):
        if not (0 <= int(node) < self.node_count):
            raise ValueError(f"unknown node id {node} (topology has {self.node_count} nodes)")

    def distance(self, a: int, b: int) -> float:
        self._check(a)
        self._check(b)
        return float(self._dist[a, b])

    def in_range(self, a: int, b: int) -> bool:
        """True when a and b are the same node or within reception range of each other."""
        return a == b or bool(self._adj[a, b])

    def neighbors(self, node: int) -> FrozenSet[int]:
        """Nodes at Euclidean distance <= reception_range, excluding ``node`` itself."""
        self._check(node)
        return frozenset(int(j) for j in np.flatnonzero(self._adj[node]))

    def sorted_neighbors(self, node: int) -> list[int]:
        return sorted(self.neighbors(node))

    def link_exists(self, a: int, b: int, shared_channel: Optional[int]) -> bool:
        self._check(a)
        self._check(b)
        if a == b:
            raise ValueError("a link needs two distinct nodes")
        return shared_channel is not None and bool(self._adj[a, b])

    def interferes(self, tx1: int, rx1: int, ch1: int, tx2: int, rx2: int, ch2: int) -> bool:
        """
        Whether two directed links conflict.

        Orthogonal channels never interfere. On the same channel the TRCA model
        blocks every node in range of either endpoint, so the links conflict when
        any endpoint of one is within range of any endpoint of the other. The
        ``receiver`` model only checks each receiver against the other link's
        transmitter (plus shared endpoints, since radios are half-duplex).
        """
        if ch1 != ch2:
            return False
        if self.interference_model == 'receiver':
            if {tx1, rx1} & {tx2, rx2}:
                return True
            return self.in_range(tx1, rx2) or self.in_range(tx2, rx1)
        return any(self.in_range(a, b) for a in (tx1, rx1) for b in (tx2, rx2))

    def is_connected(self) -> bool:
        if self.node_count <= 1:
            return True
        n_components, _ = connected_components(csr_matrix(self._adj), directed=False)
        return n_components == 1

    def graph(self) -> nx.Graph:
        """Neighbor graph with nodes inserted in NodeId order."""
        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        rows, cols = np.nonzero(np.triu(self._adj))
        g.add_edges_from(zip(rows.tolist(), cols.tolist()))
        return g

    def hop_distance(self, a: int, b: int) -> Optional[int]:
        try:
            return nx.shortest_path_length(self.graph(), a, b)
        except nx.NetworkXNoPath:
            return None


def random_topology(nodes: int = 30, area: Tuple[float, float] = DEFAULT_AREA,
                    reception_range: float = DEFAULT_RANGE, channels: int = 4, interfaces: int = 4,
                    seed: int = 0, interference_model: str = 'trca',
                    max_attempts: int = 1000) -> Topology:
    """Seeded uniform placement, resampled until the neighbor graph is connected."""
    rng = np.random.default_rng(seed)
    for attempt in range(1, max_attempts + 1):
        pos = rng.uniform((0.0, 0.0), area, size=(nodes, 2))
        topo = Topology(pos, interfaces=interfaces, channels=channels,
                        reception_range=reception_range, area=area,
                        interference_model=interference_model)
        if topo.is_connected():
            logger.debug("connected placement found after %d attempt(s) (seed=%s)", attempt, seed)
            return topo
    raise RuntimeError(f"no connected placement of {nodes} nodes in {area} after {max_attempts} attempts")


def grid_topology(rows: int, cols: int, spacing: float, reception_range: float = DEFAULT_RANGE,
                  channels: int = 4, interfaces: int = 4, interference_model: str = 'trca',
                  area: Optional[Tuple[float, float]] = None) -> Topology:
    """Deterministic row-major grid; node id = row * cols + col."""
    pos = np.array([(c * spacing, r * spacing) for r in range(rows) for c in range(cols)], dtype=float)
    if area is None:
        area = (max((cols - 1) * spacing, 1.0), max((rows - 1) * spacing, 1.0))
    return Topology(pos, interfaces=interfaces, channels=channels, reception_range=reception_range,
                    area=area, interference_model=interference_model)


def line_topology(n: int, spacing: float, **kwargs) -> Topology:
    return grid_topology(1, n, spacing, **kwargs)
