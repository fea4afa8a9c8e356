"""Exhaustive check: every R-CA route on small grid sub-topologies is
interference-free against itself and a pre-occupied link."""
from __future__ import annotations

import itertools

import numpy as np

from src.mesh.chanstate import ChannelInfo
from src.mesh.routing import EstablishedRoute, Router
from src.mesh.topology import Topology

R = 250.0
GRID = [(c * 200.0, r * 200.0) for r in range(3) for c in range(3)]


def conflict(pos: np.ndarray, h1, h2) -> bool:
    """Brute force: same channel and some endpoint of one within R of some endpoint of the other."""
    if h1[2] != h2[2]:
        return False
    for a in h1[:2]:
        for b in h2[:2]:
            if a == b or np.hypot(*(pos[a] - pos[b])) <= R:
                return True
    return False


def test_exhaustive_four_node_grids():
    checked = established = 0
    for subset in itertools.combinations(range(9), 4):
        pos = np.array([GRID[i] for i in subset])
        topo = Topology(pos, interfaces=2, channels=2, reception_range=R, area=(400.0, 400.0))
        edges = list(topo.graph().edges())
        for (a, b), ch, flow_t_pre in itertools.product(edges, (1, 2), (30.0, 60.0)):
            for src, dst in itertools.permutations(range(4), 2):
                states = {n: ChannelInfo(2) for n in range(4)}
                router = Router(topo, states, wait_timeout=5.0)
                router.reserve([a, b], [ch], flow_id=99, now=0.0, t_pre=50.0)
                result = router.discover_route(0, src, dst, 0.0, flow_t_pre)
                checked += 1
                if not isinstance(result, EstablishedRoute):
                    continue
                established += 1
                hops = result.hops + [(a, b, ch)]
                for h1, h2 in itertools.combinations(hops, 2):
                    assert not conflict(pos, h1, h2), (subset, (a, b, ch), result)
    assert checked > 1000
    assert established > 0
