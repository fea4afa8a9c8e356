"""
Channel Information Table
Per-node record of the channel expected to occupy (c_pre), the channels
occupied (c_cur), the expected completion time (t_pre) and the waiting-node
address queue, with the update and query primitives the protocol uses.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Tuple

DEFAULT_QUEUE_CAP = 10


class OccupancyReason(str, Enum):
    SELF_TX = 'SELF_TX'                # this node transmits/receives on the channel
    NEIGHBOR_BLOCK = 'NEIGHBOR_BLOCK'  # a neighbor announced it occupies the channel
    SHARED_TX = 'SHARED_TX'            # a best-effort route uses the channel without a grant


@dataclass
class ChannelInfo:
    """
    Mutable channel table owned by exactly one simulated node.

    ``c_cur`` maps (channel, reason) to an absolute expiry time, so the same
    channel may be held for both reasons at once. Entries whose expiry is
    <= now are treated as absent by every query.
    """

    channels: int
    q_max: int = DEFAULT_QUEUE_CAP
    c_pre: Optional[int] = None
    c_cur: Dict[Tuple[int, OccupancyReason], float] = field(default_factory=dict)
    t_pre: float = 0.0
    waiting_queue: Deque[int] = field(default_factory=deque)

    def _check_channel(self, ch: int):
        if not (1 <= ch <= self.channels):
            raise ValueError(f"channel {ch} outside [1, {self.channels}]")

    def occupied(self, now: float) -> set[int]:
        return {ch for (ch, _), expiry in self.c_cur.items() if expiry > now}

    def available_channels(self, now: float) -> List[int]:
        """Channels in [1, C] with no unexpired c_cur entry, ascending."""
        busy = self.occupied(now)
        return [ch for ch in range(1, self.channels + 1) if ch not in busy]

    def is_available(self, ch: int, now: float) -> bool:
        return ch not in self.occupied(now)

    def self_channels(self, now: float) -> List[int]:
        return sorted(ch for (ch, reason), expiry in self.c_cur.items()
                      if reason is OccupancyReason.SELF_TX and expiry > now)

    def radio_channels(self, now: float) -> List[int]:
        """Channels a radio is tuned to: granted (SELF_TX) or used by a best-effort route."""
        return sorted({ch for (ch, reason), expiry in self.c_cur.items()
                       if reason is not OccupancyReason.NEIGHBOR_BLOCK and expiry > now})

    def occupy(self, ch: int, reason: OccupancyReason, expiry: float) -> None:
        """Add (ch, reason); an existing entry keeps the later of the two expiries."""
        self._check_channel(ch)
        key = (ch, OccupancyReason(reason))
        self.c_cur[key] = max(self.c_cur.get(key, -math.inf), expiry)

    def release(self, ch: int, reason: OccupancyReason, now: float = -math.inf) -> bool:
        """Drop (ch, reason) if present. Returns True when ch is no longer occupied at all."""
        self.c_cur.pop((ch, OccupancyReason(reason)), None)
        return ch not in self.occupied(now)

    def purge_expired(self, now: float) -> List[int]:
        """Remove expired entries; returns channels that became free as a result."""
        before = self.occupied(-math.inf)
        for key in [k for k, expiry in self.c_cur.items() if expiry <= now]:
            del self.c_cur[key]
        still = self.occupied(now)
        return sorted(ch for ch in before if ch not in still)

    def next_expiry(self, now: float) -> Optional[float]:
        pending = [e for e in self.c_cur.values() if now < e < math.inf]
        return min(pending) if pending else None

    def enqueue_waiter(self, node: int) -> bool:
        if len(self.waiting_queue) >= self.q_max or node in self.waiting_queue:
            return False
        self.waiting_queue.append(node)
        return True

    def dequeue_waiter(self) -> Optional[int]:
        return self.waiting_queue.popleft() if self.waiting_queue else None

    def remove_waiter(self, node: int) -> bool:
        try:
            self.waiting_queue.remove(node)
            return True
        except ValueError:
            return False

    def snapshot(self) -> tuple:
        """Hashable copy of the table, used for state-equality checks."""
        return (self.c_pre, tuple(sorted((ch, r.value, e) for (ch, r), e in self.c_cur.items())),
                self.t_pre, tuple(self.waiting_queue))


def estimate_tpre(remaining_packets: int, packet_size: int, rate: float, now: float) -> float:
    """
    Expected completion time of a CBR transmission.

    Airtime is folded into the inter-packet interval, so packet_size does not
    change the estimate.
    """
    if rate <= 0:
        raise ValueError(f"rate must be positive (got {rate})")
    if remaining_packets < 0:
        raise ValueError(f"remaining packet count cannot be negative (got {remaining_packets})")
    return now + remaining_packets / rate
