"""
R-CA Protocol Handlers
Distribution (sender side) and response management (receiver side) of the
routing-based channel assignment, written as message handlers over ChannelInfo.

Handlers mutate the single ChannelInfo they are given and return the emitted
messages; none of them blocks. A WAIT is state in the waited node's queue.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from src.mesh.chanstate import ChannelInfo, OccupancyReason
from src.mesh.topology import Topology

logger = logging.getLogger(__name__)

TPRE_RULES = ('accumulate', 'literal')

##command


class ResponseKind(str, Enum):
    AVAILABLE = 'AVAILABLE'
    ROUTE_ELSEWHERE = 'ROUTE_ELSEWHERE'
    WAIT = 'WAIT'


@dataclass(frozen=True)
class Response:
    kind: ResponseKind
    granted_channel: Optional[int] = None
    t_pre_echo: float = 0.0

    def __post_init__(self):
        if (self.granted_channel is not None) != (self.kind is ResponseKind.AVAILABLE):
            raise ValueError("granted_channel must be present exactly when the response is AVAILABLE")


@dataclass(frozen=True)
class ChannelBroadcast:
    sender: int
    channel: int
    t_pre: float


@dataclass(frozen=True)
class WaitNotify:
    waited_node: int
    waiter: int
    freed_channel: int


class StepKind(str, Enum):
    PROCEED = 'PROCEED'
    REROUTE = 'REROUTE'
    WAITING = 'WAITING'


@dataclass(frozen=True)
class StepResult:
    """
    Outcome of one hop of the distribution algorithm.

    ``blocked_at`` names the node that could not offer a channel on REROUTE:
    the next hop when it answered ROUTE_ELSEWHERE, or the sender itself when it
    had no free channel or interface left (the last hop must then route elsewhere).
    """

    kind: StepKind
    channel: Optional[int] = None
    response: Optional[Response] = None
    broadcasts: Tuple[ChannelBroadcast, ...] = ()
    blocked_at: Optional[int] = None
    queue_length: int = 0


def select_channel(own: ChannelInfo, now: float, interfaces_in_use: int, interfaces: int) -> Optional[int]:
    """Lowest free channel, or None when nothing is free or all K interfaces are busy."""
    if interfaces_in_use >= interfaces:
        return None
    free = own.available_channels(now)
    return free[0] if free else None


def handle_request(own: ChannelInfo, requested_channel: int, incoming_t_pre: float, requester: int,
                   now: float, tpre_rule: str = 'accumulate', interface_free: bool = True) -> Response:
    """
    Response management on the receiving node.

    A free channel is granted and occupied. Otherwise the requester is told to
    route elsewhere when its transmission ends before ours (t_pre' < t_pre), or
    queued to wait; a full queue degrades the wait to ROUTE_ELSEWHERE.
    """
    if not (1 <= requested_channel <= own.channels):
        raise ValueError(f"requested channel {requested_channel} outside [1, {own.channels}]")
    if tpre_rule not in TPRE_RULES:
        raise ValueError(f"unknown t_pre rule {tpre_rule!r}")

    if interface_free and own.is_available(requested_channel, now):
        own.occupy(requested_channel, OccupancyReason.SELF_TX, math.inf)
        own.c_pre = requested_channel
        own.t_pre = max(own.t_pre, incoming_t_pre)
        return Response(ResponseKind.AVAILABLE, requested_channel, own.t_pre)

    if incoming_t_pre < own.t_pre:
        return Response(ResponseKind.ROUTE_ELSEWHERE, None, own.t_pre)

    if not own.enqueue_waiter(requester):
        logger.debug("waiting queue full (%d); refusing node %s", len(own.waiting_queue), requester)
        return Response(ResponseKind.ROUTE_ELSEWHERE, None, own.t_pre)

    if tpre_rule == 'literal':
        own.t_pre = incoming_t_pre + incoming_t_pre
    else:
        own.t_pre = own.t_pre + max(0.0, incoming_t_pre - now)
    return Response(ResponseKind.WAIT, None, own.t_pre)


def on_broadcast(own: ChannelInfo, msg: ChannelBroadcast, now: float) -> None:
    """A neighbor announced a channel; block it here until the sender's t_pre."""
    own.occupy(msg.channel, OccupancyReason.NEIGHBOR_BLOCK, msg.t_pre)


def on_channel_freed(own: ChannelInfo, own_id: int, freed: int, now: float) -> Optional[WaitNotify]:
    """Hand a freed channel to the head of the waiting queue."""
    if not own.is_available(freed, now):
        return None
    waiter = own.dequeue_waiter()
    if waiter is None:
        return None
    return WaitNotify(waited_node=own_id, waiter=waiter, freed_channel=freed)


def step_distribution(topology: Topology, node: int, target_next_hop: int,
                      sender: ChannelInfo, receiver: ChannelInfo, now: float,
                      flow_t_pre: float, block_expiry: Optional[float] = None,
                      tpre_rule: str = 'accumulate') -> StepResult:
    """
    One hop of the distribution algorithm: offer channels from ``node`` to
    ``target_next_hop`` and act on the response.

    The request carries the sender's free-channel list, so the receiver grants
    the lowest channel free at both ends. Only when no such channel exists is
    response management run on the sender's c_pre. PROCEED occupies the channel
    at both endpoints and returns one broadcast per endpoint, expiring at
    ``block_expiry`` (the flow's t_pre when omitted).
    """
    if target_next_hop not in topology.neighbors(node):
        raise ValueError(f"node {target_next_hop} is not a neighbor of {node}")

    k = topology.interfaces
    c_pre = select_channel(sender, now, len(sender.radio_channels(now)), k)
    if c_pre is None:
        return StepResult(StepKind.REROUTE, blocked_at=node)
    sender.c_pre = c_pre

    receiver_iface_free = len(receiver.radio_channels(now)) < k
    common = [ch for ch in sender.available_channels(now) if receiver.is_available(ch, now)]
    offered = common[0] if (common and receiver_iface_free) else c_pre

    response = handle_request(receiver, offered, flow_t_pre, node, now, tpre_rule,
                              interface_free=receiver_iface_free)

    if response.kind is ResponseKind.AVAILABLE:
        ch = response.granted_channel
        sender.occupy(ch, OccupancyReason.SELF_TX, math.inf)
        sender.c_pre = ch
        sender.t_pre = max(sender.t_pre, flow_t_pre)
        expiry = flow_t_pre if block_expiry is None else block_expiry
        broadcasts = (ChannelBroadcast(node, ch, expiry), ChannelBroadcast(target_next_hop, ch, expiry))
        return StepResult(StepKind.PROCEED, ch, response, broadcasts)

    if response.kind is ResponseKind.ROUTE_ELSEWHERE:
        return StepResult(StepKind.REROUTE, None, response, blocked_at=target_next_hop)

    return StepResult(StepKind.WAITING, None, response, queue_length=len(receiver.waiting_queue))
