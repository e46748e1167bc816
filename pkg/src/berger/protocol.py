"""The routing automaton: source initialization, relay forwarding, target logic.

A message travels as two cores that walk the green face in opposite
directions and accumulate the nodes they visit, plus threads that each
bypass one green node. The target delivers once it holds two cores whose
visited lists agree only on the source, or one core together with a braid
of threads covering every non-source entry of its visited list.

Relay nodes are stateless: their entire behavior is a pure function of
their coordinates, their neighbor set, the sender, and the packet. Only
the target accumulates state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

from . import geometry
from .geometry import Direction, Point


@dataclass(frozen=True)
class Packet:
    """The routed unit: (message, source, target, direction, skip, visited).

    skip is None exactly for cores. Correct cores start with an empty
    visited tuple and grow by one entry per relay hop; correct threads
    carry only their originator and are never appended to.
    """

    message: bytes
    source: Point
    target: Point
    direction: Direction
    skip: Point | None
    visited: tuple[Point, ...]

    @property
    def is_core(self) -> bool:
        return self.skip is None


@dataclass(frozen=True)
class SendAction:
    packet: Packet
    to: Point


@dataclass(frozen=True)
class NodeContext:
    """What one node knows: its own coordinates and its neighbors'."""

    node: Point
    neighbors: frozenset[Point]

    def select(self, ref, source, target, direction, skip=None) -> Point | None:
        return _select(self.neighbors, self.node, ref, source, target, direction, skip)


@lru_cache(maxsize=None)
def _select(neighbors, node, ref, source, target, direction, skip):
    # pure and heavily repeated across runs on the same instance
    return geometry.next_node(neighbors, node, ref, source, target, direction, skip)


class ModelViolation(RuntimeError):
    """The instance breaks an assumption the automaton relies on."""


def invalid(ctx: NodeContext, sender: Point, pkt: Packet) -> bool:
    """Drop rule: sender skips itself, a core reaches its source, or a cycle."""
    if pkt.skip == sender:
        return True
    if ctx.node == pkt.source and pkt.skip is None:
        return True
    if ctx.node in pkt.visited:
        return True
    return False


def source_init(ctx: NodeContext, target: Point, message: bytes) -> list[SendAction]:
    """The source's four originations: R core, L core, R thread, L thread.

    Each thread skips the first green node in its direction and carries
    the source in its visited list.
    """
    s = ctx.node
    sends: list[SendAction] = []
    for direction in (Direction.R, Direction.L):
        core_to = ctx.select(target, s, target, direction)
        if core_to is None:
            raise ModelViolation(f"no {direction.value} core hop from the source")
        sends.append(
            SendAction(Packet(message, s, target, direction, None, ()), core_to)
        )
    for direction in (Direction.R, Direction.L):
        first_green = ctx.select(target, s, target, direction)
        thread_to = ctx.select(target, s, target, direction, first_green)
        if thread_to is None:
            raise ModelViolation(f"no {direction.value} thread hop from the source")
        sends.append(
            SendAction(
                Packet(message, s, target, direction, first_green, (s,)), thread_to
            )
        )
    return sends


def on_receive(ctx: NodeContext, sender: Point, pkt: Packet) -> list[SendAction]:
    """Relay behavior: forward along the face rule; split a thread off a core.

    Returns no sends when the packet is invalid or no admissible hop
    exists (the caller records the drop). Never called for the target.
    """
    if invalid(ctx, sender, pkt):
        return []
    if pkt.is_core:
        pkt = Packet(
            pkt.message,
            pkt.source,
            pkt.target,
            pkt.direction,
            None,
            pkt.visited + (sender,),
        )
    forward_to = ctx.select(sender, pkt.source, pkt.target, pkt.direction, pkt.skip)
    if forward_to is None:
        return []
    sends = [SendAction(pkt, forward_to)]
    if pkt.is_core:
        # split off a thread that bypasses the next green node, unless the
        # core has already been through it
        next_green = forward_to
        if next_green not in pkt.visited:
            thread_to = ctx.select(
                sender, pkt.source, pkt.target, pkt.direction, next_green
            )
            if thread_to is not None:
                sends.append(
                    SendAction(
                        Packet(
                            pkt.message,
                            pkt.source,
                            pkt.target,
                            pkt.direction,
                            next_green,
                            (ctx.node,),
                        ),
                        thread_to,
                    )
                )
    return sends


class TargetRecord(NamedTuple):
    """One accepted packet as the target stores it; threads keep no visited list."""

    message: bytes
    source: Point
    direction: Direction
    skip: Point | None
    visited: tuple[Point, ...]


class ExpectedNeighbors(NamedTuple):
    """The only neighbors the target accepts cores and threads from."""

    core_r: Point | None
    core_l: Point | None
    thread_r: Point | None
    thread_l: Point | None


def expected_neighbors(ctx: NodeContext, source: Point) -> ExpectedNeighbors:
    """Green-face neighbors of the target, and the ones threads arrive by.

    Evaluated at the target: the R core arrives from the neighbor an
    L-sweep from the source direction finds first, and vice versa; the
    thread neighbors repeat the sweep with that green neighbor excluded.
    """
    t = ctx.node
    core_r = ctx.select(source, source, t, Direction.L)
    core_l = ctx.select(source, source, t, Direction.R)
    thread_r = ctx.select(source, source, t, Direction.L, core_r)
    thread_l = ctx.select(source, source, t, Direction.R, core_l)
    return ExpectedNeighbors(core_r, core_l, thread_r, thread_l)


@dataclass
class TargetState:
    """Everything the target accumulates: accepted records and the delivery latch.

    `matched` keeps every message that ever satisfied a delivery
    condition, letting a monitor prove no second, contradictory match
    forms after delivery.
    """

    records: set[TargetRecord] = field(default_factory=set)
    delivered: bytes | None = None
    matched: set[bytes] = field(default_factory=set)
    expected: ExpectedNeighbors | None = None

    def freeze(self):
        return (frozenset(self.records), self.delivered, frozenset(self.matched))


def target_receive(
    state: TargetState, ctx: NodeContext, sender: Point, pkt: Packet
) -> bytes | None:
    """Record an arriving packet and deliver when a matching set completes.

    Cores are accepted only from the expected green neighbor of their
    direction; threads only from that neighbor or the one bypassing it.
    Returns the message on the run's single delivery, else None.
    """
    if invalid(ctx, sender, pkt):
        return None
    visited = pkt.visited + (sender,) if pkt.is_core else pkt.visited
    exp = expected_neighbors(ctx, pkt.source)

    record: TargetRecord | None = None
    if pkt.is_core:
        if pkt.direction is Direction.R and sender == exp.core_r:
            record = TargetRecord(pkt.message, pkt.source, Direction.R, None, visited)
        elif pkt.direction is Direction.L and sender == exp.core_l:
            record = TargetRecord(pkt.message, pkt.source, Direction.L, None, visited)
    else:
        if pkt.direction is Direction.R and sender in (exp.core_r, exp.thread_r):
            record = TargetRecord(pkt.message, pkt.source, Direction.R, pkt.skip, ())
        elif pkt.direction is Direction.L and sender in (exp.core_l, exp.thread_l):
            record = TargetRecord(pkt.message, pkt.source, Direction.L, pkt.skip, ())
    if record is not None:
        state.records.add(record)

    if not _delivery_met(state.records, pkt.message, pkt.source):
        return None
    state.matched.add(pkt.message)
    if state.delivered is None:
        state.delivered = pkt.message
        return pkt.message
    return None


def _delivery_met(records: set[TargetRecord], message: bytes, source: Point) -> bool:
    """Matching cores, or one core plus a braid covering its visited list.

    Cores match when their visited sets agree exactly on the source. A
    braid matches a core when every visited node other than the source
    has a recorded same-direction thread skipping it; the source itself
    needs no thread since no correct execution produces one.
    """
    cores = [
        r
        for r in records
        if r.message == message and r.source == source and r.skip is None
    ]
    for r_core in (c for c in cores if c.direction is Direction.R):
        for l_core in (c for c in cores if c.direction is Direction.L):
            if set(r_core.visited) & set(l_core.visited) == {source}:
                return True
    for core in cores:
        needed = set(core.visited) - {source}
        if all(
            TargetRecord(message, source, core.direction, node, ()) in records
            for node in needed
        ):
            return True
    return False
