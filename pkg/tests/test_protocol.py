"""Automaton unit tests: drop rules, originations, forwarding, target logic."""

import copy

import pytest

from berger.geometry import Direction, point
from berger.protocol import (
    NodeContext,
    Packet,
    TargetRecord,
    TargetState,
    _delivery_met,
    expected_neighbors,
    invalid,
    on_receive,
    source_init,
    target_receive,
)
from conftest import MESSAGE, by_label


def ctx_of(inst, node):
    return NodeContext(node, frozenset(inst.graph.neighbors(node)))


def core(message, source, target, direction, visited=()):
    return Packet(message, source, target, direction, None, tuple(visited))


def thread(message, source, target, direction, skip, visited):
    return Packet(message, source, target, direction, skip, tuple(visited))


class TestInvalid:
    def test_sender_skipping_itself(self, octahedron):
        n = by_label(octahedron)
        ctx = ctx_of(octahedron, n["b"])
        pkt = thread(MESSAGE, n["s"], n["t"], Direction.R, n["c"], (n["s"],))
        assert invalid(ctx, n["c"], pkt)

    def test_core_back_at_source(self, octahedron):
        n = by_label(octahedron)
        ctx = ctx_of(octahedron, n["s"])
        pkt = core(MESSAGE, n["s"], n["t"], Direction.R, (n["c"],))
        assert invalid(ctx, n["c"], pkt)

    def test_cycle_detected(self, octahedron):
        n = by_label(octahedron)
        ctx = ctx_of(octahedron, n["b"])
        pkt = core(MESSAGE, n["s"], n["t"], Direction.L, (n["s"], n["b"]))
        assert invalid(ctx, n["s"], pkt)

    def test_clean_packet_passes(self, octahedron):
        n = by_label(octahedron)
        ctx = ctx_of(octahedron, n["b"])
        pkt = core(MESSAGE, n["s"], n["t"], Direction.L, ())
        assert not invalid(ctx, n["s"], pkt)


class TestSourceInit:
    def test_four_sends(self, octahedron):
        n = by_label(octahedron)
        sends = source_init(ctx_of(octahedron, n["s"]), n["t"], MESSAGE)
        assert len(sends) == 4

    def test_cores_carry_empty_visited(self, octahedron):
        n = by_label(octahedron)
        sends = source_init(ctx_of(octahedron, n["s"]), n["t"], MESSAGE)
        cores = [a for a in sends if a.packet.is_core]
        assert {a.packet.direction for a in cores} == {Direction.L, Direction.R}
        assert all(a.packet.visited == () for a in cores)

    def test_threads_carry_source_and_skip_first_green(self, octahedron):
        n = by_label(octahedron)
        sends = source_init(ctx_of(octahedron, n["s"]), n["t"], MESSAGE)
        threads = {a.packet.direction: a for a in sends if not a.packet.is_core}
        assert threads[Direction.R].packet.visited == (n["s"],)
        assert threads[Direction.L].packet.visited == (n["s"],)
        # first green nodes per direction; threads depart around them
        assert threads[Direction.R].packet.skip == n["c"]
        assert threads[Direction.R].to == n["B"]
        assert threads[Direction.L].packet.skip == n["b"]
        assert threads[Direction.L].to == n["C"]

    def test_core_destinations(self, octahedron):
        n = by_label(octahedron)
        sends = source_init(ctx_of(octahedron, n["s"]), n["t"], MESSAGE)
        dests = {a.packet.direction: a.to for a in sends if a.packet.is_core}
        assert dests == {Direction.R: n["c"], Direction.L: n["b"]}


class TestOnReceive:
    def test_green_relay_forwards_core_and_splits_thread(self, octahedron):
        n = by_label(octahedron)
        sends = on_receive(
            ctx_of(octahedron, n["c"]),
            n["s"],
            core(MESSAGE, n["s"], n["t"], Direction.R),
        )
        assert len(sends) == 2
        fwd, split = sends
        assert fwd.packet.is_core and fwd.to == n["t"]
        assert fwd.packet.visited == (n["s"],)  # sender appended
        assert not split.packet.is_core
        assert split.packet.skip == n["t"]
        assert split.packet.visited == (n["c"],)

    def test_thread_forwarded_unchanged(self, octahedron):
        n = by_label(octahedron)
        pkt = thread(MESSAGE, n["s"], n["t"], Direction.R, n["c"], (n["s"],))
        sends = on_receive(ctx_of(octahedron, n["B"]), n["s"], pkt)
        assert len(sends) == 1
        assert sends[0].packet == pkt
        assert sends[0].to == n["t"]

    def test_no_thread_when_next_green_already_visited(self, octahedron):
        n = by_label(octahedron)
        pkt = core(MESSAGE, n["s"], n["t"], Direction.R, (n["t"],))
        sends = on_receive(ctx_of(octahedron, n["c"]), n["s"], pkt)
        assert len(sends) == 1  # forward only; next green (t) already listed
        assert sends[0].packet.is_core

    def test_invalid_packet_dropped(self, octahedron):
        n = by_label(octahedron)
        pkt = thread(MESSAGE, n["s"], n["t"], Direction.R, n["s"], (n["s"],))
        assert on_receive(ctx_of(octahedron, n["c"]), n["s"], pkt) == []

    def test_core_growth_is_exactly_one(self, octahedron):
        n = by_label(octahedron)
        pkt = core(MESSAGE, n["s"], n["t"], Direction.R, ())
        sends = on_receive(ctx_of(octahedron, n["c"]), n["s"], pkt)
        forwarded = [a for a in sends if a.packet.is_core]
        assert len(forwarded) == 1
        assert len(forwarded[0].packet.visited) == len(pkt.visited) + 1

    def test_purity(self, octahedron):
        n = by_label(octahedron)
        ctx = ctx_of(octahedron, n["c"])
        pkt = core(MESSAGE, n["s"], n["t"], Direction.R)
        assert on_receive(ctx, n["s"], pkt) == on_receive(ctx, n["s"], pkt)

    def test_split_bound(self, octahedron, greedy_trap):
        for inst in (octahedron, greedy_trap):
            s, t = inst.source, inst.target
            for node in inst.graph.nodes - {t}:
                for sender in inst.graph.neighbors(node):
                    sends = on_receive(
                        ctx_of(inst, node), sender, core(MESSAGE, s, t, Direction.L)
                    )
                    assert len(sends) <= 2


class TestExpectedNeighbors:
    def test_octahedron(self, octahedron):
        n = by_label(octahedron)
        exp = expected_neighbors(ctx_of(octahedron, n["t"]), n["s"])
        assert exp.core_r == n["c"]
        assert exp.core_l == n["b"]
        assert exp.thread_r == n["B"]
        assert exp.thread_l == n["C"]


class TestTargetReceive:
    def test_core_accepted_only_from_expected_neighbor(self, octahedron):
        n = by_label(octahedron)
        state = TargetState()
        ctx = ctx_of(octahedron, n["t"])
        # R core delivered by the wrong neighbor: not recorded
        target_receive(state, ctx, n["B"], core(MESSAGE, n["s"], n["t"], Direction.R, (n["s"],)))
        assert state.records == set()
        target_receive(state, ctx, n["c"], core(MESSAGE, n["s"], n["t"], Direction.R, (n["s"],)))
        assert state.records == {
            TargetRecord(MESSAGE, n["s"], Direction.R, None, (n["s"], n["c"]))
        }

    def test_thread_recorded_with_empty_visited(self, octahedron):
        n = by_label(octahedron)
        state = TargetState()
        pkt = thread(MESSAGE, n["s"], n["t"], Direction.R, n["c"], (n["s"],))
        target_receive(state, ctx_of(octahedron, n["t"]), n["B"], pkt)
        assert state.records == {
            TargetRecord(MESSAGE, n["s"], Direction.R, n["c"], ())
        }

    def test_matching_cores_deliver(self, octahedron):
        n = by_label(octahedron)
        state = TargetState()
        ctx = ctx_of(octahedron, n["t"])
        assert (
            target_receive(state, ctx, n["b"], core(MESSAGE, n["s"], n["t"], Direction.L, (n["s"],)))
            is None
        )
        got = target_receive(
            state, ctx, n["c"], core(MESSAGE, n["s"], n["t"], Direction.R, (n["s"],))
        )
        assert got == MESSAGE
        assert state.delivered == MESSAGE

    def test_delivery_latches_once(self, octahedron):
        n = by_label(octahedron)
        state = TargetState()
        ctx = ctx_of(octahedron, n["t"])
        target_receive(state, ctx, n["b"], core(MESSAGE, n["s"], n["t"], Direction.L, (n["s"],)))
        assert target_receive(
            state, ctx, n["c"], core(MESSAGE, n["s"], n["t"], Direction.R, (n["s"],))
        ) == MESSAGE
        # an identical later match must not deliver again
        assert (
            target_receive(state, ctx, n["c"], core(MESSAGE, n["s"], n["t"], Direction.R, (n["s"],)))
            is None
        )

    def test_invalid_dropped_at_target(self, octahedron):
        n = by_label(octahedron)
        state = TargetState()
        pkt = thread(MESSAGE, n["s"], n["t"], Direction.R, n["c"], (n["s"],))
        target_receive(state, ctx_of(octahedron, n["t"]), n["c"], pkt)  # sender == skip
        assert state.records == set()

    def test_statefulness_confined_to_state_object(self, octahedron):
        n = by_label(octahedron)
        ctx = ctx_of(octahedron, n["t"])
        state_a = TargetState()
        state_b = copy.deepcopy(state_a)
        pkt = core(MESSAGE, n["s"], n["t"], Direction.R, (n["s"],))
        target_receive(state_a, ctx, n["c"], pkt)
        target_receive(state_b, ctx, n["c"], pkt)
        assert state_a.records == state_b.records
        assert state_a.delivered == state_b.delivered


S = point(0, 0)
A = point(1, 1)
B = point(2, 2)
V = point(3, 3)
X = point(4, 4)
Y = point(5, 5)


def rec(direction, skip, visited):
    return TargetRecord(MESSAGE, S, direction, skip, tuple(visited))


class TestDeliveryPredicate:
    def test_cores_disjoint_but_for_source(self):
        records = {rec(Direction.L, None, (S, A, B)), rec(Direction.R, None, (S, X, Y))}
        assert _delivery_met(records, MESSAGE, S)

    def test_cores_sharing_internal_node(self):
        records = {rec(Direction.L, None, (S, A, V)), rec(Direction.R, None, (S, V, Y))}
        assert not _delivery_met(records, MESSAGE, S)

    def test_braid_covers_non_source_visited(self):
        records = {
            rec(Direction.L, None, (S, A, B)),
            rec(Direction.L, A, ()),
            rec(Direction.L, B, ()),
        }
        assert _delivery_met(records, MESSAGE, S)

    def test_braid_must_cover_every_entry(self):
        records = {rec(Direction.L, None, (S, A, B)), rec(Direction.L, A, ())}
        assert not _delivery_met(records, MESSAGE, S)

    def test_braid_direction_must_match(self):
        records = {
            rec(Direction.L, None, (S, A)),
            rec(Direction.R, A, ()),
        }
        assert not _delivery_met(records, MESSAGE, S)

    def test_other_message_does_not_help(self):
        records = {
            rec(Direction.L, None, (S, A)),
            TargetRecord(b"other", S, Direction.L, A, ()),
        }
        assert not _delivery_met(records, MESSAGE, S)
