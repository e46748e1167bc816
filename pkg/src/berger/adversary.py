"""Byzantine behaviors for the single faulty node.

A faulty node consumes everything it receives and only ever originates
packets; it cannot lie about its own coordinates (the harness stamps the
sender) and only reaches its real neighbors. Every strategy is
deterministic under its seed and stops after a finite origination budget,
so runs always quiesce.

Injected packets are crafted so the drop rules can always retire them: a
core dies because relays grow its visited list until some node repeats,
and a thread is only launched over an edge of the packet's own filtered
graph, which makes its face walk return to this node, where it is
consumed. A thread thrown across an edge that crosses the claimed
source-target segment would escape that argument and circulate forever,
so the catalog never does that.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .geometry import Direction, Point, on_this_side
from .protocol import NodeContext, Packet, SendAction

STRATEGY_NAMES = (
    "CRASH",
    "FORGE-MESSAGE",
    "DROP-CORE",
    "SPURIOUS-CORE",
    "TAMPER-VISITED",
    "SKIP-SELF-THREAD",
    "RANDOM",
)


@dataclass(frozen=True)
class AdversaryStrategy:
    """Catalog entry: a named behavior plus its origination budget policy."""

    name: str
    description: str


def strategy_catalog() -> list[AdversaryStrategy]:
    return [
        AdversaryStrategy("CRASH", "consume every packet, send nothing"),
        AdversaryStrategy(
            "FORGE-MESSAGE",
            "re-emit received cores (and their split threads) with an altered message",
        ),
        AdversaryStrategy(
            "DROP-CORE", "consume cores; re-originate received threads unchanged"
        ),
        AdversaryStrategy(
            "SPURIOUS-CORE",
            "originate cores with fabricated visited lists, including lists omitting this node",
        ),
        AdversaryStrategy(
            "TAMPER-VISITED",
            "re-emit received cores with spurious originators in the visited list",
        ),
        AdversaryStrategy(
            "SKIP-SELF-THREAD",
            "originate threads that skip this very node; recipients must drop them",
        ),
        AdversaryStrategy(
            "RANDOM", "seeded arbitrary packets to random neighbors up to the budget"
        ),
    ]


class Adversary:
    """One faulty node for one run: behavior keyed by strategy name.

    Observation is limited to the node's own receipts; the routing pair
    (source, target) is configuration, not snooping. `budget` caps total
    originations.
    """

    def __init__(
        self,
        strategy: str,
        ctx: NodeContext,
        source: Point,
        target: Point,
        seed: int,
        budget: int,
    ):
        if strategy not in STRATEGY_NAMES:
            raise ValueError(f"unknown adversary strategy {strategy!r}")
        self.strategy = strategy
        self.ctx = ctx
        self.source = source
        self.target = target
        self.budget = budget
        self.sent = 0
        self.history: list[tuple[Point, Packet]] = []
        self.rng = random.Random(f"{strategy}:{seed}")

    # -- harness interface ---------------------------------------------------

    def on_activate(self) -> list[SendAction]:
        """One deterministic activation at run start, before any receipt."""
        handler = getattr(self, f"_activate_{self._slug()}", None)
        return self._capped(handler() if handler else [])

    def on_receive(self, sender: Point, pkt: Packet) -> list[SendAction]:
        """Consume a receipt; possibly originate packets in response."""
        self.history.append((sender, pkt))
        handler = getattr(self, f"_receive_{self._slug()}", None)
        return self._capped(handler(sender, pkt) if handler else [])

    def fingerprint(self):
        """Hashable digest of all behavior-affecting state (for exhaustive search)."""
        return (
            self.strategy,
            self.sent,
            tuple(self.history),
            self.rng.getstate(),
        )

    def _slug(self) -> str:
        return self.strategy.lower().replace("-", "_")

    def _capped(self, actions: list[SendAction]) -> list[SendAction]:
        allowed = max(0, self.budget - self.sent)
        actions = actions[:allowed]
        self.sent += len(actions)
        for act in actions:
            if act.to not in self.ctx.neighbors:
                raise AssertionError("adversary addressed a non-neighbor")
        return actions

    # -- shared helpers --------------------------------------------------------

    def _fab_message(self) -> bytes:
        return b"junk-" + self.rng.getrandbits(32).to_bytes(4, "big")

    def _sorted_neighbors(self) -> list[Point]:
        return sorted(self.ctx.neighbors)

    def _safe_thread_targets(self) -> list[Point]:
        # edges that do not cross the claimed segment keep injected threads
        # on faces this node belongs to
        return [
            n
            for n in self._sorted_neighbors()
            if on_this_side(self.source, self.target, self.ctx.node, n)
        ]

    def _forward_like(self, sender: Point, pkt: Packet) -> Point | None:
        return self.ctx.select(
            sender, pkt.source, pkt.target, pkt.direction, pkt.skip
        )

    # -- CRASH: nothing ever --------------------------------------------------

    # (no handlers: consume silently)

    # -- FORGE-MESSAGE ---------------------------------------------------------

    def _receive_forge_message(self, sender: Point, pkt: Packet) -> list[SendAction]:
        if not pkt.is_core:
            return []
        forged = Packet(
            pkt.message + b"\xff",  # always differs from the genuine message
            pkt.source,
            pkt.target,
            pkt.direction,
            None,
            pkt.visited + (sender,),
        )
        out = []
        forward_to = self._forward_like(sender, forged)
        if forward_to is not None:
            out.append(SendAction(forged, forward_to))
            if forward_to not in forged.visited:
                thread_to = self.ctx.select(
                    sender, pkt.source, pkt.target, pkt.direction, forward_to
                )
                if thread_to is not None:
                    out.append(
                        SendAction(
                            Packet(
                                forged.message,
                                pkt.source,
                                pkt.target,
                                pkt.direction,
                                forward_to,
                                (self.ctx.node,),
                            ),
                            thread_to,
                        )
                    )
        return out

    # -- DROP-CORE ---------------------------------------------------------------

    def _receive_drop_core(self, sender: Point, pkt: Packet) -> list[SendAction]:
        if pkt.is_core:
            return []
        to = self._forward_like(sender, pkt)
        return [] if to is None else [SendAction(pkt, to)]

    # -- SPURIOUS-CORE -------------------------------------------------------------

    def _spurious_core(self, to: Point) -> SendAction:
        pool = [p for p in self._sorted_neighbors() if p != to] + [self.source]
        visited = tuple(
            self.rng.sample(pool, self.rng.randint(0, min(2, len(pool))))
        )
        direction = self.rng.choice((Direction.L, Direction.R))
        return SendAction(
            Packet(self._fab_message(), self.source, self.target, direction, None, visited),
            to,
        )

    def _activate_spurious_core(self) -> list[SendAction]:
        return [self._spurious_core(n) for n in self._sorted_neighbors()]

    def _receive_spurious_core(self, sender: Point, pkt: Packet) -> list[SendAction]:
        return [self._spurious_core(sender)]

    # -- TAMPER-VISITED -------------------------------------------------------------

    def _receive_tamper_visited(self, sender: Point, pkt: Packet) -> list[SendAction]:
        if not pkt.is_core:
            return []
        pool = [p for p in self._sorted_neighbors() if p != self.ctx.node]
        spurious = tuple(
            self.rng.sample(pool, self.rng.randint(1, min(2, len(pool))))
        )
        # keep the genuine message but claim it traveled somewhere it did not,
        # and leave this node out of the list entirely
        tampered = Packet(
            pkt.message,
            pkt.source,
            pkt.target,
            pkt.direction,
            None,
            spurious,
        )
        to = self._forward_like(sender, tampered)
        return [] if to is None else [SendAction(tampered, to)]

    # -- SKIP-SELF-THREAD --------------------------------------------------------------

    def _skip_self_thread(self, to: Point) -> SendAction:
        direction = self.rng.choice((Direction.L, Direction.R))
        return SendAction(
            Packet(
                self._fab_message(),
                self.source,
                self.target,
                direction,
                self.ctx.node,
                (self.ctx.node,),
            ),
            to,
        )

    def _activate_skip_self_thread(self) -> list[SendAction]:
        return [self._skip_self_thread(n) for n in self._sorted_neighbors()]

    def _receive_skip_self_thread(self, sender: Point, pkt: Packet) -> list[SendAction]:
        return [self._skip_self_thread(sender)]

    # -- RANDOM -----------------------------------------------------------------------

    def _random_packet(self) -> SendAction | None:
        neighbors = self._sorted_neighbors()
        direction = self.rng.choice((Direction.L, Direction.R))
        make_core = self.rng.random() < 0.5
        pool = neighbors + [self.source, self.target, self.ctx.node]
        visited = tuple(self.rng.sample(pool, self.rng.randint(0, 3)))
        message = self._fab_message()
        if make_core:
            to = self.rng.choice(neighbors)
            return SendAction(
                Packet(message, self.source, self.target, direction, None, visited),
                to,
            )
        safe = self._safe_thread_targets()
        if not safe:
            return None
        to = self.rng.choice(safe)
        skip = self.rng.choice(pool)
        return SendAction(
            Packet(message, self.source, self.target, direction, skip, visited), to
        )

    def _random_burst(self) -> list[SendAction]:
        out = []
        for _ in range(self.rng.randint(1, 3)):
            action = self._random_packet()
            if action is not None:
                out.append(action)
        return out

    def _activate_random(self) -> list[SendAction]:
        return self._random_burst()

    def _receive_random(self, sender: Point, pkt: Packet) -> list[SendAction]:
        return self._random_burst()
