"""Deterministic discrete-event execution over reliable FIFO links.

Time does not exist here: asynchrony is modeled entirely by which
non-empty link delivers next, chosen by a seeded schedule policy. Two
runs of the same scenario produce bit-identical traces. Monitors turn
the protocol's contract into findings: a delivery that differs from the
sent message (VALIDITY), quiescence without delivery (LIVENESS), a hit
step cap (TERMINATION), a structurally false sender (AUTHENTICITY), and
a second message ever satisfying a delivery condition (SECOND-MATCH).
"""

from __future__ import annotations

import copy
import hashlib
import math
import statistics
from collections import deque
from dataclasses import dataclass, field, replace

from .adversary import Adversary
from .geometry import Direction, Point
from .protocol import (
    NodeContext,
    Packet,
    SendAction,
    TargetState,
    expected_neighbors,
    invalid,
    on_receive,
    source_init,
    target_receive,
)
from .topology import Instance, TraversalError, core_path_oracle, validate_instance

SCHEDULE_POLICIES = ("seeded-random", "fifo-global", "adversarial-delay")


@dataclass(frozen=True)
class FaultSpec:
    node: Point
    strategy: str
    seed: int = 0
    budget: int | None = None  # None: 4 * |V|


@dataclass(frozen=True)
class ScheduleSpec:
    policy: str = "seeded-random"
    seed: int = 0
    heuristic: str = "starve-opposite"


@dataclass(frozen=True)
class Scenario:
    instance: Instance
    message: bytes
    fault: FaultSpec | None = None
    schedule: ScheduleSpec = ScheduleSpec()
    step_cap: int | None = None  # None: 64 * |V| * |E|
    collect_trace: bool = False


@dataclass(frozen=True)
class Finding:
    kind: str  # VALIDITY | LIVENESS | TERMINATION | AUTHENTICITY | SECOND-MATCH
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass
class RunCounts:
    sends_core: int = 0
    sends_thread: int = 0
    recvs: int = 0
    drops: int = 0
    deliveries: int = 0
    max_visited: int = 0

    @property
    def sends(self) -> int:
        return self.sends_core + self.sends_thread


@dataclass(frozen=True)
class RunOutcome:
    delivered: tuple[bytes, int] | None
    quiesced: bool
    steps: int
    violations: tuple[Finding, ...]
    counts: RunCounts
    trace: tuple[str, ...] | None
    trace_hash: str
    target_records: frozenset
    send_multiset: tuple


def message_hash(message: bytes) -> str:
    return hashlib.blake2b(message, digest_size=8).hexdigest()


def scenario_violations(sc: Scenario) -> list[str]:
    """Static checks on the scenario itself, before anything runs."""
    problems = []
    if sc.fault is not None:
        if sc.fault.node in (sc.instance.source, sc.instance.target):
            problems.append("fault placement violates the correct-endpoints assumption")
        if sc.fault.node not in sc.instance.graph.nodes:
            problems.append("fault node is not in the graph")
    if sc.schedule.policy not in SCHEDULE_POLICIES:
        problems.append(f"unknown schedule policy {sc.schedule.policy!r}")
    return problems


class _Engine:
    """Mutable run state; one instance per execution (or per explored branch)."""

    def __init__(self, sc: Scenario, assume_valid: bool = False):
        problems = scenario_violations(sc)
        if problems:
            raise ValueError("; ".join(problems))
        if not assume_valid:
            report = validate_instance(sc.instance)
            if not report.ok():
                raise ValueError("invalid instance: " + "; ".join(report.lines()))
        self.sc = sc
        inst = sc.instance
        g = inst.graph
        self.contexts = {
            n: NodeContext(n, frozenset(g.neighbors(n))) for n in g.nodes
        }
        self.target_state = TargetState(
            expected=expected_neighbors(self.contexts[inst.target], inst.source)
        )
        self.adversary: Adversary | None = None
        if sc.fault is not None:
            budget = sc.fault.budget
            if budget is None:
                budget = 4 * len(g.nodes)
            self.adversary = Adversary(
                sc.fault.strategy,
                self.contexts[sc.fault.node],
                inst.source,
                inst.target,
                sc.fault.seed,
                budget,
            )
        self.queues: dict[tuple[Point, Point], deque] = {}
        self.seq = 0
        self.steps = 0
        self.counts = RunCounts()
        self.trace_lines: list[str] | None = [] if sc.collect_trace else None
        self.hasher = hashlib.blake2b(digest_size=16)
        self.delivered: tuple[bytes, int] | None = None
        self.sent_multiset: dict = {}
        self.authenticity_findings: list[str] = []

        # initial actions: the source originates, then the fault activates once
        self._emit_sends(inst.source, source_init(self.contexts[inst.source], inst.target, sc.message))
        if self.adversary is not None:
            self._emit_sends(sc.fault.node, self.adversary.on_activate())

    # -- event plumbing ---------------------------------------------------------

    def _label(self, p: Point | None) -> str:
        if p is None:
            return "-"
        return self.sc.instance.label(p)

    def _event(self, kind: str, frm: Point, to: Point, pkt: Packet) -> None:
        line = (
            f"{self.steps} | {kind} | {self._label(frm)} | {self._label(to)} | "
            f"{'CORE' if pkt.is_core else 'THREAD'} | {pkt.direction.value} | "
            f"{self._label(pkt.skip)} | {len(pkt.visited)} | {message_hash(pkt.message)}"
        )
        self.hasher.update(line.encode())
        self.hasher.update(b"\n")
        if self.trace_lines is not None:
            self.trace_lines.append(line)

    def _emit_sends(self, sender: Point, actions: list[SendAction]) -> None:
        for act in actions:
            if act.to not in self.contexts[sender].neighbors:
                # structural sender/locality breach; catalog code never does this
                self.authenticity_findings.append(
                    f"{self._label(sender)} addressed non-neighbor {self._label(act.to)}"
                )
                continue
            pkt = act.packet
            self.queues.setdefault((sender, act.to), deque()).append((self.seq, pkt))
            self.seq += 1
            if pkt.is_core:
                self.counts.sends_core += 1
            else:
                self.counts.sends_thread += 1
            self.counts.max_visited = max(self.counts.max_visited, len(pkt.visited))
            key = (pkt, sender, act.to)
            self.sent_multiset[key] = self.sent_multiset.get(key, 0) + 1
            self._event("SEND", sender, act.to, pkt)

    def active_links(self) -> list[tuple[Point, Point]]:
        return sorted(link for link, q in self.queues.items() if q)

    def head_seq(self, link) -> int:
        return self.queues[link][0][0]

    def head_direction(self, link) -> Direction:
        return self.queues[link][0][1].direction

    # -- one delivery ---------------------------------------------------------

    def deliver_from(self, link: tuple[Point, Point]) -> None:
        frm, to = link
        _, pkt = self.queues[link].popleft()
        if not self.queues[link]:
            del self.queues[link]
        self.steps += 1
        self.counts.recvs += 1
        self._event("RECV", frm, to, pkt)
        inst = self.sc.instance
        if self.adversary is not None and to == self.sc.fault.node:
            sends = self.adversary.on_receive(frm, pkt)
            if sends:
                self._emit_sends(to, sends)
            else:
                self.counts.drops += 1
                self._event("DROP", frm, to, pkt)
            return
        if to == inst.target:
            if invalid(self.contexts[to], frm, pkt):
                self.counts.drops += 1
                self._event("DROP", frm, to, pkt)
                return
            delivered = target_receive(self.target_state, self.contexts[to], frm, pkt)
            if delivered is not None:
                self.counts.deliveries += 1
                self.delivered = (delivered, self.steps)
                self._event("DELIVER", frm, to, pkt)
            self.counts.max_visited = max(
                self.counts.max_visited, len(pkt.visited) + (1 if pkt.is_core else 0)
            )
            return
        sends = on_receive(self.contexts[to], frm, pkt)
        if sends:
            self._emit_sends(to, sends)
        else:
            self.counts.drops += 1
            self._event("DROP", frm, to, pkt)

    # -- state digest for exhaustive exploration ----------------------------------

    def state_key(self):
        queued = tuple(
            (link, tuple(pkt for _, pkt in q)) for link, q in sorted(self.queues.items()) if q
        )
        adv = self.adversary.fingerprint() if self.adversary is not None else None
        return (queued, self.target_state.freeze(), adv)

    def clone(self) -> "_Engine":
        twin = object.__new__(_Engine)
        twin.__dict__.update(self.__dict__)
        twin.queues = {link: deque(q) for link, q in self.queues.items()}
        twin.target_state = TargetState(
            records=set(self.target_state.records),
            delivered=self.target_state.delivered,
            matched=set(self.target_state.matched),
            expected=self.target_state.expected,
        )
        twin.counts = replace(self.counts)
        twin.sent_multiset = dict(self.sent_multiset)
        twin.authenticity_findings = list(self.authenticity_findings)
        twin.trace_lines = None
        twin.hasher = hashlib.blake2b(digest_size=16)
        twin.adversary = copy.deepcopy(self.adversary)
        return twin


def _fault_side(inst: Instance, fault: Point | None) -> Direction | None:
    if fault is None:
        return None
    try:
        if fault in core_path_oracle(inst, Direction.L):
            return Direction.L
        if fault in core_path_oracle(inst, Direction.R):
            return Direction.R
    except TraversalError:
        return None
    return None


def run(sc: Scenario, assume_valid: bool = False) -> RunOutcome:
    """Execute the scenario to quiescence or the step cap; never raises on findings."""
    import random as _random

    engine = _Engine(sc, assume_valid=assume_valid)
    inst = sc.instance
    cap = sc.step_cap
    if cap is None:
        cap = 64 * len(inst.graph.nodes) * len(inst.graph.edges)
    rng = _random.Random(f"schedule:{sc.schedule.seed}")
    policy = sc.schedule.policy
    preferred_dir = None
    if policy == "adversarial-delay":
        preferred_dir = _fault_side(inst, sc.fault.node if sc.fault else None)

    while engine.steps < cap:
        active = engine.active_links()
        if not active:
            break
        if policy == "seeded-random":
            link = active[rng.randrange(len(active))]
        elif policy == "fifo-global":
            link = min(active, key=engine.head_seq)
        elif policy == "adversarial-delay":
            preferred = (
                [l for l in active if engine.head_direction(l) == preferred_dir]
                if preferred_dir is not None
                else []
            )
            link = min(preferred or active, key=engine.head_seq)
        else:  # pragma: no cover - rejected earlier
            raise ValueError(policy)
        engine.deliver_from(link)

    quiesced = not engine.active_links()
    violations = _evaluate_monitors(engine, quiesced, cap)
    return RunOutcome(
        delivered=engine.delivered,
        quiesced=quiesced,
        steps=engine.steps,
        violations=tuple(violations),
        counts=engine.counts,
        trace=tuple(engine.trace_lines) if engine.trace_lines is not None else None,
        trace_hash=engine.hasher.hexdigest(),
        target_records=frozenset(engine.target_state.records),
        send_multiset=tuple(sorted(engine.sent_multiset.items(), key=repr)),
    )


def _evaluate_monitors(engine: _Engine, quiesced: bool, cap: int) -> list[Finding]:
    findings: list[Finding] = []
    sent = engine.sc.message
    if engine.delivered is not None and engine.delivered[0] != sent:
        findings.append(
            Finding(
                "VALIDITY",
                f"delivered {message_hash(engine.delivered[0])} instead of {message_hash(sent)}",
            )
        )
    if quiesced and engine.delivered is None:
        findings.append(Finding("LIVENESS", "network quiesced without a delivery"))
    if not quiesced:
        findings.append(Finding("TERMINATION", f"step cap {cap} reached with packets in flight"))
    for detail in engine.authenticity_findings:
        findings.append(Finding("AUTHENTICITY", detail))
    extra = {m for m in engine.target_state.matched if m != sent}
    if extra or len(engine.target_state.matched) > 1:
        findings.append(
            Finding(
                "SECOND-MATCH",
                f"{len(engine.target_state.matched)} distinct messages satisfied delivery",
            )
        )
    return findings


# ---------------------------------------------------------------------------
# Exhaustive interleaving exploration (tiny instances only)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Exploration:
    states: int
    terminals: int
    delivered_messages: frozenset
    all_delivered: bool


class ExplorationLimit(RuntimeError):
    pass


def explore(sc: Scenario, max_events: int = 24) -> Exploration:
    """Bounded DFS over every delivery order; memoized on canonical state.

    Certifies order-independence of the outcome for scenarios whose every
    execution fits in `max_events` deliveries. Raises ExplorationLimit for
    anything larger.
    """
    base = _Engine(replace(sc, collect_trace=False))
    memo: dict = {}
    stats = {"states": 0}

    def rec(engine: _Engine, depth: int) -> frozenset:
        key = engine.state_key()
        hit = memo.get(key)
        if hit is not None:
            return hit
        stats["states"] += 1
        active = engine.active_links()
        if not active:
            result = frozenset(
                {engine.delivered[0] if engine.delivered is not None else None}
            )
            memo[key] = result
            return result
        if depth >= max_events:
            raise ExplorationLimit(
                f"an interleaving exceeds {max_events} events; instance too large"
            )
        results = set()
        for link in active:
            child = engine.clone()
            child.deliver_from(link)
            results.update(rec(child, depth + 1))
        result = frozenset(results)
        memo[key] = result
        return result

    outcomes = rec(base, 0)
    delivered = frozenset(m for m in outcomes if m is not None)
    return Exploration(
        states=stats["states"],
        terminals=sum(1 for _ in outcomes),
        delivered_messages=delivered,
        all_delivered=(None not in outcomes)
        and delivered == frozenset({sc.message}),
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    family: str
    sizes: tuple[int, ...]
    strategies: tuple[str, ...]  # "none" means fault-free
    seeds_per_cell: int = 5
    family_seed: int = 1
    message: bytes = b"sweep-payload"
    fault_policy: str = "first-green"  # or "all-green"


@dataclass
class CellStats:
    size: int
    strategy: str
    runs: int = 0
    deliveries: int = 0
    violations: int = 0
    total_sends: list[int] = field(default_factory=list)
    thread_sends_max: int = 0
    thread_bound: int = 0
    error: str | None = None

    @property
    def mean_sends(self) -> float:
        return statistics.fmean(self.total_sends) if self.total_sends else math.nan

    @property
    def max_sends(self) -> int:
        return max(self.total_sends, default=0)

    @property
    def thread_bound_ok(self) -> bool:
        return self.thread_sends_max <= self.thread_bound


@dataclass(frozen=True)
class SweepResult:
    cells: tuple[CellStats, ...]
    slope: float | None  # log-log regression of fault-free mean sends vs size
    violations_total: int

    def table_lines(self) -> list[str]:
        header = "size\tstrategy\truns\tmean_sends\tmax_sends\tdeliveries\tviolations\tthread_bound_ok"
        lines = [header]
        for c in self.cells:
            if c.error:
                lines.append(f"{c.size}\t{c.strategy}\tERROR\t{c.error}")
                continue
            lines.append(
                f"{c.size}\t{c.strategy}\t{c.runs}\t{c.mean_sends:.1f}\t{c.max_sends}"
                f"\t{c.deliveries}\t{c.violations}\t{c.thread_bound_ok}"
            )
        return lines


def sweep(spec: SweepSpec) -> SweepResult:
    """Run the (size x strategy) matrix and fit the fault-free scaling slope."""
    from .generators import GenerationError, generate_family
    from .topology import green_face

    cells: list[CellStats] = []
    faultfree: list[tuple[int, float]] = []
    for size in spec.sizes:
        try:
            inst = generate_family(spec.family, size, spec.family_seed)
        except (GenerationError, ValueError) as exc:
            for strategy in spec.strategies:
                cells.append(CellStats(size, strategy, error=str(exc)))
            continue
        green = green_face(inst)
        internal_green = sorted(green.nodes - {inst.source, inst.target})
        thread_bound = (
            len(core_path_oracle(inst, Direction.L))
            + len(core_path_oracle(inst, Direction.R))
        ) * len(inst.graph.edges)
        for strategy in spec.strategies:
            cell = CellStats(size, strategy, thread_bound=thread_bound)
            if strategy == "none":
                fault_nodes: list[Point | None] = [None]
            elif spec.fault_policy == "all-green":
                fault_nodes = list(internal_green)
            else:
                fault_nodes = [internal_green[0]] if internal_green else []
            for node in fault_nodes:
                for seed in range(spec.seeds_per_cell):
                    fault = (
                        None
                        if node is None
                        else FaultSpec(node=node, strategy=strategy, seed=seed)
                    )
                    outcome = run(
                        Scenario(
                            instance=inst,
                            message=spec.message,
                            fault=fault,
                            schedule=ScheduleSpec("seeded-random", seed),
                        ),
                        assume_valid=True,
                    )
                    cell.runs += 1
                    cell.total_sends.append(outcome.counts.sends)
                    cell.thread_sends_max = max(
                        cell.thread_sends_max, outcome.counts.sends_thread
                    )
                    if outcome.delivered is not None:
                        cell.deliveries += 1
                    cell.violations += len(outcome.violations)
            cells.append(cell)
            if strategy == "none" and cell.total_sends:
                faultfree.append((size, cell.mean_sends))
    slope = None
    if len(faultfree) >= 2:
        xs = [math.log(s) for s, _ in faultfree]
        ys = [math.log(m) for _, m in faultfree]
        slope = statistics.linear_regression(xs, ys).slope
    return SweepResult(
        cells=tuple(cells),
        slope=slope,
        violations_total=sum(c.violations for c in cells if not c.error),
    )
