"""Embedded planar graphs: validation, faces, and traversal oracles.

The admissibility rules for a routing instance are checked here: planar
straight-line embedding, general position, non-adjacent endpoints, and
three-connectivity of the graph that remains once every edge crossing the
source-target segment is removed. Three-connectivity is established by
brute force (every vertex pair is removed and connectivity re-checked),
which is affordable at the instance sizes this project targets and
produces an explicit witness on failure.

Face cycles come from the rotation system: the successor of directed edge
(u, v) is (v, w) where w is the next neighbor of v clockwise after u.
The face of the reduced graph whose region contains the open
source-target segment is the green face; per green node k, the k-blue
face is the union of non-green reduced faces around k.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key

from .geometry import (
    Direction,
    Point,
    collinear_overlap,
    orientation,
    Orientation,
    point_on_segment,
    segments_intersect,
    next_node,
)


class TraversalError(RuntimeError):
    """A face-rule traversal failed to terminate where the model says it must."""


def _angular_ccw_key(center: Point):
    """Comparator key sorting points counter-clockwise around `center`, from east."""

    def compare(a: Point, b: Point) -> int:
        ax, ay = a.x - center.x, a.y - center.y
        bx, by = b.x - center.x, b.y - center.y
        ha = 0 if (ay > 0 or (ay == 0 and ax > 0)) else 1
        hb = 0 if (by > 0 or (by == 0 and bx > 0)) else 1
        if ha != hb:
            return -1 if ha < hb else 1
        cr = ax * by - ay * bx
        if cr != 0:
            return -1 if cr > 0 else 1
        return -1 if a < b else 1

    return cmp_to_key(compare)


class EmbeddedGraph:
    """Undirected graph with straight-line embedding and derived rotation system.

    Immutable after construction. Neighbor rings are stored in
    counter-clockwise angular order around each node.
    """

    def __init__(self, nodes, edges):
        self.nodes: frozenset[Point] = frozenset(nodes)
        canon = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop at {a}")
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge endpoint not a node: {a}-{b}")
            canon.add((a, b) if a < b else (b, a))
        self.edges: frozenset[tuple[Point, Point]] = frozenset(canon)
        ring: dict[Point, list[Point]] = {n: [] for n in self.nodes}
        for a, b in self.edges:
            ring[a].append(b)
            ring[b].append(a)
        self._ring: dict[Point, tuple[Point, ...]] = {
            n: tuple(sorted(nbrs, key=_angular_ccw_key(n))) for n, nbrs in ring.items()
        }
        # integer mirror of the adjacency; exact-rational hashing is far too
        # slow for the brute-force connectivity sweeps
        self._order: list[Point] = sorted(self.nodes)
        self._index: dict[Point, int] = {p: i for i, p in enumerate(self._order)}
        self._int_adj: list[list[int]] = [
            [self._index[q] for q in self._ring[p]] for p in self._order
        ]
        self._next_cache: dict = {}

    def neighbors(self, n: Point) -> tuple[Point, ...]:
        return self._ring[n]

    def degree(self, n: Point) -> int:
        return len(self._ring[n])

    def without_edges(self, removed) -> "EmbeddedGraph":
        removed = {(a, b) if a < b else (b, a) for a, b in removed}
        return EmbeddedGraph(self.nodes, self.edges - removed)

    def is_connected(self, excluded: frozenset[Point] = frozenset()) -> bool:
        return self._is_connected_idx([self._index[p] for p in excluded])

    def _is_connected_idx(self, excluded: list[int]) -> bool:
        n = len(self._order)
        seen = bytearray(n)
        for i in excluded:
            seen[i] = 2
        start = next((i for i in range(n) if not seen[i]), None)
        if start is None:
            return True
        seen[start] = 1
        stack = [start]
        reached = 1
        adj = self._int_adj
        while stack:
            for j in adj[stack.pop()]:
                if not seen[j]:
                    seen[j] = 1
                    reached += 1
                    stack.append(j)
        return reached == n - len(excluded)

    def next_node(self, node, ref, source, target, direction, skip=None) -> Point | None:
        """Memoized angular next-hop selection (see geometry.next_node)."""
        key = (node, ref, source, target, direction, skip)
        try:
            return self._next_cache[key]
        except KeyError:
            result = next_node(
                self._ring[node], node, ref, source, target, direction, skip
            )
            self._next_cache[key] = result
            return result


@dataclass(frozen=True)
class Instance:
    """A routing instance: embedded graph plus source and target nodes."""

    graph: EmbeddedGraph
    source: Point
    target: Point
    labels: dict[Point, str] = field(default_factory=dict, compare=False)

    def label(self, p: Point) -> str:
        return self.labels.get(p, f"{p.x},{p.y}")


# ---------------------------------------------------------------------------
# Face enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FaceSet:
    """All face cycles of a connected planar embedding.

    Each face is the vertex walk produced by the rotation-system trace;
    every directed edge belongs to exactly one walk. `external_index`
    names the unbounded face (the unique walk with negative signed area).
    """

    faces: tuple[tuple[Point, ...], ...]
    external_index: int

    def faces_at(self, node: Point) -> tuple[int, ...]:
        return tuple(i for i, f in enumerate(self.faces) if node in f)


def _walk_area2(cycle: tuple[Point, ...]) -> Fraction:
    total = Fraction(0)
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        total += a.x * b.y - b.x * a.y
    return total


def enumerate_faces(graph: EmbeddedGraph) -> FaceSet:
    """Trace every face cycle of the rotation system.

    Successor of (u, v) is (v, w) with w the clockwise-next neighbor of v
    after u, i.e. the predecessor of u in v's counter-clockwise ring.
    Verifies Euler's formula |V| - |E| + |F| = 2 before returning.
    """
    if not graph.is_connected():
        raise ValueError("face enumeration requires a connected graph")
    pos = {
        n: {nbr: i for i, nbr in enumerate(graph.neighbors(n))} for n in graph.nodes
    }
    unvisited: set[tuple[Point, Point]] = set()
    for a, b in graph.edges:
        unvisited.add((a, b))
        unvisited.add((b, a))

    faces: list[tuple[Point, ...]] = []
    while unvisited:
        start = min(unvisited)
        walk: list[Point] = []
        u, v = start
        while True:
            unvisited.discard((u, v))
            walk.append(u)
            ring = graph.neighbors(v)
            w = ring[(pos[v][u] - 1) % len(ring)]
            u, v = v, w
            if (u, v) == start:
                break
        faces.append(tuple(walk))

    areas = [_walk_area2(f) for f in faces]
    external = min(range(len(faces)), key=lambda i: areas[i])
    if areas[external] >= 0:
        raise TraversalError("no face walk encloses the embedding; rotation system inconsistent")
    if len(graph.nodes) - len(graph.edges) + len(faces) != 2:
        raise TraversalError(
            "Euler check failed: V=%d E=%d F=%d"
            % (len(graph.nodes), len(graph.edges), len(faces))
        )
    return FaceSet(tuple(faces), external)


def point_in_walk(pt: Point, cycle: tuple[Point, ...]) -> bool:
    """Exact ray-casting parity test; `pt` must not lie on the walk itself."""
    inside = False
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        if (a.y > pt.y) != (b.y > pt.y):
            x_cross = a.x + (pt.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if pt.x < x_cross:
                inside = not inside
    return inside


# ---------------------------------------------------------------------------
# Reduced graph, green and blue faces
# ---------------------------------------------------------------------------


def reduced_graph(inst: Instance) -> EmbeddedGraph:
    """The instance graph minus every edge intersecting the source-target segment."""
    s, t = inst.source, inst.target
    crossing = [
        (a, b) for a, b in inst.graph.edges if segments_intersect(a, b, s, t)
    ]
    return inst.graph.without_edges(crossing)


@dataclass(frozen=True)
class GreenFace:
    cycle: tuple[Point, ...]
    nodes: frozenset[Point]
    index: int
    is_external: bool
    faceset: FaceSet


def green_face(inst: Instance) -> GreenFace:
    """The unique reduced-graph face whose region contains the open s-t segment."""
    reduced = reduced_graph(inst)
    faceset = enumerate_faces(reduced)
    mid = Point(
        (inst.source.x + inst.target.x) / 2, (inst.source.y + inst.target.y) / 2
    )
    hits = [
        i
        for i, f in enumerate(faceset.faces)
        if i != faceset.external_index and point_in_walk(mid, f)
    ]
    if len(hits) > 1:
        raise TraversalError(f"segment midpoint located in {len(hits)} faces")
    index = hits[0] if hits else faceset.external_index
    cycle = faceset.faces[index]
    nodes = frozenset(cycle)
    if inst.source not in nodes or inst.target not in nodes:
        raise TraversalError("green face does not touch both source and target")
    return GreenFace(cycle, nodes, index, index == faceset.external_index, faceset)


@dataclass(frozen=True)
class BlueFace:
    skip: Point
    face_indices: tuple[int, ...]
    nodes: frozenset[Point]


def blue_face(inst: Instance, k: Point) -> BlueFace:
    """Union of non-green reduced faces around green node k; its non-green nodes."""
    green = green_face(inst)
    if k not in green.nodes or k in (inst.source, inst.target):
        raise ValueError(f"{k} is not an internal green node")
    indices = tuple(
        i
        for i, f in enumerate(green.faceset.faces)
        if k in f and i != green.index
    )
    union_nodes = set()
    for i in indices:
        union_nodes.update(green.faceset.faces[i])
    return BlueFace(k, indices, frozenset(union_nodes) - green.nodes)


# ---------------------------------------------------------------------------
# Traversal oracles
# ---------------------------------------------------------------------------


def core_path_oracle(inst: Instance, direction: Direction) -> tuple[Point, ...]:
    """Face-rule walk from source to target, as an unfaulted core would travel.

    Starts with the target as angular reference, then always references
    the previous hop. Must reach the target within |V| hops on admissible
    instances; anything else indicates a validator gap.
    """
    s, t = inst.source, inst.target
    path = [s]
    ref, current = t, s
    for _ in range(len(inst.graph.nodes)):
        nxt = inst.graph.next_node(current, ref, s, t, direction)
        if nxt is None:
            raise TraversalError(f"no admissible hop from {current} on core walk")
        path.append(nxt)
        if nxt == t:
            return tuple(path)
        ref, current = current, nxt
    raise TraversalError(
        f"core walk did not reach the target within {len(inst.graph.nodes)} hops"
    )


def thread_path_oracle(
    inst: Instance, origin: Point, skip: Point, direction: Direction
) -> tuple[Point, ...]:
    """Face-rule walk from `origin` that avoids `skip`, as a thread would travel.

    The walk ends on reaching the target or returning to the origin (a
    thread dies at its originator). The initial angular reference is the
    target when the origin is the source, otherwise the origin's
    predecessor on the same-direction core path.
    """
    s, t = inst.source, inst.target
    if origin == s:
        ref = t
    else:
        core = core_path_oracle(inst, direction)
        if origin not in core:
            raise ValueError(f"{origin} is not on the {direction.value} core path")
        ref = core[core.index(origin) - 1]
    path = [origin]
    current = origin
    cap = 2 * len(inst.graph.edges) + 2
    for _ in range(cap):
        nxt = inst.graph.next_node(current, ref, s, t, direction, skip)
        if nxt is None:
            raise TraversalError(f"no admissible hop from {current} on thread walk")
        path.append(nxt)
        if nxt == t or nxt == origin:
            return tuple(path)
        ref, current = current, nxt
    raise TraversalError(f"thread walk did not terminate within {cap} hops")


# ---------------------------------------------------------------------------
# Instance validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, detail: str) -> None:
        self.violations.append(Violation(code, detail))

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def lines(self) -> list[str]:
        return [str(v) for v in self.violations]


def validate_instance(inst: Instance) -> ValidationReport:
    """Check every admissibility rule; an empty report means the instance is usable.

    Reported codes: duplicate-coordinates, disconnected, source-missing,
    target-missing, source-target-equal, source-target-adjacent,
    edge-crossing, node-on-edge, node-on-st-segment, edge-overlaps-st,
    collinear-neighbors, reduced-too-small, reduced-disconnected,
    reduced-cut-vertex, reduced-cut-pair.
    """
    report = ValidationReport()
    g = inst.graph
    s, t = inst.source, inst.target
    name = inst.label

    # Points are exact rationals, so coordinate duplication is the only
    # structural hazard EmbeddedGraph construction does not already reject.
    if len({(p.x, p.y) for p in g.nodes}) != len(g.nodes):
        report.add("duplicate-coordinates", "two nodes share coordinates")

    if s not in g.nodes:
        report.add("source-missing", f"source {s} is not a node")
    if t not in g.nodes:
        report.add("target-missing", f"target {t} is not a node")
    if s == t:
        report.add("source-target-equal", "source and target coincide")
    if report.violations:
        return report

    if not g.is_connected():
        report.add("disconnected", "graph is not connected")
        return report

    key = (s, t) if s < t else (t, s)
    if key in g.edges:
        report.add("source-target-adjacent", "source and target are neighbors")

    edges = sorted(g.edges)
    for (a1, a2), (b1, b2) in itertools.combinations(edges, 2):
        if segments_intersect(a1, a2, b1, b2):
            report.add(
                "edge-crossing",
                f"{name(a1)}-{name(a2)} intersects {name(b1)}-{name(b2)}",
            )
    for n in sorted(g.nodes):
        for a, b in edges:
            if n != a and n != b and point_on_segment(n, a, b):
                report.add("node-on-edge", f"{name(n)} lies on edge {name(a)}-{name(b)}")

    for n in sorted(g.nodes):
        if n not in (s, t) and point_on_segment(n, s, t):
            report.add("node-on-st-segment", f"{name(n)} lies on the s-t segment")
    for a, b in edges:
        if collinear_overlap(a, b, s, t):
            report.add(
                "edge-overlaps-st", f"edge {name(a)}-{name(b)} overlaps the s-t segment"
            )
    for n in sorted(g.nodes):
        for u, v in itertools.combinations(g.neighbors(n), 2):
            if orientation(n, u, v) is Orientation.COLLINEAR:
                # one witness per node is enough
                report.add(
                    "collinear-neighbors",
                    f"{name(u)} and {name(v)} are collinear with {name(n)}",
                )
                break

    if report.violations:
        return report

    reduced = reduced_graph(inst)
    _check_triconnectivity(reduced, report, name)
    return report


def _check_triconnectivity(g: EmbeddedGraph, report: ValidationReport, name) -> None:
    """Brute-force three-connectivity: no vertex pair may disconnect the graph."""
    if len(g.nodes) < 4:
        report.add("reduced-too-small", f"reduced graph has {len(g.nodes)} nodes")
        return
    if not g.is_connected():
        comp = _component_of(g, next(iter(sorted(g.nodes))))
        rest = sorted(g.nodes - comp)
        report.add(
            "reduced-disconnected",
            "reduced graph splits into components, e.g. "
            f"{{{', '.join(name(p) for p in sorted(comp)[:4])}}} vs "
            f"{{{', '.join(name(p) for p in rest[:4])}}}",
        )
        return
    ordered = sorted(g.nodes)
    for i, v in enumerate(ordered):
        if not g._is_connected_idx([i]):
            report.add("reduced-cut-vertex", f"removing {name(v)} disconnects the reduced graph")
            return
    for i, u in enumerate(ordered):
        for j in range(i + 1, len(ordered)):
            if not g._is_connected_idx([i, j]):
                report.add(
                    "reduced-cut-pair",
                    f"removing {{{name(u)}, {name(ordered[j])}}} disconnects the reduced graph",
                )
                return


def _component_of(g: EmbeddedGraph, start: Point) -> set[Point]:
    seen = {start}
    stack = [start]
    while stack:
        for nbr in g.neighbors(stack.pop()):
            if nbr not in seen:
                seen.add(nbr)
                stack.append(nbr)
    return seen
