"""Instance family generators: double-ring, triangulated-ladder, gabriel-unit-disk.

Generators build candidate instances from a seed and retry with perturbed
geometry until the full validator accepts one; admissibility is checked,
never assumed. Coordinates are formatted through fixed-precision decimal
strings so instances stay exact end to end.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .geometry import Point, point
from .topology import EmbeddedGraph, Instance, ValidationReport, validate_instance

FAMILY_KINDS = ("double-ring", "triangulated-ladder", "gabriel-unit-disk")


class GenerationError(RuntimeError):
    def __init__(self, kind: str, size: int, seed: int, attempts: list[str]):
        self.attempts = attempts
        super().__init__(
            f"could not generate a valid {kind} instance of size {size} "
            f"from seed {seed} in {len(attempts)} attempts: " + "; ".join(attempts)
        )


def _pt(x: float, y: float) -> Point:
    return point(f"{x:.9f}", f"{y:.9f}")


def generate_family(kind: str, size: int, seed: int, retries: int = 30) -> Instance:
    """Build a validated instance of the requested family.

    Retries with perturbed seeds up to `retries` times; raises
    GenerationError with per-attempt validation summaries when exhausted.
    """
    if kind not in FAMILY_KINDS:
        raise ValueError(f"unknown family kind {kind!r}")
    if size < 6:
        raise ValueError(f"family size must be at least 6, got {size}")
    builder = {
        "double-ring": _double_ring,
        "triangulated-ladder": _triangulated_ladder,
        "gabriel-unit-disk": _gabriel_unit_disk,
    }[kind]
    failures: list[str] = []
    for attempt in range(retries):
        rng = random.Random(f"{kind}:{size}:{seed}:{attempt}")
        try:
            inst = builder(size, attempt, rng)
        except _BuildFailed as exc:
            if exc.fatal:
                raise ValueError(str(exc)) from exc
            failures.append(f"attempt {attempt}: {exc}")
            continue
        report = validate_instance(inst)
        if report.ok():
            return inst
        failures.append(f"attempt {attempt}: {_summary(report)}")
    raise GenerationError(kind, size, seed, failures)


class _BuildFailed(Exception):
    def __init__(self, message: str, fatal: bool = False):
        super().__init__(message)
        self.fatal = fatal


def _summary(report: ValidationReport) -> str:
    return ", ".join(sorted(report.codes()))


# ---------------------------------------------------------------------------
# double-ring: an antiprism with the source on the outer ring and the target
# the inner node most opposite it; the s-t segment crosses exactly the top
# inner-ring edge, so the reduced graph is the antiprism minus one edge.
# ---------------------------------------------------------------------------


def _double_ring(size: int, attempt: int, rng: random.Random) -> Instance:
    if size % 2:
        raise _BuildFailed("double-ring needs an even size (two equal rings)")
    n = size // 2
    spin = 0.0 if attempt == 0 else rng.uniform(-0.3, 0.3) * math.pi / n
    r_out, r_in = 10.0, 4.0
    labels: dict[Point, str] = {}
    outer: list[Point] = []
    inner: list[Point] = []
    for k in range(n):
        a = math.pi / 2 + 2 * math.pi * k / n + spin
        p = _pt(r_out * math.cos(a), r_out * math.sin(a))
        outer.append(p)
        labels[p] = f"o{k}"
    for k in range(n):
        a = math.pi / 2 + 2 * math.pi * (k + 0.5) / n + spin
        p = _pt(r_in * math.cos(a), r_in * math.sin(a))
        inner.append(p)
        labels[p] = f"i{k}"
    edges = []
    for k in range(n):
        edges.append((outer[k], outer[(k + 1) % n]))
        edges.append((inner[k], inner[(k + 1) % n]))
        edges.append((inner[k], outer[k]))
        edges.append((inner[k], outer[(k + 1) % n]))
    source = outer[0]
    bottom = math.pi * 3 / 2 + spin
    t_index = min(
        range(n),
        key=lambda k: abs(
            (math.pi / 2 + 2 * math.pi * (k + 0.5) / n - bottom + math.pi)
            % (2 * math.pi)
            - math.pi
        ),
    )
    target = inner[t_index]
    return Instance(EmbeddedGraph(outer + inner, edges), source, target, labels)


# ---------------------------------------------------------------------------
# triangulated-ladder: two jittered node rows with rungs and one diagonal per
# cell, capped by the source on the left and the target on the right (both
# below the rows, so nothing crosses the s-t segment), plus a one- or
# two-node roof over the top row. The roof is what makes the family
# three-connected: without it every interior column is a separating pair.
# ---------------------------------------------------------------------------


def _triangulated_ladder(size: int, attempt: int, rng: random.Random) -> Instance:
    roof = 1 if (size % 2) else 2
    width = (size - 2 - roof) // 2
    if width < 3:
        raise _BuildFailed(
            "triangulated-ladder needs size >= 9 (three columns plus roof)", fatal=True
        )

    def jitter() -> float:
        return rng.uniform(-0.12, 0.12)

    labels: dict[Point, str] = {}
    low: list[Point] = []
    high: list[Point] = []
    for x in range(1, width + 1):
        p = _pt(x + jitter() * 0.5, 1.0 + jitter())
        low.append(p)
        labels[p] = f"b{x - 1}"
        q = _pt(x + jitter() * 0.5, 2.0 + jitter())
        high.append(q)
        labels[q] = f"u{x - 1}"
    source = point(0, 0)
    target = point(width + 1, 0)
    labels[source] = "s"
    labels[target] = "t"
    edges = []
    for i in range(width - 1):
        edges.append((low[i], low[i + 1]))
        edges.append((high[i], high[i + 1]))
        if i < width - 2:
            edges.append((low[i], high[i + 1]))  # cell diagonal
    # the last cell leans the other way; otherwise {low[-2], high[-1]}
    # would separate the target corner
    edges.append((low[-1], high[-2]))
    for i in range(width):
        edges.append((low[i], high[i]))
    edges += [
        (source, low[0]),
        (source, high[0]),
        (source, low[1]),
        (target, low[-1]),
        (target, high[-1]),
        (target, low[-2]),
    ]
    mid = high[width // 2]
    if roof == 1:
        r0 = _pt(1 + (width - 1) / 2 + jitter(), 4.3 + jitter())
        labels[r0] = "r0"
        edges += [(high[0], r0), (r0, mid), (r0, high[-1])]
        roof_nodes = [r0]
    else:
        r0 = _pt(1 + (width - 1) / 3 + jitter(), 4.3 + jitter())
        r1 = _pt(1 + 2 * (width - 1) / 3 + jitter(), 4.3 + jitter())
        labels[r0] = "r0"
        labels[r1] = "r1"
        edges += [(high[0], r0), (r0, r1), (r1, high[-1]), (r0, mid), (r1, mid)]
        roof_nodes = [r0, r1]
    nodes = [source, target] + low + high + roof_nodes
    return Instance(EmbeddedGraph(nodes, edges), source, target, labels)


# ---------------------------------------------------------------------------
# gabriel-unit-disk: a jittered triangular lattice clipped to a disk, unit-disk
# edges, Gabriel pruning. Near-equilateral triangles keep almost every lattice
# edge through the Gabriel filter, which is what makes the family reliably
# three-connected. The source/target pair is drawn from interior nodes: a
# boundary-to-boundary segment would sever the reduced graph at its endpoints,
# while interior endpoints leave wrap-around routes behind both.
# ---------------------------------------------------------------------------


def _hex_ring(j: int) -> list[tuple[int, int]]:
    """Axial coordinates of lattice ring j, walked in order; corners at multiples of j."""
    if j == 0:
        return [(0, 0)]
    out = []
    q, r = j, 0
    for dq, dr in ((-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0), (0, 1)):
        for _ in range(j):
            out.append((q, r))
            q, r = q + dq, r + dr
    return out


def _hex_patch(size: int) -> list[tuple[int, int]]:
    """A bump-free triangular-lattice disk: full rings plus one contiguous arc.

    Every chosen lattice point keeps at least three chosen lattice
    neighbors, which is what the Gabriel graph needs to stay
    three-connected. Arc endpoints avoid ring corners (a corner has a
    single inner neighbor); a one-point remainder is traded for a
    two-point arc by dropping one mid-side point of the outermost ring.
    """
    rings = 0
    while 3 * (rings + 1) * rings + 1 <= size:  # hexagon with rings 0..rings-1... see below
        rings += 1
    rings -= 1  # rings 0..rings are full: 3*rings*(rings+1)+1 points
    full = 3 * rings * (rings + 1) + 1
    if rings < 2:
        raise _BuildFailed("gabriel-unit-disk needs size >= 19", fatal=True)
    chosen = [pos for j in range(rings + 1) for pos in _hex_ring(j)]
    leftover = size - full
    if leftover == 1:
        # trade for a two-point arc: drop a mid-side outer-ring point on the
        # side opposite the arc so no arc point loses an inner neighbor
        outer = _hex_ring(rings)
        chosen.remove(outer[3 * rings + 1])
        leftover = 2
    if leftover:
        ring = _hex_ring(rings + 1)
        span = len(ring)
        start = 1
        while start % (rings + 1) == 0 or (start + leftover - 1) % (rings + 1) == 0:
            start += 1
        chosen += [ring[(start + i) % span] for i in range(leftover)]
    return chosen


def _gabriel_unit_disk(size: int, attempt: int, rng: random.Random) -> Instance:
    chosen = _hex_patch(size)
    pts: list[Point] = []
    for q, r in chosen:
        x = q + r / 2
        y = r * math.sqrt(3) / 2
        pts.append(_pt(x + rng.uniform(-0.12, 0.12), y + rng.uniform(-0.12, 0.12)))
    if len(set(pts)) != len(pts):
        raise _BuildFailed("duplicate points after jitter")

    r2 = Fraction("1.3") ** 2  # unit-disk radius in lattice units, squared

    def d2(a: Point, b: Point):
        return (a.x - b.x) ** 2 + (a.y - b.y) ** 2

    edges = []
    for i, a in enumerate(pts):
        for b in pts[i + 1 :]:
            dab = d2(a, b)
            if dab > r2:
                continue
            # Gabriel rule: keep only if no third point sits in the closed
            # disk whose diameter is a-b
            if all(w in (a, b) or d2(a, w) + d2(b, w) > dab for w in pts):
                edges.append((a, b))

    graph = EmbeddedGraph(pts, edges)
    if not graph.is_connected():
        raise _BuildFailed("gabriel graph disconnected")
    labels = {p: f"p{i}" for i, p in enumerate(pts)}

    patch_r2 = max(p.x * p.x + p.y * p.y for p in pts)
    interior = [p for p in pts if (p.x * p.x + p.y * p.y) * 3 < patch_r2]
    if len(interior) < 2:
        raise _BuildFailed("patch too small for interior endpoints")
    adj = {(a, b) if a < b else (b, a) for a, b in graph.edges}
    pairs = sorted(
        ((a, b) for i, a in enumerate(interior) for b in interior[i + 1 :]),
        key=lambda ab: d2(*ab),
        reverse=True,
    )
    tried = 0
    for a, b in pairs:
        if ((a, b) if a < b else (b, a)) in adj:
            continue
        inst = Instance(graph, a, b, labels)
        if validate_instance(inst).ok():
            return inst
        tried += 1
        if tried >= 8:
            break
    raise _BuildFailed("no admissible source/target pair found")
