"""File formats: instances, scenarios, sweep specs, traces, outcome documents.

Everything is JSON. Coordinates travel as decimal strings and are parsed
exactly; serialization emits a terminating decimal when one exists and a
"p/q" rational otherwise, so files round-trip without loss. Unknown keys
are rejected everywhere: a typo in a spec must fail loudly, not silently
default.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from pathlib import Path

from .geometry import Point, point
from .simulator import FaultSpec, Scenario, ScheduleSpec, RunOutcome, message_hash
from .topology import EmbeddedGraph, Instance


class SpecError(ValueError):
    """Malformed input document (parse/usage errors, CLI exit code 2)."""


def _require_keys(obj: dict, allowed: set[str], required: set[str], what: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SpecError(f"{what}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SpecError(f"{what}: missing keys {sorted(missing)}")


def frac_str(value: Fraction) -> str:
    """Exact textual form: terminating decimal when possible, else p/q."""
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(value.numerator)
    scaled = value.numerator * 10**digits // value.denominator
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


def instance_to_dict(inst: Instance) -> dict:
    ordered = sorted(inst.graph.nodes, key=lambda p: inst.label(p))
    return {
        "nodes": [[inst.label(p), frac_str(p.x), frac_str(p.y)] for p in ordered],
        "edges": sorted(
            [sorted((inst.label(a), inst.label(b))) for a, b in inst.graph.edges]
        ),
        "source": inst.label(inst.source),
        "target": inst.label(inst.target),
    }


def instance_from_dict(doc: dict) -> Instance:
    _require_keys(
        dict(doc), {"nodes", "edges", "source", "target"}, {"nodes", "edges", "source", "target"}, "instance"
    )
    by_id: dict[str, Point] = {}
    labels: dict[Point, str] = {}
    for row in doc["nodes"]:
        if len(row) != 3:
            raise SpecError(f"instance: node row {row!r} is not [id, x, y]")
        node_id, x, y = row
        node_id = str(node_id)
        if node_id in by_id:
            raise SpecError(f"instance: duplicate node id {node_id!r}")
        try:
            p = point(_coerce_coord(x), _coerce_coord(y))
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SpecError(f"instance: bad coordinate in {row!r}: {exc}") from exc
        by_id[node_id] = p
        labels[p] = node_id
    edges = []
    for pair in doc["edges"]:
        if len(pair) != 2:
            raise SpecError(f"instance: edge {pair!r} is not [id, id]")
        a, b = str(pair[0]), str(pair[1])
        for node_id in (a, b):
            if node_id not in by_id:
                raise SpecError(f"instance: edge references unknown node {node_id!r}")
        edges.append((by_id[a], by_id[b]))
    for key in ("source", "target"):
        if str(doc[key]) not in by_id:
            raise SpecError(f"instance: {key} {doc[key]!r} is not a node id")
    try:
        graph = EmbeddedGraph(by_id.values(), edges)
    except ValueError as exc:
        raise SpecError(f"instance: {exc}") from exc
    return Instance(graph, by_id[str(doc["source"])], by_id[str(doc["target"])], labels)


def _coerce_coord(value):
    # ints are exact; anything else must come in as a string
    if isinstance(value, bool):
        raise SpecError(f"bad coordinate {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return value
    raise SpecError(f"coordinate {value!r} must be an int or a decimal string")


def load_instance(path: str | os.PathLike) -> Instance:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"{path}: {exc}") from exc
    return instance_from_dict(doc)


def save_instance(inst: Instance, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=1) + "\n")


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


def scenario_from_dict(doc: dict, base_dir: Path | None = None) -> Scenario:
    _require_keys(
        dict(doc),
        {"instance", "message", "fault", "schedule", "step_cap"},
        {"instance", "message"},
        "scenario",
    )
    inst_spec = doc["instance"]
    if not isinstance(inst_spec, dict):
        raise SpecError("scenario: instance must be an object")
    _require_keys(inst_spec, {"path", "inline", "generator"}, set(), "scenario.instance")
    if sum(k in inst_spec for k in ("path", "inline", "generator")) != 1:
        raise SpecError("scenario.instance: exactly one of path/inline/generator")
    if "path" in inst_spec:
        path = Path(inst_spec["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        instance = load_instance(path)
    elif "inline" in inst_spec:
        instance = instance_from_dict(inst_spec["inline"])
    else:
        gen = dict(inst_spec["generator"])
        _require_keys(gen, {"kind", "size", "seed"}, {"kind", "size"}, "scenario.instance.generator")
        from .generators import GenerationError, generate_family

        try:
            instance = generate_family(gen["kind"], int(gen["size"]), int(gen.get("seed", 1)))
        except (GenerationError, ValueError) as exc:
            raise SpecError(f"scenario.instance.generator: {exc}") from exc

    message = _parse_message(doc["message"])

    fault = None
    if doc.get("fault") is not None:
        fspec = dict(doc["fault"])
        _require_keys(fspec, {"node", "strategy", "seed", "budget"}, {"node", "strategy"}, "scenario.fault")
        by_label = {instance.label(p): p for p in instance.graph.nodes}
        node_id = str(fspec["node"])
        if node_id not in by_label:
            raise SpecError(f"scenario.fault: unknown node {node_id!r}")
        fault = FaultSpec(
            node=by_label[node_id],
            strategy=str(fspec["strategy"]),
            seed=int(fspec.get("seed", 0)),
            budget=None if fspec.get("budget") is None else int(fspec["budget"]),
        )

    schedule = ScheduleSpec()
    if doc.get("schedule") is not None:
        sspec = dict(doc["schedule"])
        _require_keys(sspec, {"policy", "seed", "heuristic"}, set(), "scenario.schedule")
        schedule = ScheduleSpec(
            policy=str(sspec.get("policy", "seeded-random")),
            seed=int(sspec.get("seed", 0)),
            heuristic=str(sspec.get("heuristic", "starve-opposite")),
        )

    step_cap = doc.get("step_cap")
    return Scenario(
        instance=instance,
        message=message,
        fault=fault,
        schedule=schedule,
        step_cap=None if step_cap is None else int(step_cap),
    )


def _parse_message(spec) -> bytes:
    if not isinstance(spec, dict):
        raise SpecError("scenario.message must be an object with 'text' or 'hex'")
    _require_keys(spec, {"text", "hex"}, set(), "scenario.message")
    if ("text" in spec) == ("hex" in spec):
        raise SpecError("scenario.message: exactly one of text/hex")
    if "text" in spec:
        return str(spec["text"]).encode()
    try:
        return bytes.fromhex(str(spec["hex"]))
    except ValueError as exc:
        raise SpecError(f"scenario.message.hex: {exc}") from exc


def scenario_to_dict(sc: Scenario) -> dict:
    """Self-contained form (instance inlined) used in trace headers."""
    doc: dict = {
        "instance": {"inline": instance_to_dict(sc.instance)},
        "message": {"hex": sc.message.hex()},
        "fault": None,
        "schedule": {
            "policy": sc.schedule.policy,
            "seed": sc.schedule.seed,
            "heuristic": sc.schedule.heuristic,
        },
        "step_cap": sc.step_cap,
    }
    if sc.fault is not None:
        doc["fault"] = {
            "node": sc.instance.label(sc.fault.node),
            "strategy": sc.fault.strategy,
            "seed": sc.fault.seed,
            "budget": sc.fault.budget,
        }
    return doc


def load_scenario(path: str | os.PathLike) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"{path}: {exc}") from exc
    return scenario_from_dict(doc, base_dir=Path(path).resolve().parent)


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

_TRACE_HEADER = "#scenario "


def write_trace(sc: Scenario, outcome: RunOutcome, path: str | os.PathLike) -> None:
    if outcome.trace is None:
        raise ValueError("run was executed without trace collection")
    header = _TRACE_HEADER + json.dumps(
        scenario_to_dict(sc), sort_keys=True, separators=(",", ":")
    )
    Path(path).write_text("\n".join([header, *outcome.trace]) + "\n")


def read_trace(path: str | os.PathLike) -> tuple[Scenario, list[str]]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise SpecError(f"{path}: {exc}") from exc
    if not lines or not lines[0].startswith(_TRACE_HEADER):
        raise SpecError(f"{path}: missing trace header")
    try:
        doc = json.loads(lines[0][len(_TRACE_HEADER) :])
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: bad trace header: {exc}") from exc
    sc = scenario_from_dict(doc)
    return sc, [line for line in lines[1:] if line]


# ---------------------------------------------------------------------------
# Outcome documents
# ---------------------------------------------------------------------------


def outcome_to_dict(sc: Scenario, outcome: RunOutcome) -> dict:
    # field order is part of the document contract
    return {
        "delivered": outcome.delivered is not None,
        "delivered_step": None if outcome.delivered is None else outcome.delivered[1],
        "message_hash": None
        if outcome.delivered is None
        else message_hash(outcome.delivered[0]),
        "sent_message_hash": message_hash(sc.message),
        "quiesced": outcome.quiesced,
        "steps": outcome.steps,
        "violations": [str(v) for v in outcome.violations],
        "counts": {
            "sends_core": outcome.counts.sends_core,
            "sends_thread": outcome.counts.sends_thread,
            "recvs": outcome.counts.recvs,
            "drops": outcome.counts.drops,
            "deliveries": outcome.counts.deliveries,
            "max_visited": outcome.counts.max_visited,
        },
        "trace_hash": outcome.trace_hash,
    }


# ---------------------------------------------------------------------------
# Sweep specs
# ---------------------------------------------------------------------------


def sweep_spec_from_dict(doc: dict):
    from .simulator import SweepSpec

    _require_keys(
        dict(doc),
        {"family", "sizes", "strategies", "seeds_per_cell", "family_seed", "message", "fault_policy"},
        {"family", "sizes", "strategies"},
        "sweep",
    )
    sizes = tuple(int(s) for s in doc["sizes"])
    if not sizes:
        raise SpecError("sweep: sizes must be non-empty")
    strategies = tuple(str(s) for s in doc["strategies"])
    if not strategies:
        raise SpecError("sweep: strategies must be non-empty")
    message = b"sweep-payload"
    if "message" in doc:
        message = _parse_message(doc["message"])
    fault_policy = str(doc.get("fault_policy", "first-green"))
    if fault_policy not in ("first-green", "all-green"):
        raise SpecError(f"sweep: unknown fault_policy {fault_policy!r}")
    return SweepSpec(
        family=str(doc["family"]),
        sizes=sizes,
        strategies=strategies,
        seeds_per_cell=int(doc.get("seeds_per_cell", 5)),
        family_seed=int(doc.get("family_seed", 1)),
        message=message,
        fault_policy=fault_policy,
    )


def load_sweep_spec(path: str | os.PathLike):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"{path}: {exc}") from exc
    return sweep_spec_from_dict(doc)
