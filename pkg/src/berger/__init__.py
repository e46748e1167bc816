"""Byzantine-robust geometric routing on planar embedded graphs.

Implements the BeRGeR protocol: a source sends two cores around the face
containing the source-target segment plus a braid of threads, and the
target delivers only what a single Byzantine node cannot have forged.
Ships with exact geometric predicates, an instance validator, a
deterministic adversarial network simulator, and a CLI.
"""

from .geometry import Direction, Orientation, Point, point
from .topology import (
    EmbeddedGraph,
    Instance,
    ValidationReport,
    validate_instance,
)
from .protocol import Packet, SendAction
from .simulator import FaultSpec, RunOutcome, Scenario, ScheduleSpec, run

__version__ = "0.1.0"

__all__ = [
    "Direction",
    "EmbeddedGraph",
    "FaultSpec",
    "Instance",
    "Orientation",
    "Packet",
    "Point",
    "RunOutcome",
    "Scenario",
    "ScheduleSpec",
    "SendAction",
    "ValidationReport",
    "point",
    "run",
    "validate_instance",
    "__version__",
]
