"""Static topology of the four-leg intersection: movements, conflicts, phases.

Eight signalized movements (A..H) sit on lane indices 1,2,4,5,7,8,10,11.
Lanes 3, 6, 9 and 12 exist physically (slip turns) but are uncontrolled and
carry no weight in any control decision.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import combinations


class Movement(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    G = "G"
    H = "H"

    def __repr__(self):
        return f"Movement.{self.value}"


# Bijection movement letter <-> lane index.
LANE_OF = {
    Movement.A: 1,
    Movement.B: 2,
    Movement.C: 4,
    Movement.D: 5,
    Movement.E: 7,
    Movement.F: 8,
    Movement.G: 10,
    Movement.H: 11,
}
MOVEMENT_OF_LANE = {lane: m for m, lane in LANE_OF.items()}

SIGNALIZED_LANES = tuple(sorted(LANE_OF.values()))
SLIP_LANES = (3, 6, 9, 12)
N_LANES = 12

# Fixed conflict lists of the 8-node intersection graph; every movement
# crosses exactly 4 others and is compatible with the remaining 3.
CONFLICTS = {
    Movement.A: frozenset({Movement.C, Movement.F, Movement.G, Movement.H}),
    Movement.B: frozenset({Movement.C, Movement.D, Movement.E, Movement.H}),
    Movement.C: frozenset({Movement.A, Movement.B, Movement.E, Movement.H}),
    Movement.D: frozenset({Movement.B, Movement.E, Movement.F, Movement.G}),
    Movement.E: frozenset({Movement.B, Movement.C, Movement.D, Movement.G}),
    Movement.F: frozenset({Movement.A, Movement.D, Movement.G, Movement.H}),
    Movement.G: frozenset({Movement.A, Movement.D, Movement.E, Movement.F}),
    Movement.H: frozenset({Movement.A, Movement.B, Movement.C, Movement.F}),
}

# Sensor-belt geometry shared by detection and load bounds: three 150 m
# queue-detection segments of 25 vehicles each.
VEH_PER_SEGMENT = 25
RSE_COUNT = 3
DETECTION_CAPACITY = VEH_PER_SEGMENT * RSE_COUNT


def conflicts_with(a: Movement, b: Movement) -> bool:
    """True iff movements a and b cross paths and cannot share a green."""
    return b in CONFLICTS[a]


def is_compatible_pair(a: Movement, b: Movement) -> bool:
    return a is not b and b not in CONFLICTS[a]


def compatible_pairs() -> set[frozenset]:
    """All unordered pairs of movements that may be green together."""
    return {
        frozenset(pair)
        for pair in combinations(Movement, 2)
        if is_compatible_pair(*pair)
    }


def pair_key(pair) -> tuple[int, int]:
    """Sortable (lane, lane) key for an unordered movement pair."""
    return tuple(sorted(LANE_OF[m] for m in pair))


class InvalidPhaseError(ValueError):
    """Raised for a phase whose movements conflict or whose duration is bad."""


@dataclass(frozen=True)
class PhasePlan:
    """An unordered pair of compatible movements plus a green duration."""

    greens: frozenset
    duration_s: float

    def __post_init__(self):
        greens = frozenset(self.greens)
        object.__setattr__(self, "greens", greens)
        if len(greens) != 2:
            raise InvalidPhaseError(f"phase needs exactly 2 movements, got {set(greens)}")
        a, b = greens
        if conflicts_with(a, b):
            raise InvalidPhaseError(f"conflicting green pair {{{a.value},{b.value}}}")
        if not self.duration_s > 0:
            raise InvalidPhaseError(f"non-positive phase duration {self.duration_s}")


@dataclass
class LaneState:
    """Per-lane view handed to a controller.

    true_queue_veh is simulator ground truth; detected_queue_veh is the
    belt-reported value, capped at DETECTION_CAPACITY.
    """

    true_queue_veh: int = 0
    detected_queue_veh: int = 0
    head_wait_s: float = 0.0
    arrival_confirmed: int = 0
    occupancy_pct: float = 0.0
    priority: float = 0.0
    on_duty: int = 0
    back_road_queue: int = 0
    next_road_occupancy_pct: float = 0.0

    def __post_init__(self):
        if self.detected_queue_veh > self.true_queue_veh:
            raise ValueError("detected queue cannot exceed true queue")
        if self.detected_queue_veh > DETECTION_CAPACITY:
            raise ValueError("detected queue exceeds belt coverage")
        if self.arrival_confirmed and self.true_queue_veh < 1:
            raise ValueError("arrival confirmed on an empty lane")
