"""Benchmark controllers: fixed-time (BM1) and fully-actuated (BM2)."""

import enum
from dataclasses import dataclass

from .intersection import LANE_OF, Movement, PhasePlan, conflicts_with

# Canonical four-phase rotation partitioning the eight movements.
DEFAULT_SEQUENCE = (
    frozenset((Movement.A, Movement.B)),
    frozenset((Movement.C, Movement.D)),
    frozenset((Movement.E, Movement.F)),
    frozenset((Movement.G, Movement.H)),
)


@dataclass(frozen=True)
class FixedTimePlan:
    """A cyclic sequence of compatible pairs with per-phase durations."""

    sequence: tuple = DEFAULT_SEQUENCE
    durations_s: tuple = (30.0, 30.0, 30.0, 30.0)

    def __post_init__(self):
        if len(self.sequence) != len(self.durations_s):
            raise ValueError("sequence and durations must have equal length")
        for pair in self.sequence:
            a, b = pair
            if conflicts_with(a, b):
                raise ValueError(f"conflicting pair in fixed plan: {set(pair)}")
        if any(not d > 0 for d in self.durations_s):
            raise ValueError("phase durations must be positive")

    @property
    def cycle_s(self) -> float:
        return sum(self.durations_s)


def fixed_next(current_phase_index: int, plan: FixedTimePlan = FixedTimePlan()) -> PhasePlan:
    """Next phase in cyclic order after the given index."""
    n = len(plan.sequence)
    i = (current_phase_index + 1) % n
    return PhasePlan(greens=plan.sequence[i], duration_s=plan.durations_s[i])


@dataclass(frozen=True)
class ActuatedParams:
    min_green_s: float = 10.0
    extension_s: float = 3.0
    max_green_s: float = 60.0

    def __post_init__(self):
        if not 0 < self.min_green_s <= self.max_green_s:
            raise ValueError("need 0 < min_green_s <= max_green_s")
        if not self.extension_s > 0:
            raise ValueError("extension_s must be positive")


class Decision(enum.Enum):
    CONTINUE = "continue"
    TERMINATE = "terminate"


def actuated_step(
    phase_elapsed_s: float,
    time_since_last_actuation_s: float,
    params: ActuatedParams = ActuatedParams(),
) -> Decision:
    """Gap-out / max-out termination rule for an actuated green."""
    if phase_elapsed_s >= params.max_green_s:
        return Decision.TERMINATE
    if phase_elapsed_s >= params.min_green_s and time_since_last_actuation_s > params.extension_s:
        return Decision.TERMINATE
    return Decision.CONTINUE


class FixedTimeController:
    """BM1: pre-timed rotation, blind to demand."""

    name = "bm1"

    def __init__(self, plan: FixedTimePlan = FixedTimePlan()):
        self.plan = plan
        self._index = 0

    def reset(self) -> PhasePlan:
        self._index = 0
        return PhasePlan(self.plan.sequence[0], self.plan.durations_s[0])

    def should_switch(self, phase_elapsed_s, plan, gap_s):
        return phase_elapsed_s >= plan.duration_s

    def next_plan(self, snapshot, current) -> PhasePlan:
        nxt = fixed_next(self._index, self.plan)
        self._index = (self._index + 1) % len(self.plan.sequence)
        return nxt


class ActuatedController:
    """BM2: BM1's rotation with gap-out/max-out and empty-phase skipping."""

    name = "bm2"

    def __init__(
        self,
        params: ActuatedParams = ActuatedParams(),
        sequence: tuple = DEFAULT_SEQUENCE,
    ):
        self.params = params
        self.sequence = sequence
        self._index = 0

    def reset(self) -> PhasePlan:
        self._index = 0
        return PhasePlan(self.sequence[0], self.params.max_green_s)

    def should_switch(self, phase_elapsed_s, plan, gap_s):
        return actuated_step(phase_elapsed_s, gap_s, self.params) is Decision.TERMINATE

    def next_plan(self, snapshot, current) -> PhasePlan:
        n = len(self.sequence)
        # Skip phases with no confirmed demand on either movement; fall back
        # to plain cyclic order when the whole intersection is empty.
        for offset in range(1, n + 1):
            i = (self._index + offset) % n
            pair = self.sequence[i]
            if any(snapshot[LANE_OF[m] - 1].arrival_confirmed for m in pair):
                self._index = i
                return PhasePlan(pair, self.params.max_green_s)
        self._index = (self._index + 1) % n
        return PhasePlan(self.sequence[self._index], self.params.max_green_s)
