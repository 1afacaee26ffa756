"""DT3P decision kernel: lane loads, next-green graph selection, phase timing.

The three stages mirror the controller's internal pipeline: every lane is
condensed to a single load value, the conflict graph yields the candidate
next-green pairs reachable from the current pair, and the winning pair is
granted a share of the full cycle proportional to its queues against the
competing (conflicting, non-green) queues.
"""

from dataclasses import dataclass

from .intersection import (
    CONFLICTS,
    DETECTION_CAPACITY,
    LANE_OF,
    Movement,
    PhasePlan,
    conflicts_with,
    pair_key,
)

DEFAULT_FULL_CYCLE_S = 120.0
DEFAULT_MIN_GREEN_S = 5.0


class InvalidCurrentGreens(ValueError):
    """The supposed currently-green pair is not a compatible pair."""


@dataclass(frozen=True)
class LoadWeights:
    """Convex combination weights for the five load factors."""

    occupancy: float = 0.40
    wait: float = 0.30
    priority: float = 0.20
    back_road: float = 0.05
    next_road: float = 0.05
    wait_norm_s: float = 300.0

    def __post_init__(self):
        parts = (self.occupancy, self.wait, self.priority, self.back_road, self.next_road)
        if any(w < 0 for w in parts):
            raise ValueError("load weights must be nonnegative")
        if abs(sum(parts) - 1.0) > 1e-9:
            raise ValueError(f"load weights must sum to 1, got {sum(parts)}")
        if not self.wait_norm_s > 0:
            raise ValueError("wait_norm_s must be positive")


DEFAULT_WEIGHTS = LoadWeights()


def compute_lane_load(lane, weights: LoadWeights = DEFAULT_WEIGHTS) -> float:
    """Load of one lane in [0, 1]; zero unless a first arrival is confirmed."""
    if not lane.arrival_confirmed:
        return 0.0
    occ = lane.occupancy_pct / 100.0
    wait = min(lane.head_wait_s / weights.wait_norm_s, 1.0)
    pri = lane.priority * lane.on_duty
    back = min(lane.back_road_queue / DETECTION_CAPACITY, 1.0)
    nxt = (100.0 - lane.next_road_occupancy_pct) / 100.0
    return (
        weights.occupancy * occ
        + weights.wait * wait
        + weights.priority * pri
        + weights.back_road * back
        + weights.next_road * nxt
    )


def candidate_pairs(g1: Movement, g2: Movement) -> list:
    """Next-phase pair candidates reachable from the current green pair.

    Full-mesh pairs between the two conflict lists, with self-pairs,
    conflicting pairs and duplicates eliminated. Sorted by lane index for
    deterministic iteration.
    """
    if conflicts_with(g1, g2):
        raise InvalidCurrentGreens(f"{{{g1.value},{g2.value}}} is not a compatible pair")
    seen = set()
    for x in CONFLICTS[g1]:
        for y in CONFLICTS[g2]:
            if x is y:
                continue
            if conflicts_with(x, y):
                continue
            seen.add(frozenset((x, y)))
    return sorted(seen, key=pair_key)


def select_next_greens(loads: dict, g1: Movement, g2: Movement) -> frozenset:
    """Candidate pair maximizing the summed node loads.

    Ties break toward the smallest (lane, lane) pair so selection is
    deterministic.
    """
    candidates = candidate_pairs(g1, g2)
    return max(candidates, key=lambda p: (sum(loads.get(m, 0.0) for m in p), [-k for k in pair_key(p)]))


def confirmed_queues(v_c: dict, c_fva: dict) -> dict:
    """Queue counts gated by the first-arrival flag (elementwise product)."""
    return {m: v_c.get(m, 0) * (1 if c_fva.get(m, 0) else 0) for m in v_c}


def compute_phase_time(
    v_c: dict,
    c_fva: dict,
    g_c,
    g_n,
    full_cycle_s: float = DEFAULT_FULL_CYCLE_S,
    min_green_s: float = DEFAULT_MIN_GREEN_S,
) -> float:
    """Green duration for the next pair as a ration of the full cycle.

    Each next-green movement competes against the confirmed queues on its
    conflicting, not-currently-green neighbours; its time share is its own
    queue over that sum (share 1 when there is no competing demand). The two
    shares are averaged and clamped to [min_green_s, full_cycle_s].
    """
    confirmed = confirmed_queues(v_c, c_fva)
    g_c = frozenset(g_c)
    times = []
    for n in g_n:
        competing = sum(
            confirmed.get(m, 0) for m in CONFLICTS[n] if m not in g_c
        )
        ratio = 1.0 if competing == 0 else v_c.get(n, 0) / competing
        times.append(ratio * full_cycle_s)
    avg = sum(times) / len(times)
    return min(max(avg, min_green_s), full_cycle_s)


def dt3p_decide(
    snapshot,
    current: PhasePlan,
    weights: LoadWeights = DEFAULT_WEIGHTS,
    full_cycle_s: float = DEFAULT_FULL_CYCLE_S,
    min_green_s: float = DEFAULT_MIN_GREEN_S,
) -> PhasePlan:
    """Full pipeline: loads -> next green pair -> phase time.

    snapshot is a 12-entry sequence of LaneState indexed by lane-1; only the
    signalized lanes participate.
    """
    lane_state = {m: snapshot[LANE_OF[m] - 1] for m in Movement}
    loads = {m: compute_lane_load(s, weights) for m, s in lane_state.items()}
    g1, g2 = current.greens
    nxt = select_next_greens(loads, g1, g2)
    v_c = {m: s.detected_queue_veh for m, s in lane_state.items()}
    fva = {m: s.arrival_confirmed for m, s in lane_state.items()}
    duration = compute_phase_time(v_c, fva, current.greens, nxt, full_cycle_s, min_green_s)
    return PhasePlan(greens=nxt, duration_s=duration)


class DT3PController:
    """Adaptive controller: replans whenever the granted phase time elapses."""

    name = "dt3p"

    def __init__(
        self,
        weights: LoadWeights = DEFAULT_WEIGHTS,
        full_cycle_s: float = DEFAULT_FULL_CYCLE_S,
        min_green_s: float = DEFAULT_MIN_GREEN_S,
        initial_greens=(Movement.A, Movement.B),
    ):
        self.weights = weights
        self.full_cycle_s = full_cycle_s
        self.min_green_s = min_green_s
        self._initial = frozenset(initial_greens)

    def reset(self) -> PhasePlan:
        return PhasePlan(greens=self._initial, duration_s=self.full_cycle_s)

    def should_switch(self, phase_elapsed_s, plan, gap_s):
        return phase_elapsed_s >= plan.duration_s

    def next_plan(self, snapshot, current: PhasePlan) -> PhasePlan:
        return dt3p_decide(
            snapshot, current, self.weights, self.full_cycle_s, self.min_green_s
        )
