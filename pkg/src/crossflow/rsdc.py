"""Road Status Data Collector: sensor belts, arrival/departure detection and
queue-measurement responsibility handover between the roadside units.

Each approach lane carries three 150 m queue-detection belts (25 vehicles
each) plus an arrival belt just before the stop line and a departure belt
just after it. Detection is event-driven and lossless, so the reported queue
always equals min(true queue, belt coverage).
"""

from dataclasses import dataclass

from .intersection import RSE_COUNT, VEH_PER_SEGMENT


@dataclass(frozen=True)
class BeltLayout:
    segment_length_m: float = 150.0
    veh_per_segment: int = VEH_PER_SEGMENT
    rse_count: int = RSE_COUNT
    stopline_gap_m: float = 8.0  # arrival belt to departure belt; cosmetic

    def __post_init__(self):
        if self.veh_per_segment < 1 or self.rse_count < 1:
            raise ValueError("belt layout needs positive segment sizes")

    @property
    def capacity_veh(self) -> int:
        return self.veh_per_segment * self.rse_count


def responsible_rse(true_queue: int, layout: BeltLayout = BeltLayout()) -> int:
    """Index of the RSE holding queue-detection duty for this queue length.

    Duty starts at the RSE nearest the stop line (index rse_count) and moves
    one unit upstream each time the queue fills another segment; 0 means the
    queue has spilled past every belt (detection saturated).
    """
    if true_queue < 0:
        raise ValueError("negative queue")
    return max(layout.rse_count - true_queue // layout.veh_per_segment, 0)


class LaneDetector:
    """Belt-event bookkeeping for one signalized lane."""

    def __init__(self, layout: BeltLayout = BeltLayout()):
        self.layout = layout
        self.arrivals = 0
        self.throughput = 0
        self._queue = 0
        self.arrival_confirmed = False
        self.queue_since_t = 0.0

    @property
    def true_queue(self) -> int:
        return self._queue

    @property
    def detected_queue(self) -> int:
        return min(self.true_queue, self.layout.capacity_veh)

    @property
    def responsible(self) -> int:
        return responsible_rse(self.true_queue, self.layout)

    def on_arrival(self, t: float, count: int = 1):
        """Arrival-belt crossings; starts the head-wait timer on an empty lane."""
        if count <= 0:
            return
        if self._queue == 0:
            self.queue_since_t = t
        self.arrivals += count
        self._queue += count
        self.arrival_confirmed = True

    def on_departure(self, t: float, count: int = 1):
        """Departure-belt crossings; clears the flag when the lane empties.

        A crossing with no detected queue still counts toward throughput but
        never drives the queue negative.
        """
        if count <= 0:
            return
        self.throughput += count
        self._queue -= min(count, self._queue)
        if self._queue == 0:
            self.arrival_confirmed = False
            self.queue_since_t = 0.0

    def head_wait_s(self, t: float) -> float:
        return t - self.queue_since_t if self.arrival_confirmed else 0.0

    def occupancy_pct(self) -> float:
        """Fill percentage of the first 150 m queuing segment."""
        q = min(self.true_queue, self.layout.veh_per_segment)
        return 100.0 * q / self.layout.veh_per_segment
