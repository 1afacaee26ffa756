import pytest
from hypothesis import given, strategies as st

from crossflow.rsdc import BeltLayout, LaneDetector, responsible_rse


class TestLayout:
    def test_defaults_match_belt_geometry(self):
        layout = BeltLayout()
        assert layout.segment_length_m == 150.0
        assert layout.veh_per_segment == 25
        assert layout.rse_count == 3
        assert layout.capacity_veh == 75

    def test_rejects_degenerate_layout(self):
        with pytest.raises(ValueError):
            BeltLayout(veh_per_segment=0)


class TestHandover:
    @pytest.mark.parametrize("queue,rse", [
        (0, 3), (24, 3), (25, 2), (49, 2), (50, 1), (74, 1), (75, 0), (100, 0),
    ])
    def test_thresholds(self, queue, rse):
        assert responsible_rse(queue) == rse

    def test_handback_below_threshold(self):
        assert responsible_rse(25) == 2
        assert responsible_rse(24) == 3

    def test_rejects_negative_queue(self):
        with pytest.raises(ValueError):
            responsible_rse(-1)

    def test_transitions_only_at_segment_multiples(self):
        det = LaneDetector()
        trace = []
        for t in range(80):
            det.on_arrival(float(t))
            trace.append((det.true_queue, det.responsible))
        for t in range(80):
            det.on_departure(80.0 + t)
            trace.append((det.true_queue, det.responsible))
        transitions = [
            (q_prev, q) for (q_prev, r_prev), (q, r) in zip(trace, trace[1:])
            if r != r_prev
        ]
        # up at 25/50/75, back down at the same crossings
        assert transitions == [
            (24, 25), (49, 50), (74, 75), (75, 74), (50, 49), (25, 24),
        ]


class TestBelts:
    def test_first_arrival_starts_wait_timer(self):
        det = LaneDetector()
        det.on_arrival(10.0)
        assert det.arrival_confirmed
        assert det.head_wait_s(25.0) == 15.0

    def test_second_arrival_leaves_timer_alone(self):
        det = LaneDetector()
        det.on_arrival(10.0)
        det.on_arrival(12.0)
        assert det.head_wait_s(20.0) == 10.0

    def test_departure_decrements_and_clears_on_empty(self):
        det = LaneDetector()
        det.on_arrival(0.0, 5)
        det.on_departure(3.0)
        assert det.true_queue == 4
        assert det.arrival_confirmed
        for t in range(4):
            det.on_departure(4.0 + t)
        assert det.true_queue == 0
        assert not det.arrival_confirmed
        assert det.head_wait_s(10.0) == 0.0

    def test_free_flow_pulse_clears_within_step(self):
        det = LaneDetector()
        det.on_arrival(5.0)
        det.on_departure(5.0)
        assert not det.arrival_confirmed
        assert det.true_queue == 0

    def test_underflow_counts_throughput_only(self):
        det = LaneDetector()
        det.on_departure(1.0)
        assert det.true_queue == 0
        assert det.throughput == 1

    def test_conservation_over_burst(self):
        det = LaneDetector()
        det.on_arrival(0.0, 10)
        for t in range(10):
            det.on_departure(1.0 + t)
        assert det.throughput == 10
        assert det.true_queue == 0
        assert det.arrivals == det.throughput + det.true_queue

    def test_detected_queue_saturates_at_coverage(self):
        det = LaneDetector()
        det.on_arrival(0.0, 100)
        assert det.true_queue == 100
        assert det.detected_queue == 75

    def test_empty_lane_snapshot_fields(self):
        det = LaneDetector()
        assert det.detected_queue == 0
        assert not det.arrival_confirmed
        assert det.occupancy_pct() == 0.0
        assert det.head_wait_s(100.0) == 0.0

    def test_occupancy_covers_first_segment_only(self):
        det = LaneDetector()
        det.on_arrival(0.0, 10)
        assert det.occupancy_pct() == pytest.approx(40.0)
        det.on_arrival(1.0, 40)
        assert det.occupancy_pct() == 100.0

    @given(st.lists(st.tuples(st.booleans(), st.integers(1, 7)), max_size=60))
    def test_detected_equals_capped_true_queue_along_any_trace(self, events):
        det = LaneDetector()
        phantom = 0
        for t, (is_arrival, count) in enumerate(events):
            if is_arrival:
                det.on_arrival(float(t), count)
            else:
                phantom += max(count - det.true_queue, 0)
                det.on_departure(float(t), count)
            assert det.detected_queue == min(det.true_queue, 75)
            assert det.arrivals + phantom == det.throughput + det.true_queue
            assert det.responsible == max(3 - det.true_queue // 25, 0)
