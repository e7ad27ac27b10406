import numpy as np
import pytest

from beamsim.analytic import EAST, WEST
from beamsim.mobility import (
    TrafficConfig,
    Vehicle,
    has_left_segment,
    spawn_population,
    step,
    wrap,
)
from beamsim.scenario import build_highway

CFG = TrafficConfig(vehicle_count=6, highway=build_highway())


class TestSpawn:
    def test_even_directional_split(self):
        rng = np.random.default_rng(1)
        fleet = spawn_population(CFG, rng)
        east = [v for v in fleet if v.heading == EAST]
        west = [v for v in fleet if v.heading == WEST]
        assert len(east) == 3 and len(west) == 3

    def test_deterministic_under_seed(self):
        a = spawn_population(CFG, np.random.default_rng(42))
        b = spawn_population(CFG, np.random.default_rng(42))
        assert a == b

    def test_speeds_within_converted_bounds(self):
        rng = np.random.default_rng(2)
        lo, hi = 80 / 3.6, 110 / 3.6
        for _ in range(100):
            cfg = TrafficConfig(vehicle_count=100, highway=build_highway())
            for v in spawn_population(cfg, rng):
                assert lo <= v.speed <= hi
        assert lo == pytest.approx(22.22, abs=0.005)
        assert hi == pytest.approx(30.56, abs=0.005)

    def test_rejects_odd_count(self):
        with pytest.raises(ValueError):
            TrafficConfig(vehicle_count=7, highway=build_highway())

    def test_positions_jittered_along_segment(self):
        rng = np.random.default_rng(3)
        cfg = TrafficConfig(vehicle_count=200, highway=build_highway())
        xs = [v.x for v in spawn_population(cfg, rng)]
        assert min(xs) < 100 and max(xs) > 400

    def test_heading_matches_lane(self):
        rng = np.random.default_rng(4)
        hw = build_highway()
        for v in spawn_population(CFG, rng):
            assert v.heading == hw.lanes[v.lane_index].heading


class TestStep:
    def test_eastbound_delta(self):
        v = Vehicle(0, 100.0, 2, 25.0, EAST, 0.0)
        assert step(v, 0.1).x == pytest.approx(102.5)

    def test_westbound_delta(self):
        v = Vehicle(0, 100.0, 0, 25.0, WEST, 0.0)
        assert step(v, 0.1).x == pytest.approx(97.5)

    def test_linear_trajectory(self):
        v = Vehicle(0, 0.0, 2, 30.56, EAST, 0.0)
        x = v
        for _ in range(1000):
            x = step(x, 0.1)
        assert x.x == pytest.approx(30.56 * 100.0, abs=1e-9)

    def test_wrap_count_over_long_run(self):
        # 2000 s at 30.56 m/s wraps a 500 m segment int(61120/500) times
        assert int(30.56 * 2000 // 500) == 122

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            step(Vehicle(0, 0, 0, 25, EAST, 0), 0.0)


class TestWrap:
    def test_eastbound_resets_to_zero(self):
        rng = np.random.default_rng(5)
        v = Vehicle(3, 501.0, 2, 25.0, EAST, 0.0)
        assert has_left_segment(v, CFG.highway)
        w = wrap(v, CFG, rng, new_id=99, now=20.0)
        assert w.x == 0.0 and w.id == 99 and w.heading == EAST
        assert w.lane_index == v.lane_index and w.spawn_time == 20.0

    def test_westbound_resets_to_length(self):
        rng = np.random.default_rng(6)
        v = Vehicle(3, -0.5, 0, 25.0, WEST, 0.0)
        assert has_left_segment(v, CFG.highway)
        assert wrap(v, CFG, rng, 7, 1.0).x == CFG.highway.length

    def test_population_count_preserved(self):
        rng = np.random.default_rng(7)
        fleet = spawn_population(CFG, rng)
        fleet[0] = wrap(fleet[0], CFG, rng, 100, 5.0)
        assert len(fleet) == CFG.vehicle_count

    def test_new_speed_independent_of_old(self):
        rng = np.random.default_rng(8)
        olds, news = [], []
        for i in range(10_000):
            old = Vehicle(i, 501.0, 2, float(rng.uniform(22.2, 30.6)), EAST, 0.0)
            new = wrap(old, CFG, rng, i + 1, 0.0)
            olds.append(old.speed)
            news.append(new.speed)
        corr = np.corrcoef(olds, news)[0, 1]
        assert abs(corr) < 0.05
