import math

import pytest

from beamsim.channel import (
    ChannelParams,
    LinkSample,
    evaluate_link,
    goodput_bps,
    noise_power_dbm,
    pathloss_db,
    practical_beam_radius,
    sinr_db,
    snr_db,
)

PARAMS = ChannelParams()


class TestPathloss:
    def test_one_meter_reference(self):
        assert pathloss_db(PARAMS, 1.0) == pytest.approx(32.4 + 20 * math.log10(28))
        assert pathloss_db(PARAMS, 1.0) == pytest.approx(61.34, abs=0.005)

    def test_near_slope(self):
        assert pathloss_db(PARAMS, 10.0) == pytest.approx(
            pathloss_db(PARAMS, 1.0) + 21.0)

    def test_far_slope(self):
        assert pathloss_db(PARAMS, 100.0) == pytest.approx(
            pathloss_db(PARAMS, 1.0) + 34.0 * 2.0)

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            pathloss_db(PARAMS, 0.0)

    def test_strictly_increasing_on_each_slope(self):
        near = [pathloss_db(PARAMS, d) for d in (1, 5, 20, 53.9)]
        far = [pathloss_db(PARAMS, d) for d in (54, 60, 80, 200)]
        assert all(b > a for a, b in zip(near, near[1:]))
        assert all(b > a for a, b in zip(far, far[1:]))


class TestNoise:
    def test_default_floor(self):
        assert noise_power_dbm(PARAMS) == pytest.approx(-90.01, abs=0.005)

    def test_double_bandwidth(self):
        params = ChannelParams(bandwidth_hz=100e6)
        assert noise_power_dbm(params) == pytest.approx(-87.00, abs=0.005)

    def test_unit_bandwidth_no_figure(self):
        params = ChannelParams(bandwidth_hz=1.0, noise_figure_db=0.0)
        assert noise_power_dbm(params) == pytest.approx(-174.0)


class TestSnr:
    def test_link_budget_at_one_meter(self):
        assert snr_db(PARAMS, 1.0) == pytest.approx(
            20 + 9 - pathloss_db(PARAMS, 1.0) + 90.01, abs=0.005)
        assert snr_db(PARAMS, 1.0) == pytest.approx(57.67, abs=0.01)

    def test_threshold_at_practical_radius(self):
        radius = practical_beam_radius(PARAMS)
        assert snr_db(PARAMS, radius) == pytest.approx(
            PARAMS.snr_threshold_db, abs=1e-6)

    def test_monotone_decreasing(self):
        assert snr_db(PARAMS, 10.0) > snr_db(PARAMS, 20.0)


class TestPracticalRadius:
    def test_default_setup(self):
        # max tolerable pathloss 20+9+90.01-(-5) = 124.01 dB on the 3.4 slope
        radius = practical_beam_radius(PARAMS)
        expected = 10 ** ((20 + 9 - noise_power_dbm(PARAMS) + 5
                           - 32.4 - 20 * math.log10(28)) / 34.0)
        assert radius == pytest.approx(expected, abs=1e-5)
        assert radius == pytest.approx(69.7, abs=0.1)

    def test_power_scaling_on_far_slope(self):
        base = practical_beam_radius(PARAMS)
        boosted = practical_beam_radius(ChannelParams(tx_power_dbm=20 + 3.4))
        assert boosted / base == pytest.approx(10 ** 0.1, abs=1e-4)

    def test_unreachable_threshold(self):
        with pytest.raises(ValueError):
            practical_beam_radius(ChannelParams(snr_threshold_db=100.0))


class TestSinr:
    def test_no_interferers_equals_snr(self):
        assert sinr_db(PARAMS, 20.0) == pytest.approx(snr_db(PARAMS, 20.0))

    def test_equal_distance_interferer_near_zero_db(self):
        # S >> N at 5 m, so S/(N+S) is just under 0 dB
        val = sinr_db(PARAMS, 5.0, [5.0])
        assert val == pytest.approx(0.0, abs=0.01)
        assert val < 0.0

    def test_hand_link_budget(self):
        s = 10 ** ((29 - pathloss_db(PARAMS, 20.0)) / 10)
        i = 10 ** ((29 - pathloss_db(PARAMS, 60.0)) / 10)
        n = 10 ** (noise_power_dbm(PARAMS) / 10)
        expected = 10 * math.log10(s / (n + i))
        assert sinr_db(PARAMS, 20.0, [60.0]) == pytest.approx(expected, abs=0.01)

    def test_never_exceeds_snr(self):
        for d in (5.0, 30.0, 75.0):
            assert sinr_db(PARAMS, d, [50.0]) < snr_db(PARAMS, d)


class TestGoodput:
    def test_geometric_interfered_is_zero(self):
        assert goodput_bps(PARAMS, -math.inf, "geometric") == 0.0

    def test_geometric_clean_is_unit_rate(self):
        assert goodput_bps(PARAMS, math.inf, "geometric") == 1.0

    def test_practical_below_threshold(self):
        assert goodput_bps(PARAMS, -5.01, "practical") == 0.0

    def test_practical_shannon_rate(self):
        rate = goodput_bps(PARAMS, 15.0, "practical")
        assert rate == pytest.approx(50e6 * math.log2(1 + 10 ** 1.5), rel=1e-12)
        assert rate == pytest.approx(2.52e8, rel=0.005)

    def test_non_decreasing_in_sinr(self):
        rates = [goodput_bps(PARAMS, s, "practical") for s in (-5, 0, 10, 20)]
        assert all(b >= a for a, b in zip(rates, rates[1:]))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            goodput_bps(PARAMS, 10.0, "bogus")


class TestEvaluateLink:
    def test_sample_fields_consistent(self):
        sample = evaluate_link(PARAMS, 20.0, [60.0])
        assert isinstance(sample, LinkSample)
        assert sample.sinr_db <= sample.snr_db
        assert sample.decodable == (sample.sinr_db >= PARAMS.snr_threshold_db)
        assert sample.goodput_bps > 0

    def test_undecodable_has_zero_goodput(self):
        sample = evaluate_link(PARAMS, 69.0, [10.0])
        assert not sample.decodable
        assert sample.goodput_bps == 0.0
