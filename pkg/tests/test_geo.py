import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mecoff import geo
from mecoff.errors import ChannelError, GeometryError

P = geo.Position3D


def test_distance_matches_euclidean():
    a, b = P(0, 0, 0), P(3, 4, 12)
    assert geo.distance(a, b) == pytest.approx(13.0)


def test_position_rejects_negative_altitude():
    with pytest.raises(GeometryError):
        P(0, 0, -1.0)


def test_position_rejects_non_finite():
    with pytest.raises(GeometryError):
        P(float("nan"), 0, 0)


def test_elevation_angle_straight_up_is_90():
    assert geo.elevation_angle_deg(P(0, 0, 5), P(0, 0, 0)) == pytest.approx(90.0)


def test_elevation_angle_45_degrees():
    # horizontal offset equals the height difference
    assert geo.elevation_angle_deg(P(10, 0, 10), P(0, 0, 0)) == pytest.approx(45.0)


def test_elevation_angle_zero_distance_raises():
    with pytest.raises(GeometryError):
        geo.elevation_angle_deg(P(1, 1, 1), P(1, 1, 1))


def test_p_los_aerial_matches_logistic_form():
    cp = geo.ChannelParams(alpha=9.61, beta=0.16)
    m, n = P(10, 0, 10), P(0, 0, 0)
    theta = 45.0
    want = 1.0 / (1.0 + 9.61 * math.exp(-0.16 * (theta - 9.61)))
    assert geo.p_los_aerial(m, n, cp) == pytest.approx(want, rel=1e-12)


def test_p_los_aerial_increases_with_elevation():
    cp = geo.ChannelParams()
    n = P(0, 0, 0)
    low = geo.p_los_aerial(P(100, 0, 10), n, cp)
    high = geo.p_los_aerial(P(10, 0, 100), n, cp)
    assert high > low


def test_p_los_ground_closed_form_exponential_ccdf():
    # with G(h) = exp(-h/hm), the integral to u is hm * (1 - exp(-u/hm))
    hm, r_o, lam = 15.0, 1.0, 0.3
    o = geo.ObstructionModel(r_o=r_o, lambda_o=lam,
                             g_ccdf=geo.exponential_height_ccdf(hm))
    m, n = P(0, 0, 0), P(30, 0, 0)
    d = 30.0
    u = d / (2 * r_o)
    want = math.exp(-2 * r_o * lam * hm * (1 - math.exp(-u / hm)))
    assert geo.p_los_ground(m, n, o, panels=400) == pytest.approx(want, rel=1e-4)


def test_p_los_ground_quadrature_converges():
    o = geo.ObstructionModel(r_o=1.0, lambda_o=0.3,
                             g_ccdf=geo.exponential_height_ccdf(15.0))
    m, n = P(0, 0, 0), P(40, 0, 0)
    coarse = geo.p_los_ground(m, n, o, panels=100)
    fine = geo.p_los_ground(m, n, o, panels=2000)
    assert coarse == pytest.approx(fine, rel=1e-4)


def test_p_los_ground_trivial_cases():
    o_clear = geo.ObstructionModel(r_o=1.0, lambda_o=0.0)
    assert geo.p_los_ground(P(0, 0, 0), P(10, 0, 0), o_clear) == 1.0
    o = geo.ObstructionModel(r_o=1.0, lambda_o=0.5)
    assert geo.p_los_ground(P(1, 2, 0), P(1, 2, 0), o) == 1.0


def test_p_los_ground_upper_limit_modes_differ():
    o1 = geo.ObstructionModel(r_o=2.0, lambda_o=0.3, upper_limit="half_ratio")
    o2 = geo.ObstructionModel(r_o=2.0, lambda_o=0.3, upper_limit="half_times")
    m, n = P(0, 0, 0), P(20, 0, 0)
    assert geo.p_los_ground(m, n, o1) != geo.p_los_ground(m, n, o2)


def test_obstruction_model_rejects_unknown_mode():
    with pytest.raises(ValueError):
        geo.ObstructionModel(upper_limit="bogus")


def test_mean_excess_loss_endpoints():
    cp = geo.ChannelParams(eta_los=1.0, eta_nlos=20.0)
    assert geo.mean_excess_loss(1.0, cp) == pytest.approx(1.0)
    assert geo.mean_excess_loss(0.0, cp) == pytest.approx(20.0)
    assert geo.mean_excess_loss(0.25, cp) == pytest.approx(0.25 * 1 + 0.75 * 20)


def test_path_loss_additive_db_form():
    cp = geo.ChannelParams(f_c=2e9, c=3e8)
    m, n = P(0, 0, 0), P(100, 0, 0)
    want = 20 * math.log10(4 * math.pi * 2e9 / 3e8) + 20 * math.log10(100) + 3.0
    assert geo.path_loss(m, n, cp, excess=3.0) == pytest.approx(want, rel=1e-12)


def test_path_loss_zero_distance_raises():
    with pytest.raises(GeometryError):
        geo.path_loss(P(0, 0, 0), P(0, 0, 0), geo.ChannelParams(), 0.0)


def test_channel_gain_formula():
    f = geo.FadingState(g=0.5, rd=2.0)
    assert geo.channel_gain(f, dist=10.0, pl_linear=4.0) == pytest.approx(
        math.sqrt(0.5 * 2.0 / 40.0))


def test_channel_gain_rejects_degenerate_denominator():
    f = geo.FadingState(g=1.0, rd=1.0)
    with pytest.raises(ChannelError):
        geo.channel_gain(f, dist=0.0, pl_linear=1.0)


def test_data_rate_shannon_form():
    want = 10.0 * math.log2(1 + 2.0 * 0.09 / 1e-3)
    assert geo.data_rate(0.3, 2.0, 1e-3, 10.0) == pytest.approx(want)


def test_data_rate_zero_power_is_zero():
    assert geo.data_rate(0.5, 0.0, 1e-3, 10.0) == 0.0


def test_db_to_linear():
    assert geo.db_to_linear(30.0) == pytest.approx(1000.0)
    assert geo.db_to_linear(0.0) == 1.0


def test_sample_fading_properties(rng):
    draws = [geo.sample_fading(rng, k_factor=3.0) for _ in range(20000)]
    assert all(d.g >= 0 and d.rd >= 0 for d in draws)
    # unit-power Rician amplitude: E[rd^2] = 1
    mean_power = np.mean([d.rd ** 2 for d in draws])
    assert mean_power == pytest.approx(1.0, abs=0.03)


def test_associate_tiebreak_lowest_index():
    assert geo.associate([1.0, 3.0, 3.0]) == 1
    assert geo.associate([5.0]) == 0
    with pytest.raises(ChannelError):
        geo.associate([])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 40))
def test_mobility_stays_inside_arena(seed, steps):
    rng = np.random.default_rng(seed)
    arena = (50.0, 50.0, 30.0)
    pos = rng.uniform(0, 30, size=(4, 3))
    model = geo.MobilityModel(pos, arena, speed_max=5.0, rng=rng)
    for _ in range(steps):
        out = model.advance()
        assert np.all(out >= 0.0)
        for axis in range(3):
            assert np.all(out[:, axis] <= arena[axis])


def test_mobility_reflects_velocity_sign():
    pos = np.array([[49.5, 25.0, 10.0]])
    model = geo.MobilityModel(pos, (50.0, 50.0, 30.0), 0.0,
                              np.random.default_rng(0))
    model.velocities = np.array([[2.0, 0.0, 0.0]])
    out = model.advance()
    assert out[0, 0] == pytest.approx(48.5)
    assert model.velocities[0, 0] == -2.0
