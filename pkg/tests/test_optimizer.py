import dataclasses
import math

import numpy as np
import pytest
from conftest import random_config

from pinchcovert.optimizer import (
    Binding,
    check_constraints,
    delta3_value,
    position_bounds,
    power_bounds,
    solve_ao,
    solve_baseline,
    solve_position,
    solve_power,
)


def _feasible_systems(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        s = random_config(rng).to_system()
        if solve_ao(s).feasible:
            out.append(s)
    return out


# ---------------------------------------------------------------- power step


def test_power_bounds_zero_snr_floor(fig3a_config):
    s = fig3a_config.replace(gamma_th=0.0).to_system()
    assert power_bounds(3.0, s).p_snr == 0.0


def test_power_bounds_loosest_covertness(fig3a_config):
    s = fig3a_config.replace(epsilon=1.0).to_system()
    assert s.xi == pytest.approx(s.noise.x_hi - s.noise.x_lo, rel=1e-12)
    d = float(s.d_pT_b(3.0))
    want = (s.noise.x_hi - s.noise.x_lo) * d**2 / (s.power.reflect_gain * s.rf.eta * s.worst_gain)
    assert power_bounds(3.0, s).p_covert == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("x", [0.0, 5.0, 10.0, 17.5])
def test_power_bounds_plug_back(fig3a_system, x):
    s = fig3a_system
    b = power_bounds(x, s)
    assert s.budget(b.p_snr, x).snr == pytest.approx(s.reliability.gamma_th, rel=1e-9)
    assert float(s.covert_dep(b.p_covert, x)) == pytest.approx(1 - s.covertness.epsilon, rel=1e-9)


def test_solve_power_budget_limited(fig3a_config):
    s = fig3a_config.replace(epsilon=0.9).to_system()
    b = power_bounds(0.0, s)
    assert b.p_covert >= s.power.p_max and b.p_snr <= s.power.p_max
    assert solve_power(0.0, s) == s.power.p_max


def test_solve_power_infeasible_when_floor_exceeds_cap(fig3a_config):
    s = fig3a_config.replace(gamma_th=1e6).to_system()
    b = power_bounds(10.0, s)
    assert b.p_snr > min(s.power.p_max, b.p_covert)
    assert solve_power(10.0, s) is None


def test_solve_power_infeasible_without_covert_slack(fig3a_config):
    s = fig3a_config.replace(epsilon=0.0).to_system()
    assert s.xi == 0.0
    assert solve_power(5.0, s) is None


def test_solve_power_fig3a_overhead_position_is_infeasible(fig3a_system):
    """Stated for the BD-overhead baseline; conflicts with the model (see README)."""
    assert solve_power(fig3a_system.length / 2, fig3a_system) is None


def test_argmax_invariance_under_consistent_noise_scaling(fig3a_system):
    s = fig3a_system
    k = 7.5
    scaled = dataclasses.replace(
        s,
        power=dataclasses.replace(s.power, noise_rpa=s.power.noise_rpa * k),
        reliability=dataclasses.replace(s.reliability, gamma_th=s.reliability.gamma_th / k),
    )
    for x in (0.0, 4.0, 10.0):
        assert power_bounds(x, scaled).p_snr == pytest.approx(power_bounds(x, s).p_snr, rel=1e-12)
        assert solve_power(x, scaled) == pytest.approx(solve_power(x, s), rel=1e-12)


# ------------------------------------------------------------- position step


def test_delta3_forms():
    assert delta3_value(-0.5, 0.0, 3.0) == pytest.approx(9.25)
    assert delta3_value(-0.5, 0.0, 3.0, "printed") == pytest.approx(-8.75)
    # flat room: both forms coincide when the lateral terms agree
    assert delta3_value(0.0, 0.0, 0.0) == delta3_value(0.0, 0.0, 0.0, "printed")
    assert delta3_value(1.2, 0.0, 0.0) == delta3_value(1.2, 0.0, 0.0, "printed")
    # waveguide over the BD: the shift is exactly 2 H^2
    for h in (1.0, 3.0, 4.5):
        shift = delta3_value(0.7, 0.7, h) - delta3_value(0.7, 0.7, h, "printed")
        assert shift == pytest.approx(2 * h**2 - (2 * 0.7) ** 2)
        assert delta3_value(0.0, 0.0, h) - delta3_value(0.0, 0.0, h, "printed") == pytest.approx(2 * h**2)
    with pytest.raises(ValueError):
        delta3_value(0.0, 0.0, 3.0, "other")


def test_position_bounds_empty_exclusion(fig3a_system):
    tiny = 1e-9
    b = position_bounds(tiny, fig3a_system)
    assert b.covert_lo is None and b.covert_hi is None
    assert b.snr_lo is None  # the SNR floor is also out of reach at 1 nW


def test_position_bounds_symmetric(fig3a_system):
    xb = fig3a_system.x_b
    for p in (30.0, 100.0):
        b = position_bounds(p, fig3a_system)
        assert b.snr_hi - xb == pytest.approx(xb - b.snr_lo, rel=1e-12)
        assert b.covert_hi - xb == pytest.approx(xb - b.covert_lo, rel=1e-12)


def test_position_bounds_plug_back(fig3a_system):
    s = fig3a_system
    p = solve_ao(s).p0_opt
    b = position_bounds(p, s)
    target = 1 - s.covertness.epsilon
    for x in (b.covert_lo, b.covert_hi):
        assert float(s.covert_dep(p, x)) == pytest.approx(target, rel=1e-9)
    for x in (b.snr_lo, b.snr_hi):
        assert s.budget(p, x).snr == pytest.approx(s.reliability.gamma_th, rel=1e-9)


def test_solve_position_unconstrained(fig3a_config):
    s = fig3a_config.replace(epsilon=0.9).to_system()
    assert position_bounds(s.power.p_max, s).covert_lo is None
    assert solve_position(s.power.p_max, s) == s.x_b


def test_solve_position_tie_break_lower_edge(fig3a_system):
    b = position_bounds(50.0, fig3a_system)
    assert 0 <= b.covert_lo and b.covert_hi <= fig3a_system.length
    assert solve_position(50.0, fig3a_system) == b.covert_lo


def _grid_position(p, s, n=100_001):
    x = np.linspace(0.0, s.length, n)
    d = s.d_pT_b(x)
    snr = s.power.reflect_gain * p * s.rf.eta**2 / (d * s.d_b_pR) ** 2 / s.power.noise_rpa
    ok = (snr >= s.reliability.gamma_th) & (s.covert_dep(np.full_like(x, p), x) >= 1 - s.covertness.epsilon)
    if not ok.any():
        return None, x[1] - x[0]
    xs = x[ok]
    return float(xs[np.argmin((xs - s.x_b) ** 2)]), x[1] - x[0]


def test_solve_position_matches_grid_on_random_instances():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 25:
        s = random_config(rng).to_system()
        p = rng.uniform(0.05, 1.0) * s.power.p_max
        closed = solve_position(p, s)
        grid, step = _grid_position(p, s)
        if grid is None:
            assert closed is None or not check_constraints(p, closed, s).all
            continue
        assert closed is not None
        assert abs(abs(closed - s.x_b) - abs(grid - s.x_b)) <= step
        checked += 1


def test_solve_position_upper_edge_near_wall(fig3a_config):
    # BD near the wall: the exclusion zone spills past x = 0 and only the
    # upper edge is admissible
    s = fig3a_config.replace(bd_x=1.0, d_b_e=3.0, epsilon=0.3).to_system()
    p = 80.0
    b = position_bounds(p, s)
    assert b.covert_lo < 0 < b.covert_hi < min(s.length, b.snr_hi)
    assert solve_position(p, s) == b.covert_hi


def test_solve_position_exclusion_covers_interval(fig3a_config):
    s = fig3a_config.replace(bd_x=1.0, d_b_e=3.0).to_system()
    b = position_bounds(80.0, s)
    assert b.covert_lo < max(0.0, b.snr_lo) and b.covert_hi > b.snr_hi
    assert solve_position(80.0, s) is None


# --------------------------------------------------------------------- AO


def test_ao_fixed_point_start(fig3a_system):
    first = solve_ao(fig3a_system)
    again = solve_ao(fig3a_system, init_p0=first.p0_opt, init_x=first.tpa_x_opt)
    assert again.iterations <= 2
    assert again.rate == pytest.approx(first.rate, rel=1e-12)


def test_ao_fig3a_reference(fig3a_system):
    r = solve_ao(fig3a_system)
    assert r.feasible
    assert r.binding_constraint is Binding.COVERTNESS
    assert r.rate == pytest.approx(fig3a_system.budget(r.p0_opt, r.tpa_x_opt).rate, rel=1e-15)
    assert check_constraints(r.p0_opt, r.tpa_x_opt, fig3a_system).all


def test_ao_both_constraints_slack(fig3a_config):
    s = fig3a_config.replace(gamma_th=1.0, epsilon=0.9).to_system()
    r = solve_ao(s)
    assert r.p0_opt == s.power.p_max
    assert r.tpa_x_opt == s.x_b
    assert r.binding_constraint is Binding.POWER_BUDGET


def test_ao_infeasible_reports_zero(fig3a_config):
    r = solve_ao(fig3a_config.replace(epsilon=0.0).to_system())
    assert not r.feasible and r.rate == 0.0 and r.binding_constraint is Binding.INFEASIBLE


def test_ao_argument_validation(fig3a_system):
    with pytest.raises(ValueError):
        solve_ao(fig3a_system, tol=0.0)
    with pytest.raises(ValueError):
        solve_ao(fig3a_system, max_iter=0)


def test_ao_random_instances_plug_back_and_monotone_trace():
    for s in _feasible_systems(30, seed=7):
        r = solve_ao(s)
        assert check_constraints(r.p0_opt, r.tpa_x_opt, s).all
        rates = [t[2] for t in r.trace]
        assert all(b >= a * (1 - 1e-12) for a, b in zip(rates, rates[1:]))
        assert r.rate == pytest.approx(s.budget(r.p0_opt, r.tpa_x_opt).rate, rel=1e-12)
        best_base = max(solve_baseline(f * s.length, s).rate for f in (0.0, 0.25, 0.5))
        assert r.rate >= best_base * (1 - 1e-9)


# ---------------------------------------------------------------- baseline


def test_baseline_overhead_fig3a_rate_zero(fig3a_system):
    """Stated for the BD-overhead baseline; conflicts with the model (see README)."""
    assert solve_baseline(fig3a_system.length / 2, fig3a_system).rate == 0.0


def test_baseline_feed_point_fig3a(fig3a_system):
    r = solve_baseline(0.0, fig3a_system)
    assert r.feasible
    assert r.p0_opt == fig3a_system.power.p_max
    assert r.rate < solve_ao(fig3a_system).rate


def test_baseline_at_ao_point(fig3a_system):
    ao = solve_ao(fig3a_system)
    assert solve_baseline(ao.tpa_x_opt, fig3a_system).rate == pytest.approx(ao.rate, rel=1e-12)


def test_baseline_rejects_out_of_room(fig3a_system):
    with pytest.raises(ValueError):
        solve_baseline(-1.0, fig3a_system)


# ------------------------------------------------------- directional trends


def _rates(cfg, key, values):
    return [solve_ao(cfg.replace(**{key: v}).to_system()).rate for v in values]


def _non_decreasing(xs):
    return all(b >= a * (1 - 1e-9) - 1e-9 for a, b in zip(xs, xs[1:]))


def test_rate_trends(fig3a_config):
    from pinchcovert.units import dbm_to_watts

    c = fig3a_config
    assert _non_decreasing(_rates(c, "d_b_e", np.linspace(2.5, 9.5, 8)))
    assert _non_decreasing(_rates(c, "epsilon", np.linspace(0.01, 0.3, 8)))
    assert _non_decreasing(_rates(c, "sigma_e_nominal", [float(dbm_to_watts(v)) for v in np.linspace(-95, -85, 6)]))
    assert _non_decreasing(_rates(c.replace(d_b_e=8.0), "chi", np.linspace(0.0, 5.0, 6))[::-1])
    assert _non_decreasing(_rates(c, "delta", np.linspace(0.0, 0.5, 6))[::-1])
    assert _non_decreasing(_rates(c, "sigma_p", [float(dbm_to_watts(v)) for v in np.linspace(-120, -100, 6)])[::-1])


def test_unbounded_gain_is_infeasible(fig3a_config):
    s = fig3a_config.replace(chi=2.0, d_b_e=1.5).to_system()
    assert math.isinf(s.worst_gain)
    assert not solve_ao(s).feasible
