"""Circle rearrangement: planning, realization, error and feasibility."""

import numpy as np
import pytest

from akscal import rearrange as rr

TWO_PI = 2 * np.pi


def f_sin(x):
    return np.sin(x)


def f_zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def test_feasible_is_a_range_test():
    assert rr.feasible(f_sin, f_zero)
    assert rr.feasible(f_sin, lambda x: 0.7 * np.cos(3 * x))
    assert not rr.feasible(f_sin, lambda x: 2.0 + 0 * x)
    assert not rr.feasible(f_zero, f_sin)


def test_build_plan_validates_inputs():
    with pytest.raises(ValueError):
        rr.build_plan(f_sin, f_zero, eps=0.0)
    with pytest.raises(ValueError):
        rr.build_plan(f_sin, f_zero, eps=0.1, p=1.0)
    with pytest.raises(ValueError):
        rr.build_plan(f_sin, lambda x: 3.0 + 0 * x, eps=0.1)


def test_plan_cap_reported_when_arcs_run_out():
    with pytest.raises(rr.PlanError) as info:
        rr.build_plan(f_sin, lambda x: np.sin(5 * x), eps=0.01, max_arcs=4)
    assert info.value.required_cap > 4


def test_order_incompatible_target_is_refused():
    # 0.5 cos(2x) runs through its range twice per lap; a degree-one monotone
    # reparametrization of sin cannot follow, so planning must fail
    with pytest.raises(rr.PlanError):
        rr.build_plan(f_sin, lambda x: 0.5 * np.cos(2 * x), eps=0.1)


def test_plan_geometry():
    plan = rr.build_plan(f_sin, f_zero, eps=0.1)
    assert plan.eps == 0.1 and plan.budget_ok()
    # arcs tile the circle without gaps
    arcs = plan.arcs
    assert arcs[0].lo == 0.0
    for a, b in zip(arcs, arcs[1:]):
        assert b.lo == pytest.approx(a.hi)
    assert arcs[-1].hi == pytest.approx(TWO_PI)
    # every arc's level is attainable by f and close to the target on the arc
    for a in arcs:
        assert -1.0 <= a.level <= 1.0
        assert abs(a.level - 0.0) <= plan.delta
    # one source interval per arc, pairwise disjoint mod 2 pi, forward order
    assert len(plan.sources) == len(arcs)
    starts = np.array([u for u, v in plan.sources])
    widths = np.array([v - u for u, v in plan.sources])
    assert (widths > 0).all()
    lifted = np.unwrap(np.mod(starts, TWO_PI), period=TWO_PI)
    # cyclic forward sweep: unwrapped starts increase within one lap
    assert (np.diff(starts) > 0).all()
    assert starts[-1] + widths[-1] <= starts[0] + TWO_PI + 1e-12
    del lifted


def test_sources_hit_their_levels():
    # one oscillation per lap: cyclically order-compatible with sin
    plan = rr.build_plan(f_sin, lambda x: 0.5 * np.cos(x), eps=0.1)
    for arc, (u, v) in zip(plan.arcs, plan.sources):
        mid = np.linspace(u, v, 9)
        # the whole source window stays inside the level band (bulk budget)
        assert np.max(np.abs(f_sin(mid) - arc.level)) < 0.9 * plan.delta + 1e-12


def test_identity_at_time_zero():
    plan = rr.build_plan(f_sin, f_zero, eps=0.2)
    phi = rr.realize_diffeo(plan)
    xs = np.linspace(0, TWO_PI, 257)
    assert np.array_equal(phi(xs, 0.0), xs)


def test_isotopy_is_monotone_and_invertible():
    plan = rr.build_plan(f_sin, f_zero, eps=0.1)
    phi = rr.realize_diffeo(plan)
    xs = np.linspace(0, TWO_PI, 4001)
    for t in (0.25, 0.5, 0.75, 1.0):
        assert phi.min_derivative(t, samples=20000) > 0
        vals = phi(xs, t)
        assert (np.diff(vals) > 0).all()
        back = phi.inverse(vals, t)
        assert np.max(np.abs(back - xs)) < 1e-6


def test_endpoint_lap_count():
    plan = rr.build_plan(f_sin, f_zero, eps=0.2)
    phi = rr.realize_diffeo(plan)
    # degree one: phi(x + 2 pi) = phi(x) + 2 pi
    xs = np.linspace(0, TWO_PI, 65)
    assert np.allclose(phi(xs + TWO_PI, 1.0), phi(xs, 1.0) + TWO_PI, atol=1e-12)


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_error_meets_target(eps):
    plan = rr.build_plan(f_sin, f_zero, eps=eps)
    phi = rr.realize_diffeo(plan)
    err = rr.rearrange_error(f_sin, f_zero, phi, p=2.0)
    assert err < eps


def test_convenience_pipeline_matches_pieces():
    phi, err, plan = rr.rearrange(f_sin, f_zero, eps=0.1, p=2.0)
    assert err < 0.1
    assert len(plan.arcs) >= 4
    assert rr.rearrange_error(f_sin, f_zero, phi, 2.0) == pytest.approx(err)


def test_self_target_stays_cheap():
    phi, err, plan = rr.rearrange(f_sin, f_sin, eps=0.2, p=2.0)
    assert err < 0.2
    assert phi.min_derivative(1.0) > 0.05  # nearly-trivial move keeps slopes tame


def test_piecewise_diffeo_validation():
    with pytest.raises(ValueError):
        rr.PiecewiseDiffeo(np.array([0.0, 2.0, 1.0]), np.array([0.0, 1.0, 2.0]))
    with pytest.raises(ValueError):
        rr.PiecewiseDiffeo(np.array([0.0, TWO_PI + 1.0]), np.array([0.0, 1.0]))


def test_random_diffeo_is_a_diffeo():
    rng = np.random.default_rng(0)
    xs = np.linspace(0, TWO_PI, 2001)
    for _ in range(20):
        phi = rr.random_diffeo(rng)
        vals = phi(xs)
        assert (np.diff(vals) > 0).all()
        assert vals[-1] - vals[0] == pytest.approx(TWO_PI)


def test_infeasibility_gap_certifies():
    best, bound = rr.infeasibility_gap(f_sin, lambda x: 2.0 + 0 * x,
                                       p=2.0, trials=20)
    assert bound > 0
    assert best >= bound
