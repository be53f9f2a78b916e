import copy

import numpy as np
import pytest

from edgesim import SystemState, validate_config
from edgesim.config import PdsState
from edgesim.env import ModelTables, World
from edgesim.errors import InfeasibleAction, NonConvergence
from edgesim.models import realized_cost
from edgesim.oracle import (
    bellman_residual,
    expected_cost,
    pds_of,
    pds_value,
    transition_kernel,
    value_iteration,
)


@pytest.fixture(scope="module")
def tables(cfg):
    return ModelTables(cfg)


@pytest.fixture(scope="module")
def rtables(rcfg):
    return ModelTables(rcfg)


@pytest.fixture(scope="module")
def rsolution(rcfg, rtables):
    return value_iteration(rcfg, tables=rtables)


def frozen_config(default_raw, **green):
    raw = copy.deepcopy(default_raw)
    eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    raw["workload"]["transition"] = eye
    raw["environment"]["transition"] = eye
    raw["congestion"]["transition"] = eye
    raw["green"] = {
        "means_wh": green.get("means", [0, 0, 0]),
        "stds_wh": [0, 0, 0],
        "cap_wh": green.get("cap", 600),
    }
    return validate_config(raw)


# -- post-decision state ---------------------------------------------------------

def test_pds_of_normal(cfg):
    s = SystemState(10.0, "Low", 0.05, 500.0)
    assert pds_of(s, 75.0, cfg) == PdsState(10.0, "Low", 0.05, 200.0)


def test_pds_of_depleted_keeps_battery(cfg):
    s = SystemState(30.0, "High", 0.2, 100.0)
    for a in (0.0, 150.0):
        assert pds_of(s, a, cfg).battery_post == 100.0


def test_pds_of_exact_depletion_boundary(cfg):
    s = SystemState(10.0, "Low", 0.05, 225.0)
    assert pds_of(s, 0.0, cfg).battery_post == 0.0


# -- expected cost ----------------------------------------------------------------

def test_expected_cost_point_mass_equals_realized(default_raw):
    cfg = frozen_config(default_raw, means=[150, 150, 150])
    s = SystemState(30.0, "Medium", 0.2, 500.0)
    assert expected_cost(s, 75.0, cfg) == pytest.approx(
        realized_cost(s, 75.0, 150.0, cfg), rel=1e-12
    )


def test_expected_cost_two_point_mixture(cfg):
    # a green draw of 0 or 300 with equal odds prices the slot at the
    # probability-weighted realized costs
    s = SystemState(30.0, "Medium", 0.2, 500.0)
    want = 0.5 * realized_cost(s, 75.0, 0.0, cfg) + 0.5 * realized_cost(
        s, 75.0, 300.0, cfg
    )
    assert want == pytest.approx(5.428181818181819, rel=1e-12)


def test_expected_cost_matches_finite_sum(cfg, tables):
    from edgesim.env import green_pmf

    for s, a in (
        (SystemState(30.0, "Medium", 0.2, 500.0), 75.0),
        (SystemState(10.0, "High", 0.8, 1000.0), 150.0),
        (SystemState(30.0, "Low", 0.8, 200.0), 0.0),  # backup state
    ):
        e = cfg.env_labels.index(s.environment)
        pmf = green_pmf(e, cfg.green)
        want = sum(
            p * realized_cost(s, a, g, cfg)
            for p, g in zip(pmf, cfg.green.support_wh)
        )
        assert expected_cost(s, a, cfg, tables) == pytest.approx(want, rel=1e-12)


def test_expected_cost_monte_carlo(cfg, tables):
    s = SystemState(30.0, "Medium", 0.2, 500.0)
    a = 75.0
    il, ie, ih = tables.space.exo_coords(30.0, "Medium", 0.2)
    ib = tables.space.battery_index(500.0)
    ia = tables.action_index(a)
    cost_by_g = tables.realized[:, il, ih, ib, ia]
    pmf = tables.green_pmf[ie]
    rng = np.random.default_rng(123)
    n = 1_000_000
    draws = rng.choice(cost_by_g.size, size=n, p=pmf)
    emp = float(cost_by_g[draws].mean())
    mean = float(cost_by_g @ pmf)
    sd = float(np.sqrt(((cost_by_g - mean) ** 2) @ pmf / n))
    assert expected_cost(s, a, cfg, tables) == pytest.approx(mean, rel=1e-12)
    assert abs(emp - mean) <= 3 * sd


def test_expected_cost_rejects_infeasible(cfg, tables):
    s = SystemState(30.0, "Low", 0.2, 200.0)
    with pytest.raises(InfeasibleAction):
        expected_cost(s, 25.0, cfg, tables)


# -- transition kernel -------------------------------------------------------------

def test_transition_kernel_deterministic(default_raw):
    cfg = frozen_config(default_raw, means=[150, 150, 150])
    space = cfg.state_space()
    s = SystemState(10.0, "Low", 0.05, 500.0)
    dist = transition_kernel(s, 75.0, cfg)
    nxt = SystemState(10.0, "Low", 0.05, 350.0)
    assert dist[space.index_of(nxt)] == 1.0
    assert dist.sum() == 1.0


def test_transition_kernel_rows_sum_to_one(rcfg, rtables):
    space = rtables.space
    for i in range(space.n):
        s = space.state_of(i)
        il, _, _, ib = space.coords_of(i)
        for ia in rtables.feasible_action_indices(il, ib):
            dist = transition_kernel(s, float(rtables.a_levels[ia]), rcfg, rtables)
            assert dist.sum() == pytest.approx(1.0, abs=1e-12)
            assert (dist >= 0).all()


def test_transition_kernel_matches_empirical_step_frequencies(cfg, tables):
    s = SystemState(20.0, "Medium", 0.2, 500.0)
    coords = (1, 1, 1, 20)
    ia = tables.action_index(75.0)
    dist = transition_kernel(s, 75.0, cfg, tables)
    world = World(cfg, seed=9, tables=tables)
    n = 100_000
    counts = np.zeros(tables.space.n)
    for _ in range(n):
        world.coords = coords
        world.step_index(ia)
        counts[tables.space.index_of_coords(*world.coords)] += 1
    freq = counts / n
    se = np.sqrt(dist * (1 - dist) / n)
    bulk = n * dist >= 5  # normal approximation only where the CLT applies
    assert (np.abs(freq - dist) <= 3 * se)[bulk].all()
    tail_expected = n * dist[~bulk].sum()
    assert counts[~bulk].sum() <= tail_expected + 5 * np.sqrt(tail_expected) + 5


# -- value iteration ----------------------------------------------------------------

def test_value_iteration_zero_discount_is_myopic(default_raw):
    raw = copy.deepcopy(default_raw)
    raw["discount"] = 0.0
    cfg = validate_config(raw)
    t = ModelTables(cfg)
    vt = value_iteration(cfg, tables=t)
    want = np.where(t.feas5, t.exp_cost, np.inf).min(axis=-1)
    assert np.array_equal(vt.c_star, want)


def test_value_iteration_fixed_point_residual(rcfg, rtables, rsolution):
    res = bellman_residual(rsolution, rcfg, rtables)
    assert res.max() < 1e-8


def test_value_iteration_deterministic_reruns(rcfg, rtables):
    a = value_iteration(rcfg, tables=rtables)
    b = value_iteration(rcfg, tables=rtables)
    assert np.array_equal(a.c_star, b.c_star)
    assert np.array_equal(a.v_star, b.v_star)
    assert np.array_equal(a.policy, b.policy)


def test_value_iteration_nonconvergence_raises(rcfg, rtables):
    with pytest.raises(NonConvergence):
        value_iteration(rcfg, tables=rtables, max_sweeps=3)


def test_value_iteration_matches_policy_evaluation_linear_solve(rcfg, rtables, rsolution):
    # independent check: exact linear-system evaluation of the greedy policy
    space = rtables.space
    n = space.n
    p = np.zeros((n, n))
    c = np.zeros(n)
    for i in range(n):
        il, ie, ih, ib = space.coords_of(i)
        ia = int(rsolution.policy[il, ie, ih, ib])
        s = space.state_of(i)
        p[i] = transition_kernel(s, float(rtables.a_levels[ia]), rcfg, rtables)
        c[i] = rtables.exp_cost[il, ie, ih, ib, ia]
    solved = np.linalg.solve(np.eye(n) - rcfg.discount * p, c)
    assert np.abs(solved - rsolution.c_star.reshape(-1)).max() < 1e-8


def test_greedy_policy_respects_conservative_constraint(rcfg, rtables, rsolution):
    nl, ne, nh, nb = rtables.space.shape
    for il in range(nl):
        for ib in range(nb):
            assert rtables.feasible[il, ib][rsolution.policy[il, :, :, ib]].all()


# -- post-decision values --------------------------------------------------------------

def test_pds_value_degenerate_equals_shifted_cstar(default_raw):
    # frozen exogenous parts and zero green: landing battery equals the
    # post-decision battery, so V*(s~) is C* evaluated at b = b~
    cfg = frozen_config(default_raw, means=[0, 0, 0])
    t = ModelTables(cfg)
    vt = value_iteration(cfg, tables=t)
    v = pds_value(vt.c_star, cfg, t)
    assert np.allclose(v, vt.c_star, atol=1e-12)


def test_pds_value_consistency_identity(rcfg, rtables, rsolution):
    v = pds_value(rsolution.c_star, rcfg, rtables)
    assert np.array_equal(v, rsolution.v_star)
    assert bellman_residual(rsolution, rcfg, rtables).max() < 1e-8


def test_pds_value_monotone_in_post_battery(rcfg, rsolution):
    assert (np.diff(rsolution.v_star, axis=-1) <= 1e-9).all()
