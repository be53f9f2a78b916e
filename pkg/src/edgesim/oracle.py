"""Exact offline solution with full knowledge of the dynamics.

Value iteration exploits the factored transition structure: given a
post-decision battery level, the next state is the product of the three
exogenous chains and the green-induced battery move, so a Bellman sweep
needs only small tensor contractions instead of a dense kernel. The
post-decision value function falls out of the same contraction applied to
the converged cost-to-go.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Config, PdsState, SystemState
from .env import ModelTables
from .errors import InfeasibleAction, NonConvergence
from .models import post_decision_battery


@dataclass
class ValueTables:
    """Solved tables over the state grids, plus convergence diagnostics."""

    c_star: np.ndarray   # cost-to-go per state, shape (nl, ne, nh, nb)
    v_star: np.ndarray   # post-decision value, same shape over virtual battery
    policy: np.ndarray   # greedy action index per state
    sweeps: int
    sup_change: float    # final sup-norm change between sweeps


def pds_of(s: SystemState, a: float, cfg: Config) -> PdsState:
    """Post-decision state: exogenous parts copied, battery after demand."""
    return PdsState(
        s.workload,
        s.environment,
        s.congestion,
        post_decision_battery(s.battery, s.workload, a, cfg),
    )


def expected_cost(s: SystemState, a: float, cfg: Config,
                  tables: ModelTables | None = None) -> float:
    """One-slot cost with the green draw averaged out."""
    t = tables if tables is not None else ModelTables(cfg)
    il, ie, ih = t.space.exo_coords(s.workload, s.environment, s.congestion)
    ib = t.space.battery_index(s.battery)
    ia = t.action_index(a)
    if not t.feasible[il, ib, ia]:
        raise InfeasibleAction(f"action {a} infeasible in state {s}")
    return float(t.exp_cost[il, ie, ih, ib, ia])


def transition_kernel(s: SystemState, a: float, cfg: Config,
                      tables: ModelTables | None = None) -> np.ndarray:
    """Distribution over next states in canonical order, given (s, a)."""
    t = tables if tables is not None else ModelTables(cfg)
    il, ie, ih = t.space.exo_coords(s.workload, s.environment, s.congestion)
    ib = t.space.battery_index(s.battery)
    ia = t.action_index(a)
    if not t.feasible[il, ib, ia]:
        raise InfeasibleAction(f"action {a} infeasible in state {s}")
    nb = t.b_levels.size
    b_dist = np.zeros(nb)
    np.add.at(b_dist, t.bnext[t.pds_b_idx[il, ib, ia]], t.green_pmf[ie])
    joint = np.einsum(
        "x,y,z,w->xyzw", t.P_l[il], t.P_e[ie], t.P_h[ih], b_dist
    )
    return joint.reshape(-1)


def _pds_expectation(c_table: np.ndarray, t: ModelTables) -> np.ndarray:
    """Expected next-state cost-to-go per post-decision state.

    Contracts the green pmf over battery moves, then the three chains over
    exogenous moves; the first axis of the intermediate is the current
    environment class conditioning the green draw.
    """
    c_next_g = c_table[:, :, :, t.bnext]  # (nl, ne, nh, nb~, ng)
    g_part = np.einsum("xyzbg,eg->exyzb", c_next_g, t.green_pmf)
    return np.einsum("lx,ey,hz,exyzb->lehb", t.P_l, t.P_e, t.P_h, g_part)


def _greedy(c_table: np.ndarray, t: ModelTables, delta: float):
    """One Bellman application: value, argmin policy, and the PDS table."""
    v = _pds_expectation(c_table, t)
    v_pds = v[t.IL5, t.IE5, t.IH5, t.PB5]  # gather at post-decision batteries
    q = t.exp_cost + delta * v_pds
    q = np.where(t.feas5, q, np.inf)
    return q.min(axis=-1), q.argmin(axis=-1), v


def value_iteration(cfg: Config, tol: float = 1e-9, max_sweeps: int = 100_000,
                    tables: ModelTables | None = None) -> ValueTables:
    """Solve the Bellman equations to within tol of the true fixed point.

    Stops when the sup-norm sweep change drops below tol*(1-delta)/(2*delta),
    the standard discounted-MDP bound; deterministic for a given config.
    """
    t = tables if tables is not None else ModelTables(cfg)
    delta = cfg.discount
    threshold = tol * (1.0 - delta) / (2.0 * delta) if delta > 0 else np.inf
    c = np.zeros(t.space.shape)
    sweeps = 0
    while True:
        c_new, _, _ = _greedy(c, t, delta)
        sweeps += 1
        change = float(np.max(np.abs(c_new - c)))
        c = c_new
        if change < threshold:
            break
        if sweeps >= max_sweeps:
            raise NonConvergence(
                f"value iteration still changing by {change} after {sweeps} sweeps"
            )
    _, policy, v = _greedy(c, t, delta)
    return ValueTables(c_star=c, v_star=v, policy=policy, sweeps=sweeps,
                       sup_change=change)


def pds_value(c_star: np.ndarray, cfg: Config,
              tables: ModelTables | None = None) -> np.ndarray:
    """Post-decision value table induced by a converged cost-to-go table."""
    t = tables if tables is not None else ModelTables(cfg)
    return _pds_expectation(c_star, t)


def bellman_residual(vt: ValueTables, cfg: Config,
                     tables: ModelTables | None = None) -> np.ndarray:
    """Per-state |C*(s) - min_a (c(s,a) + delta * V*(pds(s,a)))|."""
    t = tables if tables is not None else ModelTables(cfg)
    v_pds = vt.v_star[t.IL5, t.IE5, t.IH5, t.PB5]
    q = np.where(t.feas5, t.exp_cost + cfg.discount * v_pds, np.inf)
    return np.abs(vt.c_star - q.min(axis=-1))
