"""Ground-truth stochastic world: exogenous chains, green energy, stepping.

Each stochastic source (green draw and the three exogenous chains) owns a
named RNG stream seeded from (seed, stream id), so adding a source never
perturbs existing draws and identical seeds reproduce identical runs.

`ModelTables` precomputes every deterministic quantity the simulator,
oracle, and learners share — demand grids, optimal delay costs per budget,
feasibility masks, post-decision battery indices, green pmfs, and realized
costs indexed by green draw — so the per-slot hot path is pure indexing.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .config import Config, GreenSpec, SystemState
from .errors import DegenerateSpec, InfeasibleAction
from .models import delay_cost, op_demand, solve_allocation

STREAM_GREEN = 0
STREAM_WORKLOAD = 1
STREAM_ENVIRONMENT = 2
STREAM_CONGESTION = 3
STREAM_AGENT = 100


def _normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def green_pmf(e: int, spec: GreenSpec) -> np.ndarray:
    """Discretized truncated normal for environment class e over the support.

    Mass below half a grid step maps to 0, mass above cap minus half a step
    maps to the cap, and interior mass goes to the nearest grid point via
    CDF differences; the result sums to 1 by construction.
    """
    support = np.asarray(spec.support_wh, dtype=float)
    n = support.size
    mean, std = spec.means_wh[e], spec.stds_wh[e]
    pmf = np.zeros(n)
    if n == 1:
        pmf[0] = 1.0
        return pmf
    step = support[1] - support[0]
    if std == 0.0:
        idx = int(round(mean / step))
        if not (0 <= idx < n) or abs(mean - support[min(max(idx, 0), n - 1)]) > 1e-9:
            raise DegenerateSpec(
                f"zero-std green class with mean {mean} off the support grid"
            )
        pmf[idx] = 1.0
        return pmf
    cuts = [_normal_cdf((support[i] + step / 2.0 - mean) / std) for i in range(n - 1)]
    prev = 0.0
    for i, c in enumerate(cuts):
        pmf[i] = c - prev
        prev = c
    pmf[n - 1] = 1.0 - prev
    return pmf


def exogenous_kernel(cfg: Config) -> np.ndarray:
    """Joint (workload, environment, congestion) transition matrix.

    Product form of the three independent chains, rows and columns indexed
    lexicographically with congestion minor.
    """
    p_l = np.asarray(cfg.workload.matrix)
    p_e = np.asarray(cfg.environment.matrix)
    p_h = np.asarray(cfg.congestion.matrix)
    return np.kron(p_l, np.kron(p_e, p_h))


class ModelTables:
    """Precomputed arrays over the configured grids (read-only after init)."""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.space = cfg.state_space()
        nl, ne, nh, nb = self.space.shape
        step = cfg.battery.step_wh
        self.step_wh = step

        self.lambdas = np.asarray(cfg.lambdas)
        self.rtts = np.asarray(cfg.rtts)
        self.b_levels = np.asarray(cfg.battery_levels())
        self.a_levels = np.asarray(cfg.actions)
        na = self.a_levels.size
        self.n_actions = na

        self.P_l = np.asarray(cfg.workload.matrix)
        self.P_e = np.asarray(cfg.environment.matrix)
        self.P_h = np.asarray(cfg.congestion.matrix)

        self.d_op = np.array([op_demand(lam, cfg) for lam in cfg.lambdas])
        dop_steps = np.rint(self.d_op / step).astype(np.int64)
        a_steps = np.rint(self.a_levels / step).astype(np.int64)
        b_steps = np.arange(nb, dtype=np.int64)

        # conservative feasibility: a <= max(b - d_op, 0)
        bound = np.maximum(b_steps[None, :] - dop_steps[:, None], 0)  # (nl, nb)
        self.feasible = a_steps[None, None, :] <= bound[:, :, None]   # (nl, nb, na)
        self.depleted = dop_steps[:, None] > b_steps[None, :]         # (nl, nb)

        # post-decision battery index: b if depleted, else max(b - d_op - a, 0)
        pds = np.maximum(b_steps[None, :, None] - dop_steps[:, None, None]
                         - a_steps[None, None, :], 0)
        self.pds_b_idx = np.where(self.depleted[:, :, None], b_steps[None, :, None], pds)

        # inner allocation solved per (workload, congestion, budget)
        self.cstar_delay = np.empty((nl, nh, na))
        self.alloc_m = np.empty((nl, nh, na), dtype=np.int64)
        self.alloc_mu = np.empty((nl, nh, na), dtype=np.int64)
        self.delay_full_offload = np.empty((nl, nh))
        for il, lam in enumerate(cfg.lambdas):
            for ih, h in enumerate(cfg.rtts):
                self.delay_full_offload[il, ih] = delay_cost(h, lam, 0, 0, cfg).total
                for ia, a in enumerate(cfg.actions):
                    alloc = solve_allocation(SystemState(lam, cfg.env_labels[0], h, 0.0), a, cfg)
                    self.cstar_delay[il, ih, ia] = alloc.delay_cost
                    self.alloc_m[il, ih, ia] = alloc.m
                    self.alloc_mu[il, ih, ia] = alloc.mu

        self.backup_cost = (
            self.delay_full_offload
            + cfg.costs.backup_per_kwh * self.d_op[:, None] / 1000.0
        )  # (nl, nh)

        # cost-bearing demand for depreciation, Wh, per (workload, action)
        if cfg.depreciation_basis == "total_demand":
            self.dep_base = self.d_op[:, None] + self.a_levels[None, :]
        else:
            self.dep_base = np.broadcast_to(self.a_levels[None, :], (nl, na)).copy()

        # green energy: pmf per class, support on the battery grid
        self.g_support = np.asarray(cfg.green.support_wh)
        ng = self.g_support.size
        self.green_pmf = np.stack([green_pmf(e, cfg.green) for e in range(ne)])
        self.green_cdf = np.cumsum(self.green_pmf, axis=1)
        g_steps = np.rint(self.g_support / step).astype(np.int64)

        # next-battery index from a post-decision level and a green draw
        self.bnext = np.minimum(b_steps[:, None] + g_steps[None, :], nb - 1)  # (nb, ng)

        omega = cfg.costs.depreciation_per_kwh
        # realized cost per green draw: (ng, nl, nh, nb, na)
        dep = omega * np.maximum(
            self.dep_base[None, :, None, :] - self.g_support[:, None, None, None], 0.0
        ) / 1000.0  # (ng, nl, 1, na)
        normal = self.cstar_delay[None, :, :, None, :] + dep[:, :, :, None, :]
        self.realized = np.where(
            self.depleted[None, :, None, :, None],
            self.backup_cost[None, :, :, None, None],
            normal,
        )

        # expected one-slot cost per (workload, env, congestion, battery, action)
        exp_dep = np.einsum("eg,gla->ela", self.green_pmf, dep[:, :, 0, :])
        exp_normal = self.cstar_delay[:, None, :, None, :] + np.transpose(
            exp_dep, (1, 0, 2)
        )[:, :, None, None, :]
        self.exp_cost = np.where(
            self.depleted[:, None, None, :, None],
            self.backup_cost[:, None, :, None, None],
            exp_normal,
        )

        # chain sampling cdfs
        self.cdf_l = np.cumsum(self.P_l, axis=1)
        self.cdf_e = np.cumsum(self.P_e, axis=1)
        self.cdf_h = np.cumsum(self.P_h, axis=1)

        # open-grid index helpers for gathers over (nl, ne, nh, nb, na)
        self.IL5 = np.arange(nl)[:, None, None, None, None]
        self.IE5 = np.arange(ne)[None, :, None, None, None]
        self.IH5 = np.arange(nh)[None, None, :, None, None]
        self.PB5 = self.pds_b_idx[:, None, None, :, :]
        self.feas5 = self.feasible[:, None, None, :, :]
        # and over (nl, nh, nb, na) for a fixed environment class
        self.IL4 = np.arange(nl)[:, None, None, None]
        self.IH4 = np.arange(nh)[None, :, None, None]
        self.PB4 = self.pds_b_idx[:, None, :, :]
        self.feas4 = np.broadcast_to(
            self.feasible[:, None, :, :], (nl, nh, nb, na)
        )

    def feasible_action_indices(self, il: int, ib: int) -> np.ndarray:
        return np.nonzero(self.feasible[il, ib])[0]

    def action_index(self, a: float) -> int:
        ia = int(np.searchsorted(self.a_levels, a))
        if ia >= self.n_actions or self.a_levels[ia] != a:
            raise InfeasibleAction(f"action level {a} is not on the action grid")
        return ia


class StepResult(NamedTuple):
    green_wh: float
    cost: float
    next_state: SystemState
    backup: bool


class _StepIdx(NamedTuple):
    g_idx: int
    cost: float
    backup: bool


class World:
    """Single trajectory of the stochastic environment, owned by one caller."""

    def __init__(self, cfg: Config, seed: int, tables: ModelTables | None = None):
        self.cfg = cfg
        self.tables = tables if tables is not None else ModelTables(cfg)
        self.space = self.tables.space
        self._rng = {
            name: np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, sid))))
            for name, sid in (
                ("green", STREAM_GREEN),
                ("workload", STREAM_WORKLOAD),
                ("environment", STREAM_ENVIRONMENT),
                ("congestion", STREAM_CONGESTION),
            )
        }
        init = cfg.initial
        il, ie, ih = self.space.exo_coords(
            init.workload, init.environment, init.congestion
        )
        self.coords = (il, ie, ih, self.space.battery_index(cfg.battery.initial_wh))

    @property
    def state(self) -> SystemState:
        return self.space.state_of(self.space.index_of_coords(*self.coords))

    def _draw(self, name: str, cdf_row: np.ndarray) -> int:
        u = self._rng[name].random()
        # guard the final bin against cdf[-1] rounding just below 1
        return min(int(np.searchsorted(cdf_row, u, side="right")), cdf_row.size - 1)

    def step_index(self, ia: int) -> _StepIdx:
        """Advance one slot given an action index; draws (g, lam, e, h)."""
        t = self.tables
        il, ie, ih, ib = self.coords
        if not t.feasible[il, ib, ia]:
            raise InfeasibleAction(
                f"action {t.a_levels[ia]} infeasible at battery {t.b_levels[ib]}"
                f" with basic demand {t.d_op[il]}"
            )
        g_idx = self._draw("green", t.green_cdf[ie])
        cost = float(t.realized[g_idx, il, ih, ib, ia])
        backup = bool(t.depleted[il, ib])
        ib1 = int(t.bnext[t.pds_b_idx[il, ib, ia], g_idx])
        il1 = self._draw("workload", t.cdf_l[il])
        ie1 = self._draw("environment", t.cdf_e[ie])
        ih1 = self._draw("congestion", t.cdf_h[ih])
        self.coords = (il1, ie1, ih1, ib1)
        return _StepIdx(g_idx, cost, backup)


def step(world: World, a: float) -> StepResult:
    """One slot at an action level; returns the draw, cost, and next state."""
    res = world.step_index(world.tables.action_index(a))
    return StepResult(
        float(world.tables.g_support[res.g_idx]),
        res.cost,
        world.state,
        res.backup,
    )
