"""Online decision-makers run against the environment without knowing it.

All agents share one contract: ``select`` maps the current state coordinates
to a feasible action index, ``observe`` consumes exactly one transition
record per slot. The post-decision-state learner keeps three tables — the
one-slot cost estimates, the state values, and the post-decision values —
and batch-updates every entry the observed green draw informs: the realized
green budget depends only on the environment class, so one draw prices every
(state, action) pair sharing that class, and the exogenous move prices every
post-decision battery level at the visited (workload, environment,
congestion) context.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .config import Config, SystemState
from .env import STREAM_AGENT, ModelTables
from .errors import InfeasibleAction, StaleRecord, UnknownScheme
from .models import op_demand


class SlotRecord(NamedTuple):
    """One slot's transition as an agent sees it."""

    slot: int
    state: tuple        # (il, ie, ih, ib) at slot start
    action: int         # action index taken
    g_index: int        # realized green draw, support index
    g_wh: float
    cost: float         # realized one-slot cost
    next_state: tuple   # (il, ie, ih, ib) at next slot start
    backup: bool


def feasible_actions(s: SystemState, cfg: Config) -> tuple:
    """Action levels allowed by the conservative battery constraint."""
    bound = max(s.battery - op_demand(s.workload, cfg), 0.0)
    return tuple(a for a in cfg.actions if a <= bound)


def q_update(q_sa: float, cost: float, best_next: float, delta: float,
             beta: float) -> float:
    """Single tabular Q step toward the observed one-slot target."""
    return (1.0 - beta) * q_sa + beta * (cost + delta * best_next)


def _masked_argmin(values: np.ndarray, feasible_row: np.ndarray) -> int:
    masked = np.where(feasible_row, values, np.inf)
    return int(masked.argmin())  # first minimum: smallest action wins ties


class _AgentRng:
    """Lazily-built exploration stream, separate from the environment's."""

    def __init__(self, seed: int):
        self._seed = seed
        self._rng = None

    def __call__(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence((self._seed, STREAM_AGENT)))
            )
        return self._rng


class PdsLearner:
    """Post-decision-state learner: greedy selection, three batch updates.

    Per slot, after the green draw g and the exogenous move are observed:

    1. selection was argmin over feasible a of c_hat(s,a) + delta*V_hat(pds);
    2. every (state, action) sharing the visited environment class moves its
       cost estimate toward the realized cost under g at rate rho;
    3. the same states refresh C_hat by minimizing over the updated costs
       against the pre-update V_hat;
    4. every post-decision battery level at the visited exogenous triple
       moves V_hat toward C_hat at the landed next state, at rate alpha.

    Rates follow 1/(1 + scale*visits) per conditioning context, so the
    Robbins-Monro sums hold along each context subsequence.
    """

    def __init__(self, cfg: Config, tables: ModelTables, seed: int = 0,
                 epsilon: float | None = None):
        self.cfg = cfg
        self.t = 0
        self.tables = tables
        self.delta = cfg.discount
        self.epsilon = cfg.pds_learning.epsilon if epsilon is None else epsilon
        self._rho_scale = cfg.pds_learning.cost_rate_scale
        self._alpha_scale = cfg.pds_learning.value_rate_scale
        shape = tables.space.shape
        na = tables.n_actions
        self.c_hat = np.zeros(shape + (na,))
        self.C_hat = np.zeros(shape)
        self.V_hat = np.zeros(shape)
        self.n_env = np.zeros(shape[1], dtype=np.int64)
        self.n_ctx = np.zeros(shape[:3], dtype=np.int64)
        self._rng = _AgentRng(seed)

    def select(self, state: tuple) -> int:
        il, ie, ih, ib = state
        t = self.tables
        if self.epsilon > 0.0 and self._rng().random() < self.epsilon:
            options = t.feasible_action_indices(il, ib)
            return int(options[self._rng().integers(options.size)])
        values = (
            self.c_hat[il, ie, ih, ib]
            + self.delta * self.V_hat[il, ie, ih, t.pds_b_idx[il, ib]]
        )
        return _masked_argmin(values, t.feasible[il, ib])

    def observe(self, rec: SlotRecord) -> None:
        if rec.slot != self.t:
            raise StaleRecord(f"record for slot {rec.slot}, expected {self.t}")
        t = self.tables
        il, ie, ih, _ = rec.state
        il1, ie1, ih1, _ = rec.next_state

        rho = 1.0 / (1.0 + self._rho_scale * self.n_env[ie])
        cs = self.c_hat[:, ie]
        cs *= 1.0 - rho
        cs += rho * t.realized[rec.g_index]

        v_pds = self.V_hat[:, ie][t.IL4, t.IH4, t.PB4]
        q = np.where(t.feas4, self.c_hat[:, ie] + self.delta * v_pds, np.inf)
        self.C_hat[:, ie] = q.min(axis=-1)

        alpha = 1.0 / (1.0 + self._alpha_scale * self.n_ctx[il, ie, ih])
        target = self.C_hat[il1, ie1, ih1, t.bnext[:, rec.g_index]]
        row = self.V_hat[il, ie, ih]
        row *= 1.0 - alpha
        row += alpha * target

        self.n_env[ie] += 1
        self.n_ctx[il, ie, ih] += 1
        self.t += 1

    def greedy_policy(self) -> np.ndarray:
        t = self.tables
        v_pds = self.V_hat[t.IL5, t.IE5, t.IH5, t.PB5]
        q = np.where(t.feas5, self.c_hat + self.delta * v_pds, np.inf)
        return q.argmin(axis=-1)


class MyopicAgent(PdsLearner):
    """Minimizes the current-slot cost estimate; same batch cost learning."""

    def select(self, state: tuple) -> int:
        il, ie, ih, ib = state
        return _masked_argmin(self.c_hat[il, ie, ih, ib], self.tables.feasible[il, ib])

    def observe(self, rec: SlotRecord) -> None:
        if rec.slot != self.t:
            raise StaleRecord(f"record for slot {rec.slot}, expected {self.t}")
        t = self.tables
        _, ie, _, _ = rec.state
        rho = 1.0 / (1.0 + self._rho_scale * self.n_env[ie])
        cs = self.c_hat[:, ie]
        cs *= 1.0 - rho
        cs += rho * t.realized[rec.g_index]
        self.n_env[ie] += 1
        self.t += 1

    def greedy_policy(self) -> np.ndarray:
        t = self.tables
        q = np.where(t.feas5, self.c_hat, np.inf)
        return q.argmin(axis=-1)


class QLearner:
    """Tabular Q-learning over (state, action), epsilon-greedy on feasible."""

    def __init__(self, cfg: Config, tables: ModelTables, horizon: int, seed: int = 0):
        self.cfg = cfg
        self.tables = tables
        self.delta = cfg.discount
        self.horizon = max(horizon, 1)
        self.params = cfg.q_learning
        self.t = 0
        shape = tables.space.shape
        self.q = np.zeros(shape + (tables.n_actions,))
        self.visits = np.zeros(shape + (tables.n_actions,), dtype=np.int64)
        self._rng = _AgentRng(seed)

    def epsilon(self, t: int) -> float:
        p = self.params
        span = p.epsilon_decay_fraction * self.horizon
        frac = min(t / span, 1.0)
        return p.epsilon_start + (p.epsilon_min - p.epsilon_start) * frac

    def select(self, state: tuple) -> int:
        il, ie, ih, ib = state
        tb = self.tables
        if self._rng().random() < self.epsilon(self.t):
            options = tb.feasible_action_indices(il, ib)
            return int(options[self._rng().integers(options.size)])
        return _masked_argmin(self.q[il, ie, ih, ib], tb.feasible[il, ib])

    def observe(self, rec: SlotRecord) -> None:
        if rec.slot != self.t:
            raise StaleRecord(f"record for slot {rec.slot}, expected {self.t}")
        tb = self.tables
        il, ie, ih, ib = rec.state
        il1, ie1, ih1, ib1 = rec.next_state
        sa = (il, ie, ih, ib, rec.action)
        beta = 1.0 / (1.0 + self.visits[sa]) ** self.params.visit_exponent
        nxt = np.where(tb.feasible[il1, ib1], self.q[il1, ie1, ih1, ib1], np.inf)
        self.q[sa] = q_update(self.q[sa], rec.cost, float(nxt.min()), self.delta, beta)
        self.visits[sa] += 1
        self.t += 1

    def greedy_policy(self) -> np.ndarray:
        tb = self.tables
        q = np.where(tb.feas5, self.q, np.inf)
        return q.argmin(axis=-1)


class FixedPowerAgent:
    """Requests a configured demand level whenever feasible, floored to it."""

    def __init__(self, cfg: Config, tables: ModelTables, level: float):
        self.tables = tables
        self.level_idx = tables.action_index(level)
        self.t = 0

    def select(self, state: tuple) -> int:
        il, _, _, ib = state
        row = self.tables.feasible[il, ib]
        allowed = np.nonzero(row[: self.level_idx + 1])[0]
        return int(allowed[-1])  # largest feasible level at or below the target

    def observe(self, rec: SlotRecord) -> None:
        self.t += 1

    def greedy_policy(self) -> np.ndarray:
        t = self.tables
        nl, ne, nh, nb = t.space.shape
        pol = np.empty((nl, ne, nh, nb), dtype=np.int64)
        for il in range(nl):
            for ib in range(nb):
                row = t.feasible[il, ib]
                pol[il, :, :, ib] = int(np.nonzero(row[: self.level_idx + 1])[0][-1])
        return pol


class OraclePolicyAgent:
    """Plays a precomputed optimal policy; learns nothing."""

    def __init__(self, policy: np.ndarray):
        self.policy = policy
        self.t = 0

    def select(self, state: tuple) -> int:
        return int(self.policy[state])

    def observe(self, rec: SlotRecord) -> None:
        self.t += 1

    def greedy_policy(self) -> np.ndarray:
        return self.policy


def make_agent(scheme: str, cfg: Config, tables: ModelTables, horizon: int,
               seed: int, oracle_policy: np.ndarray | None = None):
    """Build the agent for a scheme name: pds, q, myopic, fixed:<level>, oracle."""
    if scheme == "pds":
        return PdsLearner(cfg, tables, seed=seed)
    if scheme == "q":
        return QLearner(cfg, tables, horizon=horizon, seed=seed)
    if scheme == "myopic":
        return MyopicAgent(cfg, tables, seed=seed)
    if scheme == "oracle":
        if oracle_policy is None:
            raise ValueError("oracle scheme needs a solved policy")
        return OraclePolicyAgent(oracle_policy)
    if scheme.startswith("fixed:"):
        try:
            level = float(scheme.split(":", 1)[1])
        except ValueError:
            raise UnknownScheme(f"bad fixed level in {scheme!r}") from None
        try:
            return FixedPowerAgent(cfg, tables, level)
        except InfeasibleAction:
            raise UnknownScheme(f"fixed level {level} is not on the action grid") from None
    raise UnknownScheme(scheme)
