"""Deterministic cost and dynamics arithmetic for the edge system.

Everything here is a pure function of its arguments: power demand, delay
costs, the inner server/offload allocation search, the battery update, and
the realized one-slot cost. Energies are Wh per slot; cost-bearing energies
are divided by 1000 so the per-kWh price parameters act on kWh.
"""
from __future__ import annotations

import math
from typing import NamedTuple

from .config import Config, SystemState
from .errors import UnstableQueue


class DelayBreakdown(NamedTuple):
    wireless: float  # access/transmission queueing at the base station
    local: float     # processing at the edge servers
    offload: float   # round-trip exposure of the workload sent to the cloud
    total: float


class Allocation(NamedTuple):
    """Server count and local workload minimizing delay under a demand budget."""

    m: int
    mu: int           # units/second processed locally
    delay_cost: float


def op_demand(lam: float, cfg: Config) -> float:
    """Basic operation and transmission demand, Wh/slot."""
    p = cfg.power
    return p.static_wh + p.dynamic_wh_per_unit * lam


def com_demand(m: int, mu: float, cfg: Config) -> float:
    """Computing demand of m active servers processing mu units/s, Wh/slot."""
    p = cfg.power
    return m * p.idle_wh + (mu / p.service_rate) * (p.peak_wh - p.idle_wh)


def wireless_delay(lam: float, cfg: Config) -> float:
    """Base-station access delay cost at total arrival rate lam."""
    rho = sum(f * lam / rate for f, rate in cfg.locations)
    if rho >= 1:
        raise UnstableQueue(f"wireless utilization {rho} >= 1 at workload {lam}")
    return sum(f * lam / (rate * (1.0 - rho)) for f, rate in cfg.locations)


def delay_cost(h: float, lam: float, m: int, mu: float, cfg: Config) -> DelayBreakdown:
    """One-slot delay cost split into wireless, local, and offload parts.

    The local term is the mean response time of the server pool scaled by
    the local arrival rate, with the load normalized by the per-server
    service rate; it is defined as 0 for the empty pool m = mu = 0.
    """
    if m == 0:
        if mu != 0:
            raise UnstableQueue("local workload with no active servers")
        local = 0.0
    else:
        load = mu / cfg.power.service_rate
        if load >= m:
            raise UnstableQueue(
                f"local workload {mu} meets capacity of {m} servers"
            )
        local = load / (m - load)
    wireless = wireless_delay(lam, cfg)
    offload = (lam - mu) * max(h - cfg.costs.offload_threshold_s, 0.0)
    return DelayBreakdown(wireless, local, offload, wireless + local + offload)


def solve_allocation(s: SystemState, a: float, cfg: Config) -> Allocation:
    """Minimize delay over (m, mu) subject to the computing budget a.

    Searches m in 0..max_servers and integer mu in 0..lam, keeping pairs
    with com_demand(m, mu) <= a and a stable queue. Ties break toward
    smaller m, then smaller mu; full offload (0, 0) is always feasible.
    """
    lam, h = s.workload, s.congestion
    p = cfg.power
    mu_top = int(math.floor(lam))
    best: Allocation | None = None
    for m in range(p.max_servers + 1):
        if m * p.idle_wh > a:
            break  # idle demand alone already over budget; grows with m
        for mu in range(0, mu_top + 1):
            if m == 0 and mu > 0:
                break
            if m > 0 and mu >= m * p.service_rate:
                break
            if com_demand(m, mu, cfg) > a:
                break  # demand increases with mu
            total = delay_cost(h, lam, m, mu, cfg).total
            if best is None or total < best.delay_cost:
                best = Allocation(m, mu, total)
    assert best is not None  # (0, 0) always qualifies
    return best


def battery_next(b: float, lam: float, a: float, g: float, cfg: Config) -> float:
    """Battery level at the next slot start, clamped to [0, capacity].

    When basic demand exceeds the stored level the backup supply covers the
    slot and the battery only charges; otherwise basic demand plus the full
    demand budget a discharge it.
    """
    cap = cfg.battery.capacity_wh
    d_op = op_demand(lam, cfg)
    if d_op > b:
        nxt = b + g
    else:
        nxt = b - d_op - a + g
    return min(max(nxt, 0.0), cap)


def post_decision_battery(b: float, lam: float, a: float, cfg: Config) -> float:
    """Virtual battery level after committing demand, before the green draw."""
    d_op = op_demand(lam, cfg)
    if d_op > b:
        return b
    return max(b - d_op - a, 0.0)


def realized_cost(s: SystemState, a: float, g: float, cfg: Config) -> float:
    """One-slot cost realized once the green budget g is known.

    Backup slots (basic demand above the stored level) pay the full-offload
    delay plus the backup penalty; normal slots pay the optimal delay under
    budget a plus depreciation on the discharged energy.
    """
    lam, h, b = s.workload, s.congestion, s.battery
    d_op = op_demand(lam, cfg)
    if d_op > b:
        base = delay_cost(h, lam, 0, 0, cfg).total
        return base + cfg.costs.backup_per_kwh * d_op / 1000.0
    alloc = solve_allocation(s, a, cfg)
    if cfg.depreciation_basis == "total_demand":
        demand = d_op + a
    else:
        demand = a
    discharge = max(demand - g, 0.0)
    return alloc.delay_cost + cfg.costs.depreciation_per_kwh * discharge / 1000.0
