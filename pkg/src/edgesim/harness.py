"""Experiment orchestration: seeded runs, metric accounting, CSV/JSON output.

Replicas are seeded base_seed + replica index, so two invocations with the
same arguments emit byte-identical CSVs, and `compare` gives every scheme
the identical exogenous draw sequence per replica (common random numbers).
The running-average series is a prefix mean of realized per-slot costs
averaged across replicas and is recomputable from the shipped records.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import SlotRecord, make_agent
from .config import Config
from .env import ModelTables, World
from .errors import UnknownScheme
from .oracle import bellman_residual, value_iteration

SUMMARY_SCHEMA_VERSION = 1

KNOWN_SCHEMES = ("pds", "q", "myopic", "oracle")


@dataclass
class SchemeResult:
    """Raw per-replica outcome arrays for one scheme."""

    scheme: str
    costs: np.ndarray          # (runs, slots)
    battery_idx: np.ndarray    # (runs, slots) battery index after each slot
    records: list              # list per replica of per-slot tuples
    policy: np.ndarray         # greedy policy of replica 0 after the run
    running_avg: np.ndarray    # (slots,) prefix mean across replicas
    discounted: np.ndarray     # (runs,) discounted cumulative cost
    wall_clock_s: float


@dataclass
class RunSummary:
    """What `run_experiment` reports back and writes to summary.json.

    `per_scheme` carries the scalar stats written to summary.json;
    `results` keeps the full per-replica arrays (per-slot costs, running
    averages, battery trajectories, discounted totals) for programmatic use.
    """

    schemes: list
    slots: int
    runs: int
    base_seed: int
    per_scheme: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)


def _check_scheme(scheme: str) -> None:
    if scheme in KNOWN_SCHEMES or scheme.startswith("fixed:"):
        return
    raise UnknownScheme(scheme)


def _simulate_scheme(cfg: Config, tables: ModelTables, scheme: str, slots: int,
                     runs: int, base_seed: int,
                     oracle_policy: np.ndarray | None = None) -> SchemeResult:
    started = time.perf_counter()
    costs = np.zeros((runs, slots))
    battery_idx = np.zeros((runs, slots), dtype=np.int64)
    all_records = []
    policy = None
    for r in range(runs):
        seed = base_seed + r
        world = World(cfg, seed=seed, tables=tables)
        agent = make_agent(scheme, cfg, tables, horizon=slots, seed=seed,
                           oracle_policy=oracle_policy)
        records = []
        for t in range(slots):
            state = world.coords
            ia = agent.select(state)
            res = world.step_index(ia)
            rec = SlotRecord(t, state, ia, res.g_idx,
                             float(tables.g_support[res.g_idx]), res.cost,
                             world.coords, res.backup)
            agent.observe(rec)
            costs[r, t] = res.cost
            battery_idx[r, t] = world.coords[3]
            records.append(rec)
        all_records.append(records)
        if r == 0:
            policy = agent.greedy_policy()
    if policy is None:  # runs >= 1 enforced by callers, but stay safe
        policy = np.zeros(tables.space.shape, dtype=np.int64)
    if slots > 0:
        running_avg = np.cumsum(costs.mean(axis=0)) / np.arange(1, slots + 1)
    else:
        running_avg = np.zeros(0)
    discounted = costs @ (cfg.discount ** np.arange(slots))
    return SchemeResult(
        scheme=scheme,
        costs=costs,
        battery_idx=battery_idx,
        records=all_records,
        policy=policy,
        running_avg=running_avg,
        discounted=discounted,
        wall_clock_s=time.perf_counter() - started,
    )


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_runtime_costs(out: Path, results: list, slots: int) -> None:
    header = ["slot"] + [r.scheme for r in results]
    rows = (
        [t] + [r.running_avg[t] for r in results] for t in range(slots)
    )
    _write_csv(out / "runtime_costs.csv", header, rows)


def _write_battery_hist(out: Path, results: list, tables: ModelTables) -> None:
    nb = tables.b_levels.size
    header = ["battery_wh"] + [r.scheme for r in results]
    counts = [
        np.bincount(r.battery_idx.ravel(), minlength=nb) for r in results
    ]
    rows = (
        [tables.b_levels[i]] + [c[i] for c in counts] for i in range(nb)
    )
    _write_csv(out / "battery_hist.csv", header, rows)


def _write_policy(out: Path, name: str, policy: np.ndarray,
                  tables: ModelTables) -> None:
    space = tables.space
    header = [
        "state_index", "workload", "environment", "congestion_s",
        "battery_wh", "action_wh", "servers", "local_rate",
    ]

    def rows():
        for i in range(space.n):
            il, ie, ih, ib = space.coords_of(i)
            ia = int(policy[il, ie, ih, ib])
            yield [
                i,
                space.lambdas[il],
                space.env_labels[ie],
                space.rtts[ih],
                space.battery_levels[ib],
                tables.a_levels[ia],
                tables.alloc_m[il, ih, ia],
                tables.alloc_mu[il, ih, ia],
            ]

    _write_csv(out / name, header, rows())


def _write_records(out: Path, results: list, tables: ModelTables) -> None:
    space = tables.space
    header = [
        "scheme", "run", "slot", "workload", "environment", "congestion_s",
        "battery_wh", "action_wh", "green_wh", "cost", "backup",
        "battery_after_wh",
    ]

    def rows():
        for res in results:
            for r, records in enumerate(res.records):
                for rec in records:
                    il, ie, ih, ib = rec.state
                    yield [
                        res.scheme, r, rec.slot,
                        space.lambdas[il], space.env_labels[ie], space.rtts[ih],
                        space.battery_levels[ib], tables.a_levels[rec.action],
                        rec.g_wh, rec.cost, rec.backup,
                        space.battery_levels[rec.next_state[3]],
                    ]

    _write_csv(out / "records.csv", header, rows())


def _write_trace(out: Path, results: list, tables: ModelTables) -> None:
    space = tables.space
    header = ["scheme", "run", "slot", "green_wh", "workload", "environment",
              "congestion_s"]

    def rows():
        for res in results:
            for r, records in enumerate(res.records):
                for rec in records:
                    il1, ie1, ih1, _ = rec.next_state
                    yield [
                        res.scheme, r, rec.slot, rec.g_wh,
                        space.lambdas[il1], space.env_labels[ie1],
                        space.rtts[ih1],
                    ]

    _write_csv(out / "trace.csv", header, rows())


def _summarize(res: SchemeResult, tables: ModelTables, slots: int,
               runs: int) -> dict:
    nb = tables.b_levels.size
    counts = np.bincount(res.battery_idx.ravel(), minlength=nb)
    total = slots * runs
    return {
        "final_running_avg_cost": (
            float(res.running_avg[-1]) if slots > 0 else None
        ),
        "discounted_costs": [float(v) for v in res.discounted],
        "mean_discounted_cost": float(res.discounted.mean()),
        "battery_mean_wh": (
            float((counts * tables.b_levels).sum() / total) if total else None
        ),
        "frac_at_capacity": (
            float(counts[-1] / total) if total else None
        ),
        "wall_clock_s": res.wall_clock_s,
    }


def _emit(out_dir, cfg: Config, tables: ModelTables, results: list,
          slots: int, runs: int, base_seed: int, trace: bool,
          extra: dict | None = None) -> RunSummary:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_runtime_costs(out, results, slots)
    _write_battery_hist(out, results, tables)
    for res in results:
        suffix = "" if len(results) == 1 else "_" + res.scheme.replace(":", "_")
        _write_policy(out, f"policy{suffix}.csv", res.policy, tables)
    _write_records(out, results, tables)
    if trace:
        _write_trace(out, results, tables)
    summary = RunSummary(
        schemes=[r.scheme for r in results],
        slots=slots,
        runs=runs,
        base_seed=base_seed,
        per_scheme={r.scheme: _summarize(r, tables, slots, runs) for r in results},
        results={r.scheme: r for r in results},
    )
    doc = {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "schemes": summary.schemes,
        "slots": slots,
        "runs": runs,
        "base_seed": base_seed,
        "per_scheme": summary.per_scheme,
    }
    if extra:
        doc.update(extra)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def run_experiment(cfg: Config, scheme: str, slots: int, runs: int,
                   base_seed: int, out_dir, trace: bool = False) -> RunSummary:
    """Simulate one scheme over seeded replicas and write its artifacts."""
    if slots < 0 or runs < 1:
        raise ValueError("need slots >= 0 and runs >= 1")
    _check_scheme(scheme)
    tables = ModelTables(cfg)
    oracle_policy = None
    if scheme == "oracle":
        oracle_policy = value_iteration(cfg, tables=tables).policy
    res = _simulate_scheme(cfg, tables, scheme, slots, runs, base_seed,
                           oracle_policy)
    return _emit(out_dir, cfg, tables, [res], slots, runs, base_seed, trace)


def compare(cfg: Config, schemes: list, slots: int, runs: int, base_seed: int,
            out_dir, trace: bool = False) -> dict:
    """Run schemes under common random numbers and report cost reductions.

    Returns {"final": {scheme: final running-average cost},
             "reduction_vs_best": {scheme: fractional reduction the best
             scheme achieves against it at the final slot}}.
    """
    if len(schemes) < 2:
        raise ValueError("compare needs at least two schemes")
    if slots < 1 or runs < 1:
        raise ValueError("need slots >= 1 and runs >= 1")
    for s in schemes:
        _check_scheme(s)
    tables = ModelTables(cfg)
    oracle_policy = None
    if "oracle" in schemes:
        oracle_policy = value_iteration(cfg, tables=tables).policy
    results = []
    seen: dict[str, int] = {}
    for scheme in schemes:
        res = _simulate_scheme(cfg, tables, scheme, slots, runs, base_seed,
                               oracle_policy)
        # duplicate scheme names stay distinguishable in the CSV header
        if scheme in seen:
            seen[scheme] += 1
            res.scheme = f"{scheme}#{seen[scheme]}"
        else:
            seen[scheme] = 1
        results.append(res)
    final = {r.scheme: float(r.running_avg[-1]) for r in results}
    best_scheme = min(final, key=final.get)
    best = final[best_scheme]
    reduction = {
        name: (0.0 if cost == 0 else (cost - best) / cost)
        for name, cost in final.items()
    }
    extra = {
        "final_running_avg_cost": final,
        "best_scheme": best_scheme,
        "reduction_vs_best": reduction,
    }
    _emit(out_dir, cfg, tables, results, slots, runs, base_seed, trace, extra)
    return {"final": final, "best_scheme": best_scheme,
            "reduction_vs_best": reduction}


def solve(cfg: Config, out_dir, tol: float = 1e-9) -> None:
    """Dump the oracle tables (cost-to-go, post-decision values, policy)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = ModelTables(cfg)
    vt = value_iteration(cfg, tol=tol, tables=tables)
    residual = bellman_residual(vt, cfg, tables)
    space = tables.space

    def c_rows():
        for i in range(space.n):
            il, ie, ih, ib = space.coords_of(i)
            yield [
                i, space.lambdas[il], space.env_labels[ie], space.rtts[ih],
                space.battery_levels[ib], vt.c_star[il, ie, ih, ib],
                residual[il, ie, ih, ib],
            ]

    _write_csv(
        out / "C_star.csv",
        ["state_index", "workload", "environment", "congestion_s",
         "battery_wh", "c_star", "bellman_residual"],
        c_rows(),
    )

    def v_rows():
        for i in range(space.n):
            il, ie, ih, ib = space.coords_of(i)
            yield [
                i, space.lambdas[il], space.env_labels[ie], space.rtts[ih],
                space.battery_levels[ib], vt.v_star[il, ie, ih, ib],
            ]

    _write_csv(
        out / "V_star.csv",
        ["state_index", "workload", "environment", "congestion_s",
         "battery_post_wh", "v_star"],
        v_rows(),
    )

    _write_policy(out, "policy_star.csv", vt.policy, tables)
