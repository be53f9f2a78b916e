"""Configuration schema, validation, and state-space enumeration.

All energy bookkeeping is in watt-hours per slot: a device drawing P watts
contributes P * slot_hours Wh each slot. The workload, environment, and
congestion value sets are finite, the battery lives on a uniform grid, and
the full system state space is their Cartesian product enumerated in
(workload, environment, congestion, battery) lexicographic order with the
battery index minor.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple

from .errors import ConfigError

SCHEMA_VERSION = 1

_GRID_TOL = 1e-9
_SUM_TOL = 1e-12


class SystemState(NamedTuple):
    """Observable state at slot start."""

    workload: float       # arrival rate, units/second
    environment: str      # environment class label
    congestion: float     # round-trip time incl. cloud service, seconds
    battery: float        # stored energy, Wh


class PdsState(NamedTuple):
    """Virtual state after the demand decision, before the green draw."""

    workload: float
    environment: str
    congestion: float
    battery_post: float


@dataclass(frozen=True)
class ChainSpec:
    """Finite-state Markov chain: value list plus row-stochastic matrix."""

    values: tuple
    matrix: tuple  # tuple of row tuples


@dataclass(frozen=True)
class GreenSpec:
    """Conditional green-energy distribution, one normal per environment class.

    The distribution is discretized onto ``support_wh`` (the battery grid
    truncated at ``cap_wh``); ``support_wh`` is materialized by validation.
    """

    means_wh: tuple
    stds_wh: tuple
    cap_wh: float
    support_wh: tuple = ()


@dataclass(frozen=True)
class PowerParams:
    static_wh: float            # base-station static demand per slot
    dynamic_wh_per_unit: float  # transmission demand per unit/s of workload
    idle_wh: float              # per active server, idle
    peak_wh: float              # per server at full load
    service_rate: float         # per-server service rate, units/second
    max_servers: int


@dataclass(frozen=True)
class CostParams:
    depreciation_per_kwh: float  # battery wear per kWh discharged
    backup_per_kwh: float        # diesel-slot penalty per kWh of basic demand
    offload_threshold_s: float   # RTT below which offloading is free


@dataclass(frozen=True)
class BatterySpec:
    capacity_wh: float
    step_wh: float
    initial_wh: float


@dataclass(frozen=True)
class PdsLearningParams:
    cost_rate_scale: float   # rho_t = 1 / (1 + scale * visits(e))
    value_rate_scale: float  # alpha_t = 1 / (1 + scale * visits(lambda,e,h))
    epsilon: float           # optional exploration floor (0 = pure greedy)


@dataclass(frozen=True)
class QLearningParams:
    epsilon_start: float
    epsilon_min: float
    epsilon_decay_fraction: float  # fraction of the horizon spent decaying
    visit_exponent: float          # beta = 1 / (1 + visits)**exponent


@dataclass(frozen=True)
class InitialState:
    workload: float
    environment: str
    congestion: float


@dataclass(frozen=True)
class Config:
    """Validated, immutable simulation configuration."""

    slot_hours: float
    discount: float
    depreciation_basis: str  # "total_demand" or "computing_only"
    workload: ChainSpec
    environment: ChainSpec
    congestion: ChainSpec
    battery: BatterySpec
    actions: tuple
    locations: tuple  # of (fraction, rate) pairs
    power: PowerParams
    costs: CostParams
    green: GreenSpec
    pds_learning: PdsLearningParams
    q_learning: QLearningParams
    initial: InitialState

    @property
    def lambdas(self) -> tuple:
        return self.workload.values

    @property
    def env_labels(self) -> tuple:
        return self.environment.values

    @property
    def rtts(self) -> tuple:
        return self.congestion.values

    def battery_levels(self) -> tuple:
        n = int(round(self.battery.capacity_wh / self.battery.step_wh)) + 1
        return tuple(i * self.battery.step_wh for i in range(n))

    def state_space(self) -> "StateSpace":
        return StateSpace(
            self.lambdas, self.env_labels, self.rtts, self.battery_levels()
        )

    def to_dict(self) -> dict:
        """Serialize back to the external JSON schema."""
        return {
            "schema_version": SCHEMA_VERSION,
            "slot_hours": self.slot_hours,
            "discount": self.discount,
            "depreciation_basis": self.depreciation_basis,
            "workload": {
                "values": list(self.workload.values),
                "transition": [list(r) for r in self.workload.matrix],
            },
            "environment": {
                "labels": list(self.environment.values),
                "transition": [list(r) for r in self.environment.matrix],
            },
            "congestion": {
                "values": list(self.congestion.values),
                "transition": [list(r) for r in self.congestion.matrix],
            },
            "battery": {
                "capacity_wh": self.battery.capacity_wh,
                "step_wh": self.battery.step_wh,
                "initial_wh": self.battery.initial_wh,
            },
            "actions": list(self.actions),
            "locations": [
                {"fraction": f, "rate": r} for f, r in self.locations
            ],
            "power": {
                "static_wh": self.power.static_wh,
                "dynamic_wh_per_unit": self.power.dynamic_wh_per_unit,
                "idle_wh": self.power.idle_wh,
                "peak_wh": self.power.peak_wh,
                "service_rate": self.power.service_rate,
                "max_servers": self.power.max_servers,
            },
            "costs": {
                "depreciation_per_kwh": self.costs.depreciation_per_kwh,
                "backup_per_kwh": self.costs.backup_per_kwh,
                "offload_threshold_s": self.costs.offload_threshold_s,
            },
            "green": {
                "means_wh": list(self.green.means_wh),
                "stds_wh": list(self.green.stds_wh),
                "cap_wh": self.green.cap_wh,
            },
            "learning": {
                "pds": {
                    "cost_rate_scale": self.pds_learning.cost_rate_scale,
                    "value_rate_scale": self.pds_learning.value_rate_scale,
                    "epsilon": self.pds_learning.epsilon,
                },
                "q": {
                    "epsilon_start": self.q_learning.epsilon_start,
                    "epsilon_min": self.q_learning.epsilon_min,
                    "epsilon_decay_fraction": self.q_learning.epsilon_decay_fraction,
                    "visit_exponent": self.q_learning.visit_exponent,
                },
            },
            "initial_state": {
                "workload": self.initial.workload,
                "environment": self.initial.environment,
                "congestion": self.initial.congestion,
            },
        }


class StateSpace:
    """Canonical enumeration of the finite state space.

    Index order is lexicographic in (workload, environment, congestion,
    battery) with battery minor, so slices sharing an environment class or
    a full exogenous triple are contiguous.
    """

    def __init__(self, lambdas, env_labels, rtts, battery_levels):
        self.lambdas = tuple(lambdas)
        self.env_labels = tuple(env_labels)
        self.rtts = tuple(rtts)
        self.battery_levels = tuple(battery_levels)
        self.shape = (
            len(self.lambdas),
            len(self.env_labels),
            len(self.rtts),
            len(self.battery_levels),
        )
        self.n = 1
        for d in self.shape:
            self.n *= d
        self._lam_index = {v: i for i, v in enumerate(self.lambdas)}
        self._env_index = {v: i for i, v in enumerate(self.env_labels)}
        self._rtt_index = {v: i for i, v in enumerate(self.rtts)}
        self._step = (
            self.battery_levels[1] - self.battery_levels[0]
            if len(self.battery_levels) > 1
            else 1.0
        )

    def battery_index(self, b: float) -> int:
        i = int(round(b / self._step))
        if not (0 <= i < self.shape[3]) or abs(b - i * self._step) > _GRID_TOL:
            raise ValueError(f"battery level {b} is off the grid")
        return i

    def coords_of(self, index: int) -> tuple:
        nl, ne, nh, nb = self.shape
        index, ib = divmod(index, nb)
        index, ih = divmod(index, nh)
        il, ie = divmod(index, ne)
        return il, ie, ih, ib

    def index_of_coords(self, il: int, ie: int, ih: int, ib: int) -> int:
        _, ne, nh, nb = self.shape
        return ((il * ne + ie) * nh + ih) * nb + ib

    def state_of(self, index: int) -> SystemState:
        il, ie, ih, ib = self.coords_of(index)
        return SystemState(
            self.lambdas[il],
            self.env_labels[ie],
            self.rtts[ih],
            self.battery_levels[ib],
        )

    def exo_coords(self, workload, environment, congestion) -> tuple:
        return (
            self._lam_index[workload],
            self._env_index[environment],
            self._rtt_index[congestion],
        )

    def coords_of_state(self, state: SystemState) -> tuple:
        return (
            self._lam_index[state.workload],
            self._env_index[state.environment],
            self._rtt_index[state.congestion],
            self.battery_index(state.battery),
        )

    def index_of(self, state: SystemState) -> int:
        return self.index_of_coords(*self.coords_of_state(state))

    def states(self) -> list:
        return [self.state_of(i) for i in range(self.n)]


def enumerate_states(cfg: Config) -> list:
    """All system states in canonical order; stable across calls."""
    return cfg.state_space().states()


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    code: str    # EmptySet, UtilizationOverload, GridMisaligned, ...
    where: str   # dotted path into the config document
    message: str

    def __str__(self):
        return f"{self.code} at {self.where}: {self.message}"


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _on_grid(value: float, step: float) -> bool:
    return abs(value / step - round(value / step)) <= _GRID_TOL


def _check_section(raw, path, required, out):
    """Structural check: dict shape, unknown keys, missing keys."""
    if not isinstance(raw, dict):
        out.append(Violation("BadType", path, "expected an object"))
        return False
    ok = True
    for key in raw:
        if key not in required:
            out.append(Violation("UnknownKey", f"{path}.{key}", "unknown key"))
            ok = False
    for key in required:
        if key not in raw:
            out.append(Violation("MissingKey", f"{path}.{key}", "missing key"))
            ok = False
    return ok


def _check_chain(raw, path, value_key, out, numeric_values=True):
    """Validate one chain section; returns (values, matrix) or None."""
    if not _check_section(raw, path, (value_key, "transition"), out):
        return None
    values = raw[value_key]
    matrix = raw["transition"]
    ok = True
    if not isinstance(values, list) or not values:
        out.append(Violation("EmptySet", f"{path}.{value_key}", "empty or not a list"))
        return None
    if numeric_values:
        if not all(_is_num(v) for v in values):
            out.append(Violation("BadType", f"{path}.{value_key}", "values must be numbers"))
            return None
    else:
        if not all(isinstance(v, str) for v in values):
            out.append(Violation("BadType", f"{path}.{value_key}", "labels must be strings"))
            return None
    if len(set(values)) != len(values):
        out.append(Violation("BadValue", f"{path}.{value_key}", "values must be distinct"))
        ok = False
    n = len(values)
    if (
        not isinstance(matrix, list)
        or len(matrix) != n
        or any(not isinstance(r, list) or len(r) != n for r in matrix)
    ):
        out.append(Violation("BadMatrix", f"{path}.transition", f"expected a {n}x{n} matrix"))
        return None
    for i, row in enumerate(matrix):
        if not all(_is_num(p) for p in row):
            out.append(Violation("BadMatrix", f"{path}.transition[{i}]", "entries must be numbers"))
            return None
        if any(p < 0 for p in row):
            out.append(Violation("BadMatrix", f"{path}.transition[{i}]", "negative probability"))
            ok = False
        if abs(sum(row) - 1.0) > _SUM_TOL:
            out.append(
                Violation("BadMatrix", f"{path}.transition[{i}]", f"row sums to {sum(row)!r}, not 1")
            )
            ok = False
    if not ok:
        return None
    return tuple(values), tuple(tuple(r) for r in matrix)


_TOP_KEYS = (
    "schema_version",
    "slot_hours",
    "discount",
    "depreciation_basis",
    "workload",
    "environment",
    "congestion",
    "battery",
    "actions",
    "locations",
    "power",
    "costs",
    "green",
    "learning",
    "initial_state",
)


def collect_violations(raw: dict) -> list:
    """Every violation in the raw config document, never just the first."""
    out: list[Violation] = []
    if not _check_section(raw, "$", _TOP_KEYS, out):
        return out

    if raw.get("schema_version") != SCHEMA_VERSION:
        out.append(
            Violation(
                "BadValue",
                "$.schema_version",
                f"expected {SCHEMA_VERSION}, got {raw.get('schema_version')!r}",
            )
        )

    sh = raw.get("slot_hours")
    if not _is_num(sh):
        out.append(Violation("BadType", "$.slot_hours", "expected a number"))
    elif sh <= 0:
        out.append(Violation("BadValue", "$.slot_hours", f"{sh!r} must be > 0"))
    delta = raw.get("discount")
    if not _is_num(delta):
        out.append(Violation("BadType", "$.discount", "expected a number"))
    elif not 0 <= delta < 1:
        out.append(Violation("BadValue", "$.discount", f"{delta!r} must be in [0, 1)"))

    if raw.get("depreciation_basis") not in ("total_demand", "computing_only"):
        out.append(
            Violation(
                "BadValue",
                "$.depreciation_basis",
                "must be 'total_demand' or 'computing_only'",
            )
        )

    workload = _check_chain(raw.get("workload"), "$.workload", "values", out)
    environment = _check_chain(
        raw.get("environment"), "$.environment", "labels", out, numeric_values=False
    )
    congestion = _check_chain(raw.get("congestion"), "$.congestion", "values", out)

    if workload is not None:
        lams = workload[0]
        if any(v <= 0 for v in lams):
            out.append(Violation("BadValue", "$.workload.values", "rates must be > 0"))
        if list(lams) != sorted(lams):
            out.append(Violation("BadValue", "$.workload.values", "must be sorted ascending"))
    if congestion is not None and any(v <= 0 for v in congestion[0]):
        out.append(Violation("BadValue", "$.congestion.values", "RTTs must be > 0"))

    # battery grid
    battery = None
    braw = raw.get("battery")
    if _check_section(braw, "$.battery", ("capacity_wh", "step_wh", "initial_wh"), out):
        if all(_is_num(braw[k]) for k in ("capacity_wh", "step_wh", "initial_wh")):
            cap, step, init = braw["capacity_wh"], braw["step_wh"], braw["initial_wh"]
            if step <= 0 or cap <= 0:
                out.append(Violation("BadValue", "$.battery", "capacity and step must be > 0"))
            else:
                if not _on_grid(cap, step):
                    out.append(
                        Violation(
                            "GridMisaligned",
                            "$.battery.capacity_wh",
                            f"{cap!r} is not a multiple of step {step!r}",
                        )
                    )
                if not _on_grid(init, step) or not 0 <= init <= cap:
                    out.append(
                        Violation(
                            "GridMisaligned",
                            "$.battery.initial_wh",
                            f"{init!r} must sit on the grid within [0, {cap!r}]",
                        )
                    )
                battery = BatterySpec(float(cap), float(step), float(init))
        else:
            out.append(Violation("BadType", "$.battery", "fields must be numbers"))

    # actions
    actions = None
    araw = raw.get("actions")
    if not isinstance(araw, list) or not araw:
        out.append(Violation("EmptySet", "$.actions", "empty or not a list"))
    elif not all(_is_num(a) for a in araw):
        out.append(Violation("BadType", "$.actions", "levels must be numbers"))
    else:
        if araw[0] != 0:
            out.append(Violation("BadValue", "$.actions", "first level must be 0"))
        if sorted(set(araw)) != list(araw):
            out.append(Violation("BadValue", "$.actions", "levels must be distinct ascending"))
        actions = tuple(float(a) for a in araw)

    # locations
    locations = None
    lraw = raw.get("locations")
    if not isinstance(lraw, list) or not lraw:
        out.append(Violation("EmptySet", "$.locations", "empty or not a list"))
    else:
        entries = []
        ok = True
        for i, entry in enumerate(lraw):
            if not _check_section(entry, f"$.locations[{i}]", ("fraction", "rate"), out):
                ok = False
                continue
            f, r = entry["fraction"], entry["rate"]
            if not (_is_num(f) and _is_num(r)):
                out.append(Violation("BadType", f"$.locations[{i}]", "fields must be numbers"))
                ok = False
                continue
            if f < 0:
                out.append(Violation("BadValue", f"$.locations[{i}].fraction", "must be >= 0"))
                ok = False
            if r <= 0:
                out.append(Violation("BadValue", f"$.locations[{i}].rate", "must be > 0"))
                ok = False
            entries.append((float(f), float(r)))
        if ok:
            total = sum(f for f, _ in entries)
            if abs(total - 1.0) > _SUM_TOL:
                out.append(
                    Violation("BadValue", "$.locations", f"fractions sum to {total!r}, not 1")
                )
            else:
                locations = tuple(entries)

    # power
    power = None
    praw = raw.get("power")
    pkeys = (
        "static_wh",
        "dynamic_wh_per_unit",
        "idle_wh",
        "peak_wh",
        "service_rate",
        "max_servers",
    )
    if _check_section(praw, "$.power", pkeys, out):
        if not all(_is_num(praw[k]) for k in pkeys):
            out.append(Violation("BadType", "$.power", "fields must be numbers"))
        else:
            ok = True
            if not praw["idle_wh"] > 0 or praw["peak_wh"] < praw["idle_wh"]:
                out.append(
                    Violation("BadValue", "$.power", "need peak_wh >= idle_wh > 0")
                )
                ok = False
            if praw["service_rate"] <= 0:
                out.append(Violation("BadValue", "$.power.service_rate", "must be > 0"))
                ok = False
            if praw["max_servers"] < 1 or praw["max_servers"] != int(praw["max_servers"]):
                out.append(Violation("BadValue", "$.power.max_servers", "must be an integer >= 1"))
                ok = False
            if praw["static_wh"] < 0 or praw["dynamic_wh_per_unit"] < 0:
                out.append(Violation("BadValue", "$.power", "demands must be >= 0"))
                ok = False
            if ok:
                power = PowerParams(
                    float(praw["static_wh"]),
                    float(praw["dynamic_wh_per_unit"]),
                    float(praw["idle_wh"]),
                    float(praw["peak_wh"]),
                    float(praw["service_rate"]),
                    int(praw["max_servers"]),
                )

    # costs
    costs = None
    craw = raw.get("costs")
    ckeys = ("depreciation_per_kwh", "backup_per_kwh", "offload_threshold_s")
    if _check_section(craw, "$.costs", ckeys, out):
        if not all(_is_num(craw[k]) for k in ckeys):
            out.append(Violation("BadType", "$.costs", "fields must be numbers"))
        elif any(craw[k] < 0 for k in ckeys):
            out.append(Violation("BadValue", "$.costs", "cost parameters must be >= 0"))
        else:
            costs = CostParams(*(float(craw[k]) for k in ckeys))

    # green
    green = None
    graw = raw.get("green")
    if _check_section(graw, "$.green", ("means_wh", "stds_wh", "cap_wh"), out):
        means, stds, cap = graw["means_wh"], graw["stds_wh"], graw["cap_wh"]
        ne = len(environment[0]) if environment is not None else None
        if (
            not isinstance(means, list)
            or not isinstance(stds, list)
            or not _is_num(cap)
            or not all(_is_num(m) for m in means)
            or not all(_is_num(s) for s in stds)
        ):
            out.append(Violation("BadType", "$.green", "means/stds must be number lists"))
        elif ne is not None and (len(means) != ne or len(stds) != ne):
            out.append(
                Violation("BadValue", "$.green", f"need one mean and std per environment class ({ne})")
            )
        else:
            ok = True
            if any(m < 0 for m in means) or any(s < 0 for s in stds):
                out.append(Violation("BadValue", "$.green", "means and stds must be >= 0"))
                ok = False
            if cap < 0:
                out.append(Violation("BadValue", "$.green.cap_wh", "must be >= 0"))
                ok = False
            if battery is not None:
                if not _on_grid(cap, battery.step_wh):
                    out.append(
                        Violation(
                            "GridMisaligned",
                            "$.green.cap_wh",
                            f"{cap!r} is not a multiple of the battery step {battery.step_wh!r}",
                        )
                    )
                    ok = False
                for i, (m, s) in enumerate(zip(means, stds)):
                    if s == 0 and not _on_grid(m, battery.step_wh):
                        out.append(
                            Violation(
                                "DegenerateSpec",
                                f"$.green.means_wh[{i}]",
                                f"zero std with mean {m!r} off the support grid",
                            )
                        )
                        ok = False
            if ok and battery is not None:
                nsup = int(round(cap / battery.step_wh)) + 1
                support = tuple(i * battery.step_wh for i in range(nsup))
                green = GreenSpec(
                    tuple(float(m) for m in means),
                    tuple(float(s) for s in stds),
                    float(cap),
                    support,
                )

    # learning
    pds_learning = q_learning = None
    lrn = raw.get("learning")
    if _check_section(lrn, "$.learning", ("pds", "q"), out):
        pkeys = ("cost_rate_scale", "value_rate_scale", "epsilon")
        if _check_section(lrn["pds"], "$.learning.pds", pkeys, out):
            d = lrn["pds"]
            if not all(_is_num(d[k]) for k in pkeys):
                out.append(Violation("BadType", "$.learning.pds", "fields must be numbers"))
            elif d["cost_rate_scale"] <= 0 or d["value_rate_scale"] <= 0:
                out.append(
                    Violation("BadValue", "$.learning.pds", "rate scales must be > 0")
                )
            elif not 0 <= d["epsilon"] <= 1:
                out.append(Violation("BadValue", "$.learning.pds.epsilon", "must be in [0, 1]"))
            else:
                pds_learning = PdsLearningParams(
                    float(d["cost_rate_scale"]), float(d["value_rate_scale"]), float(d["epsilon"])
                )
        qkeys = ("epsilon_start", "epsilon_min", "epsilon_decay_fraction", "visit_exponent")
        if _check_section(lrn["q"], "$.learning.q", qkeys, out):
            d = lrn["q"]
            if not all(_is_num(d[k]) for k in qkeys):
                out.append(Violation("BadType", "$.learning.q", "fields must be numbers"))
            else:
                ok = True
                if not 0 < d["epsilon_min"] <= d["epsilon_start"] <= 1:
                    out.append(
                        Violation(
                            "BadValue", "$.learning.q", "need 0 < epsilon_min <= epsilon_start <= 1"
                        )
                    )
                    ok = False
                if not 0 < d["epsilon_decay_fraction"] <= 1:
                    out.append(
                        Violation(
                            "BadValue",
                            "$.learning.q.epsilon_decay_fraction",
                            "must be in (0, 1]",
                        )
                    )
                    ok = False
                # Robbins-Monro: sum beta = inf needs exp <= 1, sum beta^2 < inf needs exp > 0.5
                if not 0.5 < d["visit_exponent"] <= 1:
                    out.append(
                        Violation(
                            "BadValue", "$.learning.q.visit_exponent", "must be in (0.5, 1]"
                        )
                    )
                    ok = False
                if ok:
                    q_learning = QLearningParams(*(float(d[k]) for k in qkeys))

    # initial state
    initial = None
    iraw = raw.get("initial_state")
    if _check_section(iraw, "$.initial_state", ("workload", "environment", "congestion"), out):
        ok = True
        if workload is not None and iraw["workload"] not in workload[0]:
            out.append(
                Violation("BadValue", "$.initial_state.workload", "not in the workload set")
            )
            ok = False
        if environment is not None and iraw["environment"] not in environment[0]:
            out.append(
                Violation("BadValue", "$.initial_state.environment", "not an environment label")
            )
            ok = False
        if congestion is not None and iraw["congestion"] not in congestion[0]:
            out.append(
                Violation("BadValue", "$.initial_state.congestion", "not in the congestion set")
            )
            ok = False
        if ok and workload is not None and environment is not None and congestion is not None:
            initial = InitialState(
                float(iraw["workload"]), iraw["environment"], float(iraw["congestion"])
            )

    # cross-cutting semantic checks, once the pieces exist
    if workload is not None and locations is not None:
        for lam in workload[0]:
            rho = sum(f * lam / r for f, r in locations)
            if rho >= 1:
                out.append(
                    Violation(
                        "UtilizationOverload",
                        "$.locations",
                        f"wireless utilization {rho!r} >= 1 at workload {lam!r}",
                    )
                )
    if workload is not None and power is not None and battery is not None:
        for lam in workload[0]:
            d_op = power.static_wh + power.dynamic_wh_per_unit * lam
            if not _on_grid(d_op, battery.step_wh):
                out.append(
                    Violation(
                        "GridMisaligned",
                        "$.power",
                        f"basic demand {d_op!r} at workload {lam!r} is off the battery grid",
                    )
                )
    if actions is not None and battery is not None:
        for a in actions:
            if not _on_grid(a, battery.step_wh):
                out.append(
                    Violation(
                        "GridMisaligned",
                        "$.actions",
                        f"level {a!r} is not a multiple of the battery step",
                    )
                )
    if actions is not None and power is not None and workload is not None:
        lam_max = max(workload[0])
        mu_top = min(lam_max, power.max_servers * power.service_rate)
        d_com_max = power.max_servers * power.idle_wh + (
            mu_top / power.service_rate
        ) * (power.peak_wh - power.idle_wh)
        if max(actions) < d_com_max:
            out.append(
                Violation(
                    "BadValue",
                    "$.actions",
                    f"max level {max(actions)!r} below max computing demand {d_com_max!r}",
                )
            )

    return out


def validate_config(raw: dict) -> Config:
    """Normalize a raw config document or raise with every violation found."""
    violations = collect_violations(raw)
    if violations:
        raise ConfigError(violations)
    return Config(
        slot_hours=float(raw["slot_hours"]),
        discount=float(raw["discount"]),
        depreciation_basis=raw["depreciation_basis"],
        workload=ChainSpec(
            tuple(float(v) for v in raw["workload"]["values"]),
            tuple(tuple(float(p) for p in r) for r in raw["workload"]["transition"]),
        ),
        environment=ChainSpec(
            tuple(raw["environment"]["labels"]),
            tuple(tuple(float(p) for p in r) for r in raw["environment"]["transition"]),
        ),
        congestion=ChainSpec(
            tuple(float(v) for v in raw["congestion"]["values"]),
            tuple(tuple(float(p) for p in r) for r in raw["congestion"]["transition"]),
        ),
        battery=BatterySpec(
            float(raw["battery"]["capacity_wh"]),
            float(raw["battery"]["step_wh"]),
            float(raw["battery"]["initial_wh"]),
        ),
        actions=tuple(float(a) for a in raw["actions"]),
        locations=tuple(
            (float(e["fraction"]), float(e["rate"])) for e in raw["locations"]
        ),
        power=PowerParams(
            float(raw["power"]["static_wh"]),
            float(raw["power"]["dynamic_wh_per_unit"]),
            float(raw["power"]["idle_wh"]),
            float(raw["power"]["peak_wh"]),
            float(raw["power"]["service_rate"]),
            int(raw["power"]["max_servers"]),
        ),
        costs=CostParams(
            float(raw["costs"]["depreciation_per_kwh"]),
            float(raw["costs"]["backup_per_kwh"]),
            float(raw["costs"]["offload_threshold_s"]),
        ),
        green=GreenSpec(
            tuple(float(m) for m in raw["green"]["means_wh"]),
            tuple(float(s) for s in raw["green"]["stds_wh"]),
            float(raw["green"]["cap_wh"]),
            tuple(
                i * float(raw["battery"]["step_wh"])
                for i in range(
                    int(round(raw["green"]["cap_wh"] / raw["battery"]["step_wh"])) + 1
                )
            ),
        ),
        pds_learning=PdsLearningParams(
            float(raw["learning"]["pds"]["cost_rate_scale"]),
            float(raw["learning"]["pds"]["value_rate_scale"]),
            float(raw["learning"]["pds"]["epsilon"]),
        ),
        q_learning=QLearningParams(
            float(raw["learning"]["q"]["epsilon_start"]),
            float(raw["learning"]["q"]["epsilon_min"]),
            float(raw["learning"]["q"]["epsilon_decay_fraction"]),
            float(raw["learning"]["q"]["visit_exponent"]),
        ),
        initial=InitialState(
            float(raw["initial_state"]["workload"]),
            raw["initial_state"]["environment"],
            float(raw["initial_state"]["congestion"]),
        ),
    )


def load_config(path) -> Config:
    """Parse and validate a JSON config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return validate_config(json.load(fh))


def _packaged(name: str) -> Config:
    text = resources.files("edgesim").joinpath(f"data/{name}").read_text("utf-8")
    return validate_config(json.loads(text))


def default_config() -> Config:
    """The repository default configuration (41 battery levels)."""
    return _packaged("default.json")


def reduced_config() -> Config:
    """Coarse-battery configuration (11 levels) for fast learning studies."""
    return _packaged("reduced.json")
