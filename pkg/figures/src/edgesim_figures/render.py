"""Render cost curves, policy maps, and battery histograms from CSVs.

Figures are a pure function of the CSV inputs: a fixed canvas size, no
timestamps or tool metadata in the output, so re-rendering the same inputs
produces an identical file.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

KINDS = ("cost_curves", "policy_map", "battery_hist")

_SOURCES = {
    "cost_curves": "runtime_costs.csv",
    "policy_map": "policy.csv",
    "battery_hist": "battery_hist.csv",
}

_SAVE_OPTS = dict(dpi=120, metadata={"Software": None})


class SchemaMismatch(Exception):
    """A CSV is missing a column the figure needs; names the offender."""


@dataclass
class FigureSpec:
    kind: str                     # cost_curves, policy_map, or battery_hist
    input_dir: str | Path
    output_path: str | Path
    workload: float | None = None    # policy_map slice, default: largest
    environment: str | None = None   # policy_map slice, default: last label
    options: dict = field(default_factory=dict)

    def source_csv(self) -> Path:
        return Path(self.input_dir) / _SOURCES[self.kind]


def _read(path: Path, required: tuple) -> tuple:
    if not path.exists():
        raise SchemaMismatch(f"{path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaMismatch(f"{path} has no header row")
    header = rows[0]
    for col in required:
        if col not in header:
            raise SchemaMismatch(f"{path} is missing column {col!r}")
    return header, rows[1:]


def _cost_curves(spec: FigureSpec, ax) -> None:
    header, rows = _read(spec.source_csv(), ("slot",))
    schemes = header[1:]
    slots = [int(r[0]) for r in rows]
    for j, name in enumerate(schemes):
        ax.plot(slots, [float(r[j + 1]) for r in rows], label=name, linewidth=1.4)
    ax.set_xlabel("time slot")
    ax.set_ylabel("running average cost")
    ax.set_title("Run-time cost by scheme")
    if schemes:
        ax.legend(loc="upper right", fontsize=8)


def _policy_map(spec: FigureSpec, ax, fig) -> None:
    required = ("workload", "environment", "congestion_s", "battery_wh",
                "action_wh")
    header, rows = _read(spec.source_csv(), required)
    col = {name: header.index(name) for name in required}
    if not rows:
        raise SchemaMismatch(f"{spec.source_csv()} has no policy rows")
    workloads = sorted({float(r[col["workload"]]) for r in rows})
    env_labels = list(dict.fromkeys(r[col["environment"]] for r in rows))
    lam = spec.workload if spec.workload is not None else workloads[-1]
    env = spec.environment if spec.environment is not None else env_labels[-1]
    picked = [
        r for r in rows
        if float(r[col["workload"]]) == lam and r[col["environment"]] == env
    ]
    if not picked:
        raise SchemaMismatch(
            f"no rows at workload {lam!r} and environment {env!r}"
        )
    rtts = sorted({float(r[col["congestion_s"]]) for r in picked})
    levels = sorted({float(r[col["battery_wh"]]) for r in picked})
    grid = [[0.0] * len(levels) for _ in rtts]
    for r in picked:
        i = rtts.index(float(r[col["congestion_s"]]))
        j = levels.index(float(r[col["battery_wh"]]))
        grid[i][j] = float(r[col["action_wh"]])
    im = ax.imshow(grid, aspect="auto", origin="lower", cmap="viridis")
    ax.set_xticks(range(0, len(levels), max(len(levels) // 8, 1)))
    ax.set_xticklabels(
        [f"{levels[i]:g}" for i in range(0, len(levels), max(len(levels) // 8, 1))]
    )
    ax.set_yticks(range(len(rtts)))
    ax.set_yticklabels([f"{h:g}" for h in rtts])
    ax.set_xlabel("battery level (Wh)")
    ax.set_ylabel("congestion RTT (s)")
    ax.set_title(f"Computing demand policy (workload {lam:g}, {env})")
    fig.colorbar(im, ax=ax, label="demand (Wh/slot)")


def _battery_hist(spec: FigureSpec, ax) -> None:
    header, rows = _read(spec.source_csv(), ("battery_wh",))
    schemes = header[1:]
    levels = [float(r[0]) for r in rows]
    for j, name in enumerate(schemes):
        counts = [int(r[j + 1]) for r in rows]
        total = sum(counts) or 1
        ax.step(levels, [c / total for c in counts], where="mid", label=name,
                linewidth=1.4)
    ax.set_xlabel("battery level (Wh)")
    ax.set_ylabel("fraction of slots")
    ax.set_title("Battery state distribution by scheme")
    if schemes:
        ax.legend(loc="upper center", fontsize=8)


def render(spec: FigureSpec) -> Path:
    """Render one figure kind to spec.output_path; returns the path."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        if spec.kind == "cost_curves":
            _cost_curves(spec, ax)
        elif spec.kind == "policy_map":
            _policy_map(spec, ax, fig)
        else:
            _battery_hist(spec, ax)
        out = Path(spec.output_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, **_SAVE_OPTS)
    finally:
        plt.close(fig)
    return Path(spec.output_path)
