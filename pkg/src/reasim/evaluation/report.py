"""Report output: CSV rows plus a formatted text table."""

from __future__ import annotations

import csv

from .battery import EvalReport
from .episode import OUTCOMES

_COLUMNS = [
    "scenario",
    "variant",
    "success_mean",
    "success_std",
    "termination_mean",
    "termination_std",
    "timeout_mean",
    "timeout_std",
    "groups",
    "episodes_per_group",
]


def write_csv(reports: list[EvalReport], path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for r in reports:
            row = r.summary()
            w.writerow({k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in row.items()})


def format_table(reports: list[EvalReport]) -> str:
    """Success/termination/timeout rows grouped by scenario."""
    lines = []
    header = f"{'Scenario':14s} {'System':14s} {'Succ. (%)':>14s} {'Term. (%)':>14s} {'TO (%)':>14s}"
    lines.append(header)
    lines.append("-" * len(header))
    last_scenario = None
    for r in reports:
        scen = r.scenario if r.scenario != last_scenario else ""
        if last_scenario is not None and scen:
            lines.append("-" * len(header))
        last_scenario = r.scenario
        cells = [
            f"{r.mean(o):5.1f} ± {r.std(o):4.1f}" for o in OUTCOMES
        ]
        lines.append(
            f"{scen:14s} {r.variant:14s} {cells[0]:>14s} {cells[1]:>14s} {cells[2]:>14s}"
        )
    return "\n".join(lines)
