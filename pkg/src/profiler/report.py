"""Rendering of pretenuring recommendations."""

import json
from typing import List

from rich.console import Console
from rich.table import Table

from src.profiler.analysis import Recommendation, LONG_LIVED_LABEL


def suggested_actions(recommendation: Recommendation) -> List[str]:
    actions = []
    for group in recommendation.groups:
        sites = ", ".join(group.sites)
        if group.label == LONG_LIVED_LABEL:
            actions.append(
                f"[{group.label}] create one generation at startup with new_generation() "
                f"and allocate at {sites} with pretenure=True"
            )
        else:
            actions.append(
                f"[{group.label}] call new_generation() when a new cohort starts and allocate "
                f"at {sites} with pretenure=True"
            )
    if not actions:
        actions.append("no site lives long enough to benefit from pretenuring")
    return actions


def build_table(recommendation: Recommendation) -> Table:
    table = Table(title=f"Allocation sites (epoch {recommendation.epoch})")
    table.add_column("Site", style="cyan")
    table.add_column("Allocs", justify="right")
    table.add_column("Bytes", justify="right")
    table.add_column("Dead", justify="right")
    table.add_column("Live", justify="right")
    table.add_column("Median life", justify="right")
    table.add_column("Median death", justify="right")
    table.add_column("Group", style="green")

    def fmt(value):
        return "-" if value is None else f"{value:g}"

    for site_id, entry in sorted(recommendation.rationale.items()):
        table.add_row(
            site_id,
            str(entry.alloc_count),
            f"{entry.alloc_bytes:,}",
            str(entry.completed),
            str(entry.censored),
            fmt(entry.median_lifetime),
            fmt(entry.median_death_epoch),
            entry.cohort or "",
        )
    return table


def render_text(recommendation: Recommendation, width: int = 120) -> str:
    console = Console(width=width, color_system=None)
    with console.capture() as capture:
        console.print(build_table(recommendation))
        console.print("\n[bold]Suggested changes[/bold]")
        for action in suggested_actions(recommendation):
            console.print(f"  - {action}", markup=False)
    return capture.get()


def render_json(recommendation: Recommendation) -> str:
    data = recommendation.to_dict()
    data["actions"] = suggested_actions(recommendation)
    return json.dumps(data, indent=2)
