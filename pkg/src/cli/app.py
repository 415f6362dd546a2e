"""CLI application for running, profiling and comparing GC simulations."""

import json
from enum import Enum
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.prompt import Confirm
from rich.table import Table

from src.config import settings, ensure_directories
from src.collector import GcLog
from src.harness import (
    MetricsReport,
    compare_report,
    gen0_sweep,
    load_workload,
    parse_workload,
    render_comparison,
    render_metrics,
    resolve_config,
    run_selftest,
    run_workload,
)
from src.profiler import LifetimeProfiler, analyze, render_json, render_text
from src.storage import RunStore
from src.utils.errors import (
    ConfigurationError,
    GcLogFormatError,
    IncompatibleReportsError,
    SimulatorError,
    WorkloadSpecError,
)
from src.utils.logger import setup_logging

# Reports go to stdout, diagnostics to stderr
console = Console()
err_console = Console(stderr=True)

# Usage, spec and file problems exit with 2; simulation failures with 1.
USAGE_ERRORS = (ConfigurationError, GcLogFormatError, IncompatibleReportsError, WorkloadSpecError)

SWEEP_SPEC = {
    "kind": "buffer",
    "name": "sweep",
    "duration_ops": 20_000,
    "retention": {"cohort_bytes": 256 * 1024, "cohort_ops": 4_000},
}


class Pretenure(str, Enum):
    on = "on"
    off = "off"


class OutputFormat(str, Enum):
    text = "text"
    structured = "structured"


def fail(exc: Exception) -> typer.Exit:
    """Print a diagnostic and build the matching exit."""
    err_console.print(f"[bold red]Error:[/bold red] {escape(str(exc))}", highlight=False, soft_wrap=True)
    return typer.Exit(2 if isinstance(exc, USAGE_ERRORS) else 1)


def _load_spec(spec_file: Path, seed: Optional[int], pretenure: Optional[Pretenure]):
    spec = load_workload(spec_file)
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if pretenure is not None:
        updates["pretenure_enabled"] = pretenure == Pretenure.on
    return spec.model_copy(update=updates) if updates else spec


def _default_out(label: str, pretenure_enabled: bool, seed: int) -> Path:
    mode = "pretenure" if pretenure_enabled else "baseline"
    return Path(settings.output_dir) / f"{label}-{mode}-s{seed}"


def create_app() -> typer.Typer:
    """Create and configure the Typer CLI application."""
    app = typer.Typer(
        name="gcsim",
        help="N-generational pretenuring garbage collector simulator",
        add_completion=False
    )

    @app.callback()
    def main(
        verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
        log_level: str = typer.Option("WARNING", "--log-level", help="Set log level")
    ):
        """Initialize the application."""
        settings.log_level = "DEBUG" if verbose else log_level.upper()
        setup_logging()
        ensure_directories()

    @app.command()
    def run(
        spec_file: Path = typer.Argument(..., help="Workload spec file (YAML)"),
        heap_bytes: Optional[int] = typer.Option(None, "--heap-bytes", help="Total heap size"),
        region_bytes: Optional[int] = typer.Option(None, "--region-bytes", help="Region size"),
        gen0_bytes: Optional[int] = typer.Option(None, "--gen0-bytes", help="Gen 0 Eden cap"),
        tlab_bytes: Optional[int] = typer.Option(None, "--tlab-bytes", help="TLAB size"),
        promotion_age: Optional[int] = typer.Option(None, "--promotion-age", help="Survivor copies before promotion"),
        mixed_occupancy: Optional[float] = typer.Option(None, "--mixed-occupancy", help="Occupancy that makes a collection mixed"),
        live_threshold: Optional[float] = typer.Option(None, "--live-threshold", help="Max live fraction of a mixed-collected region"),
        alpha: Optional[float] = typer.Option(None, "--alpha", help="Pause cost per scanned rset entry"),
        seed: Optional[int] = typer.Option(None, "--seed", help="Override the workload's seed"),
        pretenure: Optional[Pretenure] = typer.Option(None, "--pretenure", help="Override pretenuring"),
        out: Optional[Path] = typer.Option(None, "--out", help="Output path prefix"),
        output_format: OutputFormat = typer.Option(OutputFormat.text, "--format", help="Report format"),
        no_save: bool = typer.Option(False, "--no-save", help="Do not record the run in the history database"),
        wall_clock: bool = typer.Option(not settings.deterministic, "--wall-clock", help="Measure real pause times")
    ):
        """Run a workload and write its GC log and report."""
        try:
            spec = _load_spec(spec_file, seed, pretenure)
            config = resolve_config(
                spec,
                heap_bytes=heap_bytes,
                region_bytes=region_bytes,
                gen0_max_bytes=gen0_bytes,
                tlab_bytes=tlab_bytes,
                promotion_age=promotion_age,
                mixed_trigger_occupancy=mixed_occupancy,
                region_live_threshold=live_threshold,
                pause_alpha=alpha,
            )
            gc_log, report = run_workload(spec, config, deterministic=not wall_clock)
        except SimulatorError as exc:
            raise fail(exc)

        prefix = out or _default_out(spec.label, spec.pretenure_enabled, spec.seed)
        log_path = gc_log.write(prefix.with_name(prefix.name + ".gclog.jsonl"))
        if output_format == OutputFormat.structured:
            rendered = report.to_json()
            report_path = prefix.with_name(prefix.name + ".report.json")
        else:
            rendered = render_metrics(report)
            report_path = prefix.with_name(prefix.name + ".report.txt")
        report_path.write_text(rendered, encoding="utf-8")

        if not no_save:
            RunStore().save_run(report, str(log_path))

        typer.echo(rendered)
        typer.echo(f"GC log: {log_path}")
        if not report.valid:
            err_console.print(f"[bold red]Run aborted:[/bold red] {escape(str(report.error))}", highlight=False, soft_wrap=True)
            raise typer.Exit(1)

    @app.command()
    def compare(
        log_a: Path = typer.Argument(..., help="Baseline GC log"),
        log_b: Path = typer.Argument(..., help="Candidate GC log"),
        output_format: OutputFormat = typer.Option(OutputFormat.text, "--format", help="Report format")
    ):
        """Compare two GC logs of the same workload (ratios B / A)."""
        try:
            report_a = MetricsReport.from_log(GcLog.read(log_a))
            report_b = MetricsReport.from_log(GcLog.read(log_b))
            table = compare_report(report_a, report_b)
        except SimulatorError as exc:
            raise fail(exc)

        if output_format == OutputFormat.structured:
            typer.echo(json.dumps(table.to_dict(), indent=2))
        else:
            typer.echo(render_comparison(table))

    @app.command()
    def profile(
        spec_file: Path = typer.Argument(..., help="Workload spec file (YAML)"),
        heap_bytes: Optional[int] = typer.Option(None, "--heap-bytes", help="Total heap size"),
        region_bytes: Optional[int] = typer.Option(None, "--region-bytes", help="Region size"),
        gen0_bytes: Optional[int] = typer.Option(None, "--gen0-bytes", help="Gen 0 Eden cap"),
        tlab_bytes: Optional[int] = typer.Option(None, "--tlab-bytes", help="TLAB size"),
        promotion_age: Optional[int] = typer.Option(None, "--promotion-age", help="Survivor copies before promotion"),
        mixed_occupancy: Optional[float] = typer.Option(None, "--mixed-occupancy", help="Occupancy that makes a collection mixed"),
        live_threshold: Optional[float] = typer.Option(None, "--live-threshold", help="Max live fraction of a mixed-collected region"),
        alpha: Optional[float] = typer.Option(None, "--alpha", help="Pause cost per scanned rset entry"),
        seed: Optional[int] = typer.Option(None, "--seed", help="Override the workload's seed"),
        pretenure: Pretenure = typer.Option(Pretenure.off, "--pretenure", help="Profile with or without pretenuring"),
        long_lived_epochs: int = typer.Option(settings.long_lived_epochs, "--long-lived-epochs", help="Minimum lifetime worth pretenuring"),
        cohort_tolerance: int = typer.Option(settings.cohort_tolerance, "--cohort-tolerance", help="Epochs of death spread within one cohort"),
        out: Optional[Path] = typer.Option(None, "--out", help="Write the recommendation to this file"),
        output_format: OutputFormat = typer.Option(OutputFormat.text, "--format", help="Report format")
    ):
        """Run a workload with the lifetime profiler and recommend pretenuring."""
        try:
            spec = _load_spec(spec_file, seed, pretenure)
            config = resolve_config(
                spec,
                heap_bytes=heap_bytes,
                region_bytes=region_bytes,
                gen0_max_bytes=gen0_bytes,
                tlab_bytes=tlab_bytes,
                promotion_age=promotion_age,
                mixed_trigger_occupancy=mixed_occupancy,
                region_live_threshold=live_threshold,
                pause_alpha=alpha,
            )
            profiler = LifetimeProfiler()
            run_workload(spec, config, profiler=profiler)
            recommendation = analyze(profiler, long_lived_epochs, cohort_tolerance)
        except SimulatorError as exc:
            raise fail(exc)

        if output_format == OutputFormat.structured:
            rendered = render_json(recommendation)
        else:
            rendered = render_text(recommendation)
        if out:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(rendered, encoding="utf-8")
        typer.echo(rendered)

    @app.command()
    def selftest(
        sweep: bool = typer.Option(False, "--sweep", help="Also sweep Gen 0 sizes on a buffer workload"),
        spec_file: Optional[Path] = typer.Option(None, "--spec", help="Workload for the sweep"),
        output_format: OutputFormat = typer.Option(OutputFormat.text, "--format", help="Report format")
    ):
        """Run the built-in invariant suite."""
        results = run_selftest()
        points = []
        if sweep:
            try:
                spec = load_workload(spec_file) if spec_file else parse_workload(SWEEP_SPEC)
                points = gen0_sweep(spec)
            except SimulatorError as exc:
                raise fail(exc)

        if output_format == OutputFormat.structured:
            data = {"checks": [result.to_dict() for result in results]}
            if sweep:
                data["sweep"] = [point.__dict__ for point in points]
            typer.echo(json.dumps(data, indent=2))
        else:
            table = Table(title="Self-test")
            table.add_column("Check", style="cyan")
            table.add_column("Trials", justify="right")
            table.add_column("Result")
            for result in results:
                table.add_row(
                    result.name,
                    str(result.trials),
                    "[green]pass[/green]" if result.passed else f"[red]{len(result.failures)} failures[/red]",
                )
            console.print(table)
            for result in results:
                for failure in result.failures[:5]:
                    err_console.print(f"{result.name}: {failure}", markup=False, highlight=False)
            if sweep:
                sweep_table = Table(title="Gen 0 size sweep (pause cost units, informational)")
                for column in ("Gen 0 bytes", "Baseline p100", "Pretenured p100", "Baseline copied",
                               "Pretenured copied", "Baseline GCs", "Pretenured GCs"):
                    sweep_table.add_column(column, justify="right")
                for point in points:
                    sweep_table.add_row(
                        f"{point.gen0_bytes:,}",
                        f"{point.baseline_p100:,.0f}",
                        f"{point.pretenured_p100:,.0f}",
                        f"{point.baseline_copied:,}",
                        f"{point.pretenured_copied:,}",
                        str(point.baseline_gcs),
                        str(point.pretenured_gcs),
                    )
                console.print(sweep_table)

        if not all(result.passed for result in results):
            raise typer.Exit(1)

    @app.command()
    def history(
        workload: Optional[str] = typer.Option(None, "--workload", help="Only runs of this workload"),
        limit: int = typer.Option(20, "--limit", help="Maximum rows"),
        show: Optional[int] = typer.Option(None, "--show", help="Print the full report of a saved run by ID"),
        delete: Optional[int] = typer.Option(None, "--delete", help="Delete a saved run by ID"),
        yes: bool = typer.Option(False, "--yes", "-y", help="Delete without asking")
    ):
        """List saved runs, or show or delete one of them."""
        store = RunStore()

        if show is not None:
            record = store.get_run(show)
            if record is None:
                err_console.print(f"[red]Run {show} not found.[/red]")
                raise typer.Exit(2)
            typer.echo(render_metrics(MetricsReport(**record.report)))
            typer.echo(f"GC log: {record.log_path or '-'}")
            typer.echo(f"Saved at: {record.saved_at:%Y-%m-%d %H:%M:%S}")
            return

        if delete is not None:
            record = store.get_run(delete)
            if record is None:
                err_console.print(f"[red]Run {delete} not found.[/red]")
                raise typer.Exit(2)
            if not yes and not Confirm.ask(f"Delete run {delete} of '{record.workload}'?", default=False):
                return
            store.delete_run(delete)
            console.print(f"[green]Deleted run {delete}[/green]")
            return

        runs = store.list_runs(workload=workload, limit=limit)
        if not runs:
            console.print("[yellow]No saved runs.[/yellow]")
            return

        table = Table(title="Saved runs")
        table.add_column("ID", justify="right")
        table.add_column("Workload", style="cyan")
        table.add_column("Mode")
        table.add_column("Seed", justify="right")
        table.add_column("GCs", justify="right")
        table.add_column("Copied", justify="right")
        table.add_column("p100 cost", justify="right")
        table.add_column("Max regions", justify="right")
        table.add_column("Saved at", style="dim")
        for entry in runs:
            table.add_row(
                str(entry["id"]),
                entry["workload"],
                "pretenure" if entry["pretenure_enabled"] else "baseline",
                str(entry["seed"]),
                str(entry["gc_count"]),
                f"{entry['bytes_copied']:,}",
                f"{entry['pause_p100']:,.0f}",
                str(entry["max_regions_in_use"]),
                str(entry["saved_at"]) + ("" if entry["valid"] else " (invalid)"),
            )
        console.print(table)

    return app
