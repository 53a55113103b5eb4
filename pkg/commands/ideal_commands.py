"""
Ideal Commands - Scan real quadratic fields for WR principal ideals
"""

import click

from commands.common import finish_run, global_settings, make_runner, reports_errors, runner_options
from services.errors import EXIT_EXPECTATION_DIFF, UsageFailure
from services.ideal_service import (
    DEFAULT_BOX_SLACK, DEFAULT_UNIT_STEPS, incomplete_fields, is_squarefree, missing_reference_ideals,
    wr_principal_scan,
)
from storage import write_report

SCAN_COLUMNS = ("D", "Delta", "generator_p", "generator_q", "denom", "index", "lambda1_sq",
                "wr_class", "largenorm_ok")


def field_range(d_from: int, d_to: int, even_only: bool = False):
    """Square-free D in [d_from, d_to], optionally even ones only."""
    if d_from < 2 or d_to < d_from:
        raise UsageFailure(f"invalid D range [{d_from}, {d_to}]; D must be at least 2")
    values = [d for d in range(d_from, d_to + 1) if is_squarefree(d) and not (even_only and d % 2)]
    if not values:
        raise UsageFailure(f"no square-free D in [{d_from}, {d_to}]")
    return values


def scan_row(hit):
    p, q, denom = hit.generator.reduced()
    return {
        "D": hit.d,
        "Delta": hit.discriminant,
        "generator_p": p,
        "generator_q": q,
        "denom": denom,
        "index": hit.index,
        "lambda1_sq": hit.lambda1,
        "wr_class": hit.wr_class.value,
        "largenorm_ok": hit.largenorm_ok,
    }


@click.command("ideal-scan")
@click.option("--d-from", type=int, default=2, show_default=True)
@click.option("--d-to", type=int, default=100, show_default=True)
@click.option("--bound-factor", type=float, default=2.0, show_default=True,
              help="Index bound as a multiple of D.")
@click.option("--even-only", is_flag=True, help="Scan even D only.")
@click.option("--expect-table1", is_flag=True, help="Fail with a diff unless the reference ideals are found.")
@click.option("--unit-steps", type=int, default=DEFAULT_UNIT_STEPS, show_default=True)
@click.option("--slack", type=float, default=DEFAULT_BOX_SLACK, show_default=True)
@runner_options
@click.pass_context
@reports_errors
def ideal_scan_cmd(ctx, d_from, d_to, bound_factor, even_only, expect_table1, unit_steps, slack,
                   workers, runner_kind):
    """Write a CSV of the WR principal ideals of index <= bound-factor·D."""
    settings = global_settings(ctx)
    if bound_factor <= 0:
        raise UsageFailure("--bound-factor must be positive")
    if unit_steps < 0:
        raise UsageFailure("--unit-steps must not be negative")
    d_values = field_range(d_from, d_to, even_only)
    hits = wr_principal_scan(d_values, bound_factor, unit_steps, slack, make_runner(workers, runner_kind))

    write_report([scan_row(h) for h in hits], SCAN_COLUMNS, settings["out"], settings["format"])
    missing = missing_reference_ideals(hits, d_values) if expect_table1 else []
    incomplete = incomplete_fields(d_values, bound_factor, slack)
    if incomplete:
        click.echo(f"Generator search clamped, results may be incomplete for D in {incomplete}", err=True)
    finish_run(ctx, {"fields": len(d_values), "hits": len(hits), "missing_expected": missing,
                     "incomplete_fields": incomplete})

    if missing:
        click.echo("Expected WR principal ideals not found:", err=True)
        for line in missing:
            click.echo(line, err=True)
        ctx.exit(EXIT_EXPECTATION_DIFF)
