"""
Common helpers shared by the command modules
"""

import functools
from typing import Dict, Optional

import click

from services.errors import LatticeToolError, UsageFailure
from services.runner_service import RunnerKind, TrialRunner
from storage import write_sidecar

RUNNER_CHOICES = [kind.value for kind in RunnerKind]


def reports_errors(func):
    """Turn a service failure into 'Error: ...' on stderr and its exit code."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except LatticeToolError as exc:
            click.echo(f"Error: {exc}", err=True)
            click.get_current_context().exit(exc.exit_code)
    return wrapper


def runner_options(func):
    func = click.option("--runner", "runner_kind", type=click.Choice(RUNNER_CHOICES),
                        default=RunnerKind.PROCESS.value, show_default=True,
                        help="Executor used when --workers > 1.")(func)
    func = click.option("--workers", type=int, default=1, show_default=True,
                        help="Number of parallel workers.")(func)
    return func


def make_runner(workers: int, runner_kind: str) -> Optional[TrialRunner]:
    if workers < 1:
        raise UsageFailure(f"--workers must be at least 1, got {workers}")
    if workers == 1:
        return None
    return TrialRunner(workers, runner_kind)


def global_settings(ctx: click.Context) -> Dict:
    return ctx.find_root().obj


def finish_run(ctx: click.Context, metadata: Optional[Dict] = None, out: Optional[str] = None) -> None:
    """Write the metadata sidecar of the current command's output."""
    settings = global_settings(ctx)
    write_sidecar(
        out or settings["out"],
        ctx.info_name,
        dict(ctx.params),
        {"seed": settings["seed"], "fmt": settings["format"]},
        metadata,
        settings["config"],
    )
