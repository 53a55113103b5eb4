"""
Search Commands - Well-rounded sublattice search
"""

import logging

import click

from commands.common import finish_run, global_settings, make_runner, reports_errors, runner_options
from services.errors import EXIT_EMPTY, UsageFailure
from services.search_service import DEFAULT_MAX_ITERATIONS, SearchConfig, SearchMode, run_search
from storage import write_json

logger = logging.getLogger(__name__)


def parse_norms(text):
    """'16,18,20' -> (16, 18, 20); None keeps the full Hermite interval."""
    if text is None or not str(text).strip():
        return None
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(tok) for tok in str(text).split(","))
    except ValueError:
        raise UsageFailure(f"--norms expects comma-separated integers, got {text!r}") from None


@click.command("search")
@click.option("--n", "n", type=int, required=True, help="Dimension of Z^n.")
@click.option("--index", "index", type=int, required=True, help="Target sublattice index.")
@click.option("--mode", type=click.Choice([m.value for m in SearchMode]),
              default=SearchMode.PROBABILISTIC.value, show_default=True)
@click.option("--norms", default=None, help="Comma-separated candidate squared norms.")
@click.option("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS, show_default=True)
@click.option("--all-norms", is_flag=True, help="Keep trying smaller norms after the first hit.")
@runner_options
@click.pass_context
@reports_errors
def search_cmd(ctx, n, index, mode, norms, max_iterations, all_norms, workers, runner_kind):
    """
    Search WR sublattices of Z^n with a given index.

    Writes a JSON report; exits 2 when the budget runs out without a hit.
    """
    settings = global_settings(ctx)
    if index < 1:
        raise UsageFailure(f"--index must be positive, got {index}")
    config = SearchConfig(
        n=n,
        target_index=index,
        norm_candidates=parse_norms(norms),
        max_iterations=max_iterations,
        seed=settings["seed"],
        mode=mode,
        stop_at_first_norm=not all_norms,
    )
    hits = run_search(config, make_runner(workers, runner_kind))

    report = {
        "n": n,
        "index": index,
        "mode": config.mode.value,
        "seed": config.seed,
        "norm_candidates": list(config.norm_candidates),
        "max_iterations": config.max_iterations,
        "status": "ok" if hits else "budget_exhausted",
        "hits": [hit.to_dict() for hit in hits],
    }
    write_json(report, settings["out"])
    finish_run(ctx, {"hits": len(hits)})

    if not hits:
        click.echo("No well-rounded sublattice found within the iteration budget.", err=True)
        ctx.exit(EXIT_EMPTY)
