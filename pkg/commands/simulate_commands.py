"""
Simulate Commands - Monte Carlo ECDP curves and code comparisons
"""

import os

import click

from commands.common import finish_run, global_settings, make_runner, reports_errors, runner_options
from services.channel_service import DecoderMode, SimPlan, compare_codes, simulate_ecdp
from services.errors import UsageFailure
from services.runner_service import DEFAULT_BATCH_SIZE, derive_seed
from storage import STDOUT, safe_load_code, write_report

CURVE_COLUMNS = ("code", "label", "grid_index", "sigma", "snr_db", "trials", "successes", "ecdp",
                 "ci_lo", "ci_hi")
COMPARISON_COLUMNS = ("grid_index", "sigma", "code_a", "code_b", "ecdp_a", "ecdp_b", "verdict")


def comparison_path(out: str) -> str:
    if out == STDOUT:
        return STDOUT
    stem, ext = os.path.splitext(out)
    return f"{stem}.comparison{ext or '.csv'}"


def curve_rows(position, label, curve):
    return [
        {
            "code": position,
            "label": label,
            "grid_index": p.grid_index,
            "sigma": p.sigma,
            "snr_db": p.snr_db,
            "trials": p.trials,
            "successes": p.successes,
            "ecdp": p.ecdp,
            "ci_lo": p.ci_lo,
            "ci_hi": p.ci_hi,
        }
        for p in curve.points
    ]


@click.command("simulate")
@click.argument("descriptors", nargs=-1, required=True)
@click.option("--sigma", "sigmas", type=float, multiple=True, help="Eve's noise level; repeatable.")
@click.option("--snr-db", "snrs", type=float, multiple=True, help="SNR in dB; repeatable.")
@click.option("--trials", type=int, default=10_000, show_default=True, help="Trials per grid point.")
@click.option("--decoder", type=click.Choice([m.value for m in DecoderMode]),
              default=DecoderMode.AUTO.value, show_default=True)
@click.option("--batch-size", type=int, default=DEFAULT_BATCH_SIZE, show_default=True)
@click.option("--compare-out", default=None, help="Comparison CSV [default: <out>.comparison.csv].")
@runner_options
@click.pass_context
@reports_errors
def simulate_cmd(ctx, descriptors, sigmas, snrs, trials, decoder, batch_size, compare_out,
                 workers, runner_kind):
    """
    Simulate Eve's correct decision probability for one or more codes.

    With two or more codes every pair is compared point by point.
    """
    settings = global_settings(ctx)
    if bool(sigmas) == bool(snrs):
        raise UsageFailure("give exactly one of --sigma and --snr-db")
    if snrs and len(descriptors) > 1:
        raise UsageFailure("codes are compared on a shared --sigma grid; --snr-db takes a single code")

    loaded = [safe_load_code(path) for path in descriptors]
    plans = []
    for position, (path, (code, descriptor)) in enumerate(zip(descriptors, loaded)):
        seed = settings["seed"] if len(loaded) == 1 else derive_seed(settings["seed"], position)
        options = dict(master_seed=seed, decoder=decoder, batch_size=batch_size,
                       label=descriptor.get("label", path))
        if snrs:
            plans.append(SimPlan.from_snr_db(code, snrs, trials, **options))
        else:
            plans.append(SimPlan(code, tuple(sigmas), trials, **options))

    runner = make_runner(workers, runner_kind)
    if len(plans) > 1:
        curves, comparison = compare_codes(plans, runner)
    else:
        curves, comparison = [simulate_ecdp(plans[0], runner)], []

    rows = []
    for position, (plan, curve) in enumerate(zip(plans, curves)):
        rows.extend(curve_rows(position, plan.label, curve))
    write_report(rows, CURVE_COLUMNS, settings["out"], settings["format"])

    metadata = {"curves": [dict(curve.metadata(), label=plan.label) for plan, curve in zip(plans, curves)]}
    finish_run(ctx, metadata)

    if comparison:
        target = compare_out or comparison_path(settings["out"])
        table = [{c: getattr(row, c) for c in COMPARISON_COLUMNS} for row in comparison]
        write_report(table, COMPARISON_COLUMNS, target, settings["format"])
        if target != STDOUT:
            finish_run(ctx, {"compares": list(descriptors)}, out=target)
