"""
Analyze Commands - Lattice invariants and analytic ECDP figures
"""

import os

import click

from commands.common import finish_run, global_settings, reports_errors
from services.coset_service import make_nested_pair
from services.ecdp_service import EcdpAnalyticParams, ecdp_analytic, min_product_distance
from services.errors import UsageFailure
from services.ideal_service import normalized_lambda1
from services.lattice_service import (
    HERMITE_POWERS, Lattice, classify_wr, hermite_bound_holds, shortest_vectors,
)
from storage import load_descriptor, pair_from_descriptor, read_lattice, write_report

ANALYZE_COLUMNS = ("file", "n", "lambda1_sq", "wr_class", "kissing", "index", "hermite_lower",
                   "hermite_upper", "hermite_ok", "min_product_distance", "sigma", "ecdp_analytic",
                   "last_shell_fraction")


def load_subject(path, sup_path=None):
    """
    (lattice, pair) for a lattice file or a code descriptor. The pair is
    None when no base lattice is known.
    """
    if path.endswith(".json"):
        pair = pair_from_descriptor(load_descriptor(path), os.path.dirname(os.path.abspath(path)))
        return pair.lattice_e, pair
    lattice = read_lattice(path)
    if sup_path:
        return lattice, make_nested_pair(read_lattice(sup_path), lattice)
    if lattice.is_integral:
        identity = [[int(i == j) for j in range(lattice.n)] for i in range(lattice.n)]
        return lattice, make_nested_pair(Lattice.from_rows(identity), lattice)
    return lattice, None


def analyze_lattice(path, sup_path=None, sigmas=(), normalize_vol=None, radius=None, truncation=None):
    """One metrics row per sigma (a single row without sigmas)."""
    lattice, pair = load_subject(path, sup_path)
    report = shortest_vectors(lattice)
    wr = classify_wr(lattice)
    lam = normalized_lambda1(lattice, normalize_vol) if normalize_vol else report.lambda1

    lower = upper = ok = None
    if lattice.n in HERMITE_POWERS:
        lower, _, upper, ok = hermite_bound_holds(lattice)

    base = {
        "file": path,
        "n": lattice.n,
        "lambda1_sq": lam,
        "wr_class": wr.kind.value,
        "kissing": report.count_with_signs,
        "index": pair.index if pair is not None else None,
        "hermite_lower": lower,
        "hermite_upper": upper,
        "hermite_ok": ok,
        "min_product_distance": min_product_distance(lattice, radius or 4 * float(report.lambda1)),
        "sigma": None,
        "ecdp_analytic": None,
        "last_shell_fraction": None,
    }
    if not sigmas:
        return [base]
    if pair is None:
        raise UsageFailure(f"{path}: analytic ECDP needs a base lattice, pass --sup")

    rows = []
    for sigma in sigmas:
        result = ecdp_analytic(EcdpAnalyticParams(sigma, pair, truncation))
        rows.append(dict(base, sigma=sigma, ecdp_analytic=result.value,
                         last_shell_fraction=result.last_shell_fraction))
    return rows


@click.command("analyze")
@click.argument("files", nargs=-1, required=True)
@click.option("--sup", "sup_path", default=None, help="Base lattice file for lattice-file inputs.")
@click.option("--sigma", "sigmas", type=float, multiple=True, help="Eve's noise level; repeatable.")
@click.option("--normalize-vol", type=float, default=None, help="Report lambda1 at this covolume.")
@click.option("--radius", type=float, default=None,
              help="Squared radius for the product distance [default: 4·lambda1].")
@click.option("--truncation-radius", type=float, default=None,
              help="Squared truncation radius of the ECDP series.")
@click.pass_context
@reports_errors
def analyze_cmd(ctx, files, sup_path, sigmas, normalize_vol, radius, truncation_radius):
    """Report lambda1, WR class, index, Hermite interval, ECDP and product distance."""
    settings = global_settings(ctx)
    if normalize_vol is not None and normalize_vol <= 0:
        raise UsageFailure("--normalize-vol must be positive")
    rows = []
    for path in files:
        rows.extend(analyze_lattice(path, sup_path, sigmas, normalize_vol, radius, truncation_radius))
    write_report(rows, ANALYZE_COLUMNS, settings["out"], settings["format"])
    finish_run(ctx, {"lattices": len(files)})
