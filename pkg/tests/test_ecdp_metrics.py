import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from services.coset_service import make_nested_pair, rotate_pair  # noqa: E402
from services.ecdp_service import (  # noqa: E402
    EcdpAnalyticParams, default_truncation_radius, ecdp_analytic, ecdp_curve, min_product_distance,
    term_bound_check,
)
from services.errors import RadiusTooSmall, UsageFailure  # noqa: E402
from services.lattice_service import Lattice  # noqa: E402
from storage import read_lattice  # noqa: E402


def diagonal(*entries):
    n = len(entries)
    return Lattice.from_rows([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])


@pytest.fixture
def pair_z2():
    return make_nested_pair(diagonal(1, 1), diagonal(2, 2))


@pytest.fixture
def planar_pair():
    return make_nested_pair(diagonal(1, 1), Lattice.from_rows([[3, 15], [15, 3]]))


# --- term-wise bound -------------------------------------------------------------

def test_term_bound_holds_on_random_points():
    rng = np.random.default_rng(2024)
    for _ in range(10000):
        n = int(rng.integers(1, 5))
        r = rng.normal(0, 10, size=n)
        sigma = float(rng.uniform(0.1, 20))
        lhs, rhs = term_bound_check(r, sigma)
        assert lhs <= rhs * (1 + 1e-12)


def test_term_bound_is_exact_in_one_dimension():
    lhs, rhs = term_bound_check([3.0], 2.0)
    assert lhs == pytest.approx(rhs)


def test_term_bound_at_origin():
    assert term_bound_check([0.0, 0.0], 1.0) == (1.0, 1.0)


# --- truncated series ------------------------------------------------------------------

def test_default_truncation_radius(pair_z2):
    assert default_truncation_radius(pair_z2, 1.0) == 25.0
    assert default_truncation_radius(pair_z2, 0.1) == 16.0


def test_series_value_is_positive_and_repeatable(planar_pair):
    params = EcdpAnalyticParams(20.0, planar_pair)
    first = ecdp_analytic(params)
    second = ecdp_analytic(params)
    assert first.value > 0
    assert first.value == second.value
    assert first.points >= 5
    assert first.radius_sq == pytest.approx(max(25 * 400, 4 * 234))


def test_origin_only_when_radius_below_lambda1(pair_z2):
    params = EcdpAnalyticParams(1.5, pair_z2, truncation_radius_sq=0.5)
    with pytest.raises(RadiusTooSmall):
        ecdp_analytic(params)
    result = ecdp_analytic(params, strict=False)
    assert result.points == 1
    assert result.value == pytest.approx(1.0 / (2 * 1.5) ** 2)


def test_last_shell_fraction_is_small_with_default_radius(pair_z2):
    result = ecdp_analytic(EcdpAnalyticParams(1.0, pair_z2))
    assert 0 <= result.last_shell_fraction < 0.01
    assert result.shells > 1


def test_large_truncation_barely_moves_the_value(pair_z2):
    base = ecdp_analytic(EcdpAnalyticParams(1.0, pair_z2)).value
    wider = ecdp_analytic(EcdpAnalyticParams(1.0, pair_z2, truncation_radius_sq=100.0)).value
    assert wider >= base
    assert wider == pytest.approx(base, rel=0.05)


def test_series_depends_on_orientation(pair_z2):
    c = math.cos(math.pi / 4)
    rotated = rotate_pair(pair_z2, [[c, -c], [c, c]])
    plain = ecdp_analytic(EcdpAnalyticParams(1.0, pair_z2, 36.0)).value
    turned = ecdp_analytic(EcdpAnalyticParams(1.0, rotated, 36.0)).value
    assert not math.isclose(plain, turned, rel_tol=1e-6)


def test_curve_has_one_result_per_sigma(planar_pair):
    curve = ecdp_curve(planar_pair, [5.0, 10.0, 20.0])
    assert [r.sigma_e for r in curve] == [5.0, 10.0, 20.0]


def test_params_need_positive_sigma(pair_z2):
    with pytest.raises(UsageFailure):
        EcdpAnalyticParams(0.0, pair_z2)
    with pytest.raises(UsageFailure):
        EcdpAnalyticParams(1.0, pair_z2, truncation_radius_sq=-1.0)


# --- product distance ---------------------------------------------------------------------

def test_min_product_distance_of_planar_lattice():
    assert min_product_distance(Lattice.from_rows([[3, 15], [15, 3]]), 234) == pytest.approx(45.0)


def test_min_product_distance_is_zero_for_axis_vectors():
    assert min_product_distance(diagonal(1, 1), 4) == 0.0


def test_min_product_distance_needs_a_nonzero_point():
    with pytest.raises(RadiusTooSmall):
        min_product_distance(Lattice.from_rows([[3, 15], [15, 3]]), 100)


# --- index-256 sublattices of Z^4 -------------------------------------------------

@pytest.fixture
def z4_pairs(data_path):
    base = read_lattice(data_path("z4.txt"))
    return [make_nested_pair(base, read_lattice(data_path(f"lambda{k}_z4.txt"))) for k in (1, 2, 3)]


def test_index_256_sublattices_are_ordered_at_sigma_2(z4_pairs):
    values = [ecdp_analytic(EcdpAnalyticParams(2.0, pair, 400.0)).value for pair in z4_pairs]
    assert values[0] > values[1] > values[2]
    assert values == pytest.approx([0.0194, 0.0087, 0.0062], abs=5e-4)


def test_first_shell_of_4z4():
    pair = make_nested_pair(diagonal(1, 1, 1, 1), diagonal(4, 4, 4, 4))
    result = ecdp_analytic(EcdpAnalyticParams(4.0, pair, 20.0))
    assert result.points == 9
    assert result.shells == 2
    assert result.value == pytest.approx((1 + 8 * 2 ** -1.5) / 8 ** 4)


@pytest.mark.parametrize("order, signs", [
    ((1, 0, 2, 3), (1, 1, 1, 1)),
    ((3, 2, 1, 0), (1, 1, 1, 1)),
    ((0, 1, 2, 3), (-1, 1, 1, -1)),
    ((2, 0, 3, 1), (1, -1, -1, 1)),
])
def test_series_is_invariant_under_coordinate_permutation_and_sign_flip(data_path, order, signs):
    base = read_lattice(data_path("z4.txt"))
    rows = read_lattice(data_path("lambda3_z4.txt")).integer_basis
    moved = [[signs[i] * v for v in rows[order[i]]] for i in range(4)]
    plain = ecdp_analytic(EcdpAnalyticParams(2.0, make_nested_pair(base, Lattice.from_rows(rows)), 400.0))
    changed = ecdp_analytic(EcdpAnalyticParams(2.0, make_nested_pair(base, Lattice.from_rows(moved)), 400.0))
    assert changed.points == plain.points
    assert changed.value == pytest.approx(plain.value, rel=1e-12)
